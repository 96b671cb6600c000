"""Backaction of a bosonic meter coupled to the Dirac oscillator.

The meter enters through H_meas = omega_b b^dag b + (g b^dag b + f sigma_z) x.
Because b^dag b commutes with everything, the joint dynamics splits into
photon-number sectors: within sector n_b the system evolves under

    H_sector = H_base + (g n_b) x + f sigma_z x,

and meter observables never enter system expectation values beyond the
conserved scalar g n_b.  A run is therefore a weighted classical mixture of
sector evolutions, with weights given by the meter's photon-number
distribution.  The dimensionless measurement strength is G = g <b^dag b>
in model units (sqrt(2) g <b^dag b> x_zpt / hbar omega generally).

Closed-form oracles: in the non-relativistic limit the balanced state
|Psi_n> = (|n,up> + |n-1,down>)/sqrt(2) has

    <X(t)>  = -(2f) sin^2(t/2)            (meter-independent),
    DeltaX  = x_zpt sqrt(2n + 8 G^2 sin^4(t/2)),

while the relativistic spin-flip coupling adds a fast modulation of the
measured force, f -> f + sqrt(2 n eps) G sin(2 E_n^+ t), whose amplitude
is the smearing Delta = sqrt(2 n eps) G extracted by `estimate_smearing`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import ConfigError, NumericalError, TruncationError
from .hilbert import (
    BasisSpec,
    ModelUnits,
    SPIN_DOWN,
    SPIN_UP,
    SpectralPropagator,
    basis_state,
    build_quadratures,
    build_spin,
)
from .oscillator import DiracParams, analytic_energy, build_H_DO, build_H_nr

HAMILTONIANS = ("full_DO", "nonrelativistic")

X_UNIT = math.sqrt(2.0) * ModelUnits(1.0).x_zpt  # sqrt(2) x_zpt, = 1 in model units


# ---------------------------------------------------------------------------
# Composite observables
# ---------------------------------------------------------------------------

def composite_position(basis: BasisSpec) -> np.ndarray:
    """X = x (x) I, the collective position."""
    x, _ = build_quadratures(basis)
    return x


def relative_momentum(basis: BasisSpec) -> np.ndarray:
    """Pi = p sigma_z, the relative momentum; [X, Pi] = i sigma_z."""
    _, p = build_quadratures(basis)
    return p @ build_spin(basis, "z")


def spin_position(basis: BasisSpec) -> np.ndarray:
    """Phi = x sigma_z; Phi^2 = X^2 as an exact operator identity."""
    x, _ = build_quadratures(basis)
    return x @ build_spin(basis, "z")


def total_momentum(basis: BasisSpec) -> np.ndarray:
    """P = p (x) I; P^2 = Pi^2 as an exact operator identity."""
    _, p = build_quadratures(basis)
    return p


def balanced_superposition(basis: BasisSpec, n: int) -> np.ndarray:
    """|Psi_n> = (|n,up> + |n-1,down>)/sqrt(2), the <sigma_z> = 0 probe state."""
    if n < 1:
        raise ConfigError(f"balanced superposition needs n >= 1, got {n}")
    if n >= basis.fock_cutoff:
        raise ConfigError(f"n = {n} exceeds fock_cutoff - 1 = {basis.fock_cutoff - 1}")
    return (basis_state(basis, n, SPIN_UP) + basis_state(basis, n - 1, SPIN_DOWN)) / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeasurementConfig:
    """One backaction experiment.

    f is expressed in units of hbar*omega/(sqrt(2) x_zpt) (numerically equal
    to model units); positions are reported in units of sqrt(2) x_zpt.
    The meter is a diagonal photon-number distribution ((n_b, weight), ...);
    any coherences are irrelevant to system observables since b^dag b is
    conserved.  omega_b only adds a per-sector global phase.
    """

    epsilon: float
    n: int
    G: float
    f: float
    times: np.ndarray
    basis: BasisSpec
    apparatus: tuple[tuple[int, float], ...] = ((1, 1.0),)
    omega_b: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ConfigError(f"epsilon must be finite and > 0, got {self.epsilon!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ConfigError(f"initial level n must be an integer >= 1, got {self.n!r}")
        if not (math.isfinite(self.G) and self.G >= 0):
            raise ConfigError(f"measurement strength G must be finite and >= 0, got {self.G!r}")
        if not math.isfinite(self.f):
            raise ConfigError(f"perturbation f must be finite, got {self.f!r}")
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 1 or not np.all(np.isfinite(times)):
            raise ConfigError("times must be a non-empty 1-d array of finite values")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ConfigError("times must be strictly ascending")
        object.__setattr__(self, "times", times)
        apparatus = tuple((int(nb), float(w)) for nb, w in self.apparatus)
        if not apparatus:
            raise ConfigError("apparatus distribution must not be empty")
        if any(nb < 0 or w < 0 for nb, w in apparatus):
            raise ConfigError("apparatus entries must have n_b >= 0 and weight >= 0")
        total = sum(w for _, w in apparatus)
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"apparatus weights must sum to 1 within 1e-12, got {total!r}")
        object.__setattr__(self, "apparatus", apparatus)
        if self.G > 0 and self.mean_photon_number == 0:
            raise ConfigError("G > 0 requires a meter with nonzero mean photon number")
        # the probe state itself needs n <= N-1; leave headroom for the gate
        balanced_superposition(self.basis, self.n)

    @property
    def mean_photon_number(self) -> float:
        return sum(nb * w for nb, w in self.apparatus)

    @property
    def bare_coupling(self) -> float:
        """g such that g <b^dag b> = G (zero when G = 0)."""
        if self.G == 0:
            return 0.0
        return self.G / self.mean_photon_number


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Weighted-sector time series of the composite observables (model units)."""

    times: np.ndarray
    exp_x: np.ndarray
    var_x: np.ndarray
    exp_sigma_z: np.ndarray
    exp_pi: np.ndarray
    var_pi: np.ndarray
    leakage: np.ndarray

    @property
    def exp_x_dimensionless(self) -> np.ndarray:
        """<X> in units of sqrt(2) x_zpt (the standard reporting convention)."""
        return self.exp_x / X_UNIT


def build_H_sector(
    epsilon: float,
    g_times_nb: float,
    f: float,
    basis: BasisSpec,
    hamiltonian: str = "full_DO",
) -> np.ndarray:
    """System Hamiltonian within one conserved photon-number sector.

    H = H_base + (g n_b) x + f sigma_z x.  The omega_b n_b term is a global
    phase per sector and is dropped.
    """
    if hamiltonian not in HAMILTONIANS:
        raise ConfigError(f"hamiltonian must be one of {HAMILTONIANS}, got {hamiltonian!r}")
    params = DiracParams(epsilon=epsilon, basis=basis)
    base = build_H_DO(params) if hamiltonian == "full_DO" else build_H_nr(params)
    x, _ = build_quadratures(basis)
    return base + g_times_nb * x + f * (build_spin(basis, "z") @ x)


def _leakage_projector(basis: BasisSpec, top_fraction: float) -> np.ndarray:
    n_top = math.ceil(top_fraction * basis.fock_cutoff)
    diag = np.zeros(basis.total_dim)
    diag[2 * (basis.fock_cutoff - n_top):] = 1.0
    return np.diag(diag).astype(complex)


def _real_series(values: np.ndarray, name: str) -> np.ndarray:
    worst = float(np.max(np.abs(values.imag))) if values.size else 0.0
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    if worst > tol.EXPECTATION_IMAG * scale:
        raise NumericalError(f"<{name}> developed imaginary part {worst:.3e}")
    return values.real.copy()


def run_backaction(
    cfg: MeasurementConfig,
    hamiltonian: str = "full_DO",
    leakage_gate: float = tol.LEAKAGE_GATE,
    top_fraction: float = tol.LEAKAGE_TOP_FRACTION,
) -> Trajectory:
    """Evolve |Psi_n> in every meter sector and mix the observables.

    Sector evolutions are independent; observables combine as the classical
    mixture <A>(t) = sum_i w_i <A>_i(t) and likewise for <A^2>.  Every
    sampled point is checked against the truncation-leakage gate and the
    uncertainty bound DeltaX DeltaPi >= |<sigma_z>|/2.
    """
    basis = cfg.basis
    x = composite_position(basis)
    pi = relative_momentum(basis)
    operators = {
        "x": x,
        "x2": x @ x,
        "sigma_z": build_spin(basis, "z"),
        "pi": pi,
        "pi2": pi @ pi,
        "leak": _leakage_projector(basis, top_fraction),
    }
    psi0 = balanced_superposition(basis, cfg.n)
    g = cfg.bare_coupling

    accum = {name: np.zeros(cfg.times.size, dtype=complex) for name in operators}
    for n_b, weight in cfg.apparatus:
        if weight == 0.0:
            continue
        H = build_H_sector(cfg.epsilon, g * n_b, cfg.f, basis, hamiltonian)
        sector = SpectralPropagator(H).expectations(psi0, cfg.times, operators)
        for name in operators:
            accum[name] += weight * sector[name]

    exp_x = _real_series(accum["x"], "X")
    exp_x2 = _real_series(accum["x2"], "X^2")
    exp_sigma_z = _real_series(accum["sigma_z"], "sigma_z")
    exp_pi = _real_series(accum["pi"], "Pi")
    exp_pi2 = _real_series(accum["pi2"], "Pi^2")
    leak = _real_series(accum["leak"], "leakage")

    var_x = exp_x2 - exp_x**2
    var_pi = exp_pi2 - exp_pi**2
    for name, var, scale in (("X", var_x, exp_x2), ("Pi", var_pi, exp_pi2)):
        floor = -tol.NORM_DRIFT * np.maximum(1.0, np.abs(scale))
        if np.any(var < floor):
            raise NumericalError(f"variance of {name} went negative beyond tolerance")
    var_x = np.maximum(var_x, 0.0)
    var_pi = np.maximum(var_pi, 0.0)

    worst_leak = float(leak.max()) if leak.size else 0.0
    if worst_leak > leakage_gate:
        raise TruncationError(
            f"truncation leakage {worst_leak:.3e} exceeds gate {leakage_gate:.1e}; "
            f"raise cutoff above N = {basis.fock_cutoff}"
        )

    # Robertson bound for [X, Pi] = i sigma_z; failure means broken numerics.
    bound = 0.5 * np.abs(exp_sigma_z) - np.sqrt(var_x * var_pi)
    if np.any(bound > 1e-10 * np.maximum(1.0, np.abs(exp_sigma_z))):
        raise NumericalError("uncertainty product fell below |<sigma_z>|/2")

    return Trajectory(
        times=cfg.times,
        exp_x=exp_x,
        var_x=var_x,
        exp_sigma_z=exp_sigma_z,
        exp_pi=exp_pi,
        var_pi=var_pi,
        leakage=leak,
    )


# ---------------------------------------------------------------------------
# Closed-form oracles
# ---------------------------------------------------------------------------

def analytic_X_nr(t, f: float):
    """Non-relativistic mean position -(2f) sin^2(t/2), meter-independent."""
    t = np.asarray(t, dtype=float)
    return -2.0 * f * np.sin(t / 2.0) ** 2


def analytic_DeltaX_nr(t, n: int, G: float):
    """Position spread x_zpt sqrt(2n + 8 G^2 sin^4(t/2)).

    Exact for a sharp meter photon number (the default apparatus); the
    G-dependent term is the backaction contribution.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    t = np.asarray(t, dtype=float)
    x_zpt = ModelUnits(1.0).x_zpt
    return x_zpt * np.sqrt(2.0 * n + 8.0 * G**2 * np.sin(t / 2.0) ** 4)


def analytic_X_corrected(t, f: float, n: int, epsilon: float, G: float):
    """Small-epsilon mean position with the fast spin-flip modulation.

    -(2/m omega^2) [f + sqrt(2 n eps) G sin(2 t / eps)] sin^2(t/2); valid for
    epsilon << 1 where the fast frequency is close to 2/eps.
    """
    t = np.asarray(t, dtype=float)
    delta = math.sqrt(2.0 * n * epsilon) * G
    return -2.0 * (f + delta * np.sin(2.0 * t / epsilon)) * np.sin(t / 2.0) ** 2


def analytic_sigma_z(t, n: int, epsilon: float):
    """Exact two-level result sqrt(2 n eps / (1 + 2 n eps)) sin(2 E_n^+ t).

    |Psi_n> lives in span{|E_n^+>, |E_{n-1}^->}, two levels split by 2 E_n^+,
    so this is exact (not perturbative) whenever the meter is off.  The sine
    (not cosine) form is forced by <sigma_z(0)> = 0.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    t = np.asarray(t, dtype=float)
    amplitude = math.sqrt(2.0 * n * epsilon / (1.0 + 2.0 * n * epsilon))
    return amplitude * np.sin(2.0 * analytic_energy(n, "+", epsilon) * t)


def qmfs_reference(t, f: float, G: float, n: int = 1):
    """Two-oscillator reference where backaction is exactly absent.

    For opposite-mass oscillators the pair {X, Pi} commutes, so any G leaves
    both the mean and the spread untouched: <X(t)> equals the
    non-relativistic closed form and DeltaX stays at its initial value.
    """
    t = np.asarray(t, dtype=float)
    del G  # backaction-free by construction
    x_zpt = ModelUnits(1.0).x_zpt
    return analytic_X_nr(t, f), np.full_like(t, x_zpt * math.sqrt(2.0 * n))


# ---------------------------------------------------------------------------
# Smearing extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmearingEstimate:
    """Two-frequency template fit of a trajectory's dimensionless position."""

    delta_fitted: float
    delta_analytic: float
    zb_frequency_fitted: float
    zb_frequency_exact: float
    residual: float
    regime_flag: bool


def _template_fit(t: np.ndarray, x: np.ndarray, omega_fast: float):
    """Least squares on the two-frequency template.

    Slow part: both quadratures at the trap frequency plus a constant (a
    demodulation at omega; the closed-form -2f sin^2(t/2) is DC + cos, and
    the sin quadrature absorbs the relativistic slow-frequency pull).  Fast
    part: both quadratures at omega_fast riding the sin^2(t/2) envelope.
    Returns (coefficients, misfit); coefficients order
    (dc, cos, sin, fast_sin, fast_cos).
    """
    envelope = np.sin(t / 2.0) ** 2
    design = np.column_stack(
        [
            np.ones_like(t),
            np.cos(t),
            np.sin(t),
            np.sin(omega_fast * t) * envelope,
            np.cos(omega_fast * t) * envelope,
        ]
    )
    coef, _, _, _ = np.linalg.lstsq(design, x, rcond=None)
    misfit = float(np.linalg.norm(x - design @ coef))
    return coef, misfit


def _golden_refine(fun, lo: float, hi: float, iters: int = 60) -> float:
    """Golden-section minimum of a smooth scalar function on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fun(d)
    return (a + b) / 2.0


def estimate_smearing(traj: Trajectory, cfg: MeasurementConfig) -> SmearingEstimate:
    """Fit the fast force modulation and report the smearing amplitude.

    The slow component oscillates at the bare trap frequency; the fast one
    rides on the same sin^2(t/2) envelope, so a plain periodogram would see
    a non-stationary line.  A linear two-frequency template (fit at a scanned
    fast frequency, then golden-section refined) separates the two; the fast
    amplitude divided by the envelope gain 2 is the smearing.  A large
    relative misfit flags the anharmonic/aperiodic regime where the template
    (and the smearing picture) breaks down.
    """
    t = traj.times
    x = traj.exp_x_dimensionless
    if t.size < 16:
        raise ConfigError("trajectory too short for a two-frequency fit (need >= 16 samples)")
    spacing = float(np.median(np.diff(t)))
    nyquist = math.pi * cfg.epsilon / 4.0
    if spacing >= nyquist:
        raise ConfigError(
            f"trajectory undersampled: median spacing {spacing:.3e} >= pi*eps/4 = {nyquist:.3e}"
        )

    naive = ModelUnits(cfg.epsilon).zitterbewegung_frequency  # 2 m c^2 / hbar
    exact = 2.0 * analytic_energy(cfg.n, "+", cfg.epsilon)
    span = float(t[-1] - t[0])
    resolution = 2.0 * math.pi / span
    half_width = max(8.0 * cfg.n, 20.0 * resolution)
    step = 0.25 * resolution
    candidates = np.arange(naive - half_width, naive + half_width + step, step)
    candidates = candidates[candidates > 0]

    def misfit_at(omega: float) -> float:
        return _template_fit(t, x, omega)[1]

    scan = np.array([misfit_at(w) for w in candidates])
    best = int(np.argmin(scan))
    lo = candidates[max(best - 1, 0)]
    hi = candidates[min(best + 1, candidates.size - 1)]
    omega_fit = _golden_refine(misfit_at, lo, hi)

    coef, misfit = _template_fit(t, x, omega_fit)
    signal = float(np.linalg.norm(x))
    residual = misfit / signal if signal > 0 else 0.0
    # The fitted envelope-peak amplitude of the fast line is the smearing
    # itself: first-order response to the spin-flip oscillation gives
    # x(t) = Delta sin(W t) sin^2(t/2) with Delta = sqrt(2 n eps) G.
    delta_fitted = float(np.hypot(coef[3], coef[4]))
    delta_analytic = math.sqrt(2.0 * cfg.n * cfg.epsilon) * cfg.G
    return SmearingEstimate(
        delta_fitted=delta_fitted,
        delta_analytic=delta_analytic,
        zb_frequency_fitted=float(omega_fit),
        zb_frequency_exact=exact,
        residual=float(residual),
        regime_flag=bool(residual > tol.FIT_RESIDUAL_FLAG),
    )


# ---------------------------------------------------------------------------
# Time grids
# ---------------------------------------------------------------------------

def uniform_times(t_max: float, samples: int) -> np.ndarray:
    if samples < 2 or t_max <= 0:
        raise ConfigError("uniform grid needs t_max > 0 and samples >= 2")
    return np.linspace(0.0, t_max, samples)


def fast_period(epsilon: float, n: int = 1) -> float:
    """Spin-flip oscillation period 2 pi / (2 E_n^+), about pi*eps for small eps."""
    return math.pi / analytic_energy(n, "+", epsilon)


def zitter_times(epsilon: float, t_max: float, points_per_fast_period: int = 16, n: int = 1) -> np.ndarray:
    """Uniform grid resolving the fast oscillation everywhere."""
    if points_per_fast_period < 4:
        raise ConfigError("need at least 4 points per fast period")
    dt = fast_period(epsilon, n) / points_per_fast_period
    return np.arange(0.0, t_max + dt / 2.0, dt)


def window_times(
    epsilon: float,
    t_max: float,
    n: int = 1,
    windows: int = 48,
    periods_per_window: int = 3,
    points_per_fast_period: int = 16,
) -> np.ndarray:
    """Stratified grid: short fast-resolving windows spread over the slow period.

    Least squares does not need uniform coverage; sampling a few fast periods
    at many slow phases keeps the sample count flat as epsilon shrinks.
    Falls back to the dense uniform grid when windows would overlap.
    """
    period = fast_period(epsilon, n)
    dt = period / points_per_fast_period
    length = periods_per_window * period
    if windows < 2 or length * windows >= t_max:
        return zitter_times(epsilon, t_max, points_per_fast_period, n)
    starts = np.linspace(0.0, t_max - length, windows)
    block = np.arange(periods_per_window * points_per_fast_period) * dt
    return (starts[:, None] + block[None, :]).ravel()
