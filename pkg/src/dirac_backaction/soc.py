"""Raman-coupled condensate as a table-top Dirac oscillator.

With a spatially linear Raman phase, the rotated single-particle Hamiltonian
of a spin-orbit-coupled condensate reads (SI units)

    H = hbar^2 k_r^2 / 2 m_a                     (constant energy offset)
      + (hbar^2 k_r / m_a) k sigma_x             (recoil velocity * momentum)
      - hbar varsigma x sigma_y                  (phase-gradient "trap")
      + hbar chi sigma_z                         (Raman gap = rest energy)
      [+ hbar^2 k^2 / 2 m_a],                    (kinetic term, small for k << k_r)

which, apart from the bracketed kinetic term, is the Dirac-oscillator
Hamiltonian with effective light speed hbar k_r / m_a and rest energy
hbar chi.  This module computes the effective parameters, discretizes the
two-component Hamiltonian on a position grid with spectral (Fourier)
momentum, and quantifies how far the analog deviates once the neglected
kinetic term is switched back on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PhysicsGateError
from .hilbert import SIGMA_X, SIGMA_Y, SIGMA_Z, require_hermitian
from .oscillator import analytic_energy

HBAR = 1.054571817e-34  # J s (CODATA 2018)


@dataclass(frozen=True)
class SOCParams:
    """Laboratory knobs: recoil wavenumber, Raman coupling, phase gradient.

    k_r in 1/m, chi (imaginary part of the Rabi coupling) in rad/s,
    sigma_slope (Rabi phase gradient rate) in rad/(s m), m_a in kg,
    delta (two-photon detuning) in rad/s.
    """

    k_r: float
    chi: float
    sigma_slope: float
    m_a: float
    delta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.k_r) and self.k_r > 0):
            raise ConfigError(f"k_r must be finite and > 0, got {self.k_r!r}")
        if not (math.isfinite(self.chi) and self.chi > 0):
            raise ConfigError(f"chi must be finite and > 0 (the effective rest mass vanishes otherwise), got {self.chi!r}")
        if not (math.isfinite(self.sigma_slope) and self.sigma_slope >= 0):
            raise ConfigError(f"sigma_slope must be finite and >= 0, got {self.sigma_slope!r}")
        if not (math.isfinite(self.m_a) and self.m_a > 0):
            raise ConfigError(f"m_a must be finite and > 0, got {self.m_a!r}")
        if not math.isfinite(self.delta):
            raise ConfigError(f"delta must be finite, got {self.delta!r}")


@dataclass(frozen=True)
class EffectiveParams:
    """Dirac-oscillator quantities realized by the condensate (SI units)."""

    c_eff: float            # m/s, effective light speed hbar k_r / m_a
    m_eff: float            # kg, effective rest mass chi m_a^2 / (hbar k_r^2)
    compton_eff: float      # m, reduced Compton wavelength hbar / (m_eff c_eff)
    zb_frequency_eff: float  # rad/s, 2 chi
    omega_eff: float        # rad/s, hbar k_r sigma_slope / (m_a chi)
    epsilon_eff: float      # dimensionless, hbar k_r sigma_slope / (m_a chi^2)

    @property
    def rest_energy_eff(self) -> float:
        """m_eff c_eff^2 = hbar chi, in joules."""
        return self.m_eff * self.c_eff**2

    @property
    def epsilon_consistency(self) -> float:
        """epsilon recomputed as hbar omega / (m c^2); identical by construction."""
        return HBAR * self.omega_eff / self.rest_energy_eff

    def as_dict(self) -> dict:
        return {
            "c_eff_m_per_s": self.c_eff,
            "m_eff_kg": self.m_eff,
            "compton_eff_m": self.compton_eff,
            "zb_frequency_eff_rad_per_s": self.zb_frequency_eff,
            "omega_eff_rad_per_s": self.omega_eff,
            "epsilon_eff": self.epsilon_eff,
        }


# Order-of-magnitude scales for the other platforms that realize the same
# Hamiltonian, for report footers (frequencies quoted in units of 2*pi Hz).
REFERENCE_SCALES = {
    "electron": {
        "light_speed_m_per_s": 1e8,
        "rest_mass_kg": 1e-31,
        "compton_wavelength_m": 1e-12,
        "zitterbewegung_frequency_2pi_hz": 1e21,
    },
    "soc_condensate": {
        "light_speed_m_per_s": 1e-2,
        "rest_mass_kg": 1e-27,
        "compton_wavelength_m": 1e-5,
        "zitterbewegung_frequency_2pi_hz": 1e3,
        "oscillator_frequency_2pi_hz": [0.0, 1e4],
        "relativistic_parameter": [0.0, 10.0],
    },
    "circuit_qed": {
        "light_speed_m_per_s": 10.0,
        "rest_mass_kg": 1e-26,
        "compton_wavelength_m": 1e-9,
        "zitterbewegung_frequency_2pi_hz": 1e10,
        "oscillator_frequency_2pi_hz": 1e10,
        "relativistic_parameter": 1.0,
    },
    "trapped_ion": {
        "light_speed_m_per_s": 1e-3,
        "rest_mass_kg": 1e-23,
        "compton_wavelength_m": 1e-8,
        "zitterbewegung_frequency_2pi_hz": 1e5,
        "oscillator_frequency_2pi_hz": 1e6,
        "relativistic_parameter": 10.0,
    },
}


def map_parameters(p: SOCParams) -> EffectiveParams:
    """Laboratory parameters -> effective Dirac-oscillator quantities.

    Valid only at zero two-photon detuning; the rotated-Hamiltonian
    correspondence is derived for delta = 0.
    """
    if p.delta != 0.0:
        raise ConfigError("the parameter mapping requires zero two-photon detuning (delta = 0)")
    c_eff = HBAR * p.k_r / p.m_a
    m_eff = p.chi * p.m_a**2 / (HBAR * p.k_r**2)
    return EffectiveParams(
        c_eff=c_eff,
        m_eff=m_eff,
        compton_eff=HBAR / (m_eff * c_eff),
        zb_frequency_eff=2.0 * p.chi,
        omega_eff=HBAR * p.k_r * p.sigma_slope / (p.m_a * p.chi),
        epsilon_eff=HBAR * p.k_r * p.sigma_slope / (p.m_a * p.chi**2),
    )


# ---------------------------------------------------------------------------
# Position-grid discretization with spectral momentum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic position grid; the endpoint x_max is excluded."""

    x_min: float
    x_max: float
    points: int

    def __post_init__(self):
        if self.points < 256:
            raise ConfigError(f"grid needs at least 256 points, got {self.points}")
        if not self.x_max > self.x_min:
            raise ConfigError("grid needs x_max > x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.points

    @property
    def positions(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.points)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.points, d=self.dx)


def default_grid(eff: EffectiveParams, n_levels: int = 10, points: int = 1024) -> SpatialGrid:
    """Box wide enough for the lowest n_levels oscillator-scale eigenstates."""
    if eff.omega_eff <= 0:
        raise ConfigError("default grid needs omega_eff > 0 (sigma_slope > 0)")
    a_osc = math.sqrt(HBAR / (eff.m_eff * eff.omega_eff))
    half = 8.0 * a_osc * math.sqrt(n_levels + 1.5)
    return SpatialGrid(x_min=-half, x_max=half, points=points)


def _fourier_operators(grid: SpatialGrid) -> tuple[np.ndarray, np.ndarray]:
    """Dense momentum-space multipliers: (k operator, k^2 operator)."""
    k = grid.wavenumbers
    forward = np.fft.fft(np.eye(grid.points), axis=0)
    k_op = np.fft.ifft(k[:, None] * forward, axis=0)
    k2_op = np.fft.ifft((k**2)[:, None] * forward, axis=0)
    k_op = (k_op + k_op.conj().T) / 2.0
    k2_op = (k2_op + k2_op.conj().T) / 2.0
    return k_op, k2_op


def build_soc_hamiltonian_grid(
    p: SOCParams, grid: SpatialGrid, include_kinetic: bool = True
) -> np.ndarray:
    """Two-component grid Hamiltonian (SI, joules), spin interleaved fastest.

    Always carries the linear recoil-momentum coupling; the quadratic
    kinetic term (the piece neglected for k << k_r) is optional.  A nonzero
    detuning enters as (hbar delta / 2) sigma_x after the pseudo-spin
    rotation.
    """
    k_op, k2_op = _fourier_operators(grid)
    eye_g = np.eye(grid.points)
    x_op = np.diag(grid.positions).astype(complex)

    def lift_grid(op):
        return np.kron(op, np.eye(2, dtype=complex))

    def lift_spin(pauli):
        return np.kron(eye_g, pauli)

    offset = HBAR**2 * p.k_r**2 / (2.0 * p.m_a)
    h = offset * np.eye(2 * grid.points, dtype=complex)
    h += (HBAR**2 * p.k_r / p.m_a) * (lift_grid(k_op) @ lift_spin(SIGMA_X))
    h += -(HBAR * p.sigma_slope) * (lift_grid(x_op) @ lift_spin(SIGMA_Y))
    h += (HBAR * p.chi) * lift_spin(SIGMA_Z)
    if p.delta != 0.0:
        h += (HBAR * p.delta / 2.0) * lift_spin(SIGMA_X)
    if include_kinetic:
        h += (HBAR**2 / (2.0 * p.m_a)) * lift_grid(k2_op)
    h = (h + h.conj().T) / 2.0
    require_hermitian(h / max(HBAR * p.chi, offset), "grid Hamiltonian")
    return h


def mapped_dirac_hamiltonian(eff: EffectiveParams, grid: SpatialGrid) -> np.ndarray:
    """The mapped oscillator c p sigma_x - m c omega x sigma_y + m c^2 sigma_z
    built from the effective parameters on the same grid (SI, joules)."""
    k_op, _ = _fourier_operators(grid)
    x_op = np.diag(grid.positions).astype(complex)
    eye_g = np.eye(grid.points)
    h = eff.c_eff * HBAR * np.kron(k_op, SIGMA_X)
    h += -(eff.m_eff * eff.c_eff * eff.omega_eff) * np.kron(x_op, SIGMA_Y)
    h += eff.rest_energy_eff * np.kron(eye_g, SIGMA_Z)
    return h


def analytic_level(eff: EffectiveParams, n: int, branch: str) -> float:
    """Closed-form mapped-oscillator level in joules (without the offset)."""
    return analytic_energy(n, branch, eff.epsilon_eff) * HBAR * eff.omega_eff


def _check_eigenvector_confinement(grid: SpatialGrid, vec: np.ndarray) -> None:
    """Gates: no weight at the box edge, none at the top of the momentum grid."""
    spinor = vec.reshape(grid.points, 2)
    density = np.sum(np.abs(spinor) ** 2, axis=1)
    edge = max(1, grid.points // 20)
    edge_pop = float(np.sum(density[:edge]) + np.sum(density[-edge:]))
    if edge_pop > 1e-8:
        raise PhysicsGateError(
            f"eigenstate touches the box edge (population {edge_pop:.3e}); enlarge the grid"
        )
    momentum_density = np.sum(np.abs(np.fft.fft(spinor, axis=0)) ** 2, axis=1)
    momentum_density /= momentum_density.sum()
    k = grid.wavenumbers
    top = np.abs(k) >= 0.9 * np.max(np.abs(k))
    alias_pop = float(np.sum(momentum_density[top]))
    if alias_pop > 1e-8:
        raise PhysicsGateError(
            f"eigenstate reaches the top of the momentum grid (population {alias_pop:.3e}); refine the grid"
        )


@dataclass(frozen=True)
class ComparisonRow:
    branch: str
    n: int
    energy_analytic: float       # J, offset removed
    energy_no_kinetic: float     # J, offset removed
    energy_with_kinetic: float   # J, offset removed
    rel_error_no_kinetic: float
    kinetic_shift: float         # J
    k_rms_over_kr: float
    verdict: str


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    soc: SOCParams
    effective: EffectiveParams
    grid: SpatialGrid
    energy_offset: float
    rows: tuple[ComparisonRow, ...]

    @property
    def max_rel_error_no_kinetic(self) -> float:
        return max(r.rel_error_no_kinetic for r in self.rows)


def compare_soc_vs_do(
    p: SOCParams, grid: SpatialGrid | None = None, n_levels: int = 10
) -> ComparisonReport:
    """Grid spectra (with and without the kinetic term) against closed forms.

    Rows cover the n_levels smallest-|E| mapped-oscillator levels.  The
    verdict column grades each level's momentum content against the
    k << k_r validity condition of the mapping.
    """
    eff = map_parameters(p)
    if eff.epsilon_eff <= 0:
        raise ConfigError("comparison needs sigma_slope > 0 (otherwise there is no oscillator)")
    if grid is None:
        grid = default_grid(eff, n_levels)

    h0 = build_soc_hamiltonian_grid(p, grid, include_kinetic=False)
    hk = build_soc_hamiltonian_grid(p, grid, include_kinetic=True)
    evals0, evecs0 = np.linalg.eigh(h0)
    evalsk = np.linalg.eigvalsh(hk)
    offset = HBAR**2 * p.k_r**2 / (2.0 * p.m_a)

    _, k2_op = _fourier_operators(grid)
    k2_full = np.kron(k2_op, np.eye(2, dtype=complex))

    candidates = [("+", n) for n in range(n_levels + 1)] + [("-", n) for n in range(n_levels + 1)]
    candidates.sort(key=lambda bn: abs(analytic_level(eff, bn[1], bn[0])))
    rows = []
    for branch, n in candidates[:n_levels]:
        target = analytic_level(eff, n, branch)
        idx0 = int(np.argmin(np.abs(evals0 - (target + offset))))
        idxk = int(np.argmin(np.abs(evalsk - (target + offset))))
        vec = evecs0[:, idx0]
        _check_eigenvector_confinement(grid, vec)
        e0 = float(evals0[idx0] - offset)
        ek = float(evalsk[idxk] - offset)
        k_rms = math.sqrt(max(float(np.real(np.vdot(vec, k2_full @ vec))), 0.0))
        ratio = k_rms / p.k_r
        if ratio < 0.1:
            verdict = "ok"
        elif ratio < 0.3:
            verdict = "marginal"
        else:
            verdict = "beyond_linear"
        rows.append(
            ComparisonRow(
                branch=branch,
                n=n,
                energy_analytic=target,
                energy_no_kinetic=e0,
                energy_with_kinetic=ek,
                rel_error_no_kinetic=abs(e0 - target) / abs(target),
                kinetic_shift=ek - e0,
                k_rms_over_kr=ratio,
                verdict=verdict,
            )
        )
    return ComparisonReport(soc=p, effective=eff, grid=grid, energy_offset=offset, rows=tuple(rows))
