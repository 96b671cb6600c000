"""Dirac-oscillator Hamiltonian family and closed-form spectral data.

The full Hamiltonian in model units (hbar = m = omega = 1, c = 1/sqrt(eps)) is

    H = c sigma_x p - c sigma_y x + c^2 sigma_z,

a relativistic oscillator whose spectrum and eigenvectors are known in closed
form.  The positive branch starts at the rest energy c^2 = 1/eps; the negative
branch is the mirror E_n^- = -E_{n+1}^+.  The closed forms act as independent
oracles for everything the numeric eigensolver produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import DegeneracyError
from .hilbert import (
    BasisSpec,
    ModelUnits,
    SPIN_DOWN,
    SPIN_UP,
    basis_state,
    build_quadratures,
    build_spin,
    identity,
    leakage,
)


@dataclass(frozen=True)
class DiracParams:
    """epsilon = hbar*omega/(m c^2) plus the truncated basis to build on."""

    epsilon: float
    basis: BasisSpec

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be finite and > 0, got {self.epsilon!r}")

    @property
    def units(self) -> ModelUnits:
        return ModelUnits(self.epsilon)


def build_H_DO(p: DiracParams) -> np.ndarray:
    """Full relativistic oscillator c sigma_x p - c sigma_y x + c^2 sigma_z."""
    c = p.units.c
    x, mom = build_quadratures(p.basis)
    sx = build_spin(p.basis, "x")
    sy = build_spin(p.basis, "y")
    sz = build_spin(p.basis, "z")
    return c * (sx @ mom - sy @ x) + c**2 * sz


def build_H_nr(p: DiracParams) -> np.ndarray:
    """Non-relativistic limit: (mc^2 + p^2/2 + x^2/2) sigma_z - 1/2.

    A pair of harmonic oscillators with spin-dependent mass sign: positive
    mass for spin-up, negative for spin-down.
    """
    x, mom = build_quadratures(p.basis)
    sz = build_spin(p.basis, "z")
    ho = p.units.rest_energy * identity(p.basis) + 0.5 * (mom @ mom + x @ x)
    return ho @ sz - 0.5 * identity(p.basis)


def build_H_weyl(p: DiracParams) -> np.ndarray:
    """Massless limit c sigma_x p - c sigma_y x (chiral-symmetric spectrum)."""
    c = p.units.c
    x, mom = build_quadratures(p.basis)
    sx = build_spin(p.basis, "x")
    sy = build_spin(p.basis, "y")
    return c * (sx @ mom - sy @ x)


def analytic_energy(n: int, branch: str, epsilon: float) -> float:
    """Closed-form level energy in units of hbar*omega.

    E_n^+ = (1/eps) sqrt(1 + 2 n eps); E_n^- = -E_{n+1}^+.
    """
    if n < 0:
        raise ValueError(f"level index must be >= 0, got {n}")
    if branch == "+":
        return math.sqrt(1.0 + 2.0 * n * epsilon) / epsilon
    if branch == "-":
        return -math.sqrt(1.0 + 2.0 * (n + 1) * epsilon) / epsilon
    raise ValueError(f"branch must be '+' or '-', got {branch!r}")


def analytic_coefficients(n: int, epsilon: float) -> tuple[float, float]:
    """Spinor weights (A_n, B_n) of the positive-branch eigenstate.

    A_n = sqrt((E_n^+ + mc^2) / 2 E_n^+), B_n = sqrt((E_n^+ - mc^2) / 2 E_n^+);
    A_n^2 + B_n^2 = 1 identically.
    """
    if n < 0:
        raise ValueError(f"level index must be >= 0, got {n}")
    s = math.sqrt(1.0 + 2.0 * n * epsilon)  # E_n^+ / mc^2
    a = math.sqrt((s + 1.0) / (2.0 * s))
    b = math.sqrt((s - 1.0) / (2.0 * s))
    return a, b


def analytic_eigenstate(p: DiracParams, n: int, branch: str) -> np.ndarray:
    """Closed-form eigenvector in the shared interleaved basis.

    |E_n^+> = A_n |n, up> - i B_n |n-1, down>
    |E_n^-> = B_{n+1} |n+1, up> + i A_{n+1} |n, down>

    The phase convention keeps the spin-up coefficient real positive.
    """
    N = p.basis.fock_cutoff
    if branch == "+":
        if n >= N:
            raise ValueError(f"level {n} needs Fock level {n}; cutoff is {N}")
        a, b = analytic_coefficients(n, p.epsilon)
        psi = a * basis_state(p.basis, n, SPIN_UP)
        if n > 0:
            psi = psi - 1.0j * b * basis_state(p.basis, n - 1, SPIN_DOWN)
        return psi
    if branch == "-":
        if n + 1 >= N:
            raise ValueError(f"level {n} needs Fock level {n + 1}; cutoff is {N}")
        a, b = analytic_coefficients(n + 1, p.epsilon)
        return b * basis_state(p.basis, n + 1, SPIN_UP) + 1.0j * a * basis_state(p.basis, n, SPIN_DOWN)
    raise ValueError(f"branch must be '+' or '-', got {branch!r}")


@dataclass(frozen=True)
class SpectrumRow:
    n: int
    branch: str
    energy_numeric: float
    energy_analytic: float
    abs_error: float
    overlap: float


@dataclass(frozen=True)
class SpectrumReport:
    epsilon: float
    fock_cutoff: int
    n_max: int
    rows: tuple[SpectrumRow, ...]

    @property
    def max_abs_error(self) -> float:
        return max(r.abs_error for r in self.rows)

    @property
    def min_overlap(self) -> float:
        return min(r.overlap for r in self.rows)


def validate_spectrum(p: DiracParams, n_max: int = 10) -> SpectrumReport:
    """Numeric spectrum vs closed forms for levels n <= n_max, both branches.

    Truncation makes |N-1, down> a singleton (its pairing partner |N, up> is
    dropped), which shows up as an exact spurious eigenvalue at -mc^2 inside
    any comparison window.  The checks therefore restrict to eigenvectors
    supported away from the basis edge: a level-count check on the window
    |E| <= E_{n_max}^+ and a minimum-gap check against cutoff-induced
    spurious degeneracy.  n_max is capped at N/4 for edge safety.
    """
    N = p.basis.fock_cutoff
    if n_max < 0 or 4 * n_max > N:
        raise ValueError(f"n_max must satisfy 0 <= n_max <= N/4 = {N // 4}, got {n_max}")
    H = build_H_DO(p)
    evals, evecs = np.linalg.eigh(H)

    # Gap and count checks on interior-supported levels in the compared window.
    e_edge = analytic_energy(n_max, "+", p.epsilon)
    window = np.flatnonzero(np.abs(evals) <= e_edge * (1.0 + 1e-9))
    interior = np.array(
        [i for i in window if leakage(evecs[:, i], p.basis) < 0.5], dtype=int
    )
    in_window = evals[interior]
    expected_count = 2 * n_max + 1  # n_max+1 positive levels, n_max negative ones
    if in_window.size != expected_count:
        raise DegeneracyError(
            f"expected {expected_count} interior levels with |E| <= E_{n_max}^+, found {in_window.size}"
        )
    gaps = np.diff(np.sort(in_window))
    if gaps.size and gaps.min() < tol.MIN_SPECTRAL_GAP:
        raise DegeneracyError(f"minimum numeric gap {gaps.min():.3e} below {tol.MIN_SPECTRAL_GAP:.1e}")

    rows = []
    for n in range(n_max + 1):
        for branch in ("+", "-"):
            if branch == "-" and n == n_max:
                continue  # |E_{n_max}^-| exceeds the checked window
            target = analytic_energy(n, branch, p.epsilon)
            idx = int(interior[np.argmin(np.abs(in_window - target))])
            vec = evecs[:, idx]
            reference = analytic_eigenstate(p, n, branch)
            overlap = float(np.abs(np.vdot(reference, vec)) ** 2)
            rows.append(
                SpectrumRow(
                    n=n,
                    branch=branch,
                    energy_numeric=float(evals[idx]),
                    energy_analytic=target,
                    abs_error=float(abs(evals[idx] - target)),
                    overlap=overlap,
                )
            )
    return SpectrumReport(epsilon=p.epsilon, fock_cutoff=N, n_max=n_max, rows=tuple(rows))


def energy_curves(epsilons, n_levels: int = 5) -> list[dict]:
    """Level energies over an epsilon grid, in units of the rest energy.

    Data behind the standard E/mc^2 vs epsilon plot: rows of
    (epsilon, n, branch, energy_over_rest).
    """
    rows = []
    for eps in epsilons:
        rest = 1.0 / eps
        for n in range(n_levels):
            for branch in ("+", "-"):
                rows.append(
                    {
                        "epsilon": float(eps),
                        "n": n,
                        "branch": branch,
                        "energy_over_rest": analytic_energy(n, branch, eps) / rest,
                    }
                )
    return rows


def coefficient_curves(epsilons, n_levels: int = 4) -> list[dict]:
    """Spinor probabilities |A_n|^2, |B_n|^2 over an epsilon grid."""
    rows = []
    for eps in epsilons:
        for n in range(n_levels):
            a, b = analytic_coefficients(n, eps)
            rows.append(
                {
                    "epsilon": float(eps),
                    "n": n,
                    "prob_up_component": a * a,
                    "prob_down_component": b * b,
                }
            )
    return rows


def nonrelativistic_residual(p: DiracParams, n: int) -> float:
    """||(H_DO - H_nr)|E_n^+>|| scaled by epsilon (i.e. relative to mc^2).

    Scales as sqrt(2 n epsilon) for small epsilon: the spin-flip coupling is
    c * x_zpt ~ 1/sqrt(eps) against the rest energy 1/eps.
    """
    diff = build_H_DO(p) - build_H_nr(p)
    psi = analytic_eigenstate(p, n, "+")
    return float(np.linalg.norm(diff @ psi)) * p.epsilon
