"""Truncated harmonic-oscillator (x) spin-1/2 Hilbert space.

Conventions shared by every module in this package:

* model units hbar = m = omega = 1, so the single physics knob is the
  dimensionless ratio epsilon = hbar*omega/(m c^2) and c = 1/sqrt(epsilon);
* basis ordering interleaves Fock level and spin, index(n, s) = 2n + s with
  s = 0 spin-up and s = 1 spin-down;
* operators are dense complex numpy matrices, states are complex vectors.

Truncation keeps Fock levels 0 .. N-1.  The raising operator annihilates the
top level (its would-be sqrt(N)|N> component is dropped), so canonical
algebra holds exactly only on levels 0 .. N-2; the `leakage` gate is the
guard that keeps dynamics away from the corrupted edge.

Everything here is a pure function of immutable inputs and safe to call from
multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .errors import NumericalError
from . import tolerances as tol

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

SPIN_UP = 0
SPIN_DOWN = 1


@dataclass(frozen=True)
class BasisSpec:
    """Truncated Fock (x) spin-1/2 basis with interleaved ordering 2n + s."""

    fock_cutoff: int

    spin_dim: ClassVar[int] = 2

    def __post_init__(self):
        if not isinstance(self.fock_cutoff, (int, np.integer)) or self.fock_cutoff < 2:
            raise ValueError(f"fock_cutoff must be an integer >= 2, got {self.fock_cutoff!r}")

    @property
    def total_dim(self) -> int:
        return 2 * self.fock_cutoff

    def index(self, n: int, s: int) -> int:
        """Flat index of |n, s> with s = 0 (up) or 1 (down)."""
        if not 0 <= n < self.fock_cutoff:
            raise ValueError(f"Fock level {n} outside 0..{self.fock_cutoff - 1}")
        if s not in (SPIN_UP, SPIN_DOWN):
            raise ValueError(f"spin index must be 0 (up) or 1 (down), got {s}")
        return 2 * n + s


@dataclass(frozen=True)
class ModelUnits:
    """hbar = m = omega = 1 units; epsilon = hbar*omega/(m c^2) is the only knob."""

    epsilon: float

    hbar: ClassVar[float] = 1.0
    mass: ClassVar[float] = 1.0
    omega: ClassVar[float] = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be finite and > 0, got {self.epsilon!r}")

    @property
    def c(self) -> float:
        return 1.0 / math.sqrt(self.epsilon)

    @property
    def rest_energy(self) -> float:
        """m c^2 in units of hbar*omega."""
        return 1.0 / self.epsilon

    @property
    def x_zpt(self) -> float:
        """Zero-point width sqrt(hbar / 2 m omega) = 1/sqrt(2)."""
        return 1.0 / math.sqrt(2.0)

    @property
    def zitterbewegung_frequency(self) -> float:
        """2 m c^2 / hbar = 2/epsilon."""
        return 2.0 / self.epsilon


def basis_state(basis: BasisSpec, n: int, s: int) -> np.ndarray:
    """Unit vector |n, s>."""
    psi = np.zeros(basis.total_dim, dtype=complex)
    psi[basis.index(n, s)] = 1.0
    return psi


def build_ladder(basis: BasisSpec) -> np.ndarray:
    """Annihilation operator a (x) identity on spin, a|n> = sqrt(n)|n-1>.

    The top row of the adjoint is zeroed by truncation, so [a, a^dag] = I
    holds only on Fock levels 0 .. N-2 (the level-(N-1) diagonal entry of
    the commutator is -(N-1)).
    """
    amps = np.sqrt(np.arange(1, basis.fock_cutoff, dtype=float))
    a_fock = np.diag(amps, k=1).astype(complex)
    return np.kron(a_fock, np.eye(2, dtype=complex))


def build_quadratures(basis: BasisSpec, units: ModelUnits | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum, x = x_zpt (a + a^dag), p = (i/sqrt(2)) (a^dag - a)."""
    x_zpt = (units or ModelUnits(1.0)).x_zpt
    a = build_ladder(basis)
    adag = a.conj().T
    x = x_zpt * (a + adag)
    p = 1.0j / math.sqrt(2.0) * (adag - a)
    return x, p


def build_spin(basis: BasisSpec, which: str) -> np.ndarray:
    """Pauli operator sigma_which (x) identity on the Fock factor."""
    try:
        pauli = _PAULI[which]
    except KeyError:
        raise ValueError(f"which must be one of 'x', 'y', 'z', got {which!r}") from None
    return np.kron(np.eye(basis.fock_cutoff, dtype=complex), pauli)


def identity(basis: BasisSpec) -> np.ndarray:
    return np.eye(basis.total_dim, dtype=complex)


def hermiticity_defect(A: np.ndarray) -> float:
    return float(np.max(np.abs(A - A.conj().T)))


def require_hermitian(A: np.ndarray, name: str = "operator") -> None:
    """Gate on max|A - A^dag|; absolute for O(1) matrices, relative beyond."""
    defect = hermiticity_defect(A)
    scale = max(1.0, float(np.max(np.abs(A))))
    if defect > max(tol.HERMITICITY, 1e-14 * scale):
        raise NumericalError(f"{name} is not Hermitian: max|A - A^dag| = {defect:.3e}")


def require_unitary(U: np.ndarray, name: str = "operator") -> None:
    defect = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if defect > tol.UNITARITY:
        raise NumericalError(f"{name} is not unitary: max|U^dag U - I| = {defect:.3e}")


def require_normalized(psi: np.ndarray, name: str = "state") -> None:
    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if drift > tol.NORM_DRIFT:
        raise NumericalError(f"{name} norm deviates from 1 by {drift:.3e}")


def expectation(psi: np.ndarray, A: np.ndarray) -> complex:
    """<psi|A|psi> as a complex number."""
    if A.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: state {psi.size}, operator {A.shape}")
    return complex(np.vdot(psi, A @ psi))


def real_expectation(psi: np.ndarray, A: np.ndarray) -> float:
    """<psi|A|psi> for Hermitian A; errors out if the imaginary part survives."""
    value = expectation(psi, A)
    if abs(value.imag) > tol.EXPECTATION_IMAG * max(1.0, abs(value)):
        raise NumericalError(f"expectation has imaginary part {value.imag:.3e}; operator not Hermitian?")
    return value.real


def leakage(psi: np.ndarray, basis: BasisSpec, top_fraction: float = tol.LEAKAGE_TOP_FRACTION) -> float:
    """Population in the top ceil(top_fraction * N) Fock levels (both spins).

    Used as the truncation-validity gate: dynamics that populate the edge
    of the basis are not trustworthy.
    """
    if not 0.0 < top_fraction < 1.0:
        raise ValueError(f"top_fraction must lie in (0, 1), got {top_fraction}")
    n_top = math.ceil(top_fraction * basis.fock_cutoff)
    start = 2 * (basis.fock_cutoff - n_top)
    return float(np.sum(np.abs(psi[start:]) ** 2))


class SpectralPropagator:
    """exp(-iHt) through a single Hermitian eigendecomposition of H.

    Chosen over step-wise integration because the dimension stays small
    (2N <= ~1024) while Zitterbewegung frequencies reach 2/epsilon, which
    would force prohibitively small steps in any explicit integrator.
    """

    def __init__(self, H: np.ndarray):
        H = np.asarray(H, dtype=complex)
        require_hermitian(H, "Hamiltonian")
        try:
            energies, vectors = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigendecomposition failed: {exc}") from exc
        residual = float(np.max(np.abs(H @ vectors - vectors * energies)))
        scale = max(1.0, float(np.max(np.abs(energies))))
        if residual > tol.EIGH_RESIDUAL * scale:
            raise NumericalError(
                f"eigendecomposition residual {residual:.3e} exceeds gate "
                f"{tol.EIGH_RESIDUAL:.1e} * {scale:.3e}"
            )
        self.dim = H.shape[0]
        self.energies = energies
        self.vectors = vectors

    def _mode_amplitudes(self, psi0: np.ndarray) -> np.ndarray:
        require_normalized(psi0, "initial state")
        if psi0.size != self.dim:
            raise ValueError(f"dimension mismatch: state {psi0.size}, propagator {self.dim}")
        return self.vectors.conj().T @ np.asarray(psi0, dtype=complex)

    def states(self, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
        """psi(t) for every t, shape (len(times), dim)."""
        times = np.asarray(times, dtype=float)
        c0 = self._mode_amplitudes(psi0)
        phases = np.exp(-1.0j * np.outer(self.energies, times))
        out = (self.vectors @ (phases * c0[:, None])).T
        drift = np.abs(np.linalg.norm(out, axis=1) - 1.0)
        if drift.size and drift.max() > tol.NORM_DRIFT:
            raise NumericalError(f"propagation norm drift {drift.max():.3e} exceeds gate")
        return out

    def expectations(
        self,
        psi0: np.ndarray,
        times: np.ndarray,
        operators: dict[str, np.ndarray],
        chunk: int = 8192,
    ) -> dict[str, np.ndarray]:
        """<A>(t) for each named operator, evaluated chunk-wise over times.

        Diagonal operators take an O(dim) per-sample path; dense ones one
        matrix product per chunk.  Memory stays O(dim * chunk).
        """
        times = np.asarray(times, dtype=float)
        c0 = self._mode_amplitudes(psi0)
        diag_ops = {}
        dense_ops = {}
        for name, A in operators.items():
            if A.shape != (self.dim, self.dim):
                raise ValueError(f"operator {name!r} has shape {A.shape}, expected {(self.dim, self.dim)}")
            offdiag = A - np.diag(np.diag(A))
            if np.count_nonzero(offdiag) == 0:
                diag_ops[name] = np.real(np.diag(A)).copy()
            else:
                dense_ops[name] = A
        result = {name: np.empty(times.size, dtype=complex) for name in operators}
        for start in range(0, times.size, chunk):
            sl = slice(start, min(start + chunk, times.size))
            phases = np.exp(-1.0j * np.outer(self.energies, times[sl]))
            psi = self.vectors @ (phases * c0[:, None])
            norms = np.linalg.norm(psi, axis=0)
            drift = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
            if drift > tol.NORM_DRIFT:
                raise NumericalError(f"propagation norm drift {drift:.3e} exceeds gate")
            prob = np.abs(psi) ** 2
            for name, diag in diag_ops.items():
                result[name][sl] = prob.T @ diag
            for name, A in dense_ops.items():
                result[name][sl] = np.sum(psi.conj() * (A @ psi), axis=0)
        return result


def evolve(H: np.ndarray, psi0: np.ndarray, times) -> np.ndarray:
    """Exact spectral propagation: psi(t) = exp(-iHt) psi0 for each time.

    Deterministic for fixed inputs; one eigendecomposition per call.
    """
    return SpectralPropagator(H).states(psi0, np.asarray(times, dtype=float))
