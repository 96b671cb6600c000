"""Numerical tolerances used as gates throughout the package.

All values are pinned here so that the JSON sidecars emitted by the CLI can
echo the exact thresholds a run was validated against.
"""

# Operator construction / propagation gates
HERMITICITY = 1e-12        # max|H - H^dag| for freshly constructed operators
UNITARITY = 1e-10          # max|U^dag U - I|
NORM_DRIFT = 1e-10         # allowed |norm - 1| of any propagated state
EXPECTATION_IMAG = 1e-10   # allowed imaginary part of a Hermitian expectation
EIGH_RESIDUAL = 1e-10      # relative eigenpair residual accepted from the solver

# Truncation guard
LEAKAGE_TOP_FRACTION = 0.1
LEAKAGE_GATE = 1e-8

# Spectral validation
SPECTRUM_ENERGY_REL = 1e-9   # |E_num - E_closed| <= this * rest energy
SPECTRUM_OVERLAP = 1e-9      # 1 - |<num|closed>|^2 <= this
MIN_SPECTRAL_GAP = 1e-8      # smallest allowed numeric gap (units of hbar*omega)

# Two-frequency trajectory fit
FIT_RESIDUAL_FLAG = 0.05     # relative misfit beyond which the regime flag trips

# Block-diagonal (energy-separated) frame checks
INTERIOR_FRACTION = 0.6      # bottom fraction of Fock levels treated as trustworthy
FW_DIAGONAL_MAX = 1e-6       # max|U H U^dag - closed form| allowed on the interior


def as_dict():
    """All tolerances as a plain dict, for metadata sidecars."""
    return {
        k: v
        for k, v in globals().items()
        if k.isupper() and isinstance(v, (int, float))
    }
