"""Exception hierarchy shared by all modules.

The split mirrors the CLI exit codes: bad input (2), a physics validity
gate tripping (3), and genuine numerical failure (4).
"""


class ConfigError(ValueError):
    """Invalid user-supplied configuration or parameters."""


class PhysicsGateError(RuntimeError):
    """A physics validity gate failed (results would not be trustworthy)."""


class TruncationError(PhysicsGateError):
    """Too much population reached the top of the truncated basis; raise cutoff."""


class DegeneracyError(PhysicsGateError):
    """Spurious (near-)degeneracy or level miscount in the compared spectral window."""


class NumericalError(RuntimeError):
    """Linear-algebra failure: non-Hermitian input, eigensolver residual, norm drift."""
