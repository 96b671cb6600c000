"""Measurement backaction in the one-dimensional quantum Dirac oscillator.

A desk-scale simulator plus closed-form oracle suite: exact spectra and
eigenstates of the relativistic oscillator, dynamics of a bosonic meter
coupled to it (photon-number sector decomposition), the block-diagonal
energy-separated frame with Newton-Wigner position checks, and the mapping
onto spin-orbit-coupled condensate parameters.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DegeneracyError, NumericalError, PhysicsGateError, TruncationError
from .hilbert import (
    BasisSpec,
    ModelUnits,
    SpectralPropagator,
    basis_state,
    build_ladder,
    build_quadratures,
    build_spin,
    evolve,
    expectation,
    leakage,
    real_expectation,
)
from .oscillator import (
    DiracParams,
    SpectrumReport,
    SpectrumRow,
    analytic_coefficients,
    analytic_eigenstate,
    analytic_energy,
    build_H_DO,
    build_H_nr,
    build_H_weyl,
    validate_spectrum,
)
from .backaction import (
    MeasurementConfig,
    SmearingEstimate,
    Trajectory,
    analytic_DeltaX_nr,
    analytic_X_corrected,
    analytic_X_nr,
    analytic_sigma_z,
    balanced_superposition,
    build_H_sector,
    composite_position,
    estimate_smearing,
    qmfs_reference,
    relative_momentum,
    run_backaction,
    spin_position,
    total_momentum,
)
from .foldy import (
    FWPair,
    build_FW_unitary,
    build_H_FW_analytic,
    fw_energy_balanced_evolution,
    fw_pair,
    interior_projector,
    nw_measurement_interaction_first_order,
    nw_position_exact,
    nw_position_first_order,
)
from .soc import (
    ComparisonReport,
    EffectiveParams,
    SOCParams,
    SpatialGrid,
    build_soc_hamiltonian_grid,
    compare_soc_vs_do,
    map_parameters,
)
