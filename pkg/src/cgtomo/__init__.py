"""Coarse-grained homodyne tomography of Gaussian states."""

from .decoherence import (
    MixingClass,
    ReservoirParams,
    classify_mixing,
    evolve_cov,
    min_reservoir_squeezing,
    mixing_fraction,
    mixing_fraction_isotropic,
    reservoir_cov,
)
from .direct import (
    KnownFrame,
    UnknownFrame,
    angle_deviation,
    frame_averaged_metrics,
    frame_averaged_metrics2,
    reconstruct_single,
    reconstruct_two,
)
from .errors import (
    CgTomoError,
    ConfigError,
    DegenerateDenominatorError,
    InvalidSigmaError,
    NonPhysicalError,
    NotTmstFormError,
    UnphysicalReservoirError,
)
from .gaussian import (
    SingleModeParams,
    TwoModeParams,
    cov_from_params1,
    cov_from_params2,
    is_physical,
    params_from_cov1,
    params_from_cov2,
    symplectic_eigenvalues,
)
from .metrics import (
    critical_squeezing,
    entanglement_potential,
    fidelity1,
    fidelity2,
    log_negativity,
    log_negativity_cov,
    nonclassical_squeezing,
)
from .mle import MleConfig, mle_estimate_single, mle_estimate_two

__version__ = "0.1.0"
