"""simopo: multimode squeezed light from a self-imaging OPO.

Library layers: HG mode math (:mod:`.modes`), down-conversion gain models
(:mod:`.pdc`), the cavity input-output model (:mod:`.opo`), spatial mode
mismatch (:mod:`.mismatch`), and the scenario/CSV layer (:mod:`.scenarios`)
behind the ``simopo`` command line.
"""

from .errors import (
    BasisMismatchError,
    BracketError,
    ConfigError,
    DegenerateOpticsError,
    QuadratureConvergenceError,
    SimopoError,
    ThresholdError,
    UnstableCavityError,
)
from .mismatch import (
    CouplingVector,
    MismatchSpec,
    abcd_mode_transform,
    coupling_vector,
    default_lo_phase,
    enhancement_factor,
    mismatch_coefficients,
    plane_factor,
    reference_variances,
    target_variance,
    to_decibels,
)
from .modes import (
    BasisChangeMatrix,
    HGMode,
    ModeBasis,
    ModeIndex,
    basis_change,
    hermite,
    hg_amplitude,
    overlap,
)
from .opo import (
    CavityGeometry,
    OpoConfig,
    SqueezingResult,
    analytic_squeezing,
    apply_loss,
    block_squeezing,
    cavity_waist,
    covariance,
    gouy_phase,
    symplectic_eigenvalues,
    system_matrix,
)
from .pdc import (
    GainMatrix,
    GaussianKernelParams,
    SincKernelParams,
    fit_alpha,
    fit_pump_waist,
    gain_schmidt_number,
    gaussian_gain,
    kernel_schmidt_number,
    kernel_schmidt_spectrum,
    mu_from_xi,
    schmidt_number,
    sinc_gain,
    sinc_kernel,
    transformed_gain,
)

__version__ = "0.1.0"
