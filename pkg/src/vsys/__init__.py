"""Driven V-system simulator: secular vs non-secular master-equation
dynamics and the angle-resolved fluorescence signals that tell them apart."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .detection import (
    FULL_SPHERE,
    NAMED_GEOMETRIES,
    WEDGE_A,
    WEDGE_A_PRIME,
    WEDGE_B,
    WEDGE_B_PRIME,
    DetectorGeometry,
    DetectorSignal,
    GeometryKind,
    beat_contrast,
    closed_form_intensity,
    custom_geometry,
    detector_signal,
    difference_signals,
    integrate_detector,
    intensity_kernel,
)
from .generators import (
    CharPoly,
    Generator,
    Variant,
    build,
    build_isotropic,
    build_nonsecular_direct,
    build_nonsecular_vectorized,
    build_secular_direct,
    build_secular_vectorized,
    char_poly,
    charpoly_nonsecular_factored,
    charpoly_secular_biquadratic,
    charpoly_secular_factored,
)
from .physics import (
    CA_REFERENCE_INPUTS,
    CoefficientMatrices,
    CPReport,
    ExperimentalInputs,
    SystemParams,
    basis_transform,
    check_complete_positivity,
    compute_gamma,
    field_for_splitting,
    pumping_rate,
    zeeman_splitting,
)
from .solvers import (
    IllConditionedEigenbasisError,
    InitialStateWarning,
    RegimeWarning,
    SingularGeneratorError,
    Solver,
    SpectralDecomposition,
    StateVector,
    Trajectory,
    limit_large_delta,
    limit_small_delta,
    solve_expm,
    solve_rk_oracle,
    solve_spectral,
    spectral_decomposition,
    steady_state,
    trajectory_expm,
    trajectory_spectral,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
