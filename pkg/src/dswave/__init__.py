"""Realizability-optimal sampling spectra, matching point sets, and exact
error-spectrum analysis on the unit torus."""

__version__ = "0.1.0"

from .imaging import (
    ImageGrid,
    RenderConfig,
    band_energy,
    read_image,
    reference_image,
    render,
    write_image,
)
from .optimize import (
    INFEASIBLE_AT_BOUND,
    EnergyKind,
    LowFreqMode,
    SolveReport,
    SpectrumProblem,
    assemble,
    feasible_region,
    min_m0,
    solve,
    verify_realizability,
)
from .points import (
    PointSet,
    generate_dart_throwing,
    generate_poisson,
    generate_random,
    generate_regular,
    load_points,
    save_points,
    toroidal_distance,
)
from .radial import (
    PairCorrelation,
    RadialGrid,
    RadialSpectrum,
    bessel_j0,
    bessel_j1,
    closed_form_step_pcf,
    hankel_matrix,
    hankel_transform,
    read_radial_csv,
    spectrum_to_pcf,
    write_radial_csv,
)
from .spectral import (
    ErrorSpectrum2D,
    RadialProfile,
    Spectrum2D,
    cosine_error_ratio,
    empirical_pcf,
    empirical_power_spectrum,
    filtered_error,
    integration_variance,
    monte_carlo_error_spectrum,
    predict_error_spectrum,
    radial_average,
)
from .synthesis import SynthesisConfig, SynthesisResult, expected_smoothed_pcf, synthesize
from .targets import (
    TargetFunction,
    cosine,
    gaussian_blob,
    stripes,
    zone_plate,
    zone_plate_for_width,
)

__all__ = [
    "__version__",
    # radial
    "RadialGrid",
    "RadialSpectrum",
    "PairCorrelation",
    "bessel_j0",
    "bessel_j1",
    "hankel_matrix",
    "hankel_transform",
    "closed_form_step_pcf",
    "spectrum_to_pcf",
    "write_radial_csv",
    "read_radial_csv",
    # points
    "PointSet",
    "toroidal_distance",
    "generate_random",
    "generate_poisson",
    "generate_regular",
    "generate_dart_throwing",
    "save_points",
    "load_points",
    # optimize
    "EnergyKind",
    "LowFreqMode",
    "SpectrumProblem",
    "SolveReport",
    "assemble",
    "solve",
    "verify_realizability",
    "min_m0",
    "feasible_region",
    "INFEASIBLE_AT_BOUND",
    # targets
    "TargetFunction",
    "cosine",
    "gaussian_blob",
    "zone_plate",
    "zone_plate_for_width",
    "stripes",
    # spectral
    "Spectrum2D",
    "ErrorSpectrum2D",
    "RadialProfile",
    "empirical_pcf",
    "empirical_power_spectrum",
    "radial_average",
    "predict_error_spectrum",
    "monte_carlo_error_spectrum",
    "filtered_error",
    "integration_variance",
    "cosine_error_ratio",
    # synthesis
    "SynthesisConfig",
    "SynthesisResult",
    "expected_smoothed_pcf",
    "synthesize",
    # imaging
    "ImageGrid",
    "RenderConfig",
    "render",
    "reference_image",
    "band_energy",
    "write_image",
    "read_image",
]
