"""Bell-CHSH tests on two-mode Gaussian optical states with homodyne sign
binning, idealized and Kerr-based nonlinear local rotations, and detection
inefficiency modeled as Gaussian smoothing of the quadrature statistics."""

__version__ = "0.1.0"

from .model import (
    AngleQuad,
    ConfigError,
    FeasibilityError,
    ResourceKind,
    ResourceSpec,
    RotationKind,
    RotationSpec,
    validate_config,
)
from .analytic import (
    chsh,
    corr_ideal,
    corr_ideal_printed,
    corr_thermal,
    corr_tmss,
    efficiency_factor,
)
from .physical import (
    PdfVariant,
    corr_physical,
    corr_physical_exact,
    exact_amplitude,
    pdf_ef,
    quadrant_probs,
)
from .oracle_coherent import amplitude_ideal, corr_ideal_oracle, corr_thermal_oracle
from .oracle_fock import (
    FockVector,
    apply_beam_splitter,
    apply_displacement,
    apply_kerr,
    corr_physical_oracle,
    joint_pdf_fock,
    physical_rotation,
    squeezed_vacuum_fock,
)
from .optimize import BellResult, SearchConfig, maximize_chsh
from .quadrature import (
    GridPdf,
    QuadTolerance,
    integrate_quadrant,
    integrate_real_line,
    smooth_inefficiency,
)

__all__ = [
    "AngleQuad", "ConfigError", "FeasibilityError", "ResourceKind", "ResourceSpec",
    "RotationKind", "RotationSpec", "validate_config",
    "chsh", "corr_ideal", "corr_ideal_printed", "corr_thermal", "corr_tmss",
    "efficiency_factor",
    "PdfVariant", "corr_physical", "corr_physical_exact", "exact_amplitude",
    "pdf_ef", "quadrant_probs",
    "amplitude_ideal", "corr_ideal_oracle", "corr_thermal_oracle",
    "FockVector", "apply_beam_splitter", "apply_displacement", "apply_kerr",
    "corr_physical_oracle", "joint_pdf_fock", "physical_rotation", "squeezed_vacuum_fock",
    "BellResult", "SearchConfig", "maximize_chsh",
    "GridPdf", "QuadTolerance", "integrate_quadrant", "integrate_real_line",
    "smooth_inefficiency",
]
