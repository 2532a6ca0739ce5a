"""
tvcone - Total-variation regularisation of missing-cone artifacts in optical
diffraction tomography.

Quick start:
    from tvcone import GridSpec, OpticsGeometry, build_support_mask, degrade
    from tvcone import generate, default_bead, regularize, preset_params

    grid = GridSpec(nx=64, ny=64, nz=64, dx=0.1, dy=0.1, dz=0.2)
    mask = build_support_mask(OpticsGeometry(), grid)
    truth = generate(default_bead(), grid)
    _, raw = degrade(truth, mask)
    f, report = regularize(raw, mask, preset_params("bead"))
"""

from tvcone.types import (
    GridSpec,
    OpticsGeometry,
    IlluminationPattern,
    PhantomSpec,
    PhantomKind,
    EdgeProfile,
    SolverParams,
    NonnegMode,
    PatchLayout,
    WindowMode,
)
from tvcone.volgrid import (
    Volume3,
    Spectrum3,
    SupportMask,
    fft3,
    ifft3,
    grad,
    div,
    laplacian_symbol,
)
from tvcone.optics import (
    build_support_mask,
    missing_cone_mask,
    degrade,
    band_extent,
    implied_resolution,
    closed_form_resolution,
    illumination_directions,
)
from tvcone.phantoms import generate, default_bead
from tvcone.solver import (
    regularize,
    SolveReport,
    preset_params,
    parameter_study,
    objective,
    support_residual,
)
from tvcone.patchwork import extract, stitch, window3, patched_regularize
from tvcone.metrics import mse, ssim, pearson, fwhm, slice_report, SliceReport
from tvcone.config import RunConfig, load_run_config, default_run_config
from tvcone.errors import TvconeError

__version__ = "0.1.0"

__all__ = [
    # Models
    "GridSpec",
    "OpticsGeometry",
    "IlluminationPattern",
    "PhantomSpec",
    "PhantomKind",
    "EdgeProfile",
    "SolverParams",
    "NonnegMode",
    "PatchLayout",
    "WindowMode",

    # Containers and transforms
    "Volume3",
    "Spectrum3",
    "SupportMask",
    "fft3",
    "ifft3",
    "grad",
    "div",
    "laplacian_symbol",

    # Optics
    "build_support_mask",
    "missing_cone_mask",
    "degrade",
    "band_extent",
    "implied_resolution",
    "closed_form_resolution",
    "illumination_directions",

    # Phantoms
    "generate",
    "default_bead",

    # Solver
    "regularize",
    "SolveReport",
    "preset_params",
    "parameter_study",
    "objective",
    "support_residual",

    # Patches
    "extract",
    "stitch",
    "window3",
    "patched_regularize",

    # Metrics
    "mse",
    "ssim",
    "pearson",
    "fwhm",
    "slice_report",
    "SliceReport",

    # Configuration
    "RunConfig",
    "load_run_config",
    "default_run_config",
    "TvconeError",
]
