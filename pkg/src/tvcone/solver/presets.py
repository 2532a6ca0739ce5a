"""
Named solver parameter sets (N, M, mu, tau, gamma).
"""

from typing import Callable, Dict, Tuple
import logging

from ..errors import ParameterError
from ..types import SolverParams

logger = logging.getLogger(__name__)


def create_bead_params(**overrides) -> SolverParams:
    """Silica bead tomograms: (2, 400, 10, 10, 1)."""
    values = dict(n_outer=2, n_inner=400, mu=10.0, tau=10.0, gamma=1.0)
    values.update(overrides)
    return SolverParams(**values)


def create_spyogenes_params(**overrides) -> SolverParams:
    """Bacteria tomograms (NA 0.8 system): (5, 100, 50, 50, 1)."""
    values = dict(n_outer=5, n_inner=100, mu=50.0, tau=50.0, gamma=1.0)
    values.update(overrides)
    return SolverParams(**values)


def create_ociaml3_params(**overrides) -> SolverParams:
    """Leukaemia cell tomograms: (3, 60, 150, 150, 1)."""
    values = dict(n_outer=3, n_inner=60, mu=150.0, tau=150.0, gamma=1.0)
    values.update(overrides)
    return SolverParams(**values)


def create_bench_params(two_outer: bool = False, **overrides) -> SolverParams:
    """
    Runtime benchmark iteration counts: 100 inner x 5 outer, or 100 inner x
    2 outer for the "two iterations" reading. Weights follow the bead preset.
    """
    values = dict(n_outer=2 if two_outer else 5, n_inner=100, mu=10.0, tau=10.0, gamma=1.0)
    values.update(overrides)
    return SolverParams(**values)


PRESETS: Dict[str, Callable[..., SolverParams]] = {
    "bead": create_bead_params,
    "spyogenes": create_spyogenes_params,
    "ociaml3": create_ociaml3_params,
}

# Under-regularised sets used to show blurring on beads
BEAD_STUDY_SETS: Dict[str, Tuple[int, int, float, float, float]] = {
    "set1": (2, 400, 2.0, 2.0, 1.0),
    "set2": (2, 400, 10.0, 2.0, 1.0),
    "bead": (2, 400, 10.0, 10.0, 1.0),
}


def preset_params(name: str, **overrides) -> SolverParams:
    """Look up a named preset, applying keyword overrides."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset '{name}' (choose from {', '.join(sorted(PRESETS))})", "preset"
        ) from None
    return factory(**overrides)


def params_from_tuple(values: Tuple[int, int, float, float, float], **extra) -> SolverParams:
    """Build SolverParams from an (N, M, mu, tau, gamma) tuple."""
    n_outer, n_inner, mu, tau, gamma = values
    return SolverParams(n_outer=int(n_outer), n_inner=int(n_inner), mu=mu, tau=tau, gamma=gamma, **extra)
