"""
Working state and run report of the split Bregman solver.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import math

import numpy as np

from ..types import GridSpec, SolverParams


@dataclass
class SolverState:
    """
    All split Bregman variables of one solve. Arrays share the grid shape;
    gk and g are spectra that vanish outside the mask.
    """
    grid: GridSpec
    mask: np.ndarray
    g: np.ndarray
    gk: np.ndarray
    f: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray
    w: np.ndarray
    bx: np.ndarray
    by: np.ndarray
    bz: np.ndarray
    bw: np.ndarray
    outer: int = 0
    inner: int = 0

    # grad(f) cached for the f it was computed from
    _grad_src: Optional[np.ndarray] = field(default=None, repr=False)
    _grad: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def d(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.dx, self.dy, self.dz)

    @property
    def b(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.bx, self.by, self.bz)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {
            "f": self.f, "dx": self.dx, "dy": self.dy, "dz": self.dz, "w": self.w,
            "bx": self.bx, "by": self.by, "bz": self.bz, "bw": self.bw, "gk": self.gk,
        }


@dataclass
class SolveReport:
    """Per-iteration observables of one regularize() call."""

    params: SolverParams
    grid: GridSpec
    residuals: List[float] = field(default_factory=list)
    objectives: List[float] = field(default_factory=list)
    timings: Dict[str, float] = field(
        default_factory=lambda: {"f_update": 0.0, "shrinkage": 0.0, "bookkeeping": 0.0}
    )
    min_f: float = float("nan")
    wall_seconds: float = 0.0

    @property
    def total_phase_seconds(self) -> float:
        return sum(self.timings.values())

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly summary; parameters are echoed."""
        return {
            "params": self.params.model_dump(mode="json"),
            "grid": self.grid.model_dump(mode="json"),
            "residuals": list(self.residuals),
            "objective_first": self.objectives[0] if self.objectives else None,
            "objective_last": self.objectives[-1] if self.objectives else None,
            "objectives": list(self.objectives),
            "timings": dict(self.timings),
            "wall_seconds": self.wall_seconds,
            "min_f": self.min_f,
        }


@dataclass
class PatchedReport(SolveReport):
    """
    Per-iteration observables of a patch-wise solve, combined over patches.

    Residuals are the root sum of squares of the per-patch support residuals,
    objectives and phase timings are sums, wall_seconds covers the whole run.
    """

    patches: int = 0

    @classmethod
    def combine(
        cls, reports: Sequence[SolveReport], params: SolverParams, grid: GridSpec
    ) -> "PatchedReport":
        combined = cls(params=params, grid=grid, patches=len(reports))
        if not reports:
            return combined
        combined.residuals = [
            math.sqrt(sum(r.residuals[i] ** 2 for r in reports)) for i in range(len(reports[0].residuals))
        ]
        combined.objectives = [
            sum(r.objectives[i] for r in reports) for i in range(len(reports[0].objectives))
        ]
        for r in reports:
            for phase, seconds in r.timings.items():
                combined.timings[phase] += seconds
        return combined

    def to_dict(self) -> Dict[str, Any]:
        summary = super().to_dict()
        summary["patches"] = self.patches
        return summary
