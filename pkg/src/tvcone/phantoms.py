"""
Synthetic ground-truth volumes: beads, bead pairs and granule-bearing cells.

Values are refractive-index contrast delta-n. The scattering potential
V = k0^2 (n^2 - n_m^2) is, to first order, proportional to delta-n, so the
linear forward model is unchanged if V is used instead.
"""

from typing import List, Tuple
import logging

import numpy as np

from .errors import PhantomBoundsError
from .types import EdgeProfile, GridSpec, PhantomKind, PhantomSpec
from .volgrid import Volume3

logger = logging.getLogger(__name__)

MARGIN_VOXELS = 2


def default_bead() -> PhantomSpec:
    """2 um SiO2-like bead (delta-n 0.12 in an aqueous medium) at the origin."""
    return PhantomSpec(kind=PhantomKind.SPHERE, radii=[1.0], contrasts=[0.12])


def _shapes(spec: PhantomSpec) -> List[Tuple[Tuple[float, float, float], float, float]]:
    """(centre, radius, contrast) for every sphere the phantom is made of."""
    if spec.kind == PhantomKind.SHELL_CELL:
        center = spec.centers[0]
        shapes = [(center, spec.radii[0], spec.contrasts[0]), (center, spec.radii[1], spec.contrasts[1])]
        shapes.extend(_granules(spec))
        return shapes
    return list(zip(spec.centers, spec.radii, spec.contrasts))


def _granules(spec: PhantomSpec) -> List[Tuple[Tuple[float, float, float], float, float]]:
    """Granules placed uniformly inside the inner sphere of a shell_cell."""
    if not spec.n_granules:
        return []
    rng = np.random.default_rng(spec.seed)
    reach = spec.radii[1] - spec.granule_radius
    cx, cy, cz = spec.centers[0]
    granules = []
    for _ in range(spec.n_granules):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        distance = reach * rng.random() ** (1.0 / 3.0)
        x, y, z = direction * distance
        granules.append(((cx + x, cy + y, cz + z), spec.granule_radius, spec.granule_contrast))
    return granules


def _check_bounds(spec: PhantomSpec, grid: GridSpec) -> None:
    extent = [(n - 1) / 2.0 * d for n, d in zip(grid.shape, grid.pitch)]
    ramp = spec.edge_width / 2.0 if spec.edge == EdgeProfile.SMOOTHED else 0.0
    for center, radius, _ in _shapes(spec):
        for axis, (c, half, d) in enumerate(zip(center, extent, grid.pitch)):
            reach = abs(c) + radius + (MARGIN_VOXELS + ramp) * d
            if reach > half + 1e-9:
                raise PhantomBoundsError(
                    f"sphere at {center} with radius {radius} um leaves the grid "
                    f"along axis {'xyz'[axis]} (needs {reach:.3f} um, half-width {half:.3f} um)"
                )


def _sphere(grid: GridSpec, center, radius: float, spec: PhantomSpec) -> np.ndarray:
    x, y, z = grid.coord_axes()
    dist = np.sqrt(
        (x - center[0])[:, None, None] ** 2
        + (y - center[1])[None, :, None] ** 2
        + (z - center[2])[None, None, :] ** 2
    )
    if spec.edge == EdgeProfile.HARD:
        return (dist <= radius).astype(np.float64)
    width = spec.edge_width * min(grid.pitch)
    return np.clip((radius - dist) / width + 0.5, 0.0, 1.0)


def generate(spec: PhantomSpec, grid: GridSpec) -> Volume3:
    """
    Sum of shape contrasts at every voxel centre plus the background.
    """
    _check_bounds(spec, grid)
    data = np.full(grid.shape, spec.background, dtype=np.float64)
    shapes = _shapes(spec)
    for center, radius, contrast in shapes:
        if contrast:
            data += contrast * _sphere(grid, center, radius, spec)
    logger.debug(f"Generated {spec.kind.value} phantom with {len(shapes)} spheres on {grid.shape}")
    return Volume3(grid, data)
