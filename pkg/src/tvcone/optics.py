"""
Fourier support of a transmission ODT system and the missing-cone degradation.

The support is the union over illumination directions of the Ewald caps
{k_s - k_in : |k_s| = n_medium / wavelength, lateral(k_s) <= na_detect / wavelength},
rasterised on the grid's frequency lattice and centrally symmetrised.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Tuple
import logging
import math

import numpy as np

from .errors import EmptyMaskError, NyquistError, ParameterError
from .types import GridSpec, IlluminationPattern, OpticsGeometry
from .volgrid import (
    Spectrum3,
    SupportMask,
    Volume3,
    fft3_array,
    real_ifft3_array,
    require_same_grid,
    symmetrize_mask,
)

logger = logging.getLogger(__name__)


def lateral_band_limit(geom: OpticsGeometry) -> float:
    """Full lateral width of the pass band in cycles/um."""
    return 2.0 * (geom.na_illum + geom.na_detect) / geom.wavelength


def axial_band_limit(geom: OpticsGeometry) -> float:
    """Full axial width of the symmetrised pass band in cycles/um."""
    na = max(geom.na_illum, geom.na_detect)
    n = geom.n_medium
    return 2.0 * (n - math.sqrt(n * n - na * na)) / geom.wavelength


def closed_form_resolution(geom: OpticsGeometry) -> Tuple[float, float]:
    """(lateral, axial) resolution in um implied by the band limits."""
    return 1.0 / lateral_band_limit(geom), 1.0 / axial_band_limit(geom)


def illumination_directions(geom: OpticsGeometry) -> np.ndarray:
    """Unit illumination vectors, shape (n_angles, 3), all with positive z."""
    n = geom.n_angles
    if geom.illum_pattern == IlluminationPattern.CUSTOM:
        return np.asarray(geom.directions, dtype=np.float64)

    sin_max = geom.na_illum / geom.n_medium
    if geom.illum_pattern == IlluminationPattern.CIRCLE:
        phi = 2.0 * np.pi * np.arange(n) / n
        sin_t = np.full(n, sin_max)
    else:
        # Fermat spiral from the axis out to the illumination NA
        golden = np.pi * (3.0 - math.sqrt(5.0))
        phi = golden * np.arange(n)
        sin_t = sin_max * np.sqrt(np.arange(n) / (n - 1)) if n > 1 else np.zeros(1)

    cos_t = np.sqrt(1.0 - sin_t**2)
    return np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=1)


def check_nyquist(geom: OpticsGeometry, grid: GridSpec) -> None:
    """Raise NyquistError unless the grid represents the whole pass band."""
    lateral = lateral_band_limit(geom) / 2.0
    axial = axial_band_limit(geom) / 2.0
    nyq_x, nyq_y, nyq_z = grid.nyquist()
    slack = 1.0 + 1e-9
    for axis, need, have in (("x", lateral, nyq_x), ("y", lateral, nyq_y), ("z", axial, nyq_z)):
        if need > have * slack:
            raise NyquistError("grid too coarse for the optical pass band", axis, need, have)


def ewald_cap(grid: GridSpec, geom: OpticsGeometry, direction: np.ndarray) -> np.ndarray:
    """
    Voxels whose centre lies within half a frequency-voxel diagonal of one
    Ewald cap, measured radially from the sphere |k_s| = n_medium / wavelength.
    """
    k0 = geom.n_medium / geom.wavelength
    k_det = geom.na_detect / geom.wavelength
    fx, fy, fz = grid.freq_axes()
    half_diagonal = 0.5 * math.sqrt(sum(p * p for p in grid.freq_pitch()))
    kin = k0 * np.asarray(direction, dtype=np.float64)

    ax, ay, az = fx + kin[0], fy + kin[1], fz + kin[2]
    ax2, ay2, az2 = ax * ax, ay * ay, az * az

    r = np.sqrt(ax2[:, None, None] + ay2[None, :, None] + az2[None, None, :])
    on_shell = np.abs(r - k0) <= half_diagonal

    lateral_ok = (ax2[:, None] + ay2[None, :]) <= k_det * k_det
    forward = az > 0
    return on_shell & lateral_ok[:, :, None] & forward[None, None, :]


def build_support_mask(
    geom: OpticsGeometry, grid: GridSpec, workers: Optional[int] = None
) -> SupportMask:
    """
    Rasterise the ODT pass band: union of Ewald caps over illumination
    directions, then central symmetrisation with DC forced on.
    """
    check_nyquist(geom, grid)
    directions = illumination_directions(geom)

    mask = np.zeros(grid.shape, dtype=bool)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for cap in pool.map(lambda u: ewald_cap(grid, geom, u), directions):
                mask |= cap
    else:
        for u in directions:
            mask |= ewald_cap(grid, geom, u)

    if not mask.any():
        raise EmptyMaskError(
            f"no frequency voxel of grid {grid.shape} lies on the Ewald caps"
        )
    mask = symmetrize_mask(mask)
    logger.info(
        f"Support mask: {int(mask.sum())} of {grid.voxel_count} voxels "
        f"({len(directions)} {geom.illum_pattern.value} directions)"
    )
    return SupportMask(grid, mask)


def missing_cone_mask(
    grid: GridSpec, half_angle_deg: float, k_max: Optional[float] = None
) -> SupportMask:
    """
    Idealised support: every frequency outside a double cone of the given
    half-angle around k_z, optionally limited to |k| <= k_max.
    """
    if not 0.0 <= half_angle_deg < 90.0:
        raise ParameterError("cone half-angle must be in [0, 90)", "half_angle_deg")
    fx, fy, fz = grid.freq_axes()
    lat2 = fx[:, None, None] ** 2 + fy[None, :, None] ** 2
    kz2 = np.broadcast_to(fz[None, None, :] ** 2, grid.shape)
    tan2 = math.tan(math.radians(half_angle_deg)) ** 2
    mask = lat2 > kz2 * tan2
    if k_max is not None:
        mask &= (lat2 + kz2) <= k_max * k_max
    mask = symmetrize_mask(mask | _dc_only(grid))
    return SupportMask(grid, mask)


def _dc_only(grid: GridSpec) -> np.ndarray:
    dc = np.zeros(grid.shape, dtype=bool)
    dc[0, 0, 0] = True
    return dc


def band_extent(mask: SupportMask, axis: int) -> float:
    """Full width of the occupied frequencies along one axis, cycles/um."""
    others = tuple(a for a in range(3) if a != axis)
    occupied = mask.data.any(axis=others)
    if not occupied.any():
        raise EmptyMaskError("mask is empty")
    coords = mask.grid.freq_axes()[axis][occupied]
    return float(coords.max() - coords.min())


def implied_resolution(mask: SupportMask) -> Tuple[float, float]:
    """(lateral, axial) resolution in um measured from the mask extents."""
    return 1.0 / band_extent(mask, 0), 1.0 / band_extent(mask, 2)


def degrade(f_true: Volume3, mask: SupportMask) -> Tuple[Spectrum3, Volume3]:
    """
    Missing-cone forward model: g = M * fft3(f), raw = ifft3(g).
    """
    grid = require_same_grid(f_true, mask)
    g = np.where(mask.data, fft3_array(f_true.data), 0.0)
    raw = real_ifft3_array(g)
    return Spectrum3(grid, g, hermitian=True), Volume3(grid, raw)
