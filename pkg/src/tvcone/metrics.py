"""
Image quality metrics (MSE, Pearson correlation, SSIM) and line-profile
measurements (FWHM, background fluctuation).

SSIM uses the Gaussian-window formulation: window std 1.5 with 11 x 11
support, K1 = 0.01, K2 = 0.03, population (co)variances, and a dynamic range
that defaults to the joint min-max range of both inputs.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import DegenerateInputError, GridMismatchError, ParameterError
from .volgrid import Volume3

logger = logging.getLogger(__name__)

SSIM_SIGMA = 1.5
SSIM_TRUNCATE = 3.5  # radius int(3.5 * 1.5 + 0.5) = 5 -> 11 x 11 window
SSIM_K1 = 0.01
SSIM_K2 = 0.03

ArrayLike = Union[Volume3, np.ndarray]


def _pair(a: ArrayLike, b: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(a.data if isinstance(a, Volume3) else a, dtype=np.float64)
    y = np.asarray(b.data if isinstance(b, Volume3) else b, dtype=np.float64)
    if x.shape != y.shape:
        raise GridMismatchError(f"shape mismatch: {x.shape} vs {y.shape}")
    return x, y


def mse(a: ArrayLike, b: ArrayLike) -> float:
    """Mean of squared differences."""
    x, y = _pair(a, b)
    return float(np.mean((x - y) ** 2))


def pearson(a: ArrayLike, b: ArrayLike) -> float:
    """Centred correlation coefficient; constant inputs are an error."""
    x, y = _pair(a, b)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(np.sum(xc * xc)))
    sy = math.sqrt(float(np.sum(yc * yc)))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("pearson correlation is undefined for a constant input")
    return float(np.clip(np.sum(xc * yc) / (sx * sy), -1.0, 1.0))


def ssim(a: ArrayLike, b: ArrayLike, data_range: Optional[float] = None) -> float:
    """Mean local SSIM of two 2D slices."""
    x, y = _pair(a, b)
    if x.ndim != 2:
        raise GridMismatchError(f"ssim expects 2D slices, got {x.ndim}D")
    if data_range is None:
        data_range = max(x.max(), y.max()) - min(x.min(), y.min())
        if data_range <= 0:
            raise DegenerateInputError("ssim dynamic range is zero for identical constant slices")
    elif data_range <= 0:
        raise ParameterError("ssim dynamic range must be positive", "data_range")

    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    def blur(img: np.ndarray) -> np.ndarray:
        return gaussian_filter(img, SSIM_SIGMA, truncate=SSIM_TRUNCATE)

    ux, uy = blur(x), blur(y)
    vx = blur(x * x) - ux * ux
    vy = blur(y * y) - uy * uy
    vxy = blur(x * y) - ux * uy

    num = (2 * ux * uy + c1) * (2 * vxy + c2)
    den = (ux * ux + uy * uy + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def _line_index(coord: float, n: int, pitch: float) -> int:
    return int(min(max(round(coord / pitch + (n - 1) / 2.0), 0), n - 1))


def line_profile(vol: Volume3, axis: int, point_um: Sequence[float]) -> np.ndarray:
    """Samples along one axis through the voxel nearest to point_um."""
    idx = [
        _line_index(c, n, d) for c, n, d in zip(point_um, vol.grid.shape, vol.grid.pitch)
    ]
    idx[axis] = slice(None)
    return np.array(vol.data[tuple(idx)])


def fwhm(profile: np.ndarray, pitch: float, baseline: float = 0.0) -> float:
    """Full width at half maximum of a sampled profile, linear interpolation."""
    p = int(np.argmax(profile))
    peak = float(profile[p])
    if peak <= baseline:
        raise DegenerateInputError("no peak above the baseline")
    half = baseline + 0.5 * (peak - baseline)

    left = p
    while left > 0 and profile[left - 1] >= half:
        left -= 1
    right = p
    while right < len(profile) - 1 and profile[right + 1] >= half:
        right += 1
    if left == 0 or right == len(profile) - 1:
        raise DegenerateInputError("profile does not fall below half maximum inside the volume")

    x_left = (left - 1) + (half - profile[left - 1]) / (profile[left] - profile[left - 1])
    x_right = right + (profile[right] - half) / (profile[right] - profile[right + 1])
    return float((x_right - x_left) * pitch)


def fwhm_profile(vol: Volume3, axis: int, point_um: Sequence[float], baseline: float = 0.0) -> float:
    """FWHM in um of the line profile along axis through point_um."""
    return fwhm(line_profile(vol, axis, point_um), vol.grid.pitch[axis], baseline)


def background_std(vol: Volume3, center_um: Sequence[float], radius_um: float) -> float:
    """Standard deviation of voxels farther than radius_um from center_um."""
    x, y, z = vol.grid.coord_axes()
    dist2 = (
        (x - center_um[0])[:, None, None] ** 2
        + (y - center_um[1])[None, :, None] ** 2
        + (z - center_um[2])[None, None, :] ** 2
    )
    outside = vol.data[dist2 > radius_um**2]
    if outside.size == 0:
        raise DegenerateInputError("exclusion region covers the whole volume")
    return float(np.std(outside))


@dataclass
class SliceRow:
    z_um: Optional[float]
    mse: float
    ssim: float
    pearson: float


@dataclass
class SliceReport:
    """One row per axial slice plus a volume aggregate."""

    rows: List[SliceRow] = field(default_factory=list)
    aggregate: Optional[SliceRow] = None

    HEADER = "z_um,mse,ssim,pearson"

    def to_csv(self) -> str:
        lines = [self.HEADER]
        for row in self.rows:
            lines.append(f"{row.z_um:.6g},{row.mse:.9g},{row.ssim:.9g},{row.pearson:.9g}")
        if self.aggregate is not None:
            agg = self.aggregate
            lines.append(f"volume,{agg.mse:.9g},{agg.ssim:.9g},{agg.pearson:.9g}")
        return "\n".join(lines) + "\n"


def _guarded(metric, *args, label: str) -> float:
    try:
        return metric(*args)
    except DegenerateInputError as e:
        logger.warning(f"{label}: {e}; recording NaN")
        return float("nan")


def slice_report(
    a: Volume3, b: Volume3, z_range_um: float = 2.0, z_center_um: float = 0.0
) -> SliceReport:
    """
    Per-slice MSE/SSIM/Pearson for axial slices with |z - z_center| <= z_range.
    """
    x, y = _pair(a, b)
    if a.grid != b.grid:
        raise GridMismatchError("volumes live on different grids")
    z = a.grid.coord_axes()[2]
    selected = np.nonzero(np.abs(z - z_center_um) <= z_range_um + 1e-9)[0]
    if selected.size == 0:
        raise ParameterError("no axial slice inside the requested range", "z_range_um")

    sub_x, sub_y = x[:, :, selected], y[:, :, selected]
    data_range = max(sub_x.max(), sub_y.max()) - min(sub_x.min(), sub_y.min())
    if data_range <= 0:
        raise DegenerateInputError("both volumes are the same constant over the range")

    report = SliceReport()
    for k in selected:
        label = f"slice z={z[k]:.3f}um"
        report.rows.append(
            SliceRow(
                z_um=float(z[k]),
                mse=mse(x[:, :, k], y[:, :, k]),
                ssim=ssim(x[:, :, k], y[:, :, k], data_range),
                pearson=_guarded(pearson, x[:, :, k], y[:, :, k], label=label),
            )
        )
    report.aggregate = SliceRow(
        z_um=None,
        mse=mse(sub_x, sub_y),
        ssim=float(np.mean([row.ssim for row in report.rows])),
        pearson=_guarded(pearson, sub_x, sub_y, label="volume"),
    )
    return report
