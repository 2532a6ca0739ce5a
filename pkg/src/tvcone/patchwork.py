"""
Cropping large volumes into overlapping cubic patches and stitching them back.

Patches are taken at stride offsets from a reflectively padded copy of the
volume. Stitching accumulates window-weighted patches and divides by the
accumulated weight; with the sin^2 window at 50% overlap the interior weight
is exactly one, and in paper_literal mode the weight is the coverage count.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple
import itertools
import logging
import time

import numpy as np

from .errors import CoverageHoleError, GridMismatchError, InputError
from .solver import PatchedReport, SolveReport, regularize
from .types import GridSpec, PatchLayout, SolverParams, WindowMode
from .volgrid import SupportMask, Volume3

logger = logging.getLogger(__name__)

Origin = Tuple[int, int, int]


def window1d(patch: int, mode: WindowMode) -> np.ndarray:
    """Per-axis blending weights: sin^2(pi (t + 0.5) / patch) or all ones."""
    if mode == WindowMode.PAPER_LITERAL:
        return np.ones(patch)
    t = np.arange(patch)
    return np.sin(np.pi * (t + 0.5) / patch) ** 2


def window3(patch: int, mode: WindowMode) -> Volume3:
    """Separable 3D blending window on a patch-sized unit grid."""
    w = window1d(patch, mode)
    grid = GridSpec.cube(patch, 1.0)
    return Volume3(grid, w[:, None, None] * w[None, :, None] * w[None, None, :])


def _offsets(n_padded: int, layout: PatchLayout) -> List[int]:
    return list(range(0, n_padded - layout.patch + 1, layout.stride))


def patch_count(n: int, layout: PatchLayout) -> int:
    """Patches along one axis of length n after padding."""
    before, after = layout.padding_for((n,))[0]
    return (n + before + after - layout.patch) // layout.stride + 1


def _padded_shape(shape: Sequence[int], layout: PatchLayout) -> Tuple[int, ...]:
    return tuple(n + b + a for n, (b, a) in zip(shape, layout.padding_for(shape)))


def extract(vol: Volume3, layout: PatchLayout) -> List[Tuple[Volume3, Origin]]:
    """
    Reflectively pad vol so each axis is patch-coverable and emit every patch
    at stride offsets, in x-major order, with its origin in padded coordinates.
    """
    if min(vol.grid.shape) < layout.patch // 2:
        raise InputError(
            f"volume {vol.grid.shape} is smaller than half a patch ({layout.patch // 2})"
        )
    pads = layout.padding_for(vol.grid.shape)
    padded = np.pad(vol.data, pads, mode="reflect")
    patch_grid = vol.grid.with_shape((layout.patch,) * 3)

    pieces = []
    p = layout.patch
    for ox, oy, oz in itertools.product(*(_offsets(n, layout) for n in padded.shape)):
        pieces.append((Volume3(patch_grid, padded[ox:ox + p, oy:oy + p, oz:oz + p]), (ox, oy, oz)))
    logger.debug(f"Extracted {len(pieces)} patches of {p}^3 from {vol.grid.shape}")
    return pieces


def _accumulate(
    patches: Sequence[Tuple[np.ndarray, Origin]], layout: PatchLayout, shape: Sequence[int]
) -> Tuple[np.ndarray, np.ndarray]:
    padded_shape = _padded_shape(shape, layout)
    canvas = np.zeros(padded_shape)
    weight = np.zeros(padded_shape)
    w = window3(layout.patch, layout.mode).data
    p = layout.patch
    # Fixed accumulation order keeps the result bit-reproducible
    for data, (ox, oy, oz) in patches:
        canvas[ox:ox + p, oy:oy + p, oz:oz + p] += w * data
        weight[ox:ox + p, oy:oy + p, oz:oz + p] += w
    return canvas, weight


def _crop(arr: np.ndarray, layout: PatchLayout, shape: Sequence[int]) -> np.ndarray:
    pads = layout.padding_for(shape)
    return arr[tuple(slice(b, b + n) for n, (b, _) in zip(shape, pads))]


def coverage_weights(layout: PatchLayout, grid: GridSpec) -> np.ndarray:
    """Accumulated window weight per voxel of grid."""
    padded_shape = _padded_shape(grid.shape, layout)
    origins = itertools.product(*(_offsets(n, layout) for n in padded_shape))
    ones = np.ones((layout.patch,) * 3)
    _, weight = _accumulate([(ones, o) for o in origins], layout, grid.shape)
    return _crop(weight, layout, grid.shape)


def stitch(
    patches: Sequence[Tuple[Volume3, Origin]], layout: PatchLayout, grid: GridSpec
) -> Volume3:
    """
    Blend patches back into a volume on grid: weighted sum divided by the
    accumulated weight, then the padding is cropped.
    """
    for vol, _ in patches:
        if vol.grid.shape != (layout.patch,) * 3:
            raise GridMismatchError(f"patch of shape {vol.grid.shape} does not match layout")
    canvas, weight = _accumulate([(v.data, o) for v, o in patches], layout, grid.shape)
    canvas, weight = _crop(canvas, layout, grid.shape), _crop(weight, layout, grid.shape)
    if np.any(weight <= 0):
        hole = tuple(int(i) for i in np.argwhere(weight <= 0)[0])
        raise CoverageHoleError(f"voxel {hole} is not covered by any patch")
    return Volume3(grid, canvas / weight)


def patched_regularize(
    raw: Volume3,
    mask_builder: Callable[[GridSpec], SupportMask],
    params: SolverParams,
    layout: PatchLayout,
    workers: Optional[int] = None,
) -> Tuple[Volume3, PatchedReport]:
    """
    Regularise every patch independently (each with its own patch-sized mask
    of the same geometry) and stitch the results. The report combines the
    per-patch reports in patch order.
    """
    start = time.perf_counter()
    pieces = extract(raw, layout)
    mask = mask_builder(pieces[0][0].grid)
    logger.info(f"Regularising {len(pieces)} patches of {layout.patch}^3 ({layout.mode.value})")

    def solve(piece: Tuple[Volume3, Origin]) -> Tuple[Volume3, Origin, SolveReport]:
        vol, origin = piece
        result, report = regularize(vol, mask, params)
        return result, origin, report

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(solve, pieces))
    else:
        solved = [solve(piece) for piece in pieces]

    stitched = stitch([(vol, origin) for vol, origin, _ in solved], layout, raw.grid)
    report = PatchedReport.combine([r for _, _, r in solved], params, raw.grid)
    report.min_f = float(stitched.data.min())
    report.wall_seconds = time.perf_counter() - start
    return stitched, report
