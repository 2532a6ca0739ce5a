"""
Grid, volume and spectrum containers with the unitary Fourier transforms and
periodic finite differences every other module builds on.

Arrays have shape (nx, ny, nz) and are indexed [x, y, z]. All transforms use
the unitary ("ortho") normalisation, so the adjoint of the masked transform is
its zero-filled inverse.
"""

from dataclasses import dataclass, field
from typing import Tuple
import logging

import numpy as np
import scipy.fft

from .errors import GridMismatchError, HermitianError, NonFiniteError
from .types import GridSpec

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-6
IMAG_RESIDUE_RTOL = 1e-5


def _frozen_copy(data, dtype) -> np.ndarray:
    arr = np.array(data, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_shape(grid: GridSpec, data: np.ndarray, what: str) -> None:
    if data.shape != grid.shape:
        raise GridMismatchError(f"{what} has shape {data.shape}, grid expects {grid.shape}")


@dataclass(frozen=True)
class Volume3:
    """Real scalar field (delta-n or scattering potential) on a grid."""

    grid: GridSpec
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _frozen_copy(self.data, np.float64)
        _check_shape(self.grid, arr, "volume")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("volume holds non-finite values")
        object.__setattr__(self, "data", arr)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Volume3":
        return cls(grid, np.zeros(grid.shape))

    def with_data(self, data: np.ndarray) -> "Volume3":
        return Volume3(self.grid, data)


@dataclass(frozen=True)
class Spectrum3:
    """Complex Fourier-domain array; DC at index (0, 0, 0)."""

    grid: GridSpec
    data: np.ndarray = field(repr=False)
    hermitian: bool = False

    def __post_init__(self):
        arr = _frozen_copy(self.data, np.complex128)
        _check_shape(self.grid, arr, "spectrum")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("spectrum holds non-finite values")
        if self.hermitian and not is_hermitian(arr):
            raise HermitianError("spectrum flagged hermitian is not conjugate-symmetric")
        object.__setattr__(self, "data", arr)


@dataclass(frozen=True)
class SupportMask:
    """Boolean indicator of measured frequencies; centrally symmetric."""

    grid: GridSpec
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _frozen_copy(self.data, bool)
        _check_shape(self.grid, arr, "mask")
        if not np.array_equal(arr, reflect(arr)):
            raise HermitianError("support mask is not centrally symmetric")
        if arr.any() and not arr[0, 0, 0]:
            raise HermitianError("support mask with measured frequencies must include DC")
        object.__setattr__(self, "data", arr)

    @classmethod
    def full(cls, grid: GridSpec) -> "SupportMask":
        return cls(grid, np.ones(grid.shape, dtype=bool))

    @property
    def count(self) -> int:
        return int(self.data.sum())

    @property
    def fraction(self) -> float:
        return self.count / self.grid.voxel_count


def reflect(data: np.ndarray) -> np.ndarray:
    """Return data(-k mod N) for every index k."""
    return np.roll(np.flip(data), 1, axis=tuple(range(data.ndim)))


def is_hermitian(data: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    """True when data(k) = conj(data(-k mod N)) within rtol of the peak magnitude."""
    scale = float(np.max(np.abs(data))) if data.size else 0.0
    if scale == 0.0:
        return True
    return float(np.max(np.abs(data - np.conj(reflect(data))))) <= rtol * scale


def symmetrize_mask(data: np.ndarray) -> np.ndarray:
    """Union of a boolean mask with its point reflection, DC forced on when non-empty."""
    sym = np.logical_or(data, reflect(data))
    if sym.any():
        sym[0, 0, 0] = True
    return sym


def require_same_grid(*items) -> GridSpec:
    """Return the common grid of volumes/spectra/masks or raise GridMismatchError."""
    grid = items[0].grid
    for item in items[1:]:
        if item.grid != grid:
            raise GridMismatchError(f"grid mismatch: {item.grid} vs {grid}")
    return grid


def fft3_array(data: np.ndarray) -> np.ndarray:
    return scipy.fft.fftn(data, norm="ortho")


def real_ifft3_array(data: np.ndarray, rtol: float = IMAG_RESIDUE_RTOL) -> np.ndarray:
    """Unitary inverse transform of a Hermitian spectrum, imaginary residue checked."""
    out = scipy.fft.ifftn(data, norm="ortho")
    peak_real = float(np.max(np.abs(out.real))) if out.size else 0.0
    peak_imag = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if peak_imag > rtol * peak_real and peak_imag > 1e-300:
        raise HermitianError(
            f"inverse transform is not real: imaginary residue {peak_imag:.3g} "
            f"vs real peak {peak_real:.3g}"
        )
    return np.ascontiguousarray(out.real)


def fft3(v: Volume3) -> Spectrum3:
    """Unitary forward 3D transform of a real volume."""
    return Spectrum3(v.grid, fft3_array(v.data), hermitian=True)


def ifft3(s: Spectrum3) -> Volume3:
    """Unitary inverse 3D transform; the result must be real."""
    return Volume3(s.grid, real_ifft3_array(s.data))


def grad_arrays(v: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Forward differences with periodic wrap, one array per axis."""
    return tuple(np.roll(v, -1, axis=a) - v for a in range(3))


def div_arrays(px: np.ndarray, py: np.ndarray, pz: np.ndarray) -> np.ndarray:
    """Negative adjoint of grad_arrays (periodic backward differences)."""
    out = px - np.roll(px, 1, axis=0)
    out += py - np.roll(py, 1, axis=1)
    out += pz - np.roll(pz, 1, axis=2)
    return out


def grad_t_arrays(px: np.ndarray, py: np.ndarray, pz: np.ndarray) -> np.ndarray:
    """Adjoint of grad_arrays: sum of the per-axis transposed differences."""
    return -div_arrays(px, py, pz)


def grad(v: Volume3) -> Tuple[Volume3, Volume3, Volume3]:
    """Forward-difference gradient with periodic boundaries."""
    return tuple(Volume3(v.grid, g) for g in grad_arrays(v.data))


def div(gx: Volume3, gy: Volume3, gz: Volume3) -> Volume3:
    """Divergence satisfying <grad(u), p> = -<u, div(p)>."""
    grid = require_same_grid(gx, gy, gz)
    return Volume3(grid, div_arrays(gx.data, gy.data, gz.data))


def laplacian_symbol_array(grid: GridSpec) -> np.ndarray:
    """Fourier multiplier of grad^T grad: sum over axes of 2 - 2cos(2 pi k / N)."""
    terms = [2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(n) / n) for n in grid.shape]
    return terms[0][:, None, None] + terms[1][None, :, None] + terms[2][None, None, :]


def laplacian_symbol(grid: GridSpec) -> Volume3:
    """Non-negative Fourier multiplier D(k) of the operator grad^T grad."""
    return Volume3(grid, laplacian_symbol_array(grid))
