"""
tvcone Types - Validated parameter models shared by the library and config files
"""

from typing import Any, List, Optional, Tuple
from enum import Enum
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ParameterError


class FrozenModel(BaseModel):
    """
    Immutable model that rejects unknown fields and reports ParameterError.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    def __init__(self, **data: Any):
        try:
            super().__init__(**data)
        except ValidationError as e:
            first = e.errors()[0]
            name = ".".join(str(part) for part in first.get("loc", ())) or None
            raise ParameterError(
                f"{type(self).__name__}: {first.get('msg', e)}", parameter_name=name
            ) from e


class GridSpec(FrozenModel):
    """
    Uniform voxel grid. Arrays on this grid have shape (nx, ny, nz) and are
    indexed [x, y, z].
    """
    nx: int = Field(..., ge=4, description="Voxel count along x")
    ny: int = Field(..., ge=4, description="Voxel count along y")
    nz: int = Field(..., ge=4, description="Voxel count along z (optical axis)")
    dx: float = Field(..., gt=0, description="Voxel pitch along x in micrometers")
    dy: float = Field(..., gt=0, description="Voxel pitch along y in micrometers")
    dz: float = Field(..., gt=0, description="Voxel pitch along z in micrometers")

    @classmethod
    def cube(cls, n: int, pitch: float) -> "GridSpec":
        """Isotropic n³ grid."""
        return cls(nx=n, ny=n, nz=n, dx=pitch, dy=pitch, dz=pitch)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def pitch(self) -> Tuple[float, float, float]:
        return (self.dx, self.dy, self.dz)

    @property
    def voxel_count(self) -> int:
        return self.nx * self.ny * self.nz

    def with_shape(self, shape: Tuple[int, int, int]) -> "GridSpec":
        """Same pitch, different voxel counts."""
        nx, ny, nz = shape
        return GridSpec(nx=nx, ny=ny, nz=nz, dx=self.dx, dy=self.dy, dz=self.dz)

    def freq_axes(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Frequency coordinates per axis in cycles/um, DC at index 0."""
        return tuple(np.fft.fftfreq(n, d) for n, d in zip(self.shape, self.pitch))

    def freq_pitch(self) -> Tuple[float, float, float]:
        """Spacing between neighbouring frequency voxels in cycles/um."""
        return tuple(1.0 / (n * d) for n, d in zip(self.shape, self.pitch))

    def coord_axes(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Voxel centre coordinates per axis in um; the grid is centred on 0."""
        return tuple(
            (np.arange(n) - (n - 1) / 2.0) * d for n, d in zip(self.shape, self.pitch)
        )

    def nyquist(self) -> Tuple[float, float, float]:
        return tuple(1.0 / (2.0 * d) for d in self.pitch)


class IlluminationPattern(str, Enum):
    """
    Supported illumination scan patterns.
    """
    CIRCLE = "circle"
    SPIRAL = "spiral"
    CUSTOM = "custom"


class OpticsGeometry(FrozenModel):
    """
    Acquisition geometry of a transmission ODT system.
    """
    wavelength: float = Field(default=0.532, gt=0, description="Vacuum wavelength in um")
    n_medium: float = Field(default=1.337, gt=0, description="Immersion medium refractive index")
    na_illum: float = Field(default=1.2, gt=0, description="Condenser numerical aperture")
    na_detect: float = Field(default=1.2, gt=0, description="Imaging numerical aperture")
    n_angles: int = Field(default=49, ge=1, description="Number of illumination directions")
    illum_pattern: IlluminationPattern = Field(
        default=IlluminationPattern.CIRCLE, description="Illumination scan pattern"
    )
    directions: Optional[List[Tuple[float, float, float]]] = Field(
        default=None, description="Unit illumination vectors for the custom pattern"
    )

    @model_validator(mode="after")
    def _check_apertures(self) -> "OpticsGeometry":
        if self.na_illum > self.n_medium:
            raise ValueError("na_illum must not exceed n_medium")
        if self.na_detect > self.n_medium:
            raise ValueError("na_detect must not exceed n_medium")
        if self.illum_pattern == IlluminationPattern.CUSTOM:
            if not self.directions:
                raise ValueError("custom illumination needs a directions list")
            if len(self.directions) != self.n_angles:
                raise ValueError("n_angles must equal the number of custom directions")
            for u in self.directions:
                norm = math.sqrt(sum(c * c for c in u))
                if abs(norm - 1.0) > 1e-6:
                    raise ValueError(f"direction {u} is not a unit vector")
                if u[2] <= 0:
                    raise ValueError(f"direction {u} does not point along +z")
                if math.hypot(u[0], u[1]) * self.n_medium > self.na_illum + 1e-9:
                    raise ValueError(f"direction {u} exceeds the illumination NA")
        elif self.directions is not None:
            raise ValueError("directions are only accepted with the custom pattern")
        return self


class PhantomKind(str, Enum):
    SPHERE = "sphere"
    SPHERE_PAIR = "sphere_pair"
    SHELL_CELL = "shell_cell"


class EdgeProfile(str, Enum):
    HARD = "hard"
    SMOOTHED = "smoothed"


_SHAPE_COUNTS = {
    PhantomKind.SPHERE: (1, 1),
    PhantomKind.SPHERE_PAIR: (2, 2),
    PhantomKind.SHELL_CELL: (1, 2),
}


class PhantomSpec(FrozenModel):
    """
    Synthetic refractive-index contrast phantom.

    shell_cell: radii = [outer, inner], contrasts = [body, interior excess];
    granules of granule_radius are scattered inside the inner sphere.
    """
    kind: PhantomKind = Field(default=PhantomKind.SPHERE, description="Phantom family")
    centers: List[Tuple[float, float, float]] = Field(
        default_factory=lambda: [(0.0, 0.0, 0.0)], description="Shape centres in um"
    )
    radii: List[float] = Field(default_factory=lambda: [1.0], description="Radii in um")
    contrasts: List[float] = Field(
        default_factory=lambda: [0.12], description="Delta-n per shape"
    )
    background: float = Field(default=0.0, description="Delta-n of the medium")
    edge: EdgeProfile = Field(default=EdgeProfile.HARD, description="Edge profile")
    edge_width: float = Field(default=1.0, gt=0, description="Ramp width in voxels")
    n_granules: int = Field(default=0, ge=0, description="Granules inside a shell_cell")
    granule_radius: float = Field(default=0.15, gt=0, description="Granule radius in um")
    granule_contrast: float = Field(default=0.03, description="Granule delta-n excess")
    seed: int = Field(default=0, ge=0, description="Seed for granule placement")

    @model_validator(mode="after")
    def _check_counts(self) -> "PhantomSpec":
        n_centers, n_shapes = _SHAPE_COUNTS[self.kind]
        if len(self.centers) != n_centers:
            raise ValueError(f"{self.kind.value} needs {n_centers} centre(s)")
        if len(self.radii) != n_shapes or len(self.contrasts) != n_shapes:
            raise ValueError(f"{self.kind.value} needs {n_shapes} radii and contrasts")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")
        if self.kind == PhantomKind.SHELL_CELL and self.radii[1] >= self.radii[0]:
            raise ValueError("shell_cell inner radius must be below the outer radius")
        if self.n_granules and self.kind != PhantomKind.SHELL_CELL:
            raise ValueError("granules are only placed in shell_cell phantoms")
        if self.n_granules and self.granule_radius >= self.radii[-1]:
            raise ValueError("granule_radius must be below the inner radius")
        return self


class NonnegMode(str, Enum):
    """
    How the non-negativity split variable is updated.
    """
    PAPER_SHRINK = "paper_shrink"
    PROJECT = "project"


class SolverParams(FrozenModel):
    """
    Split Bregman parameters (N, M, mu, tau, gamma).
    """
    n_outer: int = Field(..., ge=1, description="Outer (Bregman) iterations N")
    n_inner: int = Field(..., ge=1, description="Inner iterations M")
    mu: float = Field(..., gt=0, description="Data fidelity weight")
    tau: float = Field(..., gt=0, description="TV splitting weight (lambda)")
    gamma: float = Field(..., gt=0, description="Non-negativity splitting weight")
    nonneg_mode: NonnegMode = Field(default=NonnegMode.PROJECT, description="Non-negativity update")
    tol_fupdate: float = Field(
        default=0.0, ge=0, lt=1, description="CG relative residual for the f-solve; 0 solves exactly"
    )

    def as_tuple(self) -> Tuple[int, int, float, float, float]:
        return (self.n_outer, self.n_inner, self.mu, self.tau, self.gamma)


class WindowMode(str, Enum):
    PAPER_LITERAL = "paper_literal"
    PARTITION_OF_UNITY = "partition_of_unity"


class PatchLayout(FrozenModel):
    """
    Patch size, stride and blending used to tile large volumes.
    """
    patch: int = Field(default=64, ge=4, description="Patch edge length in voxels")
    stride: int = Field(default=32, ge=1, description="Offset between patches in voxels")
    mode: WindowMode = Field(default=WindowMode.PARTITION_OF_UNITY, description="Blending mode")

    @model_validator(mode="after")
    def _check_stride(self) -> "PatchLayout":
        if self.stride > self.patch:
            raise ValueError("stride must not exceed patch")
        if self.patch % 2:
            raise ValueError("patch must be even")
        return self

    @property
    def overlap(self) -> int:
        return self.patch - self.stride

    def padding_for(self, shape: Tuple[int, ...]) -> Tuple[Tuple[int, int], ...]:
        """Reflective (before, after) pad per axis so the axis is patch-coverable."""
        pads = []
        for n in shape:
            if n <= self.patch:
                total = self.patch - n
            else:
                total = (-(n - self.patch)) % self.stride
            pads.append((total // 2, total - total // 2))
        return tuple(pads)
