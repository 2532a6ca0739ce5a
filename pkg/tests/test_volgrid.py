"""
Tests for grids, containers, transforms and finite differences.
"""

import pytest
import numpy as np

from tvcone.errors import GridMismatchError, HermitianError, NonFiniteError, ParameterError
from tvcone.types import GridSpec
from tvcone.volgrid import (
    Spectrum3,
    SupportMask,
    Volume3,
    div,
    fft3,
    fft3_array,
    grad,
    grad_arrays,
    grad_t_arrays,
    ifft3,
    is_hermitian,
    laplacian_symbol,
    real_ifft3_array,
    reflect,
    symmetrize_mask,
)


class TestGridSpec:
    """Test the grid model."""

    def test_shape_and_pitch(self):
        """Test derived shape, pitch and voxel count."""
        grid = GridSpec(nx=8, ny=6, nz=4, dx=0.1, dy=0.2, dz=0.3)
        assert grid.shape == (8, 6, 4)
        assert grid.pitch == (0.1, 0.2, 0.3)
        assert grid.voxel_count == 192

    def test_frequency_axes(self):
        """Test frequency axes start at DC and span one Nyquist band."""
        grid = GridSpec(nx=8, ny=8, nz=4, dx=0.1, dy=0.1, dz=0.25)
        fx, _, fz = grid.freq_axes()
        assert fx[0] == 0.0
        assert fx[1] == pytest.approx(1.0 / 0.8)
        assert fz.min() == pytest.approx(-2.0)
        assert grid.nyquist()[2] == pytest.approx(2.0)

    def test_coordinates_are_centred(self):
        """Test voxel centre coordinates are symmetric about zero."""
        grid = GridSpec.cube(5, 0.5)
        x, _, _ = grid.coord_axes()
        np.testing.assert_allclose(x, [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_invalid_grid(self):
        """Test small or non-positive grids are rejected."""
        with pytest.raises(ParameterError) as exc_info:
            GridSpec(nx=3, ny=8, nz=8, dx=1, dy=1, dz=1)
        assert exc_info.value.parameter_name == "nx"

        with pytest.raises(ParameterError):
            GridSpec(nx=8, ny=8, nz=8, dx=0.0, dy=1, dz=1)

    def test_grid_is_frozen(self):
        """Test grids cannot be mutated."""
        grid = GridSpec.cube(8, 1.0)
        with pytest.raises(Exception):
            grid.nx = 16


class TestContainers:
    """Test Volume3, Spectrum3 and SupportMask validation."""

    def test_volume_copies_and_freezes(self, small_grid, rng):
        """Test the container owns a read-only copy of its data."""
        data = rng.random(small_grid.shape)
        vol = Volume3(small_grid, data)
        data[0, 0, 0] = 99.0
        assert vol.data[0, 0, 0] != 99.0
        with pytest.raises(ValueError):
            vol.data[0, 0, 0] = 1.0

    def test_shape_mismatch(self, small_grid):
        """Test data must match the grid."""
        with pytest.raises(GridMismatchError):
            Volume3(small_grid, np.zeros((8, 8, 4)))

    def test_non_finite(self, small_grid):
        """Test NaN and inf are rejected."""
        data = np.zeros(small_grid.shape)
        data[1, 2, 3] = np.nan
        with pytest.raises(NonFiniteError):
            Volume3(small_grid, data)

    def test_hermitian_flag(self, small_grid, rng):
        """Test a spectrum flagged Hermitian is checked."""
        spectrum = fft3_array(rng.random(small_grid.shape))
        Spectrum3(small_grid, spectrum, hermitian=True)

        broken = spectrum.copy()
        broken[1, 0, 0] += 1j
        with pytest.raises(HermitianError):
            Spectrum3(small_grid, broken, hermitian=True)

    def test_mask_must_be_symmetric(self, small_grid):
        """Test masks are centrally symmetric and include DC."""
        data = np.zeros(small_grid.shape, dtype=bool)
        data[0, 0, 0] = True
        data[1, 0, 0] = True
        with pytest.raises(HermitianError):
            SupportMask(small_grid, data)

        data[-1, 0, 0] = True
        mask = SupportMask(small_grid, data)
        assert mask.count == 3

        data[0, 0, 0] = False
        with pytest.raises(HermitianError):
            SupportMask(small_grid, data)

    def test_symmetrize_mask(self, small_grid):
        """Test symmetrisation adds the reflection and DC."""
        data = np.zeros(small_grid.shape, dtype=bool)
        data[2, 1, 3] = True
        sym = symmetrize_mask(data)
        assert sym[2, 1, 3] and sym[-2, -1, -3] and sym[0, 0, 0]
        assert sym.sum() == 3
        SupportMask(small_grid, sym)

    def test_symmetrize_mask_idempotent(self, small_grid, rng):
        """Test symmetrising twice changes nothing."""
        data = rng.random(small_grid.shape) < 0.1
        once = symmetrize_mask(data)
        assert np.array_equal(symmetrize_mask(once), once)


class TestTransforms:
    """Test the unitary transforms."""

    def test_parseval(self, small_grid, rng):
        """Test the forward transform preserves the L2 norm."""
        v = Volume3(small_grid, rng.normal(size=small_grid.shape))
        s = fft3(v)
        assert np.linalg.norm(s.data) == pytest.approx(np.linalg.norm(v.data), rel=1e-12)

    def test_inverse(self, small_grid, rng):
        """Test ifft3 undoes fft3."""
        v = Volume3(small_grid, rng.normal(size=small_grid.shape))
        np.testing.assert_allclose(ifft3(fft3(v)).data, v.data, atol=1e-12)

    def test_real_spectrum_is_hermitian(self, small_grid, rng):
        """Test the transform of a real volume is conjugate-symmetric."""
        s = fft3_array(rng.normal(size=small_grid.shape))
        assert is_hermitian(s)
        np.testing.assert_allclose(s, np.conj(reflect(s)), atol=1e-12)

    def test_non_hermitian_inverse_fails(self, small_grid):
        """Test an inverse transform with an imaginary residue is an error."""
        s = np.zeros(small_grid.shape, dtype=complex)
        s[1, 0, 0] = 1.0
        with pytest.raises(HermitianError):
            real_ifft3_array(s)


class TestFiniteDifferences:
    """Test gradient, divergence and the Laplacian symbol."""

    def test_adjoint_identity(self, small_grid, rng):
        """Test <grad u, p> = -<u, div p>."""
        u = Volume3(small_grid, rng.normal(size=small_grid.shape))
        p = [Volume3(small_grid, rng.normal(size=small_grid.shape)) for _ in range(3)]
        lhs = sum(np.sum(g.data * q.data) for g, q in zip(grad(u), p))
        rhs = -np.sum(u.data * div(*p).data)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_gradient_of_constant(self, small_grid):
        """Test a constant volume has zero gradient."""
        for g in grad_arrays(np.full(small_grid.shape, 3.0)):
            assert np.all(g == 0.0)

    def test_periodic_wrap(self, small_grid):
        """Test the forward difference wraps at the last voxel."""
        v = np.zeros(small_grid.shape)
        v[0, 0, 0] = 1.0
        gx, _, _ = grad_arrays(v)
        assert gx[-1, 0, 0] == 1.0
        assert gx[0, 0, 0] == -1.0

    def test_laplacian_symbol_diagonalises(self, rng):
        """Test fft(grad^T grad u) = D * fft(u) on an anisotropic grid."""
        grid = GridSpec(nx=8, ny=6, nz=4, dx=0.1, dy=0.1, dz=0.3)
        u = rng.normal(size=grid.shape)
        lhs = fft3_array(grad_t_arrays(*grad_arrays(u)))
        rhs = laplacian_symbol(grid).data * fft3_array(u)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_laplacian_symbol_range(self, small_grid):
        """Test D is zero at DC and at most 12."""
        d = laplacian_symbol(small_grid).data
        assert d[0, 0, 0] == 0.0
        assert d.min() >= 0.0
        assert d.max() == pytest.approx(12.0)
