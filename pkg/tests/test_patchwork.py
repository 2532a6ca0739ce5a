"""
Tests for patch extraction, blending windows and stitching.
"""

import math

import pytest
import numpy as np

from tvcone.errors import CoverageHoleError, InputError, ParameterError
from tvcone.optics import build_support_mask, degrade, missing_cone_mask
from tvcone.phantoms import default_bead, generate
from tvcone.patchwork import (
    coverage_weights,
    extract,
    patch_count,
    patched_regularize,
    stitch,
    window1d,
    window3,
)
from tvcone.solver import regularize
from tvcone.types import GridSpec, PatchLayout, SolverParams, WindowMode
from tvcone.volgrid import Volume3


def random_volume(n, rng):
    grid = GridSpec(nx=n, ny=n, nz=n, dx=0.1, dy=0.1, dz=0.2)
    return Volume3(grid, rng.normal(size=grid.shape))


class TestLayout:
    """Test patch layout validation and padding."""

    def test_defaults(self):
        """Test 64^3 patches at stride 32."""
        layout = PatchLayout()
        assert (layout.patch, layout.stride, layout.overlap) == (64, 32, 32)
        assert layout.mode == WindowMode.PARTITION_OF_UNITY

    def test_invalid(self):
        """Test stride above patch and odd patches are rejected."""
        with pytest.raises(ParameterError):
            PatchLayout(patch=32, stride=48)
        with pytest.raises(ParameterError):
            PatchLayout(patch=33, stride=16)

    def test_padding(self):
        """Test padding makes every axis coverable."""
        layout = PatchLayout()
        assert layout.padding_for((96, 128, 64)) == ((0, 0), (0, 0), (0, 0))
        assert layout.padding_for((80,)) == ((8, 8),)
        assert layout.padding_for((40,)) == ((12, 12),)
        assert patch_count(96, layout) == 2
        assert patch_count(128, layout) == 3
        assert patch_count(80, layout) == 2

    def test_patch_count_enumeration(self):
        """Test the per-axis count against enumerated origins for every size 64-192."""
        layout = PatchLayout()
        for n in range(64, 193):
            before, after = layout.padding_for((n,))[0]
            padded = n + before + after
            origins = [o for o in range(padded) if o % layout.stride == 0 and o + layout.patch <= padded]
            assert patch_count(n, layout) == len(origins), n
            assert origins[-1] + layout.patch == padded, n
            assert padded % layout.stride == 0, n

    @pytest.mark.parametrize("n", [64, 65, 97, 130, 192])
    def test_extract_count(self, n, rng):
        """Test extract emits the counted number of patches."""
        grid = GridSpec(nx=n, ny=32, nz=32, dx=0.1, dy=0.1, dz=0.2)
        vol = Volume3(grid, rng.normal(size=grid.shape))
        layout = PatchLayout()
        assert len(extract(vol, layout)) == patch_count(n, layout) * patch_count(32, layout) ** 2


class TestWindow:
    """Test the blending windows."""

    def test_partition_of_unity_1d(self):
        """Test shifted sin^2 windows sum to one."""
        w = window1d(64, WindowMode.PARTITION_OF_UNITY)
        np.testing.assert_allclose(w[:32] + w[32:], 1.0, atol=1e-12)
        assert w.min() > 0

    def test_separable(self):
        """Test the 3D window is the product of 1D windows."""
        w1 = window1d(8, WindowMode.PARTITION_OF_UNITY)
        w3 = window3(8, WindowMode.PARTITION_OF_UNITY).data
        assert w3[2, 5, 7] == pytest.approx(w1[2] * w1[5] * w1[7])

    def test_symmetric(self):
        """Test w(t) = w(patch - 1 - t) in 1D and under a full flip in 3D."""
        w1 = window1d(64, WindowMode.PARTITION_OF_UNITY)
        np.testing.assert_allclose(w1, w1[::-1], atol=1e-15)
        w3 = window3(8, WindowMode.PARTITION_OF_UNITY).data
        np.testing.assert_allclose(w3, np.flip(w3), atol=1e-15)

    def test_scalar_weight(self):
        """Test one 3D weight against a hand evaluation."""
        w3 = window3(8, WindowMode.PARTITION_OF_UNITY).data
        expected = (
            math.sin(math.pi * 4.5 / 8) ** 2
            * math.sin(math.pi * 3.5 / 8) ** 2
            * math.sin(math.pi * 0.5 / 8) ** 2
        )
        assert w3[4, 3, 0] == pytest.approx(expected, rel=1e-12)

    def test_paper_literal_is_uniform(self):
        """Test the uniform window."""
        assert np.all(window3(8, WindowMode.PAPER_LITERAL).data == 1.0)


class TestExtractStitch:
    """Test the extract/stitch round trip."""

    @pytest.mark.parametrize("n", [96, 128])
    @pytest.mark.parametrize("mode", list(WindowMode))
    def test_round_trip(self, n, mode, rng):
        """Test stitching unmodified patches reproduces the volume."""
        vol = random_volume(n, rng)
        layout = PatchLayout(mode=mode)
        pieces = extract(vol, layout)
        assert len(pieces) == patch_count(n, layout) ** 3
        out = stitch(pieces, layout, vol.grid)
        np.testing.assert_allclose(out.data, vol.data, rtol=1e-6, atol=1e-12)

    @pytest.mark.parametrize("n", [40, 80])
    def test_round_trip_with_padding(self, n, rng):
        """Test volumes that need reflective padding."""
        vol = random_volume(n, rng)
        layout = PatchLayout()
        out = stitch(extract(vol, layout), layout, vol.grid)
        np.testing.assert_allclose(out.data, vol.data, rtol=1e-6, atol=1e-12)

    @pytest.mark.parametrize("mode", list(WindowMode))
    def test_tiling_round_trip(self, mode, rng):
        """Test stride = patch tiles the volume without overlap and still round-trips."""
        vol = random_volume(32, rng)
        layout = PatchLayout(patch=16, stride=16, mode=mode)
        pieces = extract(vol, layout)
        assert len(pieces) == 8
        out = stitch(pieces, layout, vol.grid)
        np.testing.assert_allclose(out.data, vol.data, rtol=1e-6, atol=1e-12)

    def test_two_patch_blend(self):
        """Test overlap voxels of two patches are w * a + (1 - w) * b."""
        grid = GridSpec(nx=12, ny=8, nz=8, dx=0.1, dy=0.1, dz=0.1)
        patch_grid = grid.with_shape((8, 8, 8))
        a = Volume3(patch_grid, np.full(patch_grid.shape, 1.0))
        b = Volume3(patch_grid, np.full(patch_grid.shape, 3.0))
        out = stitch([(a, (0, 0, 0)), (b, (4, 0, 0))], PatchLayout(patch=8, stride=4), grid)

        for x in range(12):
            if x < 4:
                expected = 1.0
            elif x >= 8:
                expected = 3.0
            else:
                w = math.sin(math.pi * (x + 0.5) / 8) ** 2
                expected = w * 1.0 + (1.0 - w) * 3.0
            np.testing.assert_allclose(out.data[x], expected, rtol=1e-12)

    def test_interior_weight_is_one(self):
        """Test the partition-of-unity weight canvas is 1 in the interior."""
        grid = GridSpec.cube(128, 0.1)
        weights = coverage_weights(PatchLayout(), grid)
        interior = weights[32:96, 32:96, 32:96]
        np.testing.assert_allclose(interior, 1.0, atol=1e-10)

    def test_paper_literal_counts_coverage(self):
        """Test uniform weights count how many patches cover each voxel."""
        grid = GridSpec.cube(128, 0.1)
        weights = coverage_weights(PatchLayout(mode=WindowMode.PAPER_LITERAL), grid)
        assert weights[64, 64, 64] == 8.0
        assert weights[0, 0, 0] == 1.0
        assert weights[0, 64, 64] == 4.0

    def test_patch_origins(self, rng):
        """Test origins sit on stride multiples in x-major order."""
        vol = random_volume(96, rng)
        pieces = extract(vol, PatchLayout())
        origins = [origin for _, origin in pieces]
        assert origins[0] == (0, 0, 0)
        assert origins[1] == (0, 0, 32)
        assert origins[-1] == (32, 32, 32)
        np.testing.assert_array_equal(pieces[-1][0].data, vol.data[32:, 32:, 32:])

    def test_coverage_hole(self, rng):
        """Test a missing patch leaves an uncovered voxel."""
        vol = random_volume(128, rng)
        layout = PatchLayout()
        pieces = extract(vol, layout)
        with pytest.raises(CoverageHoleError):
            stitch(pieces[1:], layout, vol.grid)

    def test_too_small(self, rng):
        """Test volumes below half a patch are rejected."""
        vol = random_volume(16, rng)
        with pytest.raises(InputError):
            extract(vol, PatchLayout())


class TestPatchedRegularize:
    """Test patch-wise regularisation."""

    def test_single_patch_matches_whole(self, cone_problem):
        """Test one patch covering the volume reproduces the whole-volume solve."""
        _, mask, spectrum = cone_problem
        raw = Volume3(mask.grid, np.fft.ifftn(spectrum.data, norm="ortho").real)
        params = SolverParams(n_outer=1, n_inner=20, mu=10, tau=5, gamma=1)
        layout = PatchLayout(patch=8, stride=8)

        whole, _ = regularize(raw, mask, params)
        patched, _ = patched_regularize(raw, lambda grid: mask, params, layout)
        np.testing.assert_allclose(patched.data, whole.data, rtol=1e-12, atol=1e-14)

    def test_homogeneous_matches_whole(self):
        """Test a uniform volume gives the same result patch-wise and whole."""
        grid = GridSpec.cube(24, 1.0)
        raw = Volume3(grid, np.full(grid.shape, 0.05))
        params = SolverParams(n_outer=2, n_inner=10, mu=10, tau=5, gamma=1)

        whole, _ = regularize(raw, missing_cone_mask(grid, 30.0), params)
        patched, report = patched_regularize(
            raw, lambda g: missing_cone_mask(g, 30.0), params, PatchLayout(patch=16, stride=8)
        )
        assert report.patches == 8
        np.testing.assert_allclose(patched.data, whole.data, atol=1e-6)
        np.testing.assert_allclose(patched.data, patched.data.mean(), atol=1e-9)

    def test_report_combines_patches(self, rng):
        """Test residuals combine as a root sum of squares and timings as sums."""
        grid = GridSpec.cube(24, 1.0)
        raw = Volume3(grid, rng.random(grid.shape))
        params = SolverParams(n_outer=2, n_inner=5, mu=10, tau=5, gamma=1)
        layout = PatchLayout(patch=16, stride=8)

        result, report = patched_regularize(raw, lambda g: missing_cone_mask(g, 30.0), params, layout)
        mask = missing_cone_mask(GridSpec.cube(16, 1.0), 30.0)
        singles = [regularize(vol, mask, params)[1] for vol, _ in extract(raw, layout)]

        assert report.patches == len(singles) == 8
        assert len(report.residuals) == 2
        assert len(report.objectives) == 10
        for i in range(2):
            expected = math.sqrt(sum(r.residuals[i] ** 2 for r in singles))
            assert report.residuals[i] == pytest.approx(expected, rel=1e-12)
        assert report.objectives[-1] == pytest.approx(sum(r.objectives[-1] for r in singles), rel=1e-12)
        assert set(report.timings) == {"f_update", "shrinkage", "bookkeeping"}
        assert report.total_phase_seconds <= report.wall_seconds + 1e-6
        assert report.min_f == result.data.min()

        summary = report.to_dict()
        assert summary["patches"] == 8
        assert summary["params"]["n_inner"] == 5

    @pytest.mark.slow
    def test_bead_close_to_whole(self, optics):
        """Test the patch-wise 128^3 bead stays within 5% of the whole-volume solve."""
        grid = GridSpec(nx=128, ny=128, nz=128, dx=0.1, dy=0.1, dz=0.2)
        mask = build_support_mask(optics, grid, workers=4)
        _, raw = degrade(generate(default_bead(), grid), mask)
        params = SolverParams(n_outer=2, n_inner=100, mu=10, tau=10, gamma=1)

        whole, _ = regularize(raw, mask, params)
        patched, report = patched_regularize(
            raw, lambda g: build_support_mask(optics, g), params, PatchLayout(), workers=4
        )
        assert report.patches == 27
        error = np.linalg.norm(patched.data - whole.data) / np.linalg.norm(whole.data)
        assert error <= 0.05

    def test_workers_are_deterministic(self, rng):
        """Test threaded patch solves give bit-identical output."""
        grid = GridSpec.cube(24, 1.0)
        raw = Volume3(grid, rng.random(grid.shape))
        params = SolverParams(n_outer=1, n_inner=5, mu=10, tau=5, gamma=1)
        layout = PatchLayout(patch=16, stride=8)

        def builder(patch_grid):
            return missing_cone_mask(patch_grid, 30.0)

        serial, _ = patched_regularize(raw, builder, params, layout, workers=1)
        threaded, _ = patched_regularize(raw, builder, params, layout, workers=4)
        assert np.array_equal(serial.data, threaded.data)
