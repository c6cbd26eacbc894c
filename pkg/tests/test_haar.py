import numpy as np
import pytest

from pansrr.core.haar import (
    APPROXIMATION_GAIN,
    SubbandSet,
    analyze_levels,
    circular_shift_subbands,
    expand_to_grid,
    haar_analyze,
    haar_synthesize,
    synthesize_levels,
    upsample_via_zero_details,
)
from pansrr.core.raster import ImagePlane
from pansrr.errors import TransformError


class TestRoundTrip:
    def test_random_planes(self, rng):
        for _ in range(200):
            h, w = 2 * rng.integers(1, 33, size=2)
            plane = ImagePlane(rng.uniform(-1, 1, size=(h, w)))
            restored = haar_synthesize(haar_analyze(plane))
            assert np.max(np.abs(restored.samples - plane.samples)) < 1e-12

    def test_energy_is_preserved(self, texture):
        total = float(np.sum(texture.samples**2))
        assert np.isclose(haar_analyze(texture).energy(), total, rtol=1e-12)

    def test_block_formulas(self):
        plane = ImagePlane(np.array([[1.0, 2.0], [3.0, 4.0]]))
        sub = haar_analyze(plane)
        assert sub.A.samples[0, 0] == pytest.approx(5.0)
        assert sub.a.samples[0, 0] == pytest.approx(-1.0)
        assert sub.b.samples[0, 0] == pytest.approx(-2.0)
        assert sub.c.samples[0, 0] == pytest.approx(0.0)

    def test_constant_plane_has_no_detail(self):
        sub = haar_analyze(ImagePlane(np.full((4, 6), 0.3)))
        assert np.allclose(sub.A.samples, APPROXIMATION_GAIN * 0.3)
        for d in sub.details():
            assert np.allclose(d.samples, 0.0)


class TestPreconditions:
    @pytest.mark.parametrize("shape, axis", [((3, 4), "height"), ((4, 5), "width")])
    def test_odd_dimension_names_axis(self, shape, axis):
        with pytest.raises(TransformError, match=axis):
            haar_analyze(ImagePlane(np.zeros(shape)))

    def test_subband_shapes_must_agree(self):
        with pytest.raises(TransformError, match="disagree"):
            SubbandSet.from_arrays(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


class TestUpsampling:
    def test_zero_detail_upsample_inverts_approximation(self, texture):
        up = upsample_via_zero_details(texture)
        assert up.shape == (64, 64)
        assert np.allclose(haar_analyze(up).A.samples, texture.samples, atol=1e-12)

    def test_expand_to_grid_replicates_values(self):
        plane = ImagePlane(np.array([[1.0, 2.0]]))
        expanded = expand_to_grid(plane, 2)
        assert expanded.shape == (4, 8)
        assert np.allclose(expanded.samples[:, :4], 1.0)
        assert np.allclose(expanded.samples[:, 4:], 2.0)


class TestMultiLevel:
    def test_round_trip(self, texture):
        approximation, details = analyze_levels(texture, 3)
        assert approximation.shape == (4, 4)
        assert [d.shape for d in details] == [(16, 16), (8, 8), (4, 4)]
        restored = synthesize_levels(approximation, details)
        assert np.allclose(restored.samples, texture.samples, atol=1e-12)

    def test_depth_must_divide_dimensions(self):
        with pytest.raises(TransformError, match="divisible by 8"):
            analyze_levels(ImagePlane(np.zeros((12, 16))), 3)


class TestCircularShift:
    def test_even_plane_shift_is_subband_roll(self, texture):
        shifted_plane = ImagePlane(np.roll(texture.samples, (-4, -2), axis=(0, 1)))
        expected = haar_analyze(shifted_plane)
        actual = circular_shift_subbands(haar_analyze(texture), dx=1, dy=2)
        for x, y in zip(expected.arrays(), actual.arrays()):
            assert np.allclose(x, y, atol=1e-12)
