import itertools

import numpy as np
import pytest

from conftest import dense_sandwich, kron_apply, textured, upsample_shift_reanalyze
from pansrr.core.haar import SubbandSet, analyze_array, haar_analyze
from pansrr.core.raster import ImagePlane
from pansrr.errors import ShiftError
from pansrr.shift.inband import (
    ShiftSpec,
    apply_inband_arrays,
    apply_inband_shift,
    build_operator,
    decompose_shift,
    shift_plane,
    shift_subbands,
)
from pansrr.shift.toeplitz import BidiagonalToeplitz


def _max_error(expected, actual):
    return max(float(np.max(np.abs(x - y))) for x, y in zip(expected, actual))


class TestBidiagonalToeplitz:
    @pytest.mark.parametrize("lower, periodic", itertools.product([True, False], repeat=2))
    def test_stencils_match_dense(self, rng, lower, periodic):
        t = BidiagonalToeplitz(0.3, -0.7, lower, periodic)
        x = rng.standard_normal((6, 5))
        assert np.allclose(t.left_multiply(x), t.dense(6) @ x, atol=1e-14)
        assert np.allclose(t.right_multiply(x), x @ t.dense(5), atol=1e-14)

    def test_transpose(self):
        t = BidiagonalToeplitz(0.25, 0.75, lower=True, periodic=False)
        assert np.array_equal(t.transpose().dense(4), t.dense(4).T)

    def test_lower_dense_layout(self):
        mat = BidiagonalToeplitz(1.0, 2.0, lower=True, periodic=False).dense(3)
        assert mat.tolist() == [[1.0, 0.0, 0.0], [2.0, 1.0, 0.0], [0.0, 2.0, 1.0]]


class TestShiftSpec:
    def test_value_and_scale(self):
        spec = ShiftSpec(h=2, s=3)
        assert spec.value == 0.75
        assert spec.scale == 8.0
        assert spec.is_subpixel()

    def test_rejects_negative_level(self):
        with pytest.raises(ShiftError):
            ShiftSpec(h=-1, s=0)

    def test_operator_requires_subpixel_spec(self):
        with pytest.raises(ShiftError, match="decompose"):
            build_operator(ShiftSpec(0, 2), ShiftSpec(0, 0), 4, 4)

    def test_operator_coefficients(self):
        op = build_operator(ShiftSpec(1, 1), ShiftSpec(1, -1), 4, 4)
        assert (op.fx.diagonal, op.fx.off_diagonal, op.fx.lower) == (0.75, 0.25, True)
        assert (op.k1.diagonal, op.k1.off_diagonal) == (-0.25, 0.25)
        assert (op.k2.diagonal, op.k2.off_diagonal) == (0.25, -0.25)
        # negative vertical shift flips Fy to lower
        assert op.fy.lower is True
        assert (op.l1.diagonal, op.l1.off_diagonal) == (0.25, -0.25)

    def test_dimension_mismatch(self):
        op = build_operator(ShiftSpec(1, 1), ShiftSpec(0, 0), 4, 4)
        with pytest.raises(ShiftError, match="4x4"):
            apply_inband_shift(SubbandSet.zeros(4, 6), op)


class TestDecomposeShift:
    @pytest.mark.parametrize(
        "shift, circular, h, s",
        [
            (0.0, 0, 0, 0),
            (0.5, 0, 1, 1),
            (-0.5, 0, 1, -1),
            (1.0, 0, 0, 1),
            (1.5, 1, 1, -1),
            (2.0, 1, 0, 0),
            (3.0, 1, 0, 1),
            (-1.0, -1, 0, 1),
            (2.25, 1, 2, 1),
        ],
    )
    def test_table(self, shift, circular, h, s):
        result = decompose_shift(shift)
        assert result.circular == circular
        assert (result.subpixel.h, result.subpixel.s) == (h, s)

    def test_dyadic_shifts_recompose_exactly(self):
        for k in range(-64, 65):
            t = k / 8
            assert decompose_shift(t).recomposed == t

    def test_non_dyadic_shift_rounds_to_finest_level(self):
        result = decompose_shift(0.3, h_max=6)
        assert result.subpixel.h == 6
        assert abs(result.recomposed - 0.3) <= 2.0**-7

    def test_remainder_is_always_subpixel(self, rng):
        for t in rng.uniform(-10, 10, size=200):
            assert decompose_shift(t).subpixel.is_subpixel()

    def test_rejects_non_finite(self):
        with pytest.raises(ShiftError):
            decompose_shift(float("nan"))


class TestShiftOracles:
    @pytest.mark.parametrize("dx, dy", itertools.product([0, 2, -2, 4, -4], repeat=2))
    def test_even_integer_shifts_match_circular_shift(self, rng, dx, dy):
        plane = rng.standard_normal((32, 32))
        expected = analyze_array(np.roll(plane, (-dy, -dx), axis=(0, 1)))
        actual = shift_subbands(haar_analyze(ImagePlane(plane)), dx, dy).arrays()
        assert _max_error(expected, actual) < 1e-12

    @pytest.mark.parametrize("dx, dy", [(1, 0), (0, 1), (1, 1), (-1, 3), (5, -3)])
    def test_odd_integer_shifts_match_circular_shift(self, rng, dx, dy):
        plane = rng.standard_normal((32, 32))
        expected = analyze_array(np.roll(plane, (-dy, -dx), axis=(0, 1)))
        actual = shift_subbands(haar_analyze(ImagePlane(plane)), dx, dy).arrays()
        assert _max_error(expected, actual) < 1e-12

    @pytest.mark.parametrize(
        "tx, ty", [(0.5, 0.0), (0.0, 0.5), (0.5, 0.5), (-0.5, 0.5), (1.5, -0.5), (-2.5, 3.5)]
    )
    def test_half_pixel_shifts_match_upsample_shift_reanalyze(self, rng, tx, ty):
        plane = rng.standard_normal((32, 32))
        expected = upsample_shift_reanalyze(plane, tx, ty, levels=1)
        actual = shift_subbands(haar_analyze(ImagePlane(plane)), tx, ty).arrays()
        assert _max_error(expected, actual) < 1e-9

    @pytest.mark.parametrize("tx, ty", [(0.25, 0.0), (0.75, -0.25), (-1.125, 0.375)])
    def test_finer_dyadic_shifts(self, rng, tx, ty):
        plane = rng.standard_normal((16, 16))
        expected = upsample_shift_reanalyze(plane, tx, ty, levels=3)
        actual = shift_subbands(haar_analyze(ImagePlane(plane)), tx, ty).arrays()
        assert _max_error(expected, actual) < 1e-9

    def test_shift_plane_preserves_mean(self):
        plane = ImagePlane(textured((32, 32), seed=5))
        moved = shift_plane(plane, 0.5, -0.25)
        assert moved.shape == plane.shape
        assert np.isclose(moved.samples.mean(), plane.samples.mean(), atol=1e-12)


class TestStructuredOperator:
    def test_stencils_match_dense_bidiagonal_matrices(self, rng):
        m = n = 8
        for _ in range(100):
            specs = []
            for _axis in range(2):
                h = int(rng.integers(0, 5))
                bound = 2 ** (h + 1)
                specs.append(ShiftSpec(h, int(rng.integers(-bound + 1, bound))))
            periodic = bool(rng.integers(0, 2))
            op = build_operator(specs[0], specs[1], m, n, periodic)
            quad = tuple(rng.standard_normal((m, n)) for _ in range(4))
            A, a, b, c = quad
            d = dense_sandwich
            expected = (
                d(op.fy, A, op.fx) + d(op.fy, a, op.k1) + d(op.l1, b, op.fx) + d(op.l1, c, op.k1),
                -d(op.fy, A, op.k1) + d(op.fy, a, op.k2) - d(op.l1, b, op.k1) + d(op.l1, c, op.k2),
                -d(op.l1, A, op.fx) - d(op.l1, a, op.k1) + d(op.l2, b, op.fx) + d(op.l2, c, op.k1),
                d(op.l1, A, op.k1) - d(op.l1, a, op.k2) - d(op.l2, b, op.k1) + d(op.l2, c, op.k2),
            )
            assert _max_error(expected, apply_inband_arrays(quad, op)) < 1e-12

    def test_kronecker_form_matches_sandwich(self, rng):
        op = build_operator(ShiftSpec(2, 3), ShiftSpec(1, -1), 6, 5, periodic=False)
        x = rng.standard_normal((6, 5))
        assert np.allclose(kron_apply(op.fy, x, op.k1), dense_sandwich(op.fy, x, op.k1), atol=1e-12)

    def test_shift_is_linear_in_the_subbands(self, rng):
        op = build_operator(ShiftSpec(2, 3), ShiftSpec(1, -1), 8, 8)
        first = SubbandSet.from_arrays(*(rng.standard_normal((8, 8)) for _ in range(4)))
        second = SubbandSet.from_arrays(*(rng.standard_normal((8, 8)) for _ in range(4)))
        alpha, beta = 0.7, -1.3
        mixed = SubbandSet.from_arrays(
            *(alpha * x + beta * y for x, y in zip(first.arrays(), second.arrays()))
        )
        expected = tuple(
            alpha * x + beta * y
            for x, y in zip(
                apply_inband_shift(first, op).arrays(), apply_inband_shift(second, op).arrays()
            )
        )
        assert _max_error(expected, apply_inband_shift(mixed, op).arrays()) < 1e-12

    def test_horizontal_shift_decouples_vertical_factors(self, rng):
        op = build_operator(ShiftSpec(1, 1), ShiftSpec(0, 0), 8, 8)
        assert np.array_equal(op.fy.dense(8), np.eye(8))
        assert np.array_equal(op.l1.dense(8), np.zeros((8, 8)))
        A, a, b, c = (rng.standard_normal((8, 8)) for _ in range(4))
        one = apply_inband_arrays((A, a, b, c), op)
        other = apply_inband_arrays((A, a, rng.standard_normal((8, 8)), c), op)
        # approximation and horizontal detail never see b
        assert np.array_equal(one[0], other[0])
        assert np.array_equal(one[1], other[1])
