import math

import pytest

from simsched.core import (
    INF, LoadVector, Tolerance, c_of, concat, coord_dominates, is_regular, prefix_dominates,
    prefix_sums, ratio, ratio_c_pair, ratio_s_envelope, ratio_s_pair, sorted_desc, sorted_prefix_sums,
)
from simsched.errors import DimensionError, InfeasibleError, ValidationError


class TestLoadVector:
    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            LoadVector([])

    def test_rejects_negative_and_infinite(self):
        with pytest.raises(ValidationError):
            LoadVector([1.0, -0.5])
        with pytest.raises(ValidationError):
            LoadVector([INF])

    def test_conveniences(self):
        x = LoadVector([3, 1, 2])
        assert x.m == 3
        assert x.total == 6
        assert x.makespan == 3
        assert x.cover == 1
        assert list(x) == [3.0, 1.0, 2.0]


class TestTolerance:
    def test_defaults(self):
        tol = Tolerance()
        assert tol.abs_eps == 1e-12
        assert tol.rel_eps == 1e-9

    def test_invalid(self):
        with pytest.raises(ValidationError):
            Tolerance(-1.0, 0.0)
        with pytest.raises(ValidationError):
            Tolerance(0.0, math.nan)

    def test_exact_comparisons(self):
        exact = Tolerance.exact()
        assert exact.le(2, 2)
        assert not exact.le(2 + 1e-15, 2)
        assert Tolerance().le(2 + 1e-15, 2)


@pytest.mark.parametrize("x, expected", [
    ((1, 3, 2), (3, 2, 1)),
    ((5, 5, 5), (5, 5, 5)),
    ((0, 4), (4, 0)),
])
def test_sorted_desc(x, expected):
    assert sorted_desc(x).loads == expected


@pytest.mark.parametrize("x, expected", [
    ((3, 2, 1), [3, 5, 6]),
    ((0, 0), [0, 0]),
    ((4, 0), [4, 4]),
])
def test_prefix_sums(x, expected):
    assert prefix_sums(x) == expected


def test_sorted_prefix_sums_sort_first():
    assert sorted_prefix_sums((1, 3)) == [3, 4]


def test_ratio_zero_conventions():
    assert ratio(0, 0) == 0
    assert ratio(2, 0) == INF
    assert ratio(3, 2) == 1.5


class TestDominance:
    def test_coord(self):
        assert not coord_dominates((2, 2), (3, 1))
        assert coord_dominates((3, 1), (3, 1))
        assert coord_dominates((0.5, 0), (0.6, 0.2))

    def test_prefix(self):
        assert prefix_dominates((2, 2), (3, 1))
        assert not prefix_dominates((3, 1), (2, 2))
        assert prefix_dominates((4, 1, 1), (4, 1, 1))

    def test_sorting_is_applied(self):
        assert coord_dominates((1, 3), (4, 2))
        assert prefix_dominates((1, 3), (0, 4))

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            coord_dominates((1, 2), (1, 2, 3))
        with pytest.raises(DimensionError):
            prefix_dominates((1,), (1, 2))


class TestPairRatios:
    def test_c_pair(self):
        assert ratio_c_pair((3, 0, 0), (1, 1, 1)) == 3
        assert ratio_c_pair((1, 1), (2, 0)) == INF
        assert ratio_c_pair((5, 2), (5, 2)) == 1

    def test_s_pair(self):
        assert ratio_s_pair((3, 1), (2, 2)) == 1.5
        assert ratio_s_pair((2, 2), (3, 1)) == 1
        assert ratio_s_pair((7, 2, 1), (2, 7, 1)) == 1

    def test_zero_vectors(self):
        assert ratio_s_pair((0, 0), (0, 0)) == 0
        assert ratio_c_pair((0, 0), (0, 0)) == 0

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            ratio_c_pair((1,), (1, 1))


class TestEnvelopeRatio:
    def test_lpt_example(self):
        report = ratio_s_envelope((10, 8), (9, 18))
        assert report.value == pytest.approx(10 / 9)
        assert report.witness_index == 1

    def test_tie_goes_to_smallest_index(self):
        report = ratio_s_envelope((0.3, 0.1), (0.25, 1 / 3))
        assert report.value == pytest.approx(1.2)
        assert report.witness_index == 1

    def test_vector_meeting_envelope(self):
        assert ratio_s_envelope((4, 3), (4, 7)).value == 1

    def test_non_positive_envelope(self):
        with pytest.raises(InfeasibleError):
            ratio_s_envelope((1, 1), (0, 2))

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            ratio_s_envelope((1, 1), (1,))

    def test_report_dict(self):
        data = ratio_s_envelope((10, 8), (9, 18)).to_dict()
        assert set(data) == {"value", "witness_index"}


class TestCoordinateFloor:
    def test_concentrated_vector(self):
        report = c_of((3, 0, 0), (1, 0, 0))
        assert report.value == 3
        assert report.witness_index == 1

    def test_spread_vector_is_infinite(self):
        report = c_of((1, 1, 1), (1, 0, 0))
        assert report.value == INF
        assert report.witness_index == 2


class TestConcat:
    def test_basic(self):
        assert concat((3, 1), (2, 2)).loads == (3, 1, 2, 2)

    def test_empty_left(self):
        assert concat((), (1,)).loads == (1,)

    def test_zeros(self):
        assert concat((0,), (0,)).loads == (0, 0)


def test_is_regular():
    assert is_regular((3, 2, 2, 0))
    assert not is_regular((1, 2))
