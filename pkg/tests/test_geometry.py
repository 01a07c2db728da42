from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gasket_css.errors import BallNotCovered, PointOutsideWindow, WindowTooSmall
from gasket_css.geometry import (
    CellAddress,
    LatticePoint,
    Region,
    ball_cells,
    cells_containing,
    dist2,
    edges,
    locate_cell,
    neighborhood,
    pow2,
    require_ball_in_window,
    scale_level,
    triangle_dist2,
    vertices,
)

words = st.text(alphabet="123", max_size=6)
windows = st.integers(min_value=-3, max_value=4)


@given(windows, words)
def test_cell_diameter_and_measure(window, word):
    cell = CellAddress(window, word)
    n = cell.level
    c = cell.corners()
    for i in range(3):
        for j in range(i + 1, 3):
            assert dist2(c[i], c[j]) == Fraction(4) ** n
    assert Region((cell,)).measure() == Fraction(3) ** n


@given(windows, words)
def test_children_keep_one_corner_and_use_midpoints(window, word):
    cell = CellAddress(window, word)
    corners = cell.corners()
    for i, child in enumerate(cell.children()):
        cc = child.corners()
        assert cc[i] == corners[i]
        for j in range(3):
            if j != i:
                assert cc[j] == corners[i].midpoint(corners[j])
        assert child.parent() == cell


@given(st.integers(min_value=-2, max_value=3), st.text(alphabet="123", min_size=1, max_size=5))
def test_neighborhood_counts(window, tail):
    cell = CellAddress(window, "1" + tail)
    nb = neighborhood(cell)
    assert len(nb) == (3 if cell.is_origin_anchored() else 4)
    assert cell in nb
    shared = set(cell.corners())
    for other in nb:
        if other != cell:
            assert len(shared & set(other.corners())) == 1


def test_neighborhood_at_window_exit():
    with pytest.raises(WindowTooSmall):
        neighborhood(CellAddress(2, "22"))
    with pytest.raises(WindowTooSmall):
        neighborhood(CellAddress(2, "3"))


def test_corner_neighborhood_has_three_cells():
    assert len(neighborhood(CellAddress(3, "111"))) == 3


@given(windows, words)
def test_corner_points_lie_in_at_most_two_cells(window, word):
    cell = CellAddress(window, word)
    for p in cell.corners():
        found = cells_containing(p, cell.level, window)
        assert cell in found
        assert 1 <= len(found) <= 2


def test_locate_cell_is_lexicographically_smallest():
    p = LatticePoint(Fraction(1, 2), 0)
    assert locate_cell(p, -1, 0).word == "1"
    assert [c.word for c in cells_containing(p, -1, 0)] == ["1", "2"]


def test_point_outside_gasket():
    with pytest.raises(PointOutsideWindow):
        locate_cell(LatticePoint(Fraction(1, 3), Fraction(1, 3)), -2, 0)
    with pytest.raises(PointOutsideWindow):
        locate_cell(LatticePoint(2, 0), 0, 0)


@given(st.fractions(min_value=Fraction(1, 1000), max_value=1000))
def test_scale_level_brackets_radius(r):
    n = scale_level(r)
    assert pow2(n - 1) <= r < pow2(n)


@given(st.fractions(min_value=-4, max_value=4, max_denominator=64),
       st.fractions(min_value=-4, max_value=4, max_denominator=64))
def test_point_key_roundtrip(a, b):
    p = LatticePoint(a, b)
    assert LatticePoint.from_key(p.key()) == p


@given(st.fractions(min_value=0, max_value=1, max_denominator=32),
       st.fractions(min_value=0, max_value=1, max_denominator=32))
def test_triangle_distance_zero_inside(a, b):
    p = LatticePoint(a, b)
    d = triangle_dist2(p, LatticePoint(0, 0), Fraction(1))
    assert (d == 0) == (a + b <= 1)


def test_vertex_and_edge_counts():
    region = Region((CellAddress(0, ""),))
    for k in range(4):
        assert len(vertices(region, -k)) == 3 * (3**k + 1) // 2
        assert len(edges(region, -k)) == 3 ** (k + 1)


@pytest.mark.parametrize("n", [-2, -1, 0, 1])
def test_dyadic_balls_are_covered(n):
    window = n + 4
    cell = CellAddress(window, "1213")
    for x0 in cell.corners():
        b = ball_cells(x0, pow2(n - 1), window)
        assert b.covered
        assert len(b.parts) == len(b.inner)
        for part in b.parts:
            assert all(c in b.enlarged for c in part)


def test_nondyadic_ball_can_leave_the_neighborhood():
    # the Euclidean gap across a hole is sqrt(3)/2 * 2^n, below 2^n
    x0 = LatticePoint(Fraction(1, 4), Fraction(1, 4))
    r = Fraction(23, 100)
    with pytest.raises(BallNotCovered):
        ball_cells(x0, r, 0)
    assert not ball_cells(x0, r, 0, require_cover=False).covered


def test_ball_must_fit_window():
    require_ball_in_window(LatticePoint(0, 0), Fraction(1), 1)
    with pytest.raises(WindowTooSmall):
        require_ball_in_window(LatticePoint(0, 0), Fraction(3), 1)
