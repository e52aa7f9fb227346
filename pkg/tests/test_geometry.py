import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from icregions.geometry import (
    GeometryError, SimplexGrid, boundary_from_points, contains, distance_to_region, family_vertices, gap,
    hausdorff_2d, hull_indices_2d, hull_indices_3d, hull_of_union, kernel_grid, max_weighted_sum, modulo_region,
    polytope_vertices,
)
from icregions.regions import RatePolytope, eval_modulo_closed_form


def square(r1, r2, s=None):
    rows = [((1, 0), r1), ((0, 1), r2)]
    if s is not None:
        rows.append(((1, 1), s))
    return RatePolytope.from_rows(("R1", "R2"), rows)


@pytest.mark.parametrize("m,step", [(2, 0.1), (3, 0.05), (4, 0.25), (1, 0.5)])
def test_simplex_grid_size_and_validity(m, step):
    g = SimplexGrid(m, step)
    pts = g.points()
    n = round(1 / step)
    assert len(pts) == len(g) == math.comb(n + m - 1, m - 1)
    np.testing.assert_allclose(pts.sum(axis=1), 1.0)
    assert pts.min() >= 0
    assert len({tuple(np.round(p * n).astype(int)) for p in pts}) == len(pts)


def test_simplex_grid_rejects_bad_step():
    with pytest.raises(GeometryError):
        SimplexGrid(2, 0.3)


def test_kernel_grid_shape():
    g = kernel_grid(2, 2, 0.5)
    assert g.shape == (9, 2, 2)
    np.testing.assert_allclose(g.sum(axis=-1), 1.0)


def test_vertices_of_square_with_inactive_sum():
    got = sorted(map(tuple, polytope_vertices(square(0.5, 1.0, 1.5))))
    assert got == [(0.0, 0.0), (0.0, 1.0), (0.5, 0.0), (0.5, 1.0)]


def test_vertices_with_active_sum():
    got = sorted(map(tuple, polytope_vertices(square(1.0, 1.0, 1.5))))
    assert got == [(0.0, 0.0), (0.0, 1.0), (0.5, 1.0), (1.0, 0.0), (1.0, 0.5)]


def test_family_vertices_membership():
    A = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]])
    B = np.array([[1.0, 2.0, 0, 0], [3.0, 0.5, 0, 0]])
    pts, member = family_vertices(A, B)
    for k, (r1, r2) in enumerate([(1, 2), (3, 0.5)]):
        got = sorted(map(tuple, pts[member == k]))
        assert got == sorted([(0, 0), (r1, 0), (0, r2), (r1, r2)])


def test_unbounded_rejected():
    p = RatePolytope.from_rows(("R1", "R2"), [((1, 0), 1.0)])
    with pytest.raises(GeometryError):
        hull_of_union([p])


def test_hull_of_union_two_squares():
    bd = hull_of_union([square(1, 0.2), square(0.2, 1)])
    got = sorted(map(tuple, np.round(bd.points, 12)))
    assert got == [(0, 0), (0, 1), (0.2, 1), (1, 0), (1, 0.2)]
    assert max_weighted_sum(bd, [1, 1]) == pytest.approx(1.2)
    assert set(bd.provenance.tolist()) == {0, 1}


def test_hull_points_counter_clockwise():
    bd = hull_of_union([square(1, 0.2), square(0.2, 1), square(0.7, 0.7)])
    p = bd.points
    cross = [(p[(i + 1) % len(p)] - p[i])[0] * (p[(i + 2) % len(p)] - p[i])[1]
             - (p[(i + 1) % len(p)] - p[i])[1] * (p[(i + 2) % len(p)] - p[i])[0] for i in range(len(p))]
    assert min(cross) > 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(3, 400))
def test_hull_2d_matches_qhull(seed, n):
    rng = np.random.default_rng(seed)
    pts = np.round(rng.random((n, 2)), 6)
    if np.linalg.matrix_rank(pts - pts[0]) < 2:
        return
    ref = {tuple(pts[i]) for i in ConvexHull(pts).vertices}
    got = {tuple(pts[i]) for i in hull_indices_2d(pts)}
    assert got == ref


def test_hull_3d_flat_input():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.2, 0.2, 0], [1, 1, 0]], dtype=float)
    got = {tuple(pts[i]) for i in hull_indices_3d(pts)}
    assert got == {(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)}


def test_hull_3d_cube():
    rng = np.random.default_rng(1)
    corners = np.array([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)], dtype=float)
    pts = np.vstack([corners, rng.random((50, 3))])
    assert {tuple(pts[i]) for i in hull_indices_3d(pts)} == {tuple(c) for c in corners}


def test_distance_and_containment():
    bd = hull_of_union([square(1, 1)])
    assert contains(bd, [0.5, 0.5]) and contains(bd, [1.0, 1.0])
    assert not contains(bd, [1.0, 1.001])
    d = distance_to_region(bd, [[2, 0.5], [2, 2], [0.3, 0.3]])
    np.testing.assert_allclose(d, [1.0, math.sqrt(2), 0.0])


def test_hausdorff_symmetry_and_value():
    a = hull_of_union([square(1, 1)])
    b = hull_of_union([square(1, 0.5)])
    assert hausdorff_2d(a, b) == pytest.approx(0.5)
    assert hausdorff_2d(b, a) == pytest.approx(0.5)
    assert hausdorff_2d(a, a) == 0.0
    # b sits inside a, so every point of b is at distance 0 from a
    assert gap(b, a) == 0.0 and gap(a, b) == pytest.approx(0.5)


def test_boundary_from_points_round_trip():
    bd = hull_of_union([square(1, 0.2), square(0.2, 1)])
    back = boundary_from_points(bd.labels, bd.points)
    assert hausdorff_2d(bd, back) == 0.0


def test_csv_is_sorted_and_stable():
    bd = hull_of_union([square(1, 0.2), square(0.2, 1)])
    text = bd.to_csv()
    assert text.splitlines()[0] == "R1,R2"
    rows = [tuple(map(float, l.split(","))) for l in text.splitlines()[1:]]
    assert rows == sorted(rows)
    assert hull_of_union([square(0.2, 1), square(1, 0.2)]).to_csv() == text


def test_fig8_corners_and_sum_rate():
    bd = modulo_region(2, 0.5, 0.01)
    assert max_weighted_sum(bd, [1, 1]) == pytest.approx(1.5, abs=1e-6)
    assert any(np.array_equal(p, [0.5, 1.0]) for p in bd.points)
    assert any(abs(p[0] - 1.0) < 1e-12 and abs(p[1] - 0.188722) < 1e-4 for p in bd.points)


def test_provenance_reevaluation():
    from icregions.geometry import modulo_problem
    prob = modulo_problem(2, 0.5, 0.05)
    bd = prob.closure()
    for pt, src in zip(bd.points, bd.provenance):
        poly = prob.member(int(src))
        assert poly.contains(pt, 1e-12)
        assert any(np.allclose(pt, v, atol=1e-12) for v in poly.vertices())


def test_family_closure_equals_loop():
    from icregions.geometry import SimplexGrid
    pts = SimplexGrid(3, 0.1).points()
    fam_bd = hull_of_union(eval_modulo_closed_form(3, 0.4, pts))
    loop_bd = hull_of_union([eval_modulo_closed_form(3, 0.4, p) for p in pts])
    assert hausdorff_2d(fam_bd, loop_bd) < 1e-12


@pytest.mark.parametrize("m,lam,step", [(3, 0.3, 0.02), (4, 0.5, 0.05), (8, 0.5, 0.1)])
def test_reduced_modulo_closure_covers_grid(m, lam, step):
    from icregions.geometry import modulo_region_reduced
    red = modulo_region_reduced(m, lam)
    grid = modulo_region(m, lam, step)
    # every grid slice lies inside, and the grid is close on a fine step
    assert distance_to_region(red, grid.points).max() <= 1e-12
    assert hausdorff_2d(red, grid) <= 0.1


def test_reduced_modulo_matches_fine_grid_sum_rate():
    from icregions.geometry import modulo_region_reduced
    for m in (2, 4):
        s = max_weighted_sum(modulo_region_reduced(m, 0.5), [1, 1])
        assert s == pytest.approx(1.5 * math.log2(m), abs=1e-9)
