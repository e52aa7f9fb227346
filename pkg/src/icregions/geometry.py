"""Vertex enumeration, convex closure over slices, and region comparison."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .regions import PolytopeFamily, RatePolytope, RegionError, eval_modulo_closed_form

FEAS_TOL = 1e-9
COLLINEAR_TOL = 1e-12  # distance of a middle point from its chord
CHUNK = 32768
MAX_GRID = 50_000_000  # slices per grid axis


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class RegionBoundary:
    """Extreme points of a convex region; 2-D points are in counter-clockwise order.

    ``provenance[i]`` is the index of the slice that produced ``points[i]``;
    ``params[i]`` holds that slice's parameters when they were recorded.
    """

    labels: tuple
    points: np.ndarray
    provenance: np.ndarray
    params: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.labels)

    def sorted_points(self) -> np.ndarray:
        order = np.lexsort(self.points.T[::-1])
        return self.points[order]

    def to_csv(self) -> str:
        lines = [",".join(self.labels)]
        lines += [",".join(f"{v:.12g}" for v in row) for row in self.sorted_points()]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        out = []
        for k, (pt, src) in enumerate(zip(self.points, self.provenance)):
            item = {"point": [float(v) for v in pt], "slice": int(src)}
            if self.params is not None:
                item["params"] = [float(v) for v in self.params[k]]
            out.append(item)
        return {"rates": list(self.labels), "extreme_points": out}


# -- grids --------------------------------------------------------------------

@dataclass(frozen=True)
class SimplexGrid:
    """All pmfs on ``m`` symbols whose weights are multiples of ``step``."""

    m: int
    step: float

    def __post_init__(self):
        if self.m < 1:
            raise GeometryError("alphabet size must be positive")
        n = round(1.0 / self.step)
        if n < 1 or abs(n * self.step - 1.0) > 1e-9:
            raise GeometryError(f"grid step {self.step} must divide 1")

    @property
    def divisions(self) -> int:
        return round(1.0 / self.step)

    def __len__(self) -> int:
        return math.comb(self.divisions + self.m - 1, self.m - 1)

    def points(self) -> np.ndarray:
        """Array of shape (len, m); every row is a valid pmf."""
        n, m = self.divisions, self.m
        if m == 1:
            return np.ones((1, 1))
        # stars and bars: choose m-1 bar positions among n+m-1 slots
        bars = np.array(list(itertools.combinations(range(n + m - 1), m - 1)), dtype=int)
        edges = np.concatenate([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), n + m - 1)], axis=1)
        counts = np.diff(edges, axis=1) - 1
        return counts / n


# -- vertices -----------------------------------------------------------------

def _check_bounded(A: np.ndarray) -> None:
    d = A.shape[1]
    for i in range(d):
        if not np.any((A >= 0).all(axis=1) & (A[:, i] > 0)):
            raise GeometryError(f"polytope is unbounded along coordinate {i} (no capping row)")


def _subsets(A: np.ndarray):
    """Index tuples of row subsets with a nonsingular coefficient block."""
    d = A.shape[1]
    combos = [c for c in itertools.combinations(range(A.shape[0]), d)
              if abs(np.linalg.det(A[list(c)].astype(float))) > 1e-12]
    return np.array(combos, dtype=int).reshape(-1, d)


def family_vertices(A: np.ndarray, B: np.ndarray, tol: float = FEAS_TOL):
    """Vertices of {x : A x <= B[n]} for each row of B.

    Returns ``(points, member)`` where ``member[k]`` is the row of B that
    produced ``points[k]``.  Dimensions 1 to 3 only.
    """
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = A.shape[1]
    if d > 3:
        raise GeometryError("vertex enumeration is limited to dimension 3")
    subs = _subsets(A)
    if len(subs) == 0:
        return np.zeros((0, d)), np.zeros(0, dtype=int)
    inv = np.linalg.inv(A[subs])  # (P, d, d)
    rhs = B[:, subs]  # (N, P, d)
    pts = np.einsum("pij,npj->npi", inv, rhs)
    slack = np.einsum("kd,npd->npk", A, pts) - B[:, None, :]
    ok = (slack <= tol * (1 + np.abs(B[:, None, :]))).all(axis=-1)
    n_idx, _ = np.nonzero(ok)
    # snap round-off so that near-coincident vertices merge exactly
    return np.round(pts[ok], 12) + 0.0, n_idx


def polytope_vertices(p: RatePolytope, tol: float = FEAS_TOL) -> np.ndarray:
    """All vertices, deduplicated and sorted lexicographically; empty if infeasible."""
    pts, _ = family_vertices(p.A, p.b[None, :], tol)
    if len(pts) == 0:
        return pts
    keep: list = []
    for q in pts[np.lexsort(pts.T[::-1])]:
        if all(np.max(np.abs(q - k)) > 1e-10 for k in keep):
            keep.append(q)
    return np.array(keep)


# -- 2-D hull -----------------------------------------------------------------

def _prefilter(pts: np.ndarray, directions: int = 64) -> np.ndarray:
    """Drop points that cannot be extreme: those inside or on the polygon
    spanned by the extreme points in a fan of fixed directions."""
    if len(pts) < 4 * directions:
        return np.arange(len(pts))
    theta = 2 * np.pi * np.arange(directions) / directions
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    ext_idx = np.unique(np.argmax(pts @ dirs.T, axis=0))
    ext = pts[ext_idx]
    chain = _monotone_chain(ext)
    if len(chain) < 3:
        return np.arange(len(pts))
    poly = ext[chain]
    covered = np.ones(len(pts), dtype=bool)
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        cr = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        covered &= cr >= -1e-12
    covered[ext_idx[chain]] = False
    return np.nonzero(~covered)[0]


def _monotone_chain(pts: np.ndarray, tol: float = COLLINEAR_TOL) -> list[int]:
    """Indices of hull vertices in counter-clockwise order; collinear points dropped."""
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    sp = pts[order]
    fresh = np.ones(len(sp), dtype=bool)
    fresh[1:] = np.abs(np.diff(sp, axis=0)).max(axis=1) > 1e-12
    uniq = order[fresh].tolist()
    if len(uniq) <= 2:
        return uniq
    xy = pts.tolist()

    def turn(o, a, b):
        # signed distance of a from the line o-b, scaled so the tolerance is absolute
        c = (xy[a][0] - xy[o][0]) * (xy[b][1] - xy[o][1]) - (xy[a][1] - xy[o][1]) * (xy[b][0] - xy[o][0])
        return c / (math.hypot(xy[b][0] - xy[o][0], xy[b][1] - xy[o][1]) or 1.0)

    lower: list[int] = []
    for i in uniq:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], i) <= tol:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(uniq):
        while len(upper) >= 2 and turn(upper[-2], upper[-1], i) <= tol:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def hull_indices_2d(pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    cand = _prefilter(pts)
    sub = pts[cand]
    return cand[np.array(_monotone_chain(sub), dtype=int)]


# -- 3-D hull -----------------------------------------------------------------

def hull_indices_3d(pts: np.ndarray) -> np.ndarray:
    from scipy.spatial import ConvexHull, QhullError

    pts = np.asarray(pts, dtype=float)
    if len(pts) == 0:
        return np.zeros(0, dtype=int)
    centre = pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(pts - centre, full_matrices=False)
    rank = int(np.sum(sv > 1e-9 * max(1.0, sv[0] if len(sv) else 1.0)))
    if rank == 3:
        try:
            return np.sort(ConvexHull(pts).vertices)
        except QhullError:
            pass
    if rank == 0:
        return np.array([0])
    if rank == 1:
        t = (pts - centre) @ vt[0]
        return np.unique([int(np.argmin(t)), int(np.argmax(t))])
    flat = (pts - centre) @ vt[:2].T
    return np.sort(hull_indices_2d(flat))


# -- convex closure -----------------------------------------------------------

def _as_family(polys) -> PolytopeFamily:
    if isinstance(polys, PolytopeFamily):
        return polys
    polys = list(polys)
    if not polys:
        raise GeometryError("no polytopes given")
    if all(isinstance(p, PolytopeFamily) for p in polys):
        return PolytopeFamily.concat(polys)
    rates = polys[0].rates
    if any(p.rates != rates for p in polys):
        raise GeometryError("polytopes do not share rate coordinates")
    if all(np.array_equal(p.A, polys[0].A) for p in polys):
        return PolytopeFamily(rates, polys[0].A, np.stack([p.b for p in polys]), polys[0].labels)
    return None


def _hull_idx(pts: np.ndarray) -> np.ndarray:
    return hull_indices_2d(pts) if pts.shape[1] == 2 else hull_indices_3d(pts)


def hull_of_union(polys, chunk: int = CHUNK) -> RegionBoundary:
    """Convex closure of a union of bounded polytopes sharing rate coordinates.

    Accepts a list of :class:`RatePolytope`, a :class:`PolytopeFamily`, or a
    list of families (whose members are numbered consecutively).
    """
    fam = _as_family(polys)
    if fam is None:
        return _hull_mixed(list(polys))
    d = len(fam.rates)
    if d not in (2, 3):
        raise GeometryError("convex closure is only supported in two or three dimensions")
    _check_bounded(fam.A)
    keep_pts, keep_src = [], []
    for start in range(0, len(fam), chunk):
        pts, member = family_vertices(fam.A, fam.B[start:start + chunk])
        if len(pts) == 0:
            continue
        idx = _hull_idx(pts)
        keep_pts.append(pts[idx])
        keep_src.append(member[idx] + start)
    return _finalize(fam.rates, keep_pts, keep_src, fam.params)


def _hull_mixed(polys: list) -> RegionBoundary:
    rates = polys[0].rates
    pts_l, src_l = [], []
    for k, p in enumerate(polys):
        if p.rates != rates:
            raise GeometryError("polytopes do not share rate coordinates")
        _check_bounded(p.A)
        v = polytope_vertices(p)
        pts_l.append(v)
        src_l.append(np.full(len(v), k))
    return _finalize(rates, pts_l, src_l, None)


def _finalize(rates, pts_l, src_l, params) -> RegionBoundary:
    d = len(rates)
    if not pts_l:
        return RegionBoundary(tuple(rates), np.zeros((0, d)), np.zeros(0, dtype=int))
    pts = np.concatenate(pts_l)
    src = np.concatenate(src_l)
    # deterministic tie-breaking: smallest slice index wins among equal points
    order = np.argsort(src, kind="stable")
    pts, src = pts[order], src[order]
    idx = _hull_idx(pts)
    pts = np.where(np.abs(pts[idx]) < 1e-13, 0.0, pts[idx])
    if np.any(pts < -1e-9):
        raise RegionError("hull point with a negative rate")
    src = src[idx]
    return RegionBoundary(tuple(rates), np.maximum(pts, 0.0), src,
                          None if params is None else np.asarray(params)[src])


def boundary_from_points(labels, points, provenance=None) -> RegionBoundary:
    """Hull of explicit points (e.g. a boundary read back from disk)."""
    pts = np.asarray(points, dtype=float)
    src = np.arange(len(pts)) if provenance is None else np.asarray(provenance)
    idx = _hull_idx(pts)
    return RegionBoundary(tuple(labels), pts[idx], src[idx])


# -- queries --------------------------------------------------------------------

def _check_dim(boundary: RegionBoundary, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (boundary.dim,):
        raise GeometryError(f"expected a {boundary.dim}-vector, got shape {v.shape}")
    return v


def max_weighted_sum(boundary: RegionBoundary, weights) -> float:
    w = _check_dim(boundary, weights)
    return float(np.max(boundary.points @ w))


def _seg_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from points ``p`` (n, 2) to segment ab."""
    ab = b - a
    denom = float(ab @ ab)
    t = np.zeros(len(p)) if denom == 0 else np.clip((p - a) @ ab / denom, 0.0, 1.0)
    return np.linalg.norm(p - (a + t[:, None] * ab), axis=1)


def distance_to_region(boundary: RegionBoundary, pts) -> np.ndarray:
    """Euclidean distance from each 2-D point to the filled convex region (0 inside)."""
    if boundary.dim != 2:
        raise GeometryError("distance queries are two-dimensional")
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    poly = boundary.points
    if len(poly) == 0:
        return np.full(len(pts), np.inf)
    if len(poly) == 1:
        return np.linalg.norm(pts - poly[0], axis=1)
    edges = list(zip(poly, np.roll(poly, -1, axis=0))) if len(poly) > 2 else [(poly[0], poly[1])]
    dist = np.min([_seg_dist(pts, a, b) for a, b in edges], axis=0)
    if len(poly) >= 3:
        inside = np.ones(len(pts), dtype=bool)
        for a, b in edges:
            inside &= (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0]) >= -1e-12
        dist[inside] = 0.0
    return dist


def contains(boundary: RegionBoundary, point, tol: float = FEAS_TOL) -> bool:
    p = _check_dim(boundary, point)
    if boundary.dim == 2:
        return bool(distance_to_region(boundary, p[None, :])[0] <= tol)
    from scipy.spatial import ConvexHull, QhullError
    try:
        eq = ConvexHull(boundary.points).equations
    except QhullError:
        raise GeometryError("containment test needs a full-dimensional 3-D region") from None
    return bool(np.all(eq[:, :-1] @ p + eq[:, -1] <= tol))


def hausdorff_2d(a: RegionBoundary, b: RegionBoundary) -> float:
    """Hausdorff distance between two convex regions.

    For convex bodies this coincides with the distance between their
    boundaries, and for polygons the maximum is attained at a vertex.
    """
    if a.dim != 2 or b.dim != 2:
        raise GeometryError("hausdorff_2d needs two-dimensional regions")
    da = distance_to_region(b, a.points).max(initial=0.0)
    db = distance_to_region(a, b.points).max(initial=0.0)
    return float(max(da, db))


def gap(capacity: RegionBoundary, scheme: RegionBoundary) -> float:
    """Largest distance from a capacity extreme point to the scheme region."""
    return float(distance_to_region(scheme, capacity.points).max(initial=0.0))


# -- closure over slice grids -------------------------------------------------

def grid_closure(make_family, grids: Sequence[np.ndarray], chunk: int = CHUNK) -> RegionBoundary:
    """Convex closure over the Cartesian product of parameter grids.

    ``make_family`` receives one batched array per grid (rows picked from
    that grid) and returns a :class:`PolytopeFamily`.  Slice indices are
    row-major positions in the product.
    """
    grids = [np.asarray(g, dtype=float) for g in grids]
    sizes = tuple(len(g) for g in grids)
    total = int(np.prod(sizes))
    rates = None
    pts_l, src_l, par_l = [], [], []
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        picks = np.unravel_index(flat, sizes)
        fam = make_family([g[i] for g, i in zip(grids, picks)])
        if rates is None:
            rates = fam.rates
            if len(rates) not in (2, 3):
                raise GeometryError("convex closure is only supported in two or three dimensions")
            _check_bounded(fam.A)
        pts, member = family_vertices(fam.A, fam.B)
        if len(pts) == 0:
            continue
        idx = _hull_idx(pts)
        pts_l.append(pts[idx])
        src_l.append(flat[member[idx]])
        par_l.append(np.concatenate([g[i][member[idx]].reshape(len(idx), -1)
                                     for g, i in zip(grids, picks)], axis=1))
    bd = _finalize(rates, pts_l, src_l, None)
    if not par_l:
        return bd
    allsrc = np.concatenate(src_l)
    allpar = np.concatenate(par_l)
    lookup = {int(s): k for k, s in enumerate(allsrc)}
    return RegionBoundary(bd.labels, bd.points, bd.provenance,
                          allpar[[lookup[int(s)] for s in bd.provenance]])


@dataclass(frozen=True)
class GridProblem:
    """A slice evaluator paired with the parameter grids it is swept over."""

    make_family: object
    grids: tuple

    def __len__(self) -> int:
        return int(np.prod([len(g) for g in self.grids]))

    def closure(self, chunk: int = CHUNK) -> RegionBoundary:
        return grid_closure(self.make_family, self.grids, chunk)

    def member(self, index: int) -> RatePolytope:
        """Re-evaluate a single slice by its row-major index."""
        picks = np.unravel_index(int(index), tuple(len(g) for g in self.grids))
        fam = self.make_family([np.asarray(g)[[i]] for g, i in zip(self.grids, picks)])
        return fam[0]


def kernel_grid(rows: int, m: int, step: float) -> np.ndarray:
    """Every conditional pmf table with ``rows`` rows on ``m`` symbols from the simplex grid."""
    base = SimplexGrid(m, step).points()
    if len(base) ** rows > MAX_GRID:
        raise GeometryError(f"kernel grid of {len(base)}^{rows} tables is too large; raise the grid step")
    idx = np.array(list(itertools.product(range(len(base)), repeat=rows)), dtype=int).reshape(-1, rows)
    return base[idx]


def _x2_grid(channel, step, p_x2):
    if p_x2 is None:
        return SimplexGrid(len(channel.x2), step).points()
    return np.asarray(p_x2, dtype=float)[None, :]


def modulo_problem(m: int, lam: float, step: float) -> GridProblem:
    return GridProblem(lambda ps: eval_modulo_closed_form(m, lam, ps[0]), (SimplexGrid(m, step).points(),))


def separation_problem(levels: int, step: float) -> GridProblem:
    from .regions import eval_separation
    return GridProblem(lambda ps: eval_separation(levels, np.stack(ps, axis=-2)),
                       (SimplexGrid(2, step).points(),) * levels)


def communicate_state_problem(levels: int, step: float) -> GridProblem:
    from .regions import eval_communicate_state
    return GridProblem(lambda ps: eval_communicate_state(levels, ps[0]),
                       (SimplexGrid(2 ** (levels - 1), step).points(),))


def det_capacity_problem(channel, step: float, zchannel: bool = False, p_x2=None) -> GridProblem:
    """Grid over p(x1|s) for every state value and p(x2) (or a fixed ``p_x2``)."""
    from .channels import require_injective
    from .regions import DetCapSlice, det_capacity_family

    require_injective(channel)
    g1 = SimplexGrid(len(channel.x1), step).points()
    grids = (g1,) * len(channel.s) + (_x2_grid(channel, step, p_x2),)

    def make(ps):
        return det_capacity_family(DetCapSlice(channel, np.stack(ps[:-1], axis=-2), ps[-1]), zchannel)

    return GridProblem(make, grids)


def int_noise_problem(channel, step: float, p_x2=None) -> GridProblem:
    """Inner bound with X1 = U and V constant, over p(u|s) and p(x2)."""
    from .regions import int_noise_slice, sdzic_inner_family

    grids = (SimplexGrid(len(channel.x1), step).points(),) * len(channel.s) + (_x2_grid(channel, step, p_x2),)

    def make(ps):
        return sdzic_inner_family(int_noise_slice(channel, np.stack(ps[:-1], axis=-2), ps[-1]))

    return GridProblem(make, grids)


def cribbing_problem(channel, w_size: int, step: float, w_cap: int | None = None) -> GridProblem:
    """Grid over p(w), p(x1|w[,s]) and p(x2|w) for a cribbing channel."""
    from .channels import StateCribbingZIC, require_injective
    from .regions import CribbingSlice, cribbing_family

    require_injective(channel)
    with_state = isinstance(channel, StateCribbingZIC)
    n_s = len(channel.s) if with_state else 1
    # validate the cardinality cap on uniform pmfs before any grid is built
    nx1, nx2 = len(channel.x1), len(channel.x2)
    CribbingSlice(channel, np.full(w_size, 1 / w_size),
                  np.full((w_size, n_s, nx1) if with_state else (w_size, nx1), 1 / nx1),
                  np.full((w_size, nx2), 1 / nx2), w_cap=w_cap)
    grids = (SimplexGrid(w_size, step).points(),
             kernel_grid(w_size * n_s, nx1, step),
             kernel_grid(w_size, nx2, step))

    def make(ps):
        n = len(ps[0])
        p1 = ps[1].reshape((n, w_size, n_s, -1) if with_state else (n, w_size, -1))
        return cribbing_family(CribbingSlice(channel, ps[0], p1, ps[2], w_cap=w_cap))

    return GridProblem(make, grids)


def modulo_region(m: int, lam: float, step: float) -> RegionBoundary:
    return modulo_problem(m, lam, step).closure()


def modulo_region_reduced(m: int, lam: float, steps: int = 4000) -> RegionBoundary:
    """Modulo capacity closure from two one-parameter pmf families.

    With p(0) fixed, both rate bounds are affine in the entropy of the
    remaining mass (renormalised), since the mixture with the point mass at 0
    only moves symbol 0. Extremes of that entropy are one symbol taking all of
    it or the rest being uniform, so the closure over the whole simplex equals
    the closure over these two curves. Cost is linear in ``steps`` for any m.
    """
    if m < 2:
        raise GeometryError("modulus must be at least 2")
    p0 = np.linspace(0.0, 1.0, steps + 1)
    point = np.zeros((steps + 1, m))
    point[:, 0], point[:, 1] = p0, 1 - p0
    flat = np.zeros((steps + 1, m))
    flat[:, 0] = p0
    flat[:, 1:] = ((1 - p0) / (m - 1))[:, None]
    return hull_of_union(eval_modulo_closed_form(m, lam, np.vstack([point, flat])))


def det_capacity_region(channel, step: float, zchannel: bool = False, p_x2=None,
                        chunk: int = CHUNK) -> RegionBoundary:
    return det_capacity_problem(channel, step, zchannel, p_x2).closure(chunk)


def int_noise_region(channel, step: float, p_x2=None, chunk: int = CHUNK) -> RegionBoundary:
    return int_noise_problem(channel, step, p_x2).closure(chunk)
