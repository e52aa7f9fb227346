"""Rate-region formulas evaluated on fixed input-distribution slices.

Every evaluator works on a joint distribution assembled from the slice's
kernels.  Slice arrays may carry leading batch axes; the ``*_family``
entry points return a :class:`PolytopeFamily` with one polytope per batch
element, which is what grid searches use.  Strict inequalities of the
achievability statements are represented by their closures (``<=``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from .channels import (CribbingZIC, DeterministicSDZIC, GeneralDMIC, StateCribbingZIC,
                       require_injective)
from .prob import Alphabet, JointDistribution, Kernel, Pmf, entropy_of, product_joint
from .prob import conditional_entropy as Hc
from .prob import entropy as H
from .prob import mutual_information as I


class RegionError(ValueError):
    pass


# -- polytopes ---------------------------------------------------------------

def _nonneg_rows(d: int):
    return [(tuple(-1 if j == i else 0 for j in range(d)), 0.0) for i in range(d)]


@dataclass(frozen=True)
class RatePolytope:
    """{R : A R <= b} over named rates; nonnegativity rows are explicit."""

    rates: tuple
    A: np.ndarray
    b: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        A = np.asarray(self.A, dtype=int).reshape(-1, len(self.rates))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise RegionError("one right-hand side per inequality")
        if np.any(~A.any(axis=1)):
            raise RegionError("inequality with all-zero coefficients")
        if not np.all(np.isfinite(b)):
            raise RegionError("non-finite right-hand side")
        labels = tuple(self.labels) or tuple(_row_text(self.rates, r) for r in A)
        object.__setattr__(self, "rates", tuple(self.rates))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_rows(cls, rates: Sequence[str], rows, nonneg: bool = True) -> "RatePolytope":
        """Build from ``(coeffs, rhs[, label])`` rows, appending R >= 0 rows."""
        rows = [tuple(r) for r in rows]
        A = [r[0] for r in rows]
        b = [float(r[1]) for r in rows]
        labels = [r[2] if len(r) > 2 else _row_text(rates, r[0]) for r in rows]
        if nonneg:
            for coeffs, rhs in _nonneg_rows(len(rates)):
                A.append(coeffs)
                b.append(rhs)
                labels.append(f"{rates[coeffs.index(-1)]}>=0")
        return cls(tuple(rates), np.array(A, dtype=int), np.array(b), tuple(labels))

    @property
    def dim(self) -> int:
        return len(self.rates)

    def contains(self, point, tol: float = 1e-9) -> bool:
        return bool(np.all(self.A @ np.asarray(point, dtype=float) <= self.b + tol))

    def vertices(self) -> np.ndarray:
        from .geometry import polytope_vertices
        return polytope_vertices(self)

    def restrict(self, rate: str, value: float = 0.0) -> "RatePolytope":
        """Fix one rate and drop it from the coordinates."""
        j = self.rates.index(rate)
        keep = [i for i in range(self.dim) if i != j]
        A = self.A[:, keep]
        b = self.b - self.A[:, j] * value
        nz = A.any(axis=1)
        if np.any(b[~nz] < -1e-12):
            raise RegionError(f"fixing {rate}={value} leaves an empty polytope")
        return RatePolytope(tuple(self.rates[i] for i in keep), A[nz], b[nz],
                            tuple(l for l, z in zip(self.labels, nz) if z))

    def to_json(self) -> dict:
        return {"rates": list(self.rates),
                "inequalities": [{"coeffs": [int(c) for c in a], "rhs": float(r), "label": l}
                                 for a, r, l in zip(self.A, self.b, self.labels)]}

    @classmethod
    def from_json(cls, obj: dict) -> "RatePolytope":
        rows = obj["inequalities"]
        return cls(tuple(obj["rates"]), np.array([r["coeffs"] for r in rows], dtype=int),
                   np.array([r["rhs"] for r in rows], dtype=float),
                   tuple(r.get("label", "") for r in rows))


def _row_text(rates, coeffs) -> str:
    parts = []
    for c, r in zip(coeffs, rates):
        if c:
            parts.append(("" if c == 1 else "-" if c == -1 else f"{c}") + r)
    return "+".join(parts).replace("+-", "-")


@dataclass(frozen=True)
class PolytopeFamily:
    """Polytopes sharing one coefficient matrix; ``B`` has one row per member."""

    rates: tuple
    A: np.ndarray
    B: np.ndarray
    labels: tuple
    params: np.ndarray | None = None

    def __len__(self) -> int:
        return self.B.shape[0]

    def __getitem__(self, i: int) -> RatePolytope:
        return RatePolytope(self.rates, self.A, self.B[i], self.labels)

    @classmethod
    def concat(cls, parts: Sequence["PolytopeFamily"]) -> "PolytopeFamily":
        first = parts[0]
        params = None
        if all(p.params is not None for p in parts):
            params = np.concatenate([p.params for p in parts])
        return cls(first.rates, first.A, np.concatenate([p.B for p in parts]), first.labels, params)


def _assemble(rates, rows, batch_shape) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Rows of (coeffs, rhs, label) with rhs possibly batched -> (A, B, labels)."""
    d = len(rates)
    rows = list(rows) + [(c, 0.0, f"{rates[c.index(-1)]}>=0") for c, _ in _nonneg_rows(d)]
    A = np.array([r[0] for r in rows], dtype=int)
    B = np.stack([np.broadcast_to(np.asarray(r[1], dtype=float), batch_shape) for r in rows], axis=-1)
    return A, B, tuple(r[2] for r in rows)


def _finish(rates, rows, joint: JointDistribution, params=None):
    A, B, labels = _assemble(rates, rows, joint.batch_shape)
    if joint.batch_ndim == 0:
        return RatePolytope(tuple(rates), A, B, labels)
    B = B.reshape(-1, A.shape[0])
    if params is not None:
        params = np.asarray(params).reshape(B.shape[0], -1)
    return PolytopeFamily(tuple(rates), A, B, labels, params)


# -- slices ----------------------------------------------------------------

def _onehot(indices: np.ndarray, size: int) -> np.ndarray:
    return np.eye(size)[np.asarray(indices, dtype=int)]


def _batch_shape(arr: np.ndarray, core_ndim: int) -> tuple:
    return np.asarray(arr).shape[: np.asarray(arr).ndim - core_ndim]


@dataclass(frozen=True)
class HKSlice:
    """p(u1,x1) p(u2,x2) on a general DM-IC."""

    p_u1x1: np.ndarray
    p_u2x2: np.ndarray
    channel: GeneralDMIC
    u1: Alphabet | None = None
    u2: Alphabet | None = None

    def __post_init__(self):
        for name, arr, x in (("u1", self.p_u1x1, self.channel.x1), ("u2", self.p_u2x2, self.channel.x2)):
            arr = np.asarray(arr, dtype=float)
            if arr.ndim < 2 or arr.shape[-1] != len(x):
                raise RegionError(f"p({name},x) has shape {arr.shape}; last axis must match |X| = {len(x)}")
            if getattr(self, name) is None:
                object.__setattr__(self, name, Alphabet(name.upper(), tuple(range(arr.shape[-2]))))
            elif len(getattr(self, name)) != arr.shape[-2]:
                raise RegionError(f"alphabet {name} does not match p({name},x)")
        self.kernels()

    def kernels(self) -> list[Kernel]:
        ch = self.channel
        return [
            Kernel(("U1", "X1"), (self.u1, ch.x1), (), self.p_u1x1),
            Kernel(("U2", "X2"), (self.u2, ch.x2), (), self.p_u2x2),
            Kernel(("Y1", "Y2"), (ch.y1, ch.y2), ("X1", "X2"), ch.kernel),
        ]

    def joint(self) -> JointDistribution:
        return product_joint(self.kernels())


@dataclass(frozen=True)
class SDZICInnerSlice:
    """p(s) p(u,v|s) p(x1|u,v,s) p(x2) with channel p(y1|x1,s) p(y2|x1,x2,s)."""

    state: Pmf
    u: Alphabet
    v: Alphabet
    x1: Alphabet
    x2: Alphabet
    y1: Alphabet
    y2: Alphabet
    p_uv_given_s: np.ndarray  # (..., |S|, |U|, |V|)
    p_x1_given_uvs: np.ndarray  # (..., |U|, |V|, |S|, |X1|)
    p_x2: np.ndarray  # (..., |X2|)
    p_y1_given_x1s: np.ndarray  # (|X1|, |S|, |Y1|)
    p_y2_given_x1x2s: np.ndarray  # (|X1|, |X2|, |S|, |Y2|)

    def __post_init__(self):
        self.kernels()

    def kernels(self) -> list[Kernel]:
        s = self.state.alphabet
        s = Alphabet("S", s.symbols)
        return [
            Kernel(("S",), (s,), (), self.state.probs),
            Kernel(("U", "V"), (self.u, self.v), ("S",), self.p_uv_given_s),
            Kernel(("X1",), (self.x1,), ("U", "V", "S"), self.p_x1_given_uvs),
            Kernel(("X2",), (self.x2,), (), self.p_x2),
            Kernel(("Y1",), (self.y1,), ("X1", "S"), self.p_y1_given_x1s),
            Kernel(("Y2",), (self.y2,), ("X1", "X2", "S"), self.p_y2_given_x1x2s),
        ]

    def joint(self) -> JointDistribution:
        try:
            return product_joint(self.kernels())
        except ValueError as exc:
            raise RegionError(f"inconsistent inner-bound slice: {exc}") from None


@dataclass(frozen=True)
class DetCapSlice:
    """p(x1|s) p(x2) on an injective deterministic S-D Z-IC."""

    channel: DeterministicSDZIC
    p_x1_given_s: np.ndarray  # (..., |S|, |X1|)
    p_x2: np.ndarray  # (..., |X2|)

    def __post_init__(self):
        self.kernels()

    def kernels(self) -> list[Kernel]:
        ch = self.channel
        return [
            Kernel(("S",), (ch.s,), (), ch.state.probs),
            Kernel(("X1",), (ch.x1,), ("S",), self.p_x1_given_s),
            Kernel(("X2",), (ch.x2,), (), self.p_x2),
        ]

    def joint(self) -> JointDistribution:
        ch = self.channel
        j = product_joint(self.kernels())
        j = j.with_function("Y1", ch.y1, ("X1", "S"), ch.y1_map)
        j = j.with_function("T1", ch.t1, ("X1", "S"), ch.t1_map)
        return j.with_function("Y2", ch.y2, ("X2", "T1"), ch.y2_map)


DEFAULT_W_SLACK = 3


@dataclass(frozen=True)
class CribbingSlice:
    """p(w) p(x1|w[,s]) p(x2|w) on a cribbing channel.

    With a :class:`StateCribbingZIC`, ``p_x1_given_w`` has shape
    ``(..., |W|, |S|, |X1|)``.  ``w_cap`` defaults to |Y2| + 3.
    """

    channel: CribbingZIC | StateCribbingZIC
    p_w: np.ndarray
    p_x1_given_w: np.ndarray
    p_x2_given_w: np.ndarray
    w: Alphabet | None = None
    w_cap: int | None = None

    def __post_init__(self):
        p_w = np.asarray(self.p_w)
        if self.w is None:
            object.__setattr__(self, "w", Alphabet("W", tuple(range(p_w.shape[-1]))))
        cap = self.w_cap if self.w_cap is not None else len(self.channel.y2) + DEFAULT_W_SLACK
        object.__setattr__(self, "w_cap", cap)
        if len(self.w) > cap:
            raise RegionError(f"|W| = {len(self.w)} exceeds the cardinality cap {cap}")
        self.kernels()

    @property
    def has_state(self) -> bool:
        return isinstance(self.channel, StateCribbingZIC)

    def kernels(self) -> list[Kernel]:
        ch = self.channel
        ks = [Kernel(("W",), (self.w,), (), self.p_w)]
        if self.has_state:
            ks.append(Kernel(("S",), (ch.s,), (), ch.state.probs))
            ks.append(Kernel(("X1",), (ch.x1,), ("W", "S"), self.p_x1_given_w))
        else:
            ks.append(Kernel(("X1",), (ch.x1,), ("W",), self.p_x1_given_w))
        ks.append(Kernel(("X2",), (ch.x2,), ("W",), self.p_x2_given_w))
        return ks

    def joint(self) -> JointDistribution:
        ch = self.channel
        j = product_joint(self.kernels())
        x1_args = ("X1", "S") if self.has_state else ("X1",)
        j = j.with_function("Y1", ch.y1, x1_args, ch.y1_map)
        j = j.with_function("T1", ch.t1, x1_args, ch.t1_map)
        j = j.with_function("Y2", ch.y2, ("X2", "T1"), ch.y2_map)
        return j.with_function("Z2", ch.z2, ("X2",), ch.z2_map)


def inner_slice_from_det(sl: DetCapSlice, v: str | None = "T1") -> SDZICInnerSlice:
    """Inner-bound slice with U = Y1 and V = T1 (or V constant when ``v`` is None)."""
    ch = sl.channel
    px1 = np.asarray(sl.p_x1_given_s, dtype=float)
    batch = px1.shape[:-2]
    nS, nX1 = len(ch.s), len(ch.x1)
    u_ind = _onehot(ch.y1_map.T, len(ch.y1))  # (S, X1, U)
    if v is None:
        v_alph = Alphabet("V", (0,))
        v_ind = np.ones((nS, nX1, 1))
    elif v == "T1":
        v_alph = Alphabet("V", ch.t1.symbols)
        v_ind = _onehot(ch.t1_map.T, len(ch.t1))
    else:
        raise RegionError(f"unsupported choice V={v!r}")
    # joint over (s, x1, u, v) given s
    w = px1[..., :, :, None, None] * u_ind[:, :, :, None] * v_ind[:, :, None, :]
    p_uv = w.sum(axis=-3)  # (..., S, U, V)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = w / p_uv[..., :, None, :, :]
    nU, nV = p_uv.shape[-2], p_uv.shape[-1]
    cond = np.where(p_uv[..., :, None, :, :] > 0, cond, 1.0 / nX1)  # (..., S, X1, U, V)
    p_x1 = np.moveaxis(cond, [-4, -3], [-2, -1])  # (..., U, V, S, X1)
    py1 = _onehot(ch.y1_map, len(ch.y1))  # (X1, S, Y1)
    y2_of = ch.y2_map[np.arange(len(ch.x2))[None, :, None], ch.t1_map[:, None, :]]  # (X1, X2, S)
    py2 = _onehot(y2_of, len(ch.y2))
    return SDZICInnerSlice(
        state=Pmf(Alphabet("S", ch.s.symbols), ch.state.probs),
        u=Alphabet("U", ch.y1.symbols), v=v_alph,
        x1=ch.x1, x2=ch.x2, y1=ch.y1, y2=ch.y2,
        p_uv_given_s=p_uv.reshape(batch + (nS, nU, nV)), p_x1_given_uvs=p_x1,
        p_x2=sl.p_x2, p_y1_given_x1s=py1, p_y2_given_x1x2s=py2,
    )


def int_noise_slice(channel: DeterministicSDZIC, p_u_given_s, p_x2) -> SDZICInnerSlice:
    """Gelfand-Pinsker at Tx1 with X1 = U, V constant; interference treated as noise."""
    ch = channel
    p_u = np.asarray(p_u_given_s, dtype=float)
    if p_u.shape[-1] != len(ch.x1):
        raise RegionError("U must share the X1 alphabet when X1 = U")
    nX1, nS = len(ch.x1), len(ch.s)
    p_x1 = np.broadcast_to(np.eye(nX1)[:, None, None, :], (nX1, 1, nS, nX1))
    y2_of = ch.y2_map[np.arange(len(ch.x2))[None, :, None], ch.t1_map[:, None, :]]
    return SDZICInnerSlice(
        state=Pmf(Alphabet("S", ch.s.symbols), ch.state.probs),
        u=Alphabet("U", ch.x1.symbols), v=Alphabet("V", (0,)),
        x1=ch.x1, x2=ch.x2, y1=ch.y1, y2=ch.y2,
        p_uv_given_s=p_u[..., None], p_x1_given_uvs=p_x1, p_x2=p_x2,
        p_y1_given_x1s=_onehot(ch.y1_map, len(ch.y1)),
        p_y2_given_x1x2s=_onehot(y2_of, len(ch.y2)),
    )


# -- Han-Kobayashi -----------------------------------------------------------

R12 = ("R1", "R2")


def _hk_rows(j: JointDistribution):
    a = I(j, "X1", "Y1", "U2")
    b = I(j, "X2", "Y2", "U1")
    s1 = I(j, "X1", "Y1", "U1,U2") + I(j, "X2,U1", "Y2")
    s2 = I(j, "X1,U2", "Y1", "U1") + I(j, "X2,U1", "Y2", "U2")
    s3 = I(j, "X1,U2", "Y1") + I(j, "X2", "Y2", "U1,U2")
    w1 = I(j, "X1", "Y1", "U1,U2") + I(j, "X2,U1", "Y2", "U2") + I(j, "X1,U2", "Y1")
    w2 = I(j, "X2", "Y2", "U1,U2") + I(j, "X1,U2", "Y1", "U1") + I(j, "X2,U1", "Y2")
    return [((1, 0), a, "R1"), ((0, 1), b, "R2"), ((1, 1), s1, "R1+R2#1"), ((1, 1), s2, "R1+R2#2"),
            ((1, 1), s3, "R1+R2#3"), ((2, 1), w1, "2R1+R2"), ((1, 2), w2, "R1+2R2")]


def eval_hk(sl: HKSlice) -> RatePolytope:
    """Han-Kobayashi region (compact form) for one input-distribution slice."""
    j = sl.joint()
    return _finish(R12, _hk_rows(j), j)


@dataclass(frozen=True)
class BoundTerms:
    """Right-hand sides a..j of the ten random-coding conditions (bits)."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float
    h: float
    i: float
    j: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def hk_rhs(self) -> tuple:
        """Right-hand sides of the seven-inequality region after elimination."""
        a, b, c, d, e, f, g, h, i, j = (getattr(self, k) for k in "abcdefghij")
        return (e - a, i - b, c + j - a - b, d + h - a - b, f + g - a - b,
                c + h + f - 2 * a - b, d + g + j - a - 2 * b)

    def relations(self) -> dict:
        """Slack of each relation among the terms; all are >= 0 for valid slices."""
        a, b, c, d, e, f, g, h, i, j = (getattr(self, k) for k in "abcdefghij")
        return {
            "e-a<=c": c - (e - a), "e-a<=d": d - (e - a), "f-a<=d": d - (f - a), "d<=f": f - d,
            "c<=e": e - c, "e<=f": f - e,
            "i-b<=g": g - (i - b), "i-b<=h": h - (i - b), "j-b<=h": h - (j - b), "h<=j": j - h,
            "g<=i": i - g, "i<=j": j - i,
        }


def _bound_terms(jd: JointDistribution) -> BoundTerms:
    a = I(jd, "U1", "X1")
    b = I(jd, "U2", "X2")
    c = I(jd, "X1", "U1,U2,Y1")
    d = I(jd, "X1,U2", "U1,Y1")
    e = a + I(jd, "U1,X1", "U2,Y1")
    f = a + I(jd, "U2", "Y1") + I(jd, "U1,X1", "U2,Y1")
    g = I(jd, "X2", "U2,U1,Y2")
    h = I(jd, "X2,U1", "U2,Y2")
    i = b + I(jd, "U2,X2", "U1,Y2")
    jj = b + I(jd, "U1", "Y2") + I(jd, "U2,X2", "U1,Y2")
    return BoundTerms(a, b, c, d, e, f, g, h, i, jj)


def eval_bound_terms(sl: HKSlice) -> BoundTerms:
    return _bound_terms(sl.joint())


# -- state-dependent Z-IC ----------------------------------------------------

def _sdzic_inner_rows(j: JointDistribution):
    ius = I(j, "U", "S")
    iuy = I(j, "U", "Y1")
    ivx = I(j, "V,X2", "Y2")
    return [
        ((1, 0), iuy - ius, "R1"),
        ((0, 1), I(j, "X2", "Y2", "V"), "R2#1"),
        ((0, 1), ivx - I(j, "V", "S"), "R2#2"),
        ((1, 1), iuy + ivx - ius - I(j, "U,S", "V"), "R1+R2"),
    ]


def eval_sdzic_inner(sl: SDZICInnerSlice) -> RatePolytope:
    j = sl.joint()
    return _finish(R12, _sdzic_inner_rows(j), j)


def _det_capacity_rows(j: JointDistribution):
    its = I(j, "T1", "S")
    hy2 = H(j, "Y2")
    return [
        ((1, 0), Hc(j, "Y1", "S"), "R1"),
        ((0, 1), Hc(j, "Y2", "T1"), "R2#1"),
        ((0, 1), hy2 - its, "R2#2"),
        ((1, 1), Hc(j, "Y1", "T1,S") + hy2 - its, "R1+R2"),
    ]


def eval_det_capacity(sl: DetCapSlice) -> RatePolytope:
    require_injective(sl.channel)
    j = sl.joint()
    return _finish(R12, _det_capacity_rows(j), j)


def _zchannel_rows(j: JointDistribution):
    its = I(j, "T1", "S")
    hy2 = H(j, "Y2")
    # coordinates (R1, R21, R2)
    return [
        ((1, 0, 0), Hc(j, "Y1", "S"), "R1"),
        ((0, 0, 1), Hc(j, "Y2", "T1"), "R2"),
        ((0, 1, 0), Hc(j, "T1", "S"), "R21"),
        ((1, 1, 0), Hc(j, "T1,Y1", "S"), "R1+R21"),
        ((0, 1, 1), hy2 - its, "R2+R21"),
        ((1, 1, 1), Hc(j, "Y1", "T1,S") + hy2 - its, "R1+R2+R21"),
    ]


ZRATES = ("R1", "R21", "R2")


def eval_zchannel_capacity(sl: DetCapSlice) -> RatePolytope:
    """Capacity polytope of the injective deterministic S-D Z-channel over (R1, R21, R2)."""
    require_injective(sl.channel)
    j = sl.joint()
    return _finish(ZRATES, _zchannel_rows(j), j)


# -- cribbing --------------------------------------------------------------

def _cribbing_rows(j: JointDistribution):
    hy2 = H(j, "Y2")
    hyz = Hc(j, "Y2,Z2", "W")
    h1t = Hc(j, "Y1", "T1,W")
    return [
        ((1, 0), Hc(j, "Y1", "W"), "R1"),
        ((0, 1), hy2, "R2#H(Y2)"),
        ((0, 1), Hc(j, "Y2,Z2", "T1,W"), "R2#H(Y2,Z2|T1,W)"),
        ((1, 1), h1t + hy2, "R1+R2#H(Y2)"),
        ((1, 1), h1t + hyz, "R1+R2#H(Y2,Z2|W)"),
    ]


def eval_cribbing_capacity(sl: CribbingSlice) -> RatePolytope:
    if sl.has_state:
        raise RegionError("state-dependent cribbing slice: use eval_state_cribbing_capacity")
    require_injective(sl.channel)
    j = sl.joint()
    return _finish(R12, _cribbing_rows(j), j)


def _state_cribbing_rows(j: JointDistribution):
    its = I(j, "T1", "S", "W")
    hy2 = H(j, "Y2")
    hyz = Hc(j, "Y2,Z2", "W")
    h1 = Hc(j, "Y1", "W,T1,S")
    return [
        ((1, 0), Hc(j, "Y1", "W,S"), "R1"),
        ((0, 1), Hc(j, "Y2,Z2", "T1,W"), "R2#H(Y2,Z2|T1,W)"),
        ((0, 1), hy2 - its, "R2#H(Y2)"),
        ((0, 1), hyz - its, "R2#H(Y2,Z2|W)"),
        ((1, 1), h1 + hy2 - its, "R1+R2#H(Y2)"),
        ((1, 1), h1 + hyz - its, "R1+R2#H(Y2,Z2|W)"),
    ]


def eval_state_cribbing_capacity(sl: CribbingSlice) -> RatePolytope:
    if not sl.has_state:
        raise RegionError("slice has no state; wrap the channel with StateCribbingZIC.from_cribbing")
    require_injective(sl.channel)
    j = sl.joint()
    return _finish(R12, _state_cribbing_rows(j), j)


# -- closed forms for the modulo-additive channel ------------------------------

def _delta0(m: int) -> np.ndarray:
    d = np.zeros(m)
    d[0] = 1.0
    return d


def _probs(p) -> np.ndarray:
    return np.asarray(p.probs if isinstance(p, Pmf) else p, dtype=float)


def _closed(rows, batch_shape, params=None):
    A, B, labels = _assemble(R12, rows, batch_shape)
    if not batch_shape:
        return RatePolytope(R12, A, B, labels)
    return PolytopeFamily(R12, A, B.reshape(-1, A.shape[0]), labels,
                          None if params is None else np.asarray(params).reshape(B.size // A.shape[0], -1))


def eval_modulo_closed_form(m: int, lam: float, p) -> RatePolytope | PolytopeFamily:
    """Explicit capacity-region slice of the modulo-additive channel for pmf ``p``.

    ``p`` may be a stack of pmfs, shape ``(N, m)``, giving a family.
    """
    p = _probs(p)
    if p.shape[-1] != m:
        raise RegionError(f"pmf over {p.shape[-1]} symbols for modulus {m}")
    logm = math.log2(m)
    r1 = (1 - lam) * logm + lam * entropy_of(p)
    r2 = logm - entropy_of(lam * p + (1 - lam) * _delta0(m))
    return _closed([((1, 0), r1, "R1"), ((0, 1), r2, "R2")], p.shape[:-1], p)


def cyclic_convolution(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """r(k) = sum_i p(i) q((k - i) mod m) along the last axis."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    m = p.shape[-1]
    idx = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m  # [k, i] -> k - i
    return np.einsum("...i,...ki->...k", p, q[..., idx])


def eval_modulo_intermediate(lam: float, p10, p11, p2) -> RatePolytope | PolytopeFamily:
    """Capacity slice of the modulo channel in terms of p(x1|s=0), p(x1|s=1), p(x2)."""
    p10, p11, p2 = _probs(p10), _probs(p11), _probs(p2)
    m = p10.shape[-1]
    if p11.shape[-1] != m or p2.shape[-1] != m:
        raise RegionError("all pmfs must share one alphabet")
    ptilde = cyclic_convolution(p11, p2)
    h10, h11 = entropy_of(p10), entropy_of(p11)
    hmix = entropy_of((1 - lam) * p2 + lam * ptilde)
    hint = entropy_of(lam * p11 + (1 - lam) * _delta0(m))
    rows = [
        ((1, 0), (1 - lam) * h10 + lam * h11, "R1"),
        ((0, 1), entropy_of(p2), "R2#1"),
        ((0, 1), hmix + lam * h11 - hint, "R2#2"),
        ((1, 1), (1 - lam) * h10 + hmix + lam * h11 - hint, "R1+R2"),
    ]
    batch = np.broadcast_shapes(p10.shape[:-1], p11.shape[:-1], p2.shape[:-1])
    return _closed(rows, batch)


def eval_separation(levels: int, pmfs) -> RatePolytope | PolytopeFamily:
    """Level-by-level scheme on the binary multi-level channel with a Ber(1/2) state.

    ``pmfs`` has shape ``(..., L, 2)``: one binary pmf per level.
    """
    p = np.asarray(pmfs, dtype=float)
    if p.shape[-2:] != (levels, 2):
        raise RegionError(f"expected {levels} binary pmfs, got shape {p.shape}")
    r1 = levels / 2 + 0.5 * entropy_of(p).sum(axis=-1)
    r2 = levels - entropy_of(0.5 * p + 0.5 * _delta0(2)).sum(axis=-1)
    return _closed([((1, 0), r1, "R1"), ((0, 1), r2, "R2")], p.shape[:-2],
                   p.reshape(p.shape[:-2] + (-1,)))


def eval_communicate_state(levels: int, p) -> RatePolytope | PolytopeFamily:
    """Reserve one level to signal the state to receiver 2; ``p`` is over 2^(L-1) symbols."""
    if levels < 2:
        raise RegionError("the communicate-state scheme needs at least two levels")
    p = _probs(p)
    if p.shape[-1] != 2 ** (levels - 1):
        raise RegionError(f"pmf must have {2 ** (levels - 1)} symbols")
    h = entropy_of(p)
    return _closed([((1, 0), levels / 2 + 0.5 * h, "R1"), ((0, 1), levels - 1 - 0.5 * h, "R2")],
                   p.shape[:-1], p)


# -- batched entry points ------------------------------------------------------

def det_capacity_family(sl: DetCapSlice, zchannel: bool = False) -> PolytopeFamily:
    """Evaluate a batched DetCapSlice (arrays with one leading batch axis)."""
    require_injective(sl.channel)
    j = sl.joint()
    params = np.concatenate([np.asarray(sl.p_x1_given_s).reshape(j.batch_shape + (-1,)),
                             np.broadcast_to(sl.p_x2, j.batch_shape + (len(sl.channel.x2),))], axis=-1)
    if zchannel:
        return _finish(ZRATES, _zchannel_rows(j), j, params)
    return _finish(R12, _det_capacity_rows(j), j, params)


def sdzic_inner_family(sl: SDZICInnerSlice) -> PolytopeFamily:
    j = sl.joint()
    params = np.asarray(sl.p_uv_given_s).reshape(j.batch_shape + (-1,))
    return _finish(R12, _sdzic_inner_rows(j), j, params)


def cribbing_family(sl: CribbingSlice) -> PolytopeFamily:
    require_injective(sl.channel)
    j = sl.joint()
    params = np.concatenate([np.asarray(a).reshape(j.batch_shape + (-1,))
                             for a in (sl.p_w, sl.p_x1_given_w, sl.p_x2_given_w)], axis=-1)
    rows = _state_cribbing_rows(j) if sl.has_state else _cribbing_rows(j)
    return _finish(R12, rows, j, params)


def hk_family(sl: HKSlice) -> PolytopeFamily:
    j = sl.joint()
    params = np.concatenate([np.asarray(sl.p_u1x1).reshape(j.batch_shape + (-1,)),
                             np.asarray(sl.p_u2x2).reshape(j.batch_shape + (-1,))], axis=-1)
    return _finish(R12, _hk_rows(j), j, params)
