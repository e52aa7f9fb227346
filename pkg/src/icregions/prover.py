"""Shannon-type inequality prover over the polymatroid cone.

An expression is provable when its minimum over ``{h : G h >= 0, E h = 0}``
is zero, where ``G`` stacks the elemental inequalities and ``E`` the
declared constraints.  The cone LP is cut with ``expr >= -1``, so an
unprovable expression yields a point of the cone where it equals -1.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .lp import LPError, linprog

MAX_VARS = 8
CERT_TOL = 1e-9


class ProverError(RuntimeError):
    pass


class QueryError(ValueError):
    pass


class EntropySpace:
    """Coordinates h(A) for nonempty subsets A of a ground set, in bitmask order."""

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if not 1 <= len(names) <= MAX_VARS:
            raise QueryError(f"ground set must have 1 to {MAX_VARS} variables, got {len(names)}")
        if len(set(names)) != len(names):
            raise QueryError("repeated variable names")
        self.names = names
        self.k = len(names)
        self.dim = 2 ** self.k - 1

    def mask(self, group) -> int:
        if isinstance(group, str):
            group = [g for g in group.replace(" ", "").split(",") if g]
        m = 0
        for g in group:
            if g not in self.names:
                raise QueryError(f"unknown variable {g!r}; ground set is {self.names}")
            m |= 1 << self.names.index(g)
        return m

    def _vec(self, terms: dict) -> "EntropyExpression":
        v = np.zeros(self.dim)
        for m, c in terms.items():
            if m:
                v[m - 1] += c
        return EntropyExpression(self, v)

    def H(self, a, given=()) -> "EntropyExpression":
        ma, mg = self.mask(a), self.mask(given)
        if not ma:
            raise QueryError("entropy of an empty set")
        if ma & mg:
            raise QueryError("conditioning set overlaps the variables")
        return self._vec({ma | mg: 1.0, mg: -1.0} if mg else {ma: 1.0})

    def I(self, a, b, given=()) -> "EntropyExpression":
        ma, mb, mg = self.mask(a), self.mask(b), self.mask(given)
        if not ma or not mb:
            raise QueryError("mutual information needs two nonempty sets")
        if ma & mb or ma & mg or mb & mg:
            raise QueryError("argument sets overlap")
        terms: dict[int, float] = {}
        for m, c in ((ma | mg, 1.0), (mb | mg, 1.0), (ma | mb | mg, -1.0), (mg, -1.0)):
            terms[m] = terms.get(m, 0.0) + c
        return self._vec(terms)

    def zero(self) -> "EntropyExpression":
        return EntropyExpression(self, np.zeros(self.dim))

    def subset_names(self, mask: int) -> tuple:
        return tuple(n for i, n in enumerate(self.names) if mask >> i & 1)

    def entropy_vector(self, joint) -> np.ndarray:
        """h(A) for every nonempty A, from a prob-core joint over (at least) these names."""
        from .prob import entropy
        return np.array([entropy(joint, self.subset_names(m)) for m in range(1, self.dim + 1)])


@dataclass
class EntropyExpression:
    space: EntropySpace
    coeffs: np.ndarray

    def __add__(self, other):
        self._same(other)
        return EntropyExpression(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same(other)
        return EntropyExpression(self.space, self.coeffs - other.coeffs)

    def __neg__(self):
        return EntropyExpression(self.space, -self.coeffs)

    def __mul__(self, s):
        return EntropyExpression(self.space, float(s) * self.coeffs)

    __rmul__ = __mul__

    def _same(self, other):
        if other.space.names != self.space.names:
            raise QueryError("expressions live in different entropy spaces")

    def is_zero(self) -> bool:
        return not np.any(np.abs(self.coeffs) > 1e-15)

    def value(self, h: np.ndarray) -> float:
        return float(self.coeffs @ h)

    def __str__(self) -> str:
        parts = []
        for m in np.nonzero(self.coeffs)[0]:
            c = Fraction(self.coeffs[m]).limit_denominator(1000)
            sub = ",".join(self.space.subset_names(int(m) + 1))
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            parts.append(f"{'-' if c < 0 else '+'} {mag}H({sub})")
        return " ".join(parts).lstrip("+ ") or "0"


@dataclass
class ConstraintSet:
    exprs: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    def add(self, expr: EntropyExpression, label: str = "") -> "ConstraintSet":
        if expr.is_zero():
            raise QueryError(f"constraint {label or expr} is identically zero")
        self.exprs.append(expr)
        self.labels.append(label or str(expr))
        return self

    def indep(self, space: EntropySpace, a, b) -> "ConstraintSet":
        return self.add(space.I(a, b), f"indep {a} ; {b}")

    def markov(self, space: EntropySpace, a, b, c) -> "ConstraintSet":
        return self.add(space.I(a, c, b), f"markov {a} - {b} - {c}")

    def func(self, space: EntropySpace, a, b) -> "ConstraintSet":
        return self.add(space.H(a, b), f"func {a} | {b}")

    def __len__(self) -> int:
        return len(self.exprs)


def elemental_inequalities(k: int) -> np.ndarray:
    """Rows of G (each row . h >= 0): monotonicity then submodularity."""
    if not 1 <= k <= MAX_VARS:
        raise QueryError(f"k must be in 1..{MAX_VARS}")
    dim = 2 ** k - 1
    full = dim
    rows = []
    for i in range(k):
        r = np.zeros(dim)
        r[full - 1] += 1
        rest = full & ~(1 << i)
        if rest:
            r[rest - 1] -= 1
        rows.append(r)
    for i, j in itertools.combinations(range(k), 2):
        others = [t for t in range(k) if t not in (i, j)]
        for sz in range(len(others) + 1):
            for sub in itertools.combinations(others, sz):
                a = sum(1 << t for t in sub)
                r = np.zeros(dim)
                r[(a | 1 << i) - 1] += 1
                r[(a | 1 << j) - 1] += 1
                r[(a | 1 << i | 1 << j) - 1] -= 1
                if a:
                    r[a - 1] -= 1
                rows.append(r)
    return np.array(rows)


def elemental_count(k: int) -> int:
    return k + math.comb(k, 2) * 2 ** (k - 2) if k >= 2 else k


@dataclass
class ProofResult:
    provable: bool
    # Provable: expr = y . G + z . E with y >= 0
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    # NotProvable: a point of the cone where expr = -1
    ray: np.ndarray | None = None

    @property
    def verdict(self) -> str:
        return "Provable" if self.provable else "NotProvable"


def _constraint_matrix(space: EntropySpace, constraints: ConstraintSet | None) -> np.ndarray:
    if constraints is None or len(constraints) == 0:
        return np.zeros((0, space.dim))
    for e in constraints.exprs:
        if e.space.names != space.names:
            raise QueryError("constraint and target use different entropy spaces")
    return np.array([e.coeffs for e in constraints.exprs])


def prove(expr: EntropyExpression, constraints: ConstraintSet | None = None) -> ProofResult:
    """Decide ``expr >= 0`` over the constrained polymatroid cone."""
    space = expr.space
    G = elemental_inequalities(space.k)
    E = _constraint_matrix(space, constraints)
    c = expr.coeffs
    try:
        res = linprog(c, A_ub=np.vstack([-G, -c[None, :]]), b_ub=np.concatenate([np.zeros(len(G)), [1.0]]),
                      A_eq=E if len(E) else None, b_eq=np.zeros(len(E)) if len(E) else None)
    except LPError as exc:
        raise ProverError(f"LP failure: {exc}") from exc
    if res.status != "optimal":
        raise ProverError(f"cone LP ended with status {res.status}")
    if res.fun < -0.5:
        h = res.x
        return ProofResult(False, ray=h)
    if res.fun < -1e-7:
        raise ProverError(f"ambiguous cone minimum {res.fun:.3g}")
    # certificate: c = G^T y + E^T (zp - zn), y, zp, zn >= 0
    ne = len(E)
    A = np.hstack([G.T, E.T, -E.T]) if ne else G.T
    try:
        cert = linprog(np.zeros(A.shape[1]), A_eq=A, b_eq=c)
    except LPError as exc:
        raise ProverError(f"certificate LP failure: {exc}") from exc
    if cert.status != "optimal":
        raise ProverError("bounded cone minimum but no dual certificate found")
    y = cert.x[: len(G)]
    z = cert.x[len(G): len(G) + ne] - cert.x[len(G) + ne:] if ne else np.zeros(0)
    return ProofResult(True, y=y, z=z)


def verify_certificate(expr: EntropyExpression, constraints: ConstraintSet | None,
                       result: ProofResult, tol: float = CERT_TOL) -> float:
    """Return the certificate's defect; raise if it exceeds ``tol``."""
    space = expr.space
    G = elemental_inequalities(space.k)
    E = _constraint_matrix(space, constraints)
    if result.provable:
        resid = G.T @ result.y - expr.coeffs
        if len(E):
            resid = resid + E.T @ result.z
        defect = max(float(np.abs(resid).max()), float(-result.y.min(initial=0.0)))
    else:
        h = result.ray
        defect = max(float(-(G @ h).min(initial=0.0)),
                     float(np.abs(E @ h).max(initial=0.0)) if len(E) else 0.0,
                     expr.value(h) + 1.0)
    if defect > tol:
        raise ProverError(f"certificate defect {defect:.3g} above {tol}")
    return defect


# -- numerical checks -------------------------------------------------------------

HK_NAMES = ("U1", "X1", "U2", "X2", "Y1", "Y2")


def _hk_sampler(rng: np.random.Generator):
    from .prob import Alphabet, Kernel, product_joint, random_kernel_table
    sz = {n: int(rng.integers(2, 4)) for n in HK_NAMES}
    al = {n: Alphabet(n, tuple(range(sz[n]))) for n in HK_NAMES}
    conc = float(rng.choice([0.3, 1.0, 3.0]))
    ks = [
        Kernel(("U1", "X1"), (al["U1"], al["X1"]), (), random_kernel_table(rng, (sz["U1"] * sz["X1"],), conc)
               .reshape(sz["U1"], sz["X1"])),
        Kernel(("U2", "X2"), (al["U2"], al["X2"]), (), random_kernel_table(rng, (sz["U2"] * sz["X2"],), conc)
               .reshape(sz["U2"], sz["X2"])),
        Kernel(("Y1", "Y2"), (al["Y1"], al["Y2"]), ("X1", "X2"),
               random_kernel_table(rng, (sz["X1"], sz["X2"], sz["Y1"] * sz["Y2"]), conc)
               .reshape(sz["X1"], sz["X2"], sz["Y1"], sz["Y2"])),
    ]
    return product_joint(ks)


def dag_sampler(parents: dict[str, Sequence[str]], sizes: Sequence[int] = (2, 3)):
    """Sampler for a Bayesian network given as ``{var: parents}`` in topological order."""
    from .prob import Alphabet, Kernel, product_joint, random_kernel_table

    def sample(rng: np.random.Generator):
        ks, al = [], {}
        for v, pa in parents.items():
            al[v] = Alphabet(v, tuple(range(int(rng.choice(sizes)))))
            shape = tuple(len(al[p]) for p in pa) + (len(al[v]),)
            ks.append(Kernel((v,), (al[v],), tuple(pa), random_kernel_table(rng, shape, float(rng.choice([0.3, 1.0])))))
        return product_joint(ks)

    return sample


SAMPLERS: dict[str, Callable] = {"hk": _hk_sampler}


def register_sampler(name: str, fn: Callable) -> None:
    SAMPLERS[name] = fn


def _free_sampler(names):
    from .prob import random_joint

    def sample(rng):
        sizes = [int(rng.integers(2, 4)) for _ in names]
        return random_joint(rng, sizes, names, float(rng.choice([0.3, 1.0, 3.0])))

    return sample


def check_numeric(expr: EntropyExpression, constraints: ConstraintSet | None = None, trials: int = 1000,
                  rng: np.random.Generator | None = None, sampler: str | Callable | None = None) -> float:
    """Largest violation ``max(0, -expr)`` over sampled joints meeting the constraints.

    Without constraints a free random joint is used.  With constraints a
    registered sampler must be named (or "hk" is tried when the ground set
    fits it); every sample is checked against the constraints.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    space = expr.space
    E = _constraint_matrix(space, constraints)
    if callable(sampler):
        draw = sampler
    elif sampler is not None:
        if sampler == "free":
            if len(E):
                raise QueryError("the free sampler cannot honour constraints")
            draw = _free_sampler(space.names)
        elif sampler not in SAMPLERS:
            raise QueryError(f"no sampler named {sampler!r}")
        else:
            draw = SAMPLERS[sampler]
    elif not len(E):
        draw = _free_sampler(space.names)
    elif set(space.names) <= set(HK_NAMES):
        draw = SAMPLERS["hk"]
    else:
        raise QueryError("no sampler registered for this constraint pattern")
    worst = 0.0
    for _ in range(trials):
        h = space.entropy_vector(draw(rng))
        if len(E) and np.abs(E @ h).max() > 1e-9:
            raise QueryError("sampler produced a joint violating the declared constraints")
        worst = max(worst, -expr.value(h))
    return worst


def max_abs_deviation(expr: EntropyExpression, trials: int = 1000, rng=None, sampler=None,
                      constraints: ConstraintSet | None = None) -> float:
    """Largest |expr| over samples; for checking identities."""
    a = check_numeric(expr, constraints, trials, np.random.default_rng(rng) if not isinstance(
        rng, np.random.Generator) else rng, sampler)
    b = check_numeric(-expr, constraints, trials, np.random.default_rng(rng) if not isinstance(
        rng, np.random.Generator) else rng, sampler)
    return max(a, b)


# -- query language -----------------------------------------------------------------

_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+(?:\.\d+)?(?:/\d+)?)\s*\*?\s*)?([HI])\(([^)]*)\)")


def parse_expression(space: EntropySpace, text: str) -> EntropyExpression:
    text = text.strip()
    if text == "0":
        return space.zero()
    out = space.zero()
    pos = 0
    first = True
    while pos < len(text):
        if not text[pos:].strip():
            break
        m = _TERM.match(text, pos)
        if not m or (not first and not m.group(1)):
            raise QueryError(f"cannot parse expression near {text[pos:]!r}")
        coef = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        if m.group(1) == "-":
            coef = -coef
        body = m.group(4)
        if m.group(3) == "H":
            a, _, g = body.partition("|")
            term = space.H(a, g)
        else:
            ab, _, g = body.partition("|")
            if ";" not in ab:
                raise QueryError(f"I(...) needs ';' in {body!r}")
            a, b = ab.split(";", 1)
            term = space.I(a, b, g)
        out = out + term * float(coef)
        pos = m.end()
        first = False
    return out


@dataclass
class Query:
    space: EntropySpace
    target: EntropyExpression
    constraints: ConstraintSet
    text: str = ""


def parse_query(text: str) -> Query:
    space = None
    pending = []
    target = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        if word == "vars":
            space = EntropySpace(rest.replace(",", " ").split())
        elif word in ("indep", "markov", "func", "target"):
            pending.append((lineno, word, rest))
        else:
            raise QueryError(f"line {lineno}: unknown directive {word!r}")
    if space is None:
        raise QueryError("query declares no 'vars' line")
    cons = ConstraintSet()
    for lineno, word, rest in pending:
        try:
            if word == "indep":
                a, b = (p.strip() for p in rest.split(";"))
                cons.indep(space, a, b)
            elif word == "markov":
                a, b, c = (p.strip() for p in rest.split(" - "))
                cons.markov(space, a, b, c)
            elif word == "func":
                a, b = (p.strip() for p in rest.split("|"))
                cons.func(space, a, b)
            else:
                if target is not None:
                    raise QueryError("more than one target")
                m = re.fullmatch(r"(.+?)(>=|<=)(.+)", rest)
                if not m:
                    raise QueryError("target must be '<expr> >= <expr>' or '<expr> <= <expr>'")
                lhs, rhs = parse_expression(space, m.group(1)), parse_expression(space, m.group(3))
                target = lhs - rhs if m.group(2) == ">=" else rhs - lhs
        except ValueError as exc:
            raise QueryError(f"line {lineno}: {exc}") from None
    if target is None:
        raise QueryError("query has no target line")
    if target.is_zero():
        raise QueryError("target expression is identically zero")
    return Query(space, target, cons, text)


# -- the HK term relations --------------------------------------------------------------

def hk_terms(space: EntropySpace) -> dict:
    """a..j as entropy expressions; the space must contain all six HK variables."""
    I = space.I
    a = I("U1", "X1")
    b = I("U2", "X2")
    return {
        "a": a, "b": b,
        "c": I("X1", "U1,U2,Y1"), "d": I("X1,U2", "U1,Y1"),
        "e": a + I("U1,X1", "U2,Y1"), "f": a + I("U2", "Y1") + I("U1,X1", "U2,Y1"),
        "g": I("X2", "U2,U1,Y2"), "h": I("X2,U1", "U2,Y2"),
        "i": b + I("U2,X2", "U1,Y2"), "j": b + I("U1", "Y2") + I("U2,X2", "U1,Y2"),
    }


# (name, lhs terms, rhs terms): relation lhs <= rhs
RELATIONS = [
    ("e-a<=c", "e - a", "c"), ("e-a<=d", "e - a", "d"), ("f-a<=d", "f - a", "d"), ("d<=f", "d", "f"),
    ("c<=e", "c", "e"), ("e<=f", "e", "f"),
    ("i-b<=g", "i - b", "g"), ("i-b<=h", "i - b", "h"), ("j-b<=h", "j - b", "h"), ("h<=j", "h", "j"),
    ("g<=i", "g", "i"), ("i<=j", "i", "j"),
]


def _combo(terms: dict, text: str) -> EntropyExpression:
    out = None
    sign = 1.0
    for tok in text.split():
        if tok in "+-":
            sign = 1.0 if tok == "+" else -1.0
            continue
        out = terms[tok] * sign if out is None else out + terms[tok] * sign
    return out


def hk_constraints(space: EntropySpace, receiver: int | None = None) -> ConstraintSet:
    """Markov chains and independence of the HK factorisation, restricted to
    the variables present in ``space``."""
    cons = ConstraintSet()
    have = set(space.names)

    def keep(group):
        return [g for g in group if g in have]

    for (u, x), (ou, ox) in ((("U1", "X1"), ("U2", "X2")), (("U2", "X2"), ("U1", "X1"))):
        if u in have and x in have:
            rest = keep([ou, ox, "Y1", "Y2"])
            if rest:
                cons.markov(space, u, x, ",".join(rest))
    first, second = keep(["U1", "X1"]), keep(["U2", "X2"])
    if first and second:
        cons.indep(space, ",".join(first), ",".join(second))
    return cons


def relation_query(name: str, restricted: bool = True) -> tuple[EntropyExpression, ConstraintSet]:
    """Target ``rhs - lhs >= 0`` for one HK relation.

    With ``restricted`` the ground set shrinks to the variables the target
    mentions and the factorisation constraints are restated on that set.
    """
    space = EntropySpace(HK_NAMES)
    terms = hk_terms(space)
    for n, lhs, rhs in RELATIONS:
        if n == name:
            expr = _combo(terms, rhs) - _combo(terms, lhs)
            if not restricted:
                return expr, hk_constraints(space)
            small, _ = restrict(expr, None)
            return small, hk_constraints(small.space)
    raise QueryError(f"unknown relation {name!r}")


def minimal_constraints(expr: EntropyExpression, constraints: ConstraintSet) -> ConstraintSet:
    """Greedily drop constraints while the target stays provable."""
    keep = list(zip(constraints.exprs, constraints.labels))
    k = 0
    while k < len(keep):
        trial = ConstraintSet(exprs=[e for e, _ in keep[:k] + keep[k + 1:]],
                              labels=[l for _, l in keep[:k] + keep[k + 1:]])
        if prove(expr, trial).provable:
            keep = keep[:k] + keep[k + 1:]
        else:
            k += 1
    return ConstraintSet(exprs=[e for e, _ in keep], labels=[l for _, l in keep])


def restrict(expr: EntropyExpression, constraints: ConstraintSet | None, extra: Sequence[str] = ()):
    """Re-express on the smallest ground set mentioned by ``expr`` (plus ``extra``)."""
    space = expr.space
    used = 0
    for m in np.nonzero(np.abs(expr.coeffs) > 1e-15)[0]:
        used |= int(m) + 1
    names = [n for i, n in enumerate(space.names) if used >> i & 1 or n in extra]
    small = EntropySpace(names)

    def move(e: EntropyExpression) -> EntropyExpression | None:
        v = np.zeros(small.dim)
        for m in np.nonzero(np.abs(e.coeffs) > 1e-15)[0]:
            sub = space.subset_names(int(m) + 1)
            if not set(sub) <= set(names):
                return None
            v[small.mask(sub) - 1] += e.coeffs[m]
        return EntropyExpression(small, v)

    cons = ConstraintSet()
    if constraints is not None:
        for e, lab in zip(constraints.exprs, constraints.labels):
            moved = move(e)
            if moved is not None and not moved.is_zero():
                cons.add(moved, lab)
    return move(expr), cons
