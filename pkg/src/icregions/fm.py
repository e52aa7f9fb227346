"""Fourier-Motzkin elimination on small linear inequality systems.

Coefficients are exact integers; right-hand sides are floats.  Rows are
stored as ``coeffs . x <= rhs``; ``>=`` rows are negated on input.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_COEFF = 16
RHS_TOL = 1e-9


class FMError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    coeffs: tuple
    rhs: float

    def is_trivial(self) -> bool:
        return not any(self.coeffs)


def _normalize(coeffs: Sequence[int], rhs: float) -> Row:
    g = 0
    for c in coeffs:
        g = math.gcd(g, abs(int(c)))
    if g > 1:
        return Row(tuple(int(c) // g for c in coeffs), rhs / g)
    return Row(tuple(int(c) for c in coeffs), float(rhs))


@dataclass(frozen=True)
class LinearInequalitySystem:
    variables: tuple
    rows: tuple
    pairwise_only: bool = False  # set when redundancy removal skipped the geometric test

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        rows = tuple(r if isinstance(r, Row) else Row(tuple(int(c) for c in r[0]), float(r[1]))
                     for r in self.rows)
        for r in rows:
            if len(r.coeffs) != len(self.variables):
                raise FMError(f"row {r} does not match variables {self.variables}")
            if any(abs(c) > MAX_COEFF for c in r.coeffs):
                raise FMError(f"coefficient magnitude above {MAX_COEFF} in {r}")
            if not math.isfinite(r.rhs):
                raise FMError("non-finite right-hand side")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def build(cls, variables: Sequence[str], rows: Iterable) -> "LinearInequalitySystem":
        """Rows as ``(dict var->coeff, relation, rhs)`` with relation ``<=`` or ``>=``."""
        variables = tuple(variables)
        out = []
        for terms, rel, rhs in rows:
            unknown = set(terms) - set(variables)
            if unknown:
                raise FMError(f"undeclared variables {sorted(unknown)}")
            coeffs = [int(terms.get(v, 0)) for v in variables]
            if rel == ">=":
                coeffs, rhs = [-c for c in coeffs], -rhs
            elif rel != "<=":
                raise FMError(f"unknown relation {rel!r}")
            out.append(Row(tuple(coeffs), float(rhs)))
        return cls(variables, tuple(out))

    @property
    def infeasible(self) -> bool:
        return any(r.is_trivial() and r.rhs < -RHS_TOL for r in self.rows)

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        A = np.array([r.coeffs for r in self.rows], dtype=int).reshape(-1, len(self.variables))
        b = np.array([r.rhs for r in self.rows], dtype=float)
        return A, b

    def satisfied_by(self, x, tol: float = 1e-9) -> bool:
        A, b = self.matrix()
        return bool(np.all(A @ np.asarray(x, dtype=float) <= b + tol))

    def to_text(self) -> str:
        lines = [f"vars {' '.join(self.variables)}"]
        lines += [format_row(self.variables, r) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_polytope(self):
        from .regions import RatePolytope
        A, b = self.matrix()
        nz = A.any(axis=1)
        return RatePolytope(self.variables, A[nz], b[nz])


def _infeasible(variables) -> LinearInequalitySystem:
    return LinearInequalitySystem(variables, (Row((0,) * len(variables), -1.0),))


def _dedupe(rows: Iterable[Row]) -> list[Row]:
    best: dict[tuple, float] = {}
    for r in rows:
        if r.coeffs not in best or r.rhs < best[r.coeffs]:
            best[r.coeffs] = r.rhs
    return [Row(c, v) for c, v in best.items()]


def eliminate(sys: LinearInequalitySystem, variables: Sequence[str]) -> LinearInequalitySystem:
    """Project out ``variables`` in the given order."""
    names = list(sys.variables)
    missing = [v for v in variables if v not in names]
    if missing:
        raise FMError(f"cannot eliminate undeclared {missing}")
    if sys.infeasible:
        return _infeasible(tuple(n for n in names if n not in variables))
    rows = list(sys.rows)
    for v in variables:
        j = names.index(v)
        pos = [r for r in rows if r.coeffs[j] > 0]
        neg = [r for r in rows if r.coeffs[j] < 0]
        new = [r for r in rows if r.coeffs[j] == 0]
        for p in pos:
            for n in neg:
                ap, an = p.coeffs[j], -n.coeffs[j]
                coeffs = [an * cp + ap * cn for cp, cn in zip(p.coeffs, n.coeffs)]
                new.append(_normalize(coeffs, an * p.rhs + ap * n.rhs))
        rows = []
        for r in _dedupe(new):
            if r.is_trivial():
                if r.rhs < -RHS_TOL:
                    return _infeasible(tuple(x for k, x in enumerate(names) if k != j))
                continue
            rows.append(Row(r.coeffs[:j] + r.coeffs[j + 1:], r.rhs))
        names.pop(j)
    return LinearInequalitySystem(tuple(names), tuple(rows))


def _is_nonneg(r: Row) -> bool:
    return sum(1 for c in r.coeffs if c) == 1 and min(r.coeffs) < 0 and r.rhs == 0.0


def remove_redundant(sys: LinearInequalitySystem, geometric: bool = True) -> LinearInequalitySystem:
    """Drop scaled duplicates, coefficient-dominated rows and (in dimension <= 3)
    rows whose maximum over the rest of the polytope stays below their rhs.

    Domination relies on every variable carrying an explicit ``-x <= 0`` row;
    those rows themselves are never removed.
    """
    if sys.infeasible:
        return sys
    d = len(sys.variables)
    rows = _dedupe(_normalize(r.coeffs, r.rhs) for r in sys.rows if not r.is_trivial())
    nonneg_vars = {r.coeffs.index(min(r.coeffs)) for r in rows if _is_nonneg(r)}
    if len(nonneg_vars) == d:
        kept = []
        for r in rows:
            if _is_nonneg(r) or not any(
                    q is not r and not _is_nonneg(q) and q.rhs <= r.rhs
                    and all(cq >= cr for cq, cr in zip(q.coeffs, r.coeffs)) for q in rows):
                kept.append(r)
        rows = kept
    pairwise_only = not geometric or d > 3
    if not pairwise_only:
        from .geometry import GeometryError, family_vertices
        k = 0
        while k < len(rows):
            r = rows[k]
            others = rows[:k] + rows[k + 1:]
            if _is_nonneg(r) or not others:
                k += 1
                continue
            A = np.array([q.coeffs for q in others], dtype=float)
            b = np.array([q.rhs for q in others])
            if not _bounded(A):
                k += 1
                continue
            pts, _ = family_vertices(A, b[None, :])
            if len(pts) and np.max(pts @ np.array(r.coeffs, dtype=float)) < r.rhs - RHS_TOL:
                rows.pop(k)
            else:
                k += 1
    order = sorted(rows, key=lambda r: (_is_nonneg(r), sum(map(abs, r.coeffs)), [-c for c in r.coeffs]))
    return LinearInequalitySystem(sys.variables, tuple(order), pairwise_only)


def _bounded(A: np.ndarray) -> bool:
    return all(np.any((A >= 0).all(axis=1) & (A[:, i] > 0)) for i in range(A.shape[1])) and \
        all(np.any((A <= 0).all(axis=1) & (A[:, i] < 0)) for i in range(A.shape[1]))


# -- text format --------------------------------------------------------------

def format_row(variables: Sequence[str], r: Row) -> str:
    terms = []
    for c, v in zip(r.coeffs, variables):
        if c:
            sign = "-" if c < 0 else "+"
            terms.append((sign, f"{abs(c)}*{v}"))
    if not terms:
        lhs = "0"
    else:
        lhs = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        lhs += "".join(f" {s} {t}" for s, t in terms[1:])
    return f"{lhs} <= {r.rhs + 0.0!r}"


_TERM = re.compile(r"([+-]?)\s*(?:(\d+)\s*\*?\s*)?([A-Za-z_][A-Za-z0-9_']*)")


def _parse_side(text: str, lineno: int) -> dict:
    text = text.strip()
    if text == "0":
        return {}
    out: dict[str, int] = {}
    pos = 0
    compact = text.replace(" ", "")
    if not compact or compact[0] not in "+-":
        compact = "+" + compact
    while pos < len(compact):
        m = _TERM.match(compact, pos)
        if not m or m.start() != pos or not m.group(1):
            raise FMError(f"line {lineno}: cannot parse {text!r}")
        coeff = int(m.group(2)) if m.group(2) else 1
        out[m.group(3)] = out.get(m.group(3), 0) + (-coeff if m.group(1) == "-" else coeff)
        pos = m.end()
    return out


def parse_system(text: str) -> LinearInequalitySystem:
    """Parse ``[vars a b c]`` then lines ``<coeff>*<var> [+ ...] <= <rhs>`` (or ``>=``)."""
    declared: list[str] | None = None
    seen: list[str] = []
    raw = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars"):
            declared = line[4:].replace(",", " ").split()
            continue
        m = re.fullmatch(r"(.+?)(<=|>=)\s*([-+0-9.eE]+|[-+]?inf)", line)
        if not m:
            raise FMError(f"line {lineno}: expected '<lhs> <= <number>'")
        terms = _parse_side(m.group(1), lineno)
        for v in terms:
            if v not in seen:
                seen.append(v)
        try:
            rhs = float(m.group(3))
        except ValueError:
            raise FMError(f"line {lineno}: bad number {m.group(3)!r}") from None
        raw.append((terms, m.group(2), rhs))
    variables = declared if declared is not None else seen
    return LinearInequalitySystem.build(variables, raw)


# -- random-coding conditions ---------------------------------------------------

HK_VARS = ("R1", "R2", "R1c", "R1p", "R2c", "R2p")
AUX_VARS = ("R1c", "R1p", "R2c", "R2p")


def hk_conditions(terms) -> LinearInequalitySystem:
    """The ten error-exponent conditions with rhs a..j plus nonnegativity of all rates."""
    t = terms.as_dict() if hasattr(terms, "as_dict") else dict(terms)
    rows = [
        ({"R1p": 1, "R1c": 1}, ">=", t["a"]),
        ({"R2p": 1, "R2c": 1}, ">=", t["b"]),
        ({"R1": 1, "R1p": 1}, "<=", t["c"]),
        ({"R1": 1, "R1p": 1, "R2c": 1}, "<=", t["d"]),
        ({"R1": 1, "R1p": 1, "R1c": 1}, "<=", t["e"]),
        ({"R1": 1, "R1p": 1, "R1c": 1, "R2c": 1}, "<=", t["f"]),
        ({"R2": 1, "R2p": 1}, "<=", t["g"]),
        ({"R2": 1, "R2p": 1, "R1c": 1}, "<=", t["h"]),
        ({"R2": 1, "R2p": 1, "R2c": 1}, "<=", t["i"]),
        ({"R2": 1, "R2p": 1, "R2c": 1, "R1c": 1}, "<=", t["j"]),
    ]
    rows += [({v: 1}, ">=", 0.0) for v in HK_VARS]
    return LinearInequalitySystem.build(HK_VARS, rows)


def hk_direct(terms) -> LinearInequalitySystem:
    """The seven-row region written directly from a..j, with rate nonnegativity."""
    rhs = terms.hk_rhs()
    coeffs = [(1, 0), (0, 1), (1, 1), (1, 1), (1, 1), (2, 1), (1, 2)]
    rows = [Row(c, float(v)) for c, v in zip(coeffs, rhs)]
    rows += [Row((-1, 0), 0.0), Row((0, -1), 0.0)]
    return LinearInequalitySystem(("R1", "R2"), tuple(rows))


# -- symbolic right-hand sides ----------------------------------------------------

@dataclass(frozen=True)
class SymbolicSystem:
    """Rows ``coeffs . x <= form``; a form is a vector over ``symbols`` plus a constant."""

    variables: tuple
    symbols: tuple
    rows: tuple  # of (coeffs tuple, np.ndarray of length len(symbols) + 1)
    conditions: tuple = ()  # forms that must be >= 0 for the projection to be nonempty

    def evaluate(self, values: dict) -> LinearInequalitySystem:
        vec = np.array([values[s] for s in self.symbols] + [1.0])
        return LinearInequalitySystem(self.variables, tuple(Row(c, float(f @ vec)) for c, f in self.rows))

    def form_text(self, form: np.ndarray) -> str:
        parts = []
        for coef, name in zip(form, self.symbols + ("1",)):
            if abs(coef) > 1e-12:
                c = int(coef) if float(coef).is_integer() else coef
                term = name if abs(c) == 1 and name != "1" else f"{abs(c)}{'' if name == '1' else name}"
                parts.append(("-" if c < 0 else "+") + term)
        text = "".join(parts).lstrip("+")
        return text or "0"


def symbolic_form(symbols: Sequence[str], expr: dict) -> np.ndarray:
    form = np.zeros(len(symbols) + 1)
    for k, v in expr.items():
        form[-1 if k == "1" else list(symbols).index(k)] += v
    return form


def eliminate_symbolic(sys: SymbolicSystem, variables: Sequence[str]) -> SymbolicSystem:
    names = list(sys.variables)
    rows = [(tuple(c), np.asarray(f, dtype=float)) for c, f in sys.rows]
    conditions = list(sys.conditions)
    for v in variables:
        j = names.index(v)
        pos = [r for r in rows if r[0][j] > 0]
        neg = [r for r in rows if r[0][j] < 0]
        new = [r for r in rows if r[0][j] == 0]
        for cp, fp in pos:
            for cn, fn in neg:
                ap, an = cp[j], -cn[j]
                coeffs = [an * x + ap * y for x, y in zip(cp, cn)]
                g = 0
                for c in coeffs:
                    g = math.gcd(g, abs(c))
                form = an * fp + ap * fn
                if g > 1:
                    coeffs = [c // g for c in coeffs]
                    form = form / g
                new.append((tuple(coeffs), form))
        rows = []
        seen = set()
        for c, f in new:
            key = (c, tuple(np.round(f, 12)))
            if key in seen:
                continue
            seen.add(key)
            if not any(c):
                conditions.append(f)
            else:
                rows.append((c[:j] + c[j + 1:], f))
        names.pop(j)
    return SymbolicSystem(tuple(names), sys.symbols, tuple(rows), tuple(conditions))


def _implied(target_c, target_f, others, relations) -> bool:
    """Is ``target`` a consequence of ``others`` for every symbol assignment
    satisfying ``relations >= 0``?  Decided by an LP feasibility problem."""
    from .lp import linprog

    nq, nr = len(others), len(relations)
    d = len(target_c)
    nf = len(target_f)
    # unknowns: lambda (nq) >= 0, mu (nr) >= 0, mu0 >= 0
    A = np.zeros((d + nf, nq + nr + 1))
    for k, (c, f) in enumerate(others):
        A[:d, k] = c
        A[d:, k] = f
    for k, rel in enumerate(relations):
        A[d:, nq + k] = rel
    A[-1, -1] = 1.0  # constant slack
    b = np.concatenate([np.asarray(target_c, dtype=float), target_f])
    res = linprog(np.zeros(nq + nr + 1), A_eq=A, b_eq=b)
    return res.status == "optimal"


def remove_redundant_symbolic(sys: SymbolicSystem, relations: Sequence[np.ndarray]) -> SymbolicSystem:
    """Drop rows implied by the remaining rows together with the symbol relations."""
    rows = list(sys.rows)
    k = 0
    while k < len(rows):
        c, f = rows[k]
        nonneg = sum(1 for x in c if x) == 1 and min(c) < 0 and not np.any(f)
        if not nonneg and _implied(c, f, rows[:k] + rows[k + 1:], relations):
            rows.pop(k)
        else:
            k += 1
    conds = [f for f in sys.conditions if not _implied((), f, [], relations)]
    return SymbolicSystem(sys.variables, sys.symbols, tuple(rows), tuple(conds))


TERM_SYMBOLS = tuple("abcdefghij")


def hk_conditions_symbolic() -> SymbolicSystem:
    """The ten conditions with symbolic rhs a..j and nonnegativity of all rates."""
    numeric = hk_conditions({s: 0.0 for s in TERM_SYMBOLS})
    rows = []
    for k, r in enumerate(numeric.rows):
        form = np.zeros(len(TERM_SYMBOLS) + 1)
        if k < 10:
            form[k] = -1.0 if k < 2 else 1.0  # the first two rows are >= conditions
        rows.append((r.coeffs, form))
    return SymbolicSystem(HK_VARS, TERM_SYMBOLS, tuple(rows))


def hk_term_relations(include_nonneg: bool = False) -> list[np.ndarray]:
    """Relations among a..j, each as a form that is >= 0."""
    f = lambda **kw: symbolic_form(TERM_SYMBOLS, kw)  # noqa: E731
    rels = [
        f(c=1, e=-1, a=1), f(d=1, e=-1, a=1), f(d=1, f=-1, a=1), f(f=1, d=-1),
        f(e=1, c=-1), f(f=1, e=-1),
        f(g=1, i=-1, b=1), f(h=1, i=-1, b=1), f(h=1, j=-1, b=1), f(j=1, h=-1),
        f(i=1, g=-1), f(j=1, i=-1),
    ]
    if include_nonneg:
        rels += [f(**{s: 1}) for s in TERM_SYMBOLS]
    return rels
