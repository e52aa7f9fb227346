from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog as scipy_linprog

from icregions import fm
from icregions.regions import eval_bound_terms, eval_hk

from conftest import match_vertices, random_hk_slice

DATA = Path(__file__).resolve().parent.parent / "data"


def in_projection(system, keep, point):
    """LP oracle: does some completion of ``point`` satisfy the full system?"""
    A, b = system.matrix()
    ki = [system.variables.index(v) for v in keep]
    ei = [i for i in range(len(system.variables)) if i not in ki]
    rhs = b - A[:, ki] @ np.asarray(point, dtype=float)
    if not ei:
        return bool(np.all(rhs >= -1e-9))
    res = scipy_linprog(np.zeros(len(ei)), A_ub=A[:, ei], b_ub=rhs + 1e-9, bounds=[(None, None)] * len(ei),
                        method="highs")
    return res.status == 0


def test_simple_projection():
    s = fm.parse_system("""
        vars x y
        x + y <= 2
        x - y <= 0
        -x <= 0
    """)
    out = fm.eliminate(s, ["y"])
    # x <= y <= 2 - x gives x <= 1
    assert out.variables == ("x",)
    assert out.satisfied_by([1.0]) and not out.satisfied_by([1.01]) and not out.satisfied_by([-0.1])


def test_infeasible_detected():
    s = fm.parse_system("x + y <= 1\nx + y >= 2\n")
    out = fm.eliminate(s, ["y"])
    assert out.infeasible


def test_text_round_trip():
    s = fm.parse_system("vars a b\n2*a - 3*b <= 0.25   # comment\na >= -1\n")
    back = fm.parse_system(s.to_text())
    assert back.rows == s.rows and back.variables == s.variables
    assert fm.format_row(("a", "b"), fm.Row((2, -3), 0.25)) == "2*a - 3*b <= 0.25"


@pytest.mark.parametrize("bad", ["x + <= 1", "x <= abc", "vars x\ny <= 1"])
def test_parse_errors(bad):
    with pytest.raises(fm.FMError):
        fm.parse_system(bad)


def test_coefficient_cap():
    with pytest.raises(fm.FMError):
        fm.LinearInequalitySystem(("x",), (((17,), 1.0),))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_projection_matches_lp_oracle(seed):
    rng = np.random.default_rng(seed)
    names = ("x", "y", "z", "w")
    rows = [({v: int(c) for v, c in zip(names, rng.integers(-1, 2, 4)) if c}, "<=", float(rng.integers(0, 5)))
            for _ in range(6)]
    rows = [r for r in rows if r[0]]
    rows += [({v: 1}, ">=", 0.0) for v in names] + [({v: 1}, "<=", 3.0) for v in names]
    s = fm.LinearInequalitySystem.build(names, rows)
    out = fm.remove_redundant(fm.eliminate(s, ["z", "w"]))
    for p in rng.uniform(-0.5, 3.5, (30, 2)):
        assert out.satisfied_by(p, 1e-7) == in_projection(s, ("x", "y"), p) or \
            np.min(np.abs(out.matrix()[0] @ p - out.matrix()[1])) < 1e-6


def test_redundancy_removal_keeps_region(rng):
    for _ in range(30):
        t = eval_bound_terms(random_hk_slice(rng))
        full = fm.eliminate(fm.hk_conditions(t), fm.AUX_VARS)
        lean = fm.remove_redundant(full)
        assert len(lean.rows) <= len(full.rows)
        ok, worst = match_vertices(full.to_polytope(), lean.to_polytope(), 1e-9)
        assert ok, worst


def test_hk_elimination_matches_direct(rng):
    for _ in range(30):
        sl = random_hk_slice(rng)
        t = eval_bound_terms(sl)
        out = fm.remove_redundant(fm.eliminate(fm.hk_conditions(t), fm.AUX_VARS))
        assert out.variables == ("R1", "R2")
        ok, worst = match_vertices(out.to_polytope(), eval_hk(sl), 1e-9)
        assert ok, worst


def test_symbolic_elimination_gives_seven_rows():
    s = fm.eliminate_symbolic(fm.hk_conditions_symbolic(), fm.AUX_VARS)
    lean = fm.remove_redundant_symbolic(s, fm.hk_term_relations(include_nonneg=True))
    body = [(c, lean.form_text(f)) for c, f in lean.rows if not (sum(map(abs, c)) == 1 and min(c) < 0)]
    assert sorted(body) == sorted([
        ((1, 0), "-a+e"), ((0, 1), "-b+i"), ((1, 1), "-a-b+c+j"), ((1, 1), "-a-b+d+h"), ((1, 1), "-a-b+f+g"),
        ((2, 1), "-2a-b+c+f+h"), ((1, 2), "-a-2b+d+g+j"),
    ])
    assert lean.conditions == ()


def test_symbolic_evaluation_matches_numeric(rng):
    s = fm.remove_redundant_symbolic(fm.eliminate_symbolic(fm.hk_conditions_symbolic(), fm.AUX_VARS),
                                     fm.hk_term_relations(include_nonneg=True))
    for _ in range(10):
        sl = random_hk_slice(rng)
        t = eval_bound_terms(sl)
        ok, worst = match_vertices(s.evaluate(t.as_dict()).to_polytope(), eval_hk(sl), 1e-9)
        assert ok, worst


def test_conditions_file_is_consistent():
    s = fm.parse_system((DATA / "hk-conditions.txt").read_text())
    assert s.variables == fm.HK_VARS
    assert len(s.rows) == 16
