from pathlib import Path

import numpy as np
import pytest

from icregions import prover
from icregions.prover import (
    ConstraintSet, EntropySpace, QueryError, check_numeric, elemental_count, elemental_inequalities,
    hk_constraints, hk_terms, max_abs_deviation, parse_expression, parse_query, prove, relation_query,
    verify_certificate,
)
from icregions.prob import random_joint

QUERIES = Path(__file__).resolve().parent.parent / "data" / "queries"


@pytest.mark.parametrize("k,count", [(2, 3), (3, 9), (4, 28), (5, 85)])
def test_elemental_count(k, count):
    assert elemental_count(k) == count
    assert elemental_inequalities(k).shape == (count, 2 ** k - 1)


def test_elemental_inequalities_hold_on_random_joints(rng):
    sp = EntropySpace(["A", "B", "C", "D"])
    G = elemental_inequalities(4)
    for _ in range(50):
        h = sp.entropy_vector(random_joint(rng, (2, 3, 2, 2), sp.names))
        assert (G @ h).min() >= -1e-12


def test_entropy_vector_matches_direct(rng):
    from icregions.prob import entropy
    sp = EntropySpace(["A", "B", "C"])
    j = random_joint(rng, (2, 3, 2), sp.names)
    h = sp.entropy_vector(j)
    assert sp.H("A,C").value(h) == pytest.approx(entropy(j, "A,C"), abs=1e-12)
    assert sp.I("A", "B", "C").value(h) >= -1e-12


def test_parse_expression_forms():
    sp = EntropySpace(["X", "Y", "Z"])
    e = parse_expression(sp, "2*I(X;Y|Z) - 1/2 H(X,Y) + H(Z)")
    want = sp.I("X", "Y", "Z") * 2 - sp.H("X,Y") * 0.5 + sp.H("Z")
    np.testing.assert_allclose(e.coeffs, want.coeffs)


def test_parse_errors():
    with pytest.raises(QueryError):
        parse_query("vars A B\ntarget H(C) >= 0\n")
    with pytest.raises(QueryError):
        parse_query("vars A B\n")


def test_basic_provable_and_certificate():
    sp = EntropySpace(["A", "B"])
    res = prove(sp.I("A", "B"))
    assert res.provable
    assert verify_certificate(sp.I("A", "B"), None, res) <= 1e-9


def test_false_statement_has_counterexample():
    sp = EntropySpace(["A", "B"])
    target = sp.zero() - sp.I("A", "B")
    res = prove(target)
    assert not res.provable
    h = res.ray
    assert (elemental_inequalities(2) @ h).min() >= -1e-9
    assert target.value(h) == pytest.approx(-1.0, abs=1e-9)


def test_spec_example_f_minus_e():
    sp = EntropySpace(["U1", "X1", "U2", "Y1"])
    cons = ConstraintSet().markov(sp, "U1", "X1", "U2,Y1").indep(sp, "U1,X1", "U2")
    f_minus_e = sp.I("U2", "Y1")  # f - e after the shared terms cancel
    assert prove(f_minus_e, cons).provable


def test_constraint_makes_the_difference():
    # I(A;C) <= I(A;B) needs the chain A - B - C
    sp = EntropySpace(["A", "B", "C"])
    target = sp.I("A", "B") - sp.I("A", "C")
    assert not prove(target).provable
    cons = ConstraintSet().markov(sp, "A", "B", "C")
    res = prove(target, cons)
    assert res.provable
    verify_certificate(target, cons, res)


def test_functional_dependence():
    sp = EntropySpace(["X", "Y"])
    cons = ConstraintSet().func(sp, "Y", "X")
    target = sp.H("X") - sp.H("Y")
    assert not prove(target).provable
    assert prove(target, cons).provable


@pytest.mark.parametrize("name", [n for n, _, _ in prover.RELATIONS])
def test_hk_relations_restricted(name):
    expr, cons = relation_query(name)
    res = prove(expr, cons)
    assert res.provable, name
    verify_certificate(expr, cons, res)


def test_hk_relations_hold_numerically():
    sp = EntropySpace(prover.HK_NAMES)
    t = hk_terms(sp)
    cons = hk_constraints(sp)
    for name, lhs, rhs in prover.RELATIONS:
        expr, _ = relation_query(name, restricted=False)
        assert check_numeric(expr, cons, trials=100, rng=np.random.default_rng(5), sampler="hk") <= 1e-9
    # e - a is I(X1;Y1|U2) on the factorised law
    ident = t["e"] - t["a"] - sp.I("X1", "Y1", "U2")
    assert max_abs_deviation(ident, trials=200, rng=1, sampler="hk", constraints=cons) <= 1e-9


def test_minimal_constraints_for_c_le_e():
    expr, cons = relation_query("e-a<=c")
    small = prover.minimal_constraints(expr, cons)
    assert len(small) == 1 and "markov" in small.labels[0].lower()


def test_sampler_checks_constraints():
    sp = EntropySpace(["A", "B", "C"])
    cons = ConstraintSet().indep(sp, "A", "B")
    bad = prover.dag_sampler({"A": [], "B": ["A"], "C": ["B"]})
    with pytest.raises(QueryError):
        check_numeric(sp.I("A", "C"), cons, trials=20, sampler=bad)


@pytest.mark.parametrize("name,provable", [
    ("relfm-c-le-e.query", True), ("relfm-e-le-f.query", True), ("relfm-e-minus-a-le-d.query", True),
    ("false-mi-nonpositive.query", False),
])
def test_query_files(name, provable):
    q = parse_query((QUERIES / name).read_text())
    res = prove(q.target, q.constraints)
    assert res.provable is provable
    verify_certificate(q.target, q.constraints, res)
