import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icregions.prob import (
    Alphabet, DistributionError, JointDistribution, Kernel, Pmf, conditional_entropy, entropy,
    entropy_of, mutual_information, product_joint, random_joint,
)

# -sum p log2 p written out with math.log2, independent of entropy_of
def h_ref(p):
    return -sum(x * math.log2(x) for x in p if x > 0)


def test_binary_entropy_value():
    assert Pmf(Alphabet("X", (0, 1)), [0.75, 0.25]).entropy() == pytest.approx(0.8112781244591328, abs=1e-12)


def test_entropy_edge_cases():
    assert entropy_of([1.0, 0.0]) == 0.0
    assert entropy_of(np.full(8, 1 / 8)) == pytest.approx(3.0)


@pytest.mark.parametrize("bad", [[0.5, 0.6], [-0.1, 1.1], [np.nan, 1.0]])
def test_pmf_rejects_invalid(bad):
    with pytest.raises(DistributionError):
        Pmf(Alphabet("X", (0, 1)), bad)


def test_alphabet_rejects_duplicates():
    with pytest.raises(DistributionError):
        Alphabet("X", (0, 0))


def test_mutual_information_of_copy():
    j = product_joint([Kernel.from_pmf("X", Pmf.uniform(Alphabet.range("X", 4)))])
    j = j.with_function("Y", Alphabet.range("Y", 4), ("X",), np.arange(4))
    assert mutual_information(j, "X", "Y") == pytest.approx(2.0)
    assert conditional_entropy(j, "X", "Y") == pytest.approx(0.0, abs=1e-12)


def test_entropy_matches_reference(rng):
    for _ in range(20):
        j = random_joint(rng, (2, 3, 2))
        flat = np.asarray(j.tensor).ravel()
        assert entropy(j, "X1,X2,X3") == pytest.approx(h_ref(flat), abs=1e-12)
        m = np.asarray(j.tensor).sum(axis=(1, 2))
        assert entropy(j, "X1") == pytest.approx(h_ref(m), abs=1e-12)


def test_multipack_two_identity(rng):
    # H(X1)+H(X2)-H(X1,X2|Y) = I(X1;X2)+I(X1,X2;Y)
    for _ in range(100):
        j = random_joint(rng, (2, 3, 2), ("X1", "X2", "Y"))
        lhs = entropy(j, "X1") + entropy(j, "X2") - conditional_entropy(j, "X1,X2", "Y")
        rhs = mutual_information(j, "X1", "X2") + mutual_information(j, "X1,X2", "Y")
        assert abs(lhs - rhs) <= 1e-10


def test_multipack_three_identity(rng):
    for _ in range(100):
        j = random_joint(rng, (2, 2, 3, 2), ("X1", "X2", "X3", "Y"))
        lhs = (entropy(j, "X1") + entropy(j, "X2") + entropy(j, "X3")
               - conditional_entropy(j, "X1,X2,X3", "Y"))
        rhs = (mutual_information(j, "X1", "X2") + mutual_information(j, "X3", "Y")
               + mutual_information(j, "X1,X2", "X3,Y"))
        assert abs(lhs - rhs) <= 1e-10


def test_batched_entropy_matches_loop(rng):
    tables = rng.dirichlet(np.ones(6), size=5).reshape(5, 2, 3)
    al = (Alphabet.range("A", 2), Alphabet.range("B", 3))
    batched = JointDistribution(("A", "B"), al, tables)
    got = mutual_information(batched, "A", "B")
    for k in range(5):
        single = JointDistribution(("A", "B"), al, tables[k])
        assert got[k] == pytest.approx(mutual_information(single, "A", "B"), abs=1e-13)


def test_kernel_rejects_unnormalized():
    with pytest.raises(DistributionError):
        Kernel(("Y",), (Alphabet.range("Y", 2),), ("X",), np.array([[0.5, 0.5], [0.2, 0.2]]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=12))
def test_entropy_bounds(weights):
    p = np.array(weights) / sum(weights)
    h = float(entropy_of(p))
    assert -1e-12 <= h <= math.log2(len(p)) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_information_identities(seed):
    j = random_joint(np.random.default_rng(seed), (2, 3, 2), ("A", "B", "C"))
    iab = mutual_information(j, "A", "B")
    assert iab >= 0
    assert iab == pytest.approx(mutual_information(j, "B", "A"), abs=1e-12)
    # chain rule for mutual information
    lhs = mutual_information(j, "A", "B,C")
    rhs = mutual_information(j, "A", "B") + mutual_information(j, "A", "C", "B")
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert conditional_entropy(j, "A", "B") <= entropy(j, "A") + 1e-12
