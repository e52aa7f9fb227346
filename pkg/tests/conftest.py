import numpy as np
import pytest

from icregions.channels import CribbingZIC, DeterministicSDZIC, GeneralDMIC, expand_modulo
from icregions.prob import Alphabet, Pmf, random_kernel_table
from icregions.regions import DetCapSlice, HKSlice


def binary(name):
    return Alphabet(name, (0, 1))


def random_dmic(rng, sizes=(2, 2, 2, 2)):
    x1, x2, y1, y2 = sizes
    k = random_kernel_table(rng, (x1, x2, y1 * y2)).reshape(x1, x2, y1, y2)
    return GeneralDMIC(Alphabet.range("X1", x1), Alphabet.range("X2", x2),
                       Alphabet.range("Y1", y1), Alphabet.range("Y2", y2), k)


def random_hk_slice(rng, channel=None, u_sizes=(2, 2)):
    ch = channel if channel is not None else random_dmic(rng)
    nx1, nx2 = len(ch.x1), len(ch.x2)
    conc = float(rng.choice([0.5, 1.0, 2.0]))
    p1 = random_kernel_table(rng, (u_sizes[0] * nx1,), conc).reshape(u_sizes[0], nx1)
    p2 = random_kernel_table(rng, (u_sizes[1] * nx2,), conc).reshape(u_sizes[1], nx2)
    return HKSlice(p1, p2, ch)


def random_det_channel(rng, sizes=(2, 2, 2, 2)):
    """Random injective deterministic channel: y2(x2, .) is a permutation of T1 per x2."""
    nx1, nx2, ns, nt = sizes
    ny1 = int(rng.integers(2, 4))
    y1 = rng.integers(0, ny1, size=(nx1, ns))
    t1 = rng.integers(0, nt, size=(nx1, ns))
    y2 = np.array([rng.permutation(nt) for _ in range(nx2)])
    state = Pmf(Alphabet.range("S", ns), random_kernel_table(rng, (ns,)))
    return DeterministicSDZIC(Alphabet.range("X1", nx1), Alphabet.range("X2", nx2), Alphabet.range("S", ns),
                              Alphabet.range("T1", nt), Alphabet.range("Y1", ny1), Alphabet.range("Y2", nt),
                              y1, t1, y2, state)


def random_det_slice(rng, channel=None):
    ch = channel if channel is not None else random_det_channel(rng)
    px1 = random_kernel_table(rng, (len(ch.s), len(ch.x1)), float(rng.choice([0.5, 1.0])))
    px2 = random_kernel_table(rng, (len(ch.x2),))
    return DetCapSlice(ch, px1, px2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def binary_modulo():
    return expand_modulo(2, 1, 0.5)


def random_cribbing_channel(rng, nx1=2, nx2=2, nt=2):
    ny1, nz = int(rng.integers(2, 4)), int(rng.integers(1, 3))
    return CribbingZIC(Alphabet.range("X1", nx1), Alphabet.range("X2", nx2), Alphabet.range("T1", nt),
                       Alphabet.range("Y1", ny1), Alphabet.range("Y2", nt), Alphabet.range("Z2", nz),
                       rng.integers(0, ny1, nx1), rng.integers(0, nt, nx1),
                       np.array([rng.permutation(nt) for _ in range(nx2)]), rng.integers(0, nz, nx2))


def match_vertices(p, q, tol):
    """Largest distance from a vertex of either polytope to the nearest vertex of the other."""
    a, b = np.atleast_2d(p.vertices()), np.atleast_2d(q.vertices())
    d = np.abs(a[:, None, :] - b[None, :, :]).max(axis=-1)
    worst = max(d.min(axis=1).max(), d.min(axis=0).max())
    return worst <= tol, worst
