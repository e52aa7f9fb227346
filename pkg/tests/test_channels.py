import json
from pathlib import Path

import numpy as np
import pytest

from icregions.channels import (
    ChannelError, CribbingZIC, DeterministicSDZIC, InjectivityError, ModuloAdditiveSDZIC, StateCribbingZIC,
    channel_from_json, channel_to_json, check_injectivity, expand_modulo, load_channel, modulo_digits,
    require_injective,
)
from icregions.prob import Alphabet, Pmf

from conftest import random_det_channel

DATA = Path(__file__).resolve().parent.parent / "data" / "channels"


def test_binary_modulo_tables():
    ch = expand_modulo(2, 1, 0.5)
    assert len(ch.x1) == len(ch.x2) == len(ch.s) == 2
    np.testing.assert_array_equal(ch.state.probs, [0.5, 0.5])
    for x1 in range(2):
        for s in range(2):
            assert ch.y1_map[x1, s] == x1
            assert ch.t1_map[x1, s] == x1 * s
    for x2 in range(2):
        for t in range(2):
            assert ch.y2_map[x2, t] == x2 ^ t


@pytest.mark.parametrize("m,levels", [(2, 2), (3, 2), (2, 3)])
def test_multilevel_matches_per_level_rule(m, levels):
    ch = expand_modulo(m, levels, 0.3)
    size = m ** levels
    assert len(ch.x1) == size and len(ch.s) == 2
    for x1 in range(size):
        d1 = modulo_digits(x1, m, levels)
        for s in range(2):
            assert modulo_digits(ch.t1_map[x1, s], m, levels) == tuple(d * s for d in d1)
        for x2 in range(size):
            d2 = modulo_digits(x2, m, levels)
            want = tuple((a + b) % m for a, b in zip(d2, d1))
            assert modulo_digits(ch.y2_map[x2, x1], m, levels) == want


@pytest.mark.parametrize("args", [(1, 1, 0.5), (2, 0, 0.5), (2, 1, 1.5)])
def test_modulo_rejects_bad_parameters(args):
    with pytest.raises(ChannelError):
        ModuloAdditiveSDZIC(*args)


def test_injectivity_witness():
    ch = load_channel(DATA / "non-injective.json")
    ok, w = check_injectivity(ch)
    assert not ok
    assert w.t1_a != w.t1_b
    x2 = ch.x2.index(w.x2)
    assert ch.y2_map[x2, ch.t1.index(w.t1_a)] == ch.y2_map[x2, ch.t1.index(w.t1_b)]
    with pytest.raises(InjectivityError) as exc:
        require_injective(ch)
    assert exc.value.witness == w


def test_modulo_channels_are_injective():
    for m, levels in [(2, 1), (3, 1), (2, 2)]:
        assert check_injectivity(expand_modulo(m, levels, 0.5)) == (True, None)


def test_map_out_of_alphabet_rejected():
    b = lambda n: Alphabet(n, (0, 1))  # noqa: E731
    with pytest.raises(ChannelError):
        DeterministicSDZIC(b("X1"), b("X2"), b("S"), b("T1"), b("Y1"), b("Y2"),
                           [[0, 2], [1, 1]], [[0, 0], [0, 1]], [[0, 1], [1, 0]], Pmf.bernoulli(0.5))


def test_json_round_trip(rng):
    for _ in range(5):
        ch = random_det_channel(rng)
        back = channel_from_json(json.loads(json.dumps(channel_to_json(ch))))
        for name in ("y1_map", "t1_map", "y2_map"):
            np.testing.assert_array_equal(getattr(back, name), getattr(ch, name))
        np.testing.assert_allclose(back.state.probs, ch.state.probs)


def test_data_files_load():
    assert isinstance(load_channel(DATA / "modulo-binary.json"), DeterministicSDZIC)
    crib = load_channel(DATA / "cribbing-full.json")
    assert isinstance(crib, CribbingZIC)
    st = StateCribbingZIC.from_cribbing(crib)
    assert len(st.s) == 1


def test_unknown_type_rejected():
    with pytest.raises(ChannelError):
        channel_from_json({"type": "mystery", "alphabets": {}})
