"""Finite channel models for the Z-interference settings.

Deterministic maps are stored as integer lookup tables of output indices,
indexed by input indices in the order of the map's arguments.  Models are
not required to be injective at construction so that bad channel files can
be diagnosed; evaluators that rely on injectivity call
:func:`require_injective`.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .prob import Alphabet, DistributionError, Pmf


class ChannelError(ValueError):
    pass


class InjectivityError(ChannelError):
    def __init__(self, witness: "InjectivityWitness"):
        self.witness = witness
        super().__init__(
            f"y2(x2, .) is not injective: x2={witness.x2!r} maps t1={witness.t1_a!r} and "
            f"t1={witness.t1_b!r} to the same output {witness.y2!r}"
        )


class InjectivityWitness(NamedTuple):
    x2: object
    t1_a: object
    t1_b: object
    y2: object


def _table(values, shape, out: Alphabet, what: str) -> np.ndarray:
    t = np.asarray(values, dtype=int)
    if t.shape != tuple(shape):
        raise ChannelError(f"{what}: table shape {t.shape}, expected {tuple(shape)}")
    if t.size and (t.min() < 0 or t.max() >= len(out)):
        raise ChannelError(f"{what}: output index outside alphabet {out.name!r}")
    t = t.copy()
    t.setflags(write=False)
    return t


@dataclass(frozen=True)
class DeterministicSDZIC:
    """Injective deterministic state-dependent Z-IC: y1(x1,s), t1(x1,s), y2(x2,t1)."""

    x1: Alphabet
    x2: Alphabet
    s: Alphabet
    t1: Alphabet
    y1: Alphabet
    y2: Alphabet
    y1_map: np.ndarray  # (|X1|, |S|)
    t1_map: np.ndarray  # (|X1|, |S|)
    y2_map: np.ndarray  # (|X2|, |T1|)
    state: Pmf

    def __post_init__(self):
        object.__setattr__(self, "y1_map", _table(self.y1_map, (len(self.x1), len(self.s)), self.y1, "y1"))
        object.__setattr__(self, "t1_map", _table(self.t1_map, (len(self.x1), len(self.s)), self.t1, "t1"))
        object.__setattr__(self, "y2_map", _table(self.y2_map, (len(self.x2), len(self.t1)), self.y2, "y2"))
        if len(self.state.alphabet) != len(self.s):
            raise ChannelError("state pmf alphabet does not match S")


@dataclass(frozen=True)
class ModuloAdditiveSDZIC:
    """Y1 = X1, Y2 = X2 + S*X1 digit-wise mod m over L levels with one shared state."""

    m: int
    levels: int
    lam: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ChannelError(f"modulus must be an integer >= 2, got {self.m}")
        if int(self.levels) != self.levels or self.levels < 1:
            raise ChannelError(f"levels must be an integer >= 1, got {self.levels}")
        if not 0.0 <= self.lam <= 1.0:
            raise ChannelError(f"state probability {self.lam} outside [0, 1]")

    def expand(self) -> DeterministicSDZIC:
        return expand_modulo(self.m, self.levels, self.lam)


@dataclass(frozen=True)
class CribbingZIC:
    """Deterministic Z-IC with strictly causal partial cribbing z2(x2) at encoder 1."""

    x1: Alphabet
    x2: Alphabet
    t1: Alphabet
    y1: Alphabet
    y2: Alphabet
    z2: Alphabet
    y1_map: np.ndarray  # (|X1|,)
    t1_map: np.ndarray  # (|X1|,)
    y2_map: np.ndarray  # (|X2|, |T1|)
    z2_map: np.ndarray  # (|X2|,)

    def __post_init__(self):
        object.__setattr__(self, "y1_map", _table(self.y1_map, (len(self.x1),), self.y1, "y1"))
        object.__setattr__(self, "t1_map", _table(self.t1_map, (len(self.x1),), self.t1, "t1"))
        object.__setattr__(self, "y2_map", _table(self.y2_map, (len(self.x2), len(self.t1)), self.y2, "y2"))
        object.__setattr__(self, "z2_map", _table(self.z2_map, (len(self.x2),), self.z2, "z2"))


@dataclass(frozen=True)
class StateCribbingZIC:
    """State-dependent deterministic Z-IC with partial cribbing."""

    x1: Alphabet
    x2: Alphabet
    s: Alphabet
    t1: Alphabet
    y1: Alphabet
    y2: Alphabet
    z2: Alphabet
    y1_map: np.ndarray  # (|X1|, |S|)
    t1_map: np.ndarray  # (|X1|, |S|)
    y2_map: np.ndarray  # (|X2|, |T1|)
    z2_map: np.ndarray  # (|X2|,)
    state: Pmf

    def __post_init__(self):
        object.__setattr__(self, "y1_map", _table(self.y1_map, (len(self.x1), len(self.s)), self.y1, "y1"))
        object.__setattr__(self, "t1_map", _table(self.t1_map, (len(self.x1), len(self.s)), self.t1, "t1"))
        object.__setattr__(self, "y2_map", _table(self.y2_map, (len(self.x2), len(self.t1)), self.y2, "y2"))
        object.__setattr__(self, "z2_map", _table(self.z2_map, (len(self.x2),), self.z2, "z2"))
        if len(self.state.alphabet) != len(self.s):
            raise ChannelError("state pmf alphabet does not match S")

    @classmethod
    def from_cribbing(cls, ch: CribbingZIC) -> "StateCribbingZIC":
        """Embed a state-free cribbing channel with a single trivial state."""
        s = Alphabet("S", (0,))
        return cls(ch.x1, ch.x2, s, ch.t1, ch.y1, ch.y2, ch.z2,
                   ch.y1_map[:, None], ch.t1_map[:, None], ch.y2_map, ch.z2_map, Pmf(s, np.ones(1)))

    @classmethod
    def from_sdzic(cls, ch: DeterministicSDZIC, z2: Alphabet | None = None, z2_map=None) -> "StateCribbingZIC":
        """Add a cribbing link to a state-dependent channel (constant by default)."""
        if z2 is None:
            z2 = Alphabet("Z2", (0,))
            z2_map = np.zeros(len(ch.x2), dtype=int)
        return cls(ch.x1, ch.x2, ch.s, ch.t1, ch.y1, ch.y2, z2,
                   ch.y1_map, ch.t1_map, ch.y2_map, z2_map, ch.state)


@dataclass(frozen=True)
class GeneralDMIC:
    """Two-user DM-IC with kernel p(y1, y2 | x1, x2) of shape (|X1|,|X2|,|Y1|,|Y2|)."""

    x1: Alphabet
    x2: Alphabet
    y1: Alphabet
    y2: Alphabet
    kernel: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        shape = (len(self.x1), len(self.x2), len(self.y1), len(self.y2))
        if k.shape != shape:
            raise ChannelError(f"kernel shape {k.shape}, expected {shape}")
        rows = k.reshape(shape[0] * shape[1], -1)
        if np.any(rows < 0) or np.any(np.abs(rows.sum(axis=1) - 1.0) > 1e-12):
            raise ChannelError("each kernel row p(.,.|x1,x2) must be a valid pmf")
        k = k.copy()
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)

    @classmethod
    def from_functions(cls, x1: Alphabet, x2: Alphabet, y1: Alphabet, y2: Alphabet,
                       f1, f2) -> "GeneralDMIC":
        """Deterministic DM-IC from index functions y1 = f1(x1, x2), y2 = f2(x1, x2)."""
        k = np.zeros((len(x1), len(x2), len(y1), len(y2)))
        for a in range(len(x1)):
            for b in range(len(x2)):
                k[a, b, f1(a, b), f2(a, b)] = 1.0
        return cls(x1, x2, y1, y2, k)


def check_injectivity(model) -> tuple[bool, InjectivityWitness | None]:
    """True iff t1 -> y2(x2, t1) is one-to-one for every x2; else a witness."""
    y2 = np.asarray(model.y2_map)
    for x2 in range(y2.shape[0]):
        first: dict[int, int] = {}
        for t1 in range(y2.shape[1]):
            out = int(y2[x2, t1])
            if out in first:
                return False, InjectivityWitness(model.x2.symbols[x2], model.t1.symbols[first[out]],
                                                 model.t1.symbols[t1], model.y2.symbols[out])
            first[out] = t1
    return True, None


def require_injective(model) -> None:
    ok, witness = check_injectivity(model)
    if not ok:
        raise InjectivityError(witness)


def expand_modulo(m: int, levels: int, lam: float) -> DeterministicSDZIC:
    """Lookup-table form of the L-level modulo-m additive channel.

    Symbols are integers whose base-m digits are the per-level values,
    least significant digit first.  A single Bernoulli state gates every
    level at once.
    """
    ModuloAdditiveSDZIC(m, levels, lam)  # parameter validation
    size = m ** levels
    digits = np.array(list(itertools.product(range(m), repeat=levels)))[:, ::-1]
    weights = m ** np.arange(levels)

    def index(d):
        return (d * weights).sum(axis=-1)

    sym = np.arange(size)
    dig = digits[index(digits).argsort()]  # dig[k] = digits of symbol k
    add = (dig[:, None, :] + dig[None, :, :]) % m
    y2_map = index(add)  # (x2, t1)
    y1_map = np.repeat(sym[:, None], 2, axis=1)
    t1_map = np.stack([np.zeros(size, dtype=int), sym], axis=1)
    labels = tuple(range(size))
    return DeterministicSDZIC(
        x1=Alphabet("X1", labels), x2=Alphabet("X2", labels), s=Alphabet("S", (0, 1)),
        t1=Alphabet("T1", labels), y1=Alphabet("Y1", labels), y2=Alphabet("Y2", labels),
        y1_map=y1_map, t1_map=t1_map, y2_map=y2_map, state=Pmf.bernoulli(lam),
    )


def modulo_digits(symbol: int, m: int, levels: int) -> tuple[int, ...]:
    """Per-level digits of a symbol of :func:`expand_modulo`, level 0 first."""
    return tuple((symbol // m ** i) % m for i in range(levels))


# -- JSON ------------------------------------------------------------------

_MAP_INPUTS = {
    "det-sdzic": {"y1": ("X1", "S"), "t1": ("X1", "S"), "y2": ("X2", "T1")},
    "cribbing": {"y1": ("X1",), "t1": ("X1",), "y2": ("X2", "T1"), "z2": ("X2",)},
    "state-cribbing": {"y1": ("X1", "S"), "t1": ("X1", "S"), "y2": ("X2", "T1"), "z2": ("X2",)},
}


def _decode_map(values, inputs, alphabets, out: Alphabet) -> np.ndarray:
    shape = tuple(len(alphabets[i]) for i in inputs)
    flat = [out.index(v) for v in values]
    if len(flat) != int(np.prod(shape)):
        raise ChannelError(f"map over {inputs} needs {int(np.prod(shape))} entries, got {len(flat)}")
    return np.asarray(flat, dtype=int).reshape(shape)


def channel_from_json(obj: dict):
    """Build a channel model from its JSON description."""
    kind = obj.get("type")
    if kind == "modulo":
        return expand_modulo(int(obj["m"]), int(obj.get("levels", 1)), float(obj["lambda"]))
    try:
        alph = {k: Alphabet(k, tuple(v)) for k, v in obj["alphabets"].items()}
        if kind == "general-dmic":
            return GeneralDMIC(alph["X1"], alph["X2"], alph["Y1"], alph["Y2"], np.asarray(obj["kernel"], dtype=float))
        if kind not in _MAP_INPUTS:
            raise ChannelError(f"unknown channel type {kind!r}")
        maps = {name: _decode_map(obj["maps"][name], ins, alph, alph[name.upper()])
                for name, ins in _MAP_INPUTS[kind].items()}
        state = None
        if "S" in alph:
            st = obj["state"]
            state = Pmf(alph["S"], np.asarray(st["probs"] if isinstance(st, dict) else st, dtype=float))
    except KeyError as exc:
        raise ChannelError(f"channel file missing field {exc}") from None
    except DistributionError as exc:
        raise ChannelError(str(exc)) from None
    if kind == "det-sdzic":
        return DeterministicSDZIC(alph["X1"], alph["X2"], alph["S"], alph["T1"], alph["Y1"], alph["Y2"],
                                  maps["y1"], maps["t1"], maps["y2"], state)
    if kind == "cribbing":
        return CribbingZIC(alph["X1"], alph["X2"], alph["T1"], alph["Y1"], alph["Y2"], alph["Z2"],
                           maps["y1"], maps["t1"], maps["y2"], maps["z2"])
    return StateCribbingZIC(alph["X1"], alph["X2"], alph["S"], alph["T1"], alph["Y1"], alph["Y2"], alph["Z2"],
                            maps["y1"], maps["t1"], maps["y2"], maps["z2"], state)


def channel_to_json(model) -> dict:
    if isinstance(model, GeneralDMIC):
        return {"type": "general-dmic",
                "alphabets": {a.name: list(a.symbols) for a in (model.x1, model.x2, model.y1, model.y2)},
                "kernel": model.kernel.tolist()}
    if isinstance(model, DeterministicSDZIC):
        kind = "det-sdzic"
    elif isinstance(model, CribbingZIC):
        kind = "cribbing"
    elif isinstance(model, StateCribbingZIC):
        kind = "state-cribbing"
    else:
        raise ChannelError(f"cannot serialize {type(model).__name__}")
    fields = {"X1": "x1", "X2": "x2", "S": "s", "T1": "t1", "Y1": "y1", "Y2": "y2", "Z2": "z2"}
    alph = {k: list(getattr(model, f).symbols) for k, f in fields.items() if hasattr(model, f)}
    out = {"type": kind, "alphabets": alph, "maps": {}}
    for name in _MAP_INPUTS[kind]:
        table = getattr(model, f"{name}_map")
        out_alph = getattr(model, name)
        out["maps"][name] = [out_alph.symbols[i] for i in table.reshape(-1)]
    if hasattr(model, "state"):
        out["state"] = {"probs": model.state.probs.tolist()}
    return out


def load_channel(path) -> object:
    with open(path) as fh:
        return channel_from_json(json.load(fh))
