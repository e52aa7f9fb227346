"""Finite-alphabet distributions and entropy primitives (bits).

Joint distributions are dense tensors with one axis per named variable.  A
tensor may carry leading *batch* axes, in which case every entropy query
returns an array with one value per batch element; this is how grids of
input distributions are evaluated without a Python loop per slice.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-12


class DistributionError(ValueError):
    """Invalid probability data or an ill-posed entropy query."""


@dataclass(frozen=True)
class Alphabet:
    name: str
    symbols: tuple

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) < 1:
            raise DistributionError(f"alphabet {self.name!r} is empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise DistributionError(f"alphabet {self.name!r} has repeated symbols")

    @classmethod
    def range(cls, name: str, size: int) -> "Alphabet":
        return cls(name, tuple(range(size)))

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            # JSON round trips turn ints into strings and vice versa
            for i, s in enumerate(self.symbols):
                if str(s) == str(symbol):
                    return i
            raise DistributionError(f"{symbol!r} not in alphabet {self.name!r}") from None


def _check_simplex(probs: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(probs)):
        raise DistributionError(f"{what}: non-finite weight")
    if np.any(probs < 0):
        raise DistributionError(f"{what}: negative weight")
    sums = probs.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > NORM_TOL):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise DistributionError(f"{what}: weights sum off 1 by {worst:.3g}")


@dataclass(frozen=True)
class Pmf:
    alphabet: Alphabet
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (len(self.alphabet),):
            raise DistributionError(
                f"pmf over {self.alphabet.name!r} needs {len(self.alphabet)} weights, got shape {probs.shape}"
            )
        _check_simplex(probs, f"pmf over {self.alphabet.name!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "Pmf":
        k = len(alphabet)
        return cls(alphabet, np.full(k, 1.0 / k))

    @classmethod
    def point(cls, alphabet: Alphabet, symbol=None) -> "Pmf":
        probs = np.zeros(len(alphabet))
        probs[0 if symbol is None else alphabet.index(symbol)] = 1.0
        return cls(alphabet, probs)

    @classmethod
    def bernoulli(cls, lam: float, name: str = "S") -> "Pmf":
        if not 0.0 <= lam <= 1.0:
            raise DistributionError(f"Bernoulli parameter {lam} outside [0, 1]")
        return cls(Alphabet(name, (0, 1)), np.array([1.0 - lam, lam]))

    def entropy(self) -> float:
        return float(entropy_of(self.probs))

    def to_json(self) -> dict:
        return {"alphabet": list(self.alphabet.symbols), "probs": self.probs.tolist()}

    @classmethod
    def from_json(cls, obj: dict, name: str = "X") -> "Pmf":
        return cls(Alphabet(name, tuple(obj["alphabet"])), np.asarray(obj["probs"], dtype=float))


def entropy_of(probs: np.ndarray, axis=-1) -> np.ndarray:
    """-sum p log2 p along ``axis`` with 0 log 0 = 0."""
    p = np.asarray(probs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=axis)


@dataclass(frozen=True)
class Kernel:
    """Conditional law p(vars | given) as a dense table.

    ``table`` has shape ``(*batch, *given_sizes, *var_sizes)``; for every
    conditioning tuple the trailing block sums to one.
    """

    vars: tuple
    alphabets: tuple
    given: tuple
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "alphabets", tuple(self.alphabets))
        object.__setattr__(self, "given", tuple(self.given))
        if len(self.vars) != len(self.alphabets) or not self.vars:
            raise DistributionError("kernel needs one alphabet per output variable")
        if set(self.vars) & set(self.given):
            raise DistributionError(f"kernel output {self.vars} overlaps its conditioning {self.given}")
        table = np.asarray(self.table, dtype=float)
        sizes = tuple(len(a) for a in self.alphabets)
        nv = len(sizes)
        if table.ndim < nv + len(self.given) or table.shape[table.ndim - nv:] != sizes:
            raise DistributionError(f"kernel {self.vars}: table shape {table.shape} does not end in {sizes}")
        flat = table.reshape(table.shape[: table.ndim - nv] + (-1,))
        _check_simplex(flat, f"kernel p({','.join(self.vars)}|{','.join(self.given)})")
        object.__setattr__(self, "table", table)

    @property
    def batch_ndim(self) -> int:
        return self.table.ndim - len(self.vars) - len(self.given)

    @classmethod
    def from_pmf(cls, var: str, pmf: Pmf) -> "Kernel":
        return cls((var,), (pmf.alphabet,), (), pmf.probs)

    @classmethod
    def function(cls, var: str, alphabet: Alphabet, given: Sequence[str], outputs: np.ndarray) -> "Kernel":
        """Deterministic kernel: ``outputs[g1, g2, ...]`` is the output index."""
        outputs = np.asarray(outputs, dtype=int)
        if outputs.ndim != len(given):
            raise DistributionError(f"function table for {var} must have {len(given)} axes")
        if outputs.size and (outputs.min() < 0 or outputs.max() >= len(alphabet)):
            raise DistributionError(f"function table for {var} leaves its output alphabet")
        table = np.eye(len(alphabet))[outputs]
        return cls((var,), (alphabet,), tuple(given), table)


class JointDistribution:
    """Dense joint law over named variables, optionally batched."""

    def __init__(self, names: Sequence[str], alphabets: Sequence[Alphabet], tensor: np.ndarray,
                 *, check: bool = True):
        self.names = tuple(names)
        self.alphabets = tuple(alphabets)
        if len(set(self.names)) != len(self.names):
            raise DistributionError(f"repeated variable names in {self.names}")
        if len(self.names) != len(self.alphabets):
            raise DistributionError("one alphabet per variable required")
        tensor = np.asarray(tensor, dtype=float)
        self.batch_ndim = tensor.ndim - len(self.names)
        sizes = tuple(len(a) for a in self.alphabets)
        if self.batch_ndim < 0 or tensor.shape[self.batch_ndim:] != sizes:
            raise DistributionError(f"tensor shape {tensor.shape} does not match alphabets {sizes}")
        if check:
            _check_simplex(tensor.reshape(tensor.shape[: self.batch_ndim] + (-1,)), "joint distribution")
        self.tensor = tensor
        self._index = {n: i for i, n in enumerate(self.names)}

    @property
    def batch_shape(self) -> tuple:
        return self.tensor.shape[: self.batch_ndim]

    def axis(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise DistributionError(f"unknown variable {name!r}; have {self.names}") from None

    def marginal(self, names: Iterable[str]) -> "JointDistribution":
        keep = sorted({self.axis(n) for n in names})
        drop = tuple(self.batch_ndim + i for i in range(len(self.names)) if i not in keep)
        return JointDistribution([self.names[i] for i in keep], [self.alphabets[i] for i in keep],
                                 self.tensor.sum(axis=drop), check=False)

    def with_function(self, var: str, alphabet: Alphabet, given: Sequence[str], outputs) -> "JointDistribution":
        """Append a variable that is a deterministic function of existing ones."""
        return extend(self, Kernel.function(var, alphabet, given, outputs))

    def __getitem__(self, index) -> "JointDistribution":
        """Select batch elements."""
        if self.batch_ndim == 0:
            raise IndexError("joint distribution is not batched")
        return JointDistribution(self.names, self.alphabets, self.tensor[index], check=False)

    def __repr__(self) -> str:
        sizes = "x".join(str(len(a)) for a in self.alphabets)
        return f"JointDistribution({','.join(self.names)}; {sizes}; batch={self.batch_shape})"


def _as_names(vars) -> tuple:
    if isinstance(vars, str):
        return tuple(v for v in vars.replace(" ", "").split(",") if v)
    return tuple(vars)


def entropy(d: JointDistribution, vars) -> float | np.ndarray:
    """Joint entropy H(vars) in bits."""
    names = _as_names(vars)
    if not names:
        raise DistributionError("entropy of an empty variable set")
    keep = {d.axis(n) for n in names}
    drop = tuple(d.batch_ndim + i for i in range(len(d.names)) if i not in keep)
    marg = d.tensor.sum(axis=drop) if drop else d.tensor
    flat = marg.reshape(d.batch_shape + (-1,))
    h = entropy_of(flat)
    return float(h) if d.batch_ndim == 0 else h


def _disjoint(*groups) -> None:
    seen = set()
    for g in groups:
        if seen & set(g):
            raise DistributionError(f"variable sets overlap: {groups}")
        seen |= set(g)


def conditional_entropy(d: JointDistribution, vars, given=()):
    """H(vars | given) = H(vars, given) - H(given)."""
    a, g = _as_names(vars), _as_names(given)
    _disjoint(a, g)
    if not g:
        return entropy(d, a)
    return entropy(d, a + g) - entropy(d, g)


def mutual_information(d: JointDistribution, vars_a, vars_b, given=()):
    """I(A; B | given), clamped at zero."""
    a, b, g = _as_names(vars_a), _as_names(vars_b), _as_names(given)
    _disjoint(a, b, g)
    value = conditional_entropy(d, a, g) + conditional_entropy(d, b, g) - conditional_entropy(d, a + b, g)
    return np.maximum(value, 0.0) if d.batch_ndim else max(float(value), 0.0)


def extend(d: JointDistribution, kernel: Kernel) -> JointDistribution:
    """Multiply a joint by a kernel whose conditioning variables it already holds."""
    missing = [g for g in kernel.given if g not in d.names]
    if missing:
        raise DistributionError(f"kernel for {kernel.vars} conditions on undeclared {missing}")
    clash = [v for v in kernel.vars if v in d.names]
    if clash:
        raise DistributionError(f"variables {clash} declared twice")
    nb = kernel.batch_ndim
    ng = len(kernel.given)
    nv = len(kernel.vars)
    order = sorted(range(ng), key=lambda i: d.axis(kernel.given[i]))
    perm = list(range(nb)) + [nb + i for i in order] + list(range(nb + ng, nb + ng + nv))
    table = kernel.table.transpose(perm)
    given_axes = {d.axis(g) for g in kernel.given}
    shape = list(table.shape[:nb])
    for i, a in enumerate(d.alphabets):
        shape.append(len(a) if i in given_axes else 1)
    shape.extend(len(a) for a in kernel.alphabets)
    table = table.reshape(shape)
    tensor = d.tensor.reshape(d.tensor.shape + (1,) * nv) * table
    return JointDistribution(d.names + kernel.vars, d.alphabets + kernel.alphabets, tensor, check=False)


def product_joint(factors: Sequence[Kernel | tuple]) -> JointDistribution:
    """Chain-rule product of kernels given in a valid factorization order.

    A factor may also be a ``(name, Pmf)`` pair for an unconditioned variable.
    """
    joint = JointDistribution((), (), np.ones(()), check=False)
    for f in factors:
        if isinstance(f, tuple):
            name, pmf = f
            f = Kernel.from_pmf(name, pmf)
        joint = extend(joint, f)
    if not joint.names:
        raise DistributionError("product of zero factors")
    return joint


def random_joint(rng: np.random.Generator, sizes: Sequence[int], names: Sequence[str] | None = None,
                 concentration: float | None = None) -> JointDistribution:
    """Dirichlet-random joint law; small ``concentration`` gives sparse laws."""
    names = tuple(names) if names is not None else tuple(f"X{i + 1}" for i in range(len(sizes)))
    alpha = concentration if concentration is not None else float(rng.choice([0.2, 0.5, 1.0, 2.0]))
    p = rng.dirichlet(np.full(int(np.prod(sizes)), alpha))
    p = p / p.sum()
    return JointDistribution(names, [Alphabet.range(n, k) for n, k in zip(names, sizes)], p.reshape(sizes))


def random_kernel_table(rng: np.random.Generator, shape: Sequence[int], concentration: float = 1.0) -> np.ndarray:
    """Random conditional table; rows along the last axis sum to one."""
    shape = tuple(shape)
    rows = int(np.prod(shape[:-1]))
    t = rng.dirichlet(np.full(shape[-1], concentration), size=rows)
    t = t / t.sum(axis=1, keepdims=True)
    return t.reshape(shape)


# -- JSON ------------------------------------------------------------------

def kernel_to_json(k: Kernel) -> dict:
    if k.batch_ndim:
        raise DistributionError("batched kernels are not serializable")
    return {
        "vars": list(k.vars),
        "alphabets": [list(a.symbols) for a in k.alphabets],
        "given": list(k.given),
        "table": k.table.tolist(),
    }


def kernel_from_json(obj: dict) -> Kernel:
    vars_ = obj["vars"] if "vars" in obj else [obj["var"]]
    alph = obj["alphabets"] if "alphabets" in obj else [obj["alphabet"]]
    return Kernel(tuple(vars_), tuple(Alphabet(v, tuple(a)) for v, a in zip(vars_, alph)),
                  tuple(obj.get("given", ())), np.asarray(obj["table"], dtype=float))


def load_factored_joint(source) -> JointDistribution:
    """Read ``{"factors": [kernel, ...]}`` from a path, file object or dict."""
    if isinstance(source, dict):
        obj = source
    elif hasattr(source, "read"):
        obj = json.load(source)
    else:
        with open(source) as fh:
            obj = json.load(fh)
    return product_joint([kernel_from_json(k) for k in obj["factors"]])
