"""Monte-Carlo simulation of stuck-at-zero multicoding on the binary modulo channel.

Transmitter 1 holds a random codebook of M bins with B codewords each and
sends the first codeword of its message's bin that is 0 wherever the state
is 1, so receiver 2 sees no interference.  Receiver 1 observes the codeword
exactly and fails only if the encoder failed or the codeword also appears
in another bin.

Codebook entries are drawn lazily: codewords of the message's bin after the
chosen one, and wrong-bin codewords after the first collision, cannot change
the outcome, so they are never generated.  The law of the outcome is the
same as for a fully materialized codebook.
"""
from __future__ import annotations

import hashlib
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

MAX_CODEWORDS = 2 ** 26
CHUNK = 1 << 22
Z95 = 1.959963984540054

ROLE_STATE, ROLE_MESSAGE, ROLE_OWN_BIN, ROLE_OTHER_BINS = range(4)


class SimError(ValueError):
    pass


def _count(n: int, rate: float) -> int:
    # guard against 2**(n*r) landing a hair above an integer through rounding
    return max(1, math.ceil(2.0 ** (n * rate) - 1e-9))


@dataclass(frozen=True)
class SimConfig:
    n: int
    r1: float
    r1p: float
    lam: float
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1 or self.n > 64:
            raise SimError(f"blocklength must be an integer in 1..64, got {self.n}")
        if self.r1 < 0 or self.r1p < 0:
            raise SimError("rates must be nonnegative")
        if not 0.0 <= self.lam <= 1.0:
            raise SimError(f"state probability {self.lam} outside [0, 1]")
        if self.trials < 1:
            raise SimError("need at least one trial")
        if not 0 <= self.seed < 2 ** 64:
            raise SimError("seed must fit in 64 bits")
        if self.bins * self.bin_size > MAX_CODEWORDS:
            raise SimError(f"codebook of {self.bins}x{self.bin_size} codewords exceeds the 2^26 cap")

    @property
    def bins(self) -> int:
        return _count(self.n, self.r1)

    @property
    def bin_size(self) -> int:
        return _count(self.n, self.r1p)


@dataclass(frozen=True)
class SimResult:
    trials: int
    enc_fail: int
    dec_err: int

    def __post_init__(self):
        if not (0 <= self.enc_fail and 0 <= self.dec_err and self.enc_fail + self.dec_err <= self.trials):
            raise SimError("inconsistent counts")

    @property
    def errors(self) -> int:
        return self.enc_fail + self.dec_err

    @property
    def err_rate(self) -> float:
        return self.errors / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        """Wilson score interval at 95%."""
        n, p = self.trials, self.err_rate
        denom = 1 + Z95 ** 2 / n
        centre = (p + Z95 ** 2 / (2 * n)) / denom
        half = Z95 * math.sqrt(p * (1 - p) / n + Z95 ** 2 / (4 * n * n)) / denom
        return max(0.0, centre - half), min(1.0, centre + half)


def trial_key(seed: int, n: int, r1: float, t: int) -> int:
    """seed XOR a stable 64-bit hash of (n, R1, t)."""
    h = hashlib.blake2b(struct.pack("<qdq", n, r1, t), digest_size=8).digest()
    return seed ^ int.from_bytes(h, "little")


def _rng(key: int, role: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key, spawn_key=(role,))))


def _draw(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    if n <= 32:
        return rng.integers(0, 1 << n, size=size, dtype=np.uint64 if n == 32 else np.uint32)
    return rng.integers(0, 1 << n, size=size, dtype=np.uint64)


def run_trial(cfg: SimConfig, t: int) -> tuple[bool, bool]:
    """One trial; returns (encoding failed, decoding error)."""
    key = trial_key(cfg.seed, cfg.n, cfg.r1, t)
    n, M, B = cfg.n, cfg.bins, cfg.bin_size
    stuck = _rng(key, ROLE_STATE).random(n) < cfg.lam
    smask = sum(1 << i for i in np.nonzero(stuck)[0].tolist())
    _ = _rng(key, ROLE_MESSAGE).integers(M)  # message index; bins are exchangeable
    own = _rng(key, ROLE_OWN_BIN)
    x = None
    drawn = 0
    while drawn < B:
        cw = _draw(own, n, min(CHUNK, B - drawn))
        ok = np.nonzero((cw & cw.dtype.type(smask)) == 0)[0]
        if len(ok):
            x = int(cw[ok[0]])
            break
        drawn += len(cw)
    if x is None:
        return True, False
    if x & smask:
        raise AssertionError("transmitted codeword is nonzero at a stuck position")
    other = _rng(key, ROLE_OTHER_BINS)
    remaining = (M - 1) * B
    while remaining > 0:
        cw = _draw(other, n, min(CHUNK, remaining))
        if np.any(cw == cw.dtype.type(x)):
            return False, True
        remaining -= len(cw)
    return False, False


def simulate(cfg: SimConfig, workers: int = 1) -> SimResult:
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            outcomes = list(ex.map(lambda t: run_trial(cfg, t), range(cfg.trials)))
    else:
        outcomes = [run_trial(cfg, t) for t in range(cfg.trials)]
    return SimResult(cfg.trials, sum(e for e, _ in outcomes), sum(d for _, d in outcomes))


def encoding_failure_probability(cfg: SimConfig) -> float:
    """P(no codeword of the bin avoids the stuck positions), k ~ Binomial(n, lambda)."""
    n, lam, B = cfg.n, cfg.lam, cfg.bin_size
    total = 0.0
    for k in range(n + 1):
        w = math.comb(n, k) * lam ** k * (1 - lam) ** (n - k)
        if w == 0.0 or k == 0:
            continue
        total += w * math.exp(B * math.log1p(-(2.0 ** -k)))
    return total


def analytic_error(cfg: SimConfig) -> float:
    """Encoding failure plus a union-free collision term over M*B - 1 other codewords.

    Counting all other codewords (own bin included) biases this upwards by
    at most B * 2^-n relative to the exact scheme.
    """
    pf = encoding_failure_probability(cfg)
    others = cfg.bins * cfg.bin_size - 1
    collide = -math.expm1(others * math.log1p(-(2.0 ** -cfg.n)))
    return pf + (1 - pf) * collide


def exact_error(cfg: SimConfig) -> float:
    """Exact error probability of the scheme: only wrong-bin collisions count."""
    pf = encoding_failure_probability(cfg)
    others = (cfg.bins - 1) * cfg.bin_size
    collide = -math.expm1(others * math.log1p(-(2.0 ** -cfg.n)))
    return pf + (1 - pf) * collide


def sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def rate_sweep(base: SimConfig, ns, r1s, workers: int = 1) -> list[tuple[SimConfig, SimResult, float]]:
    rows = []
    for n in ns:
        for r1 in r1s:
            cfg = SimConfig(n, r1, base.r1p, base.lam, base.trials, base.seed)
            rows.append((cfg, simulate(cfg, workers), analytic_error(cfg)))
    return rows


CSV_HEADER = "n,R1,R1p,lambda,trials,enc_fail,dec_err,err_rate,ci_lo,ci_hi,analytic"


def csv_row(cfg: SimConfig, res: SimResult, analytic: float) -> str:
    lo, hi = res.ci
    return (f"{cfg.n},{cfg.r1:.6g},{cfg.r1p:.6g},{cfg.lam:.6g},{res.trials},{res.enc_fail},{res.dec_err},"
            f"{res.err_rate:.6f},{lo:.6f},{hi:.6f},{analytic:.6f}")
