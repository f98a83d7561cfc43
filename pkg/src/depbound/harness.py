"""Ground truth for the bounds: exact enumeration and seeded Monte Carlo."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import beta as beta_dist

from .errors import DomainMismatch
from .processes import MAX_PATHS, SSRW, NonMarkovBinary, Process

EVENT_TOL = 1e-12
BLOCK_ELEMENTS = 2_000_000
RNG_NAME = "numpy.random.Philox(SeedSequence(seed, spawn_key=(task_id, block)))"


# ---------------------------------------------------------------------------
# Path functionals


def unit_values(proc: Process, paths: np.ndarray) -> np.ndarray:
    """Map each coordinate into [0, 1] in the natural way for the process."""
    paths = np.asarray(paths)
    n = paths.shape[1]
    if isinstance(proc, SSRW):
        i = np.arange(1, n + 1)
        return (paths + i) / (2.0 * i)
    if isinstance(proc, NonMarkovBinary):
        return (paths + 1) / 2.0
    out = np.empty(paths.shape, dtype=float)
    for k in range(n):
        sup = proc.marginal(k + 1).states
        lo, hi = min(sup), max(sup)
        out[:, k] = (paths[:, k] - lo) / (hi - lo) if hi > lo else 0.0
    return out


class Functional:
    name = "functional"

    def __call__(self, proc: Process, paths: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def certificate(self, n: int) -> list[float]:
        raise NotImplementedError

    def product_mean(self, proc: Process, n: int) -> float:
        raise NotImplementedError


class NormalizedMean(Functional):
    """Average of the coordinates after mapping each into [0, 1]."""

    name = "normalized_mean"

    def __call__(self, proc, paths):
        return unit_values(proc, paths).mean(axis=1)

    def certificate(self, n):
        return [1.0 / n] * n

    def product_mean(self, proc, n):
        total = 0.0
        for i in range(1, n + 1):
            d = proc.marginal(i)
            v = unit_values_1d(proc, i, np.asarray(d.states), n)
            total += float(np.dot(d.probs, v))
        return total / n


def unit_values_1d(proc: Process, i: int, xs: np.ndarray, n: int) -> np.ndarray:
    """unit_values for the i-th coordinate alone."""
    if isinstance(proc, SSRW):
        return (xs + i) / (2.0 * i)
    if isinstance(proc, NonMarkovBinary):
        return (xs + 1) / 2.0
    sup = proc.marginal(i).states
    lo, hi = min(sup), max(sup)
    return (xs - lo) / (hi - lo) if hi > lo else np.zeros(len(xs))


class AdjacentAgreement(Functional):
    """Fraction of consecutive pairs that agree."""

    name = "adjacent_agreement"

    def __call__(self, proc, paths):
        paths = np.asarray(paths)
        return (paths[:, 1:] == paths[:, :-1]).mean(axis=1)

    def certificate(self, n):
        if n < 2:
            raise ValueError("needs n >= 2")
        c = [2.0 / (n - 1)] * n
        c[0] = c[-1] = 1.0 / (n - 1)
        return c

    def product_mean(self, proc, n):
        total = 0.0
        for i in range(1, n):
            a, b = proc.marginal(i), proc.marginal(i + 1)
            total += sum(a.prob(x) * b.prob(x) for x in a.states if x in b.states)
        return total / (n - 1)


FUNCTIONALS = {"normalized_mean": NormalizedMean, "adjacent_agreement": AdjacentAgreement}


def verify_certificate(proc: Process, n: int, f: Functional, limit: int = MAX_PATHS) -> bool:
    """Check max single-coordinate change of f over enumerated paths against c."""
    paths, _ = proc.enumerate(n, limit)
    base = f(proc, paths)
    c = f.certificate(n)
    for i in range(n):
        for v in proc.marginal(i + 1).states:
            alt = paths.copy()
            alt[:, i] = v
            if np.max(np.abs(f(proc, alt) - base)) > c[i] + 1e-12:
                return False
    return True


# ---------------------------------------------------------------------------
# Queries


@dataclass
class TailQuery:
    proc: Process
    n: int
    t: float
    f: Functional = field(default_factory=NormalizedMean)
    center: str | float = "product"
    side: str = "two"

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if self.side not in ("two", "upper"):
            raise ValueError("side is 'two' or 'upper'")
        if not isinstance(self.center, (int, float)) and self.center not in ("product", "joint", "median"):
            raise ValueError(f"unknown center {self.center!r}")

    @property
    def c(self) -> list[float]:
        return self.f.certificate(self.n)


def _in_event(vals: np.ndarray, center: float, t: float, side: str) -> np.ndarray:
    dev = vals - center
    if side == "two":
        dev = np.abs(dev)
    return dev >= t - EVENT_TOL


def weighted_median(vals: np.ndarray, w: np.ndarray) -> float:
    order = np.argsort(vals, kind="stable")
    cw = np.cumsum(w[order])
    k = int(np.searchsorted(cw, 0.5 * cw[-1] - 1e-15))
    return float(vals[order][min(k, len(vals) - 1)])


@dataclass
class ExactTail:
    prob: float
    joint_mean: float
    product_mean: float
    median: float
    center: float

    def __float__(self) -> float:
        return self.prob


class _Enumerated:
    """Cached values of f on all paths, so many t values are cheap."""

    def __init__(self, proc: Process, n: int, f: Functional, limit: int = MAX_PATHS):
        paths, lp = proc.enumerate(n, limit)
        self.w = np.exp(lp - lp.max())
        self.w /= self.w.sum()
        self.vals = f(proc, paths)
        self.joint_mean = float(np.dot(self.w, self.vals))
        self.product_mean = f.product_mean(proc, n)
        self.median = weighted_median(self.vals, self.w)

    def center_value(self, center) -> float:
        if center == "product":
            return self.product_mean
        if center == "joint":
            return self.joint_mean
        if center == "median":
            return self.median
        return float(center)

    def tail(self, center, t: float, side: str = "two") -> ExactTail:
        cv = self.center_value(center)
        p = float(np.sum(self.w[_in_event(self.vals, cv, t, side)]))
        return ExactTail(min(p, 1.0), self.joint_mean, self.product_mean, self.median, cv)


def exact_tail(query: TailQuery, limit: int = MAX_PATHS) -> ExactTail:
    """P(|f - center| >= t) under the joint law, by enumerating every path."""
    e = _Enumerated(query.proc, query.n, query.f, limit)
    return e.tail(query.center, query.t, query.side)


def exact_tails(proc: Process, n: int, f: Functional, center, ts: Sequence[float],
                side: str = "two") -> list[ExactTail]:
    e = _Enumerated(proc, n, f)
    return [e.tail(center, t, side) for t in ts]


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass
class MCEstimate:
    point: float
    ci_low: float
    ci_high: float
    samples: int
    seed: int
    hits: int = 0
    rng: str = RNG_NAME

    def contains(self, p: float) -> bool:
        return self.ci_low <= p <= self.ci_high

    def to_dict(self) -> dict:
        return {"point": self.point, "ci_low": self.ci_low, "ci_high": self.ci_high,
                "samples": self.samples, "seed": self.seed, "hits": self.hits, "rng": self.rng}


def clopper_pearson(k: int, N: int, level: float = 0.99) -> tuple[float, float]:
    a = (1.0 - level) / 2.0
    lo = 0.0 if k == 0 else float(beta_dist.ppf(a, k, N - k + 1))
    hi = 1.0 if k == N else float(beta_dist.ppf(1.0 - a, k + 1, N - k))
    return lo, hi


def stream(seed: int, task_id: int = 0, block: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, task_id, block)."""
    ss = np.random.SeedSequence(seed, spawn_key=(task_id, block))
    return np.random.Generator(np.random.Philox(ss))


def sample_path(proc: Process, n: int, rng: np.random.Generator) -> np.ndarray:
    return proc.sample(n, 1, rng)[0]


def sample_functional(proc: Process, n: int, f: Functional, samples: int, seed: int,
                      task_id: int = 0) -> np.ndarray:
    """f evaluated on ``samples`` independent paths, drawn block by block."""
    per_block = max(1, BLOCK_ELEMENTS // max(n, 1))
    out = np.empty(samples)
    done, block = 0, 0
    while done < samples:
        m = min(per_block, samples - done)
        paths = proc.sample(n, m, stream(seed, task_id, block))
        out[done:done + m] = f(proc, paths)
        done += m
        block += 1
    return out


def _estimate(vals: np.ndarray, center: float, t: float, side: str, seed: int) -> MCEstimate:
    k = int(np.count_nonzero(_in_event(vals, center, t, side)))
    N = len(vals)
    lo, hi = clopper_pearson(k, N)
    return MCEstimate(k / N, lo, hi, N, seed, k)


def _mc_center(query_center, proc: Process, n: int, f: Functional, vals: np.ndarray) -> float:
    if query_center == "product":
        return f.product_mean(proc, n)
    if query_center == "joint":
        # linear functionals have equal joint and product means when marginals match;
        # otherwise only an empirical estimate is available
        return float(np.mean(vals))
    if query_center == "median":
        return float(np.median(vals))
    return float(query_center)


def empirical_tail(query: TailQuery, samples: int, seed: int, task_id: int = 0) -> MCEstimate:
    """Seeded estimate of the tail probability with an exact 99% binomial interval."""
    if samples < 1000:
        raise ValueError("at least 10^3 samples")
    vals = sample_functional(query.proc, query.n, query.f, samples, seed, task_id)
    cv = _mc_center(query.center, query.proc, query.n, query.f, vals)
    return _estimate(vals, cv, query.t, query.side, seed)


def empirical_tails(proc: Process, n: int, f: Functional, center, ts: Sequence[float],
                    samples: int, seed: int, side: str = "two", task_id: int = 0) -> list[MCEstimate]:
    """One sample set shared across several t values."""
    vals = sample_functional(proc, n, f, samples, seed, task_id)
    cv = _mc_center(center, proc, n, f, vals)
    return [_estimate(vals, cv, t, side, seed) for t in ts]


def functional_by_name(name: str) -> Functional:
    try:
        return FUNCTIONALS[name]()
    except KeyError:
        raise DomainMismatch(f"unknown functional {name!r}") from None
