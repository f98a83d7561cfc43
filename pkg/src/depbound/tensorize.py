"""Tensorisation bounds for the Hellinger integral of a joint law against the
product of its marginals, plus the brute-force oracle they are checked against.

Everything is in natural-log units.  With ``alpha = inf`` the quantities are
logs of the essential supremum of the density, i.e. the limit of H^(1/alpha).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import ScheduleInvalid, TooLarge, UnsupportedProcess
from .measures import NEG_INF, Dist, LogValue, log_hellinger
from .processes import MAX_PATHS, NonMarkovBinary, Process, product_logprob

TIE_TOL = 1e-12


class TensorBound(LogValue):
    """A log value together with the per-step terms that produced it."""

    __slots__ = ("per_step", "argmax_states")

    def __init__(self, value: float, per_step: Sequence[float] = (), argmax_states: Sequence = ()):
        super().__init__(value)
        self.per_step = [float(v) for v in per_step]
        self.argmax_states = list(argmax_states)

    def __repr__(self) -> str:
        return f"TensorBound({self.value!r}, steps={len(self.per_step)})"


@dataclass(frozen=True)
class HolderSchedule:
    """Hölder exponents alpha_1..alpha_{n-1}; alpha_n = 1 and beta_0 = 1 are implicit.

    ``limit`` encodes the alpha_i -> 1 limit (from above for upper bounds,
    from below for lower bounds) without a numerical value.
    """

    alphas: tuple = ()
    limit: bool = False

    @classmethod
    def to_one(cls) -> "HolderSchedule":
        return cls((), True)

    @classmethod
    def geometric(cls, n: int) -> "HolderSchedule":
        return cls(tuple(1.0 + 2.0 ** (-i) for i in range(1, n)))

    @classmethod
    def geometric_lower(cls, n: int) -> "HolderSchedule":
        return cls(tuple(1.0 - 2.0 ** (-i - 1) for i in range(1, n)))

    @classmethod
    def custom(cls, alphas: Sequence[float]) -> "HolderSchedule":
        return cls(tuple(float(a) for a in alphas))

    def resolved(self, n: int, upper: bool) -> list[float]:
        """[alpha_1, ..., alpha_n] with the endpoint alpha_n = 1.  Limits come back as 1.0."""
        if self.limit:
            return [1.0] * n
        if len(self.alphas) != n - 1:
            raise ScheduleInvalid(f"need {n - 1} exponents, got {len(self.alphas)}")
        for a in self.alphas:
            if not math.isfinite(a) or a <= 0:
                raise ScheduleInvalid(f"exponent {a} is not a positive real")
            if upper and a < 1:
                raise ScheduleInvalid("upper bounds need alpha_i >= 1")
            if not upper and a > 1:
                raise ScheduleInvalid("lower bounds need alpha_i <= 1")
        return list(self.alphas) + [1.0]


def _beta(a: float, upper: bool) -> float:
    if a == 1.0:
        return math.inf if upper else -math.inf
    return a / (a - 1.0)


def _pick(values: np.ndarray, states: Sequence[int], largest: bool) -> tuple[float, int]:
    """Extreme value with ties broken toward the smallest state label."""
    best = values.max() if largest else values.min()
    tol = TIE_TOL * (1.0 + abs(best)) if math.isfinite(best) else 0.0
    hit = values >= best - tol if largest else values <= best + tol
    k = int(np.flatnonzero(hit)[0])
    return float(best), int(states[k])


# ---------------------------------------------------------------------------
# Exact oracle


def exact_joint_hellinger(proc: Process, n: int, alpha: float, limit: int = MAX_PATHS) -> LogValue:
    """log H_alpha(joint law of X_1..X_n || product of its marginals), by enumeration."""
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    paths, lp = proc.enumerate(n, limit)
    lq = product_logprob(proc, paths)
    if math.isinf(alpha):
        return LogValue(max(float(np.max(lp - lq)), 0.0))
    return LogValue(max(float(logsumexp(alpha * lp + (1.0 - alpha) * lq)), 0.0))


# ---------------------------------------------------------------------------
# Per-step conditional Hellinger integrals


def step_log_hellinger(proc: Process, i: int, order: float) -> tuple[tuple, np.ndarray, np.ndarray]:
    """For a Markov process and step i >= 2, return (x, log P_{i-1}(x), log H_order(x)).

    log H_order(x) is the log Hellinger integral of the law of X_i given
    X_{i-1} = x against the marginal of X_i, for every x in the support of
    X_{i-1}.  At ``order = inf`` it is the log ess-sup of the density.
    """
    if not proc.is_markov:
        raise UnsupportedProcess(f"{proc.name} is not Markov")
    prev = proc.marginal(i - 1).restrict()
    cur = proc.marginal(i)
    logH = np.array([log_hellinger(proc.step(i, x), cur, order) for x in prev.states])
    return prev.states, np.asarray(prev.logp), logH


def _factor(logP: np.ndarray, logH: np.ndarray, beta: float, a_next: float,
            states: Sequence[int], upper: bool) -> tuple[float, int | None]:
    """(1/beta) log E_P[ H^(beta / a_next) ], or its max/min limit when beta is infinite."""
    if math.isinf(beta):
        v, s = _pick(logH / a_next, states, largest=upper)
        return v, s
    return float(logsumexp(logP + (beta / a_next) * logH) / beta), None


def _tensor_markov(proc: Process, n: int, alpha: float, schedule: HolderSchedule,
                   upper: bool) -> TensorBound:
    if not proc.is_markov:
        raise UnsupportedProcess(f"{proc.name} is not Markov; use tensor_upper_general")
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    if n < 1:
        raise ValueError("n must be positive")
    a = schedule.resolved(n, upper)
    if math.isinf(alpha) and not schedule.limit:
        raise ScheduleInvalid("alpha = inf supports only the alpha_i -> 1 schedule")
    per_step, arg = [], []
    # step 1 compares X_1 with its own marginal, a factor of exactly 1
    for i in range(2, n + 1):
        beta_prev = _beta(a[i - 2], upper)
        order = alpha * a[i - 1]
        xs, logP, logH = step_log_hellinger(proc, i, order)
        if math.isinf(alpha):
            v, s = _pick(logH, xs, largest=upper)
        else:
            v, s = _factor(logP, logH, beta_prev, a[i - 1], xs, upper)
        per_step.append(v)
        arg.append(s)
    return TensorBound(float(np.sum(per_step)) if per_step else 0.0, per_step, arg)


def tensor_upper_markov(proc: Process, n: int, alpha: float,
                        schedule: HolderSchedule | None = None) -> TensorBound:
    """Upper bound on log H_alpha(joint || product) for a Markov process."""
    return _tensor_markov(proc, n, alpha, schedule or HolderSchedule.to_one(), True)


def tensor_lower_markov(proc: Process, n: int, alpha: float,
                        schedule: HolderSchedule | None = None) -> TensorBound:
    """Lower bound via reverse Hölder, exponents alpha_i <= 1."""
    return _tensor_markov(proc, n, alpha, schedule or HolderSchedule.to_one(), False)


def renyi_tensor_upper(proc: Process, n: int, alpha: float, schedule: HolderSchedule) -> float:
    """The same upper bound written with Rényi divergences, divided by alpha - 1."""
    a = schedule.resolved(n, True)
    total = 0.0
    for i in range(2, n + 1):
        beta_prev = _beta(a[i - 2], True)
        order = alpha * a[i - 1]
        xs, logP, logH = step_log_hellinger(proc, i, order)
        D = logH / (order - 1.0)
        scaled = (order - 1.0) * D / a[i - 1]
        if math.isinf(beta_prev):
            total += float(scaled.max())
        else:
            total += float(logsumexp(logP + beta_prev * scaled) / beta_prev)
    return total / (alpha - 1.0)


# ---------------------------------------------------------------------------
# Non-Markov processes


def prefix_log_hellinger(proc: Process, i: int, order: float,
                         limit: int = MAX_PATHS) -> tuple[np.ndarray, np.ndarray]:
    """Every positive-probability prefix x_1..x_{i-1} and the log H_order of the
    law of X_i given that prefix against the marginal of X_i."""
    cur = proc.marginal(i)
    if i == 1:
        return np.zeros((1, 0), dtype=np.int64), np.array([0.0])
    prefixes, _ = proc.enumerate(i - 1, limit)
    if isinstance(proc, NonMarkovBinary):
        p = proc.weights(i)
        q = p[0] + prefixes @ p[1:i]
        lq = np.column_stack([np.log1p(-q), np.log(q)])
        lm = np.array([cur.logprob(-1), cur.logprob(1)])
        if math.isinf(order):
            logH = np.max(lq - lm, axis=1)
        else:
            logH = logsumexp(order * lq + (1.0 - order) * lm, axis=1)
        return prefixes, logH
    if proc.is_markov:
        last = prefixes[:, -1]
        vals, inv = np.unique(last, return_inverse=True)
        per = np.array([log_hellinger(proc.step(i, int(x)), cur, order) for x in vals])
        return prefixes, per[inv]
    logH = np.array([log_hellinger(proc.conditional(list(row)), cur, order) for row in prefixes])
    return prefixes, logH


def _tensor_general(proc: Process, n: int, alpha: float, limit: int, upper: bool) -> TensorBound:
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    per_step, arg = [], []
    for i in range(2, n + 1):
        prefixes, logH = prefix_log_hellinger(proc, i, alpha, limit)
        best = logH.max() if upper else logH.min()
        tol = TIE_TOL * (1.0 + abs(best))
        cand = prefixes[logH >= best - tol] if upper else prefixes[logH <= best + tol]
        # lexicographically smallest extreme prefix
        order = np.lexsort(cand.T[::-1])
        per_step.append(float(best))
        arg.append([int(v) for v in cand[order[0]]])
    return TensorBound(float(np.sum(per_step)) if per_step else 0.0, per_step, arg)


def tensor_upper_general(proc: Process, n: int, alpha: float, limit: int = MAX_PATHS) -> TensorBound:
    """Upper bound for arbitrary processes: per step, the max over whole prefixes."""
    return _tensor_general(proc, n, alpha, limit, True)


def tensor_lower_general(proc: Process, n: int, alpha: float, limit: int = MAX_PATHS) -> TensorBound:
    """Lower bound for arbitrary processes: per step, the min over whole prefixes.

    Peeling off the last coordinate, the inner sum is the Hellinger integral of
    the last conditional law, which is at least its minimum over prefixes.
    """
    return _tensor_general(proc, n, alpha, limit, False)


def oracle_report(proc: Process, n: int, alpha: float) -> dict:
    """Exact value together with both Markov tensorisation bounds (or the general one)."""
    exact = exact_joint_hellinger(proc, n, alpha)
    out = {"n": n, "alpha": alpha, "exact": exact.value}
    if proc.is_markov:
        up = tensor_upper_markov(proc, n, alpha)
        lo = tensor_lower_markov(proc, n, alpha)
        out.update(upper=up.value, lower=lo.value, argmax_states=up.argmax_states)
    else:
        up = tensor_upper_general(proc, n, alpha)
        lo = tensor_lower_general(proc, n, alpha)
        out.update(upper=up.value, lower=lo.value, argmax_states=up.argmax_states)
    return out
