"""Competing concentration bounds and the crossover points against ours.

Each baseline returns a BoundReport in natural-log units.  Comparisons between
methods look at exponents only; the centering tag records what each bound is
centered on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .engine import LN2, BoundReport, holder_conjugate, median_concentration_bound
from .errors import NoCrossover, NotContracting, PreconditionT, TooLarge, Unsupported
from .kernels import Kernel, backward_channel, dobrushin_tv, operator_norm, spectral
from .measures import Dist
from .processes import Process


@dataclass
class BaselineParams:
    etas: Sequence[float] = ()
    lambda_abs: float | None = None
    a: float | None = None
    range: tuple = (0.0, 1.0)

    def __post_init__(self):
        if any(not 0.0 <= e <= 1.0 for e in self.etas):
            raise ValueError("contraction coefficients must lie in [0, 1]")
        if self.a is not None and not 0.0 <= self.a <= 1.0:
            raise ValueError("a must lie in [0, 1]")
        if self.lambda_abs is not None and not 0.0 <= self.lambda_abs <= 1.0:
            raise ValueError("lambda_abs must lie in [0, 1]")


def kontorovich_M(etas: Sequence[float], n: int | None = None) -> float:
    """max_i (1 + sum_{j>i} prod_{k=i}^{j-1} eta_k) for per-step coefficients eta_1..eta_{n-1}.

    A single coefficient with ``n`` given means a time-homogeneous chain.
    """
    etas = [float(e) for e in etas]
    if n is not None and len(etas) == 1:
        eta = etas[0]
        return float(n) if eta == 1.0 else (1.0 - eta ** n) / (1.0 - eta)
    best = 1.0
    for i in range(len(etas)):
        acc, prod = 1.0, 1.0
        for e in etas[i:]:
            prod *= e
            acc += prod
        best = max(best, acc)
    return best


def kontorovich_bound(n: int, t: float, etas: Sequence[float]) -> BoundReport:
    """2 exp(-n t^2 / (2 M_n^2)), centered at the joint mean."""
    etas = list(etas) if len(etas) else [0.0]
    BaselineParams(etas)
    M = kontorovich_M(etas, n)
    log_b = LN2 - n * t * t / (2.0 * M * M)
    return BoundReport("kontorovich", log_b, None, 0.0, [], {"M_n": M, "n": n, "t": t}, "joint_mean")


def fan_bound(n: int, t: float, lambda_abs: float, range: tuple = (0.0, 1.0),
              reversible: bool = True) -> BoundReport:
    """2 exp(-((1 - lam)/(1 + lam)) 2 n t^2 / (b - a)^2) for a stationary chain."""
    BaselineParams(lambda_abs=lambda_abs)
    a, b = range
    w = (1.0 - lambda_abs) / (1.0 + lambda_abs)
    log_b = LN2 - w * 2.0 * n * t * t / (b - a) ** 2
    notes = ["assumes the chain starts from its stationary law"]
    if not reversible:
        notes.append("kernel is not reversible; the spectral parameter is only a proxy")
    return BoundReport("fan", log_b, None, 0.0, notes,
                       {"lambda_abs": lambda_abs, "n": n, "t": t}, "stationary_mean")


def marton_floor(n: int, a: float, logPE: float = -LN2) -> float:
    return math.sqrt(-logPE / n) / a


def marton_blowup_bound(n: int, t: float, a: float, logPE: float = -LN2) -> BoundReport:
    """exp(-2n (a t - sqrt(log(1/P(E)) / (2n)))^2), valid above the floor (1/a) sqrt(log(1/P(E))/n)."""
    BaselineParams(a=a)
    if a == 0:
        raise NotContracting("a = 0: the chain is not contracting")
    floor = marton_floor(n, a, logPE)
    if t <= floor:
        raise PreconditionT(f"t = {t} is not above the validity floor {floor}")
    s = math.sqrt(-logPE / (2.0 * n))
    log_b = -2.0 * n * (a * t - s) ** 2
    expanded = -2.0 * n * t * t * a * a + 2.0 * t * a * math.sqrt(2.0 * n * -logPE)
    return BoundReport("marton", log_b, None, floor, [], {"a": a, "expanded": expanded, "n": n, "t": t},
                       "median")


def marton_coupling(*_args, **_kw):
    raise Unsupported("the coupling infimum over all couplings of conditional laws is not computed")


# ---------------------------------------------------------------------------
# Binary flip-lambda scenario


def binary_kappa(lam: float, alpha: float) -> float:
    """log kappa_alpha = log ((1-lam)^alpha + lam^alpha)^(1/(alpha-1)); log(1-lam) at alpha = inf."""
    if math.isinf(alpha):
        return math.log(max(lam, 1.0 - lam))
    terms = [alpha * math.log(1.0 - lam)]
    if lam > 0:
        terms.append(alpha * math.log(lam))
    return float(logsumexp(terms)) / (alpha - 1.0)


def binary_ours_log(n: int, t: float, lam: float, alpha: float) -> float:
    beta = holder_conjugate(alpha)
    return (LN2 - 2.0 * n * t * t + (n - 1) * (LN2 + binary_kappa(lam, alpha))) / beta


def binary_kontorovich(n: int, t: float, lam: float) -> BoundReport:
    return kontorovich_bound(n, t, [abs(1.0 - 2.0 * lam)])


def binary_fan(n: int, t: float, lam: float) -> BoundReport:
    return fan_bound(n, t, abs(1.0 - 2.0 * lam))


def binary_marton(n: int, t: float, lam: float) -> BoundReport:
    return marton_blowup_bound(n, t, 2.0 * lam)


def binary_median_ours(n: int, t: float, lam: float) -> BoundReport:
    return median_concentration_bound(n, t, (n - 1) * math.log(2.0 * (1.0 - lam)))


@dataclass
class Crossover:
    pair: str
    exact: float
    closed_form: float | None = None
    asymptotic: float | None = None
    notes: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.exact

    def to_dict(self) -> dict:
        return {"pair": self.pair, "exact": self.exact, "closed_form": self.closed_form,
                "asymptotic": self.asymptotic, "notes": list(self.notes), "extras": dict(self.extras)}


def _root(num: float, den: float, pair: str) -> tuple[float, list]:
    """Positive root of den * t^2 = num."""
    if den <= 0:
        raise NoCrossover(f"{pair}: the baseline decays at least as fast for every t")
    if num <= 0:
        return 0.0, ["ours is smaller for every t > 0"]
    return math.sqrt(num / den), []


def _binary_crossover(pair: str, lam: float, n: int, alpha: float) -> Crossover:
    if not 0.0 < lam < 0.5:
        raise ValueError("binary crossovers need 0 < lambda < 1/2")
    beta = holder_conjugate(alpha)
    lk = LN2 + binary_kappa(lam, alpha)  # log(2 kappa)
    const = (1.0 / beta - 1.0) * LN2 + (n - 1) * lk / beta
    if pair == "ours-vs-kontorovich":
        D = (1.0 - (1.0 - 2.0 * lam) ** n) ** 2
        t, notes = _root(const, n * (2.0 / beta - 2.0 * lam * lam / D), pair)
        closed = asym = None
        if D - beta * lam * lam > 0:
            closed = math.sqrt(max((1.0 - 1.0 / n) * lk * D / (2.0 * (D - beta * lam * lam)), 0.0))
        if 1.0 - beta * lam * lam > 0:
            asym = math.sqrt(max(lk / (2.0 * (1.0 - beta * lam * lam)), 0.0))
        return Crossover(pair, t, closed, asym, notes)
    if pair == "ours-vs-fan":
        r = lam / (1.0 - lam)
        t, notes = _root(const, 2.0 * n * (1.0 / beta - r), pair)
        closed = asym = None
        if 1.0 - beta * r > 0:
            closed = math.sqrt(max((1.0 - 1.0 / n) * lk / (2.0 * (1.0 - beta * r)), 0.0))
            asym = math.sqrt(max(lk / (2.0 * (1.0 - beta * r)), 0.0))
        return Crossover(pair, t, closed, asym, notes)
    if pair == "ours-vs-marton":
        # ours is the median-centered bound at alpha = inf; the constants cancel exactly
        a = 2.0 * lam
        C_n = (n - 1) * math.log(2.0 * (1.0 - lam))
        r0 = math.sqrt((2.0 * LN2 + C_n) / (2.0 * n))
        s = math.sqrt(LN2 / (2.0 * n))
        t = 2.0 * (r0 - a * s) / (1.0 - a * a)
        asym = math.sqrt(2.0 * math.log(2.0 * (1.0 - lam))) / (1.0 - a * a)
        notes = ["median-centered bound at alpha = inf on our side"]
        if not math.isinf(alpha):
            notes.append("alpha ignored for this pair")
        return Crossover(pair, t, t, asym, notes, {"validity_floor": marton_floor(n, a)})
    raise ValueError(f"unknown binary pair {pair!r}")


# ---------------------------------------------------------------------------
# General finite kernels started at stationarity


def general_step_constant(K: Kernel, alpha: float, pi: Dist | None = None) -> float:
    """L = beta log ||K^<-||_{alpha -> alpha} - min log pi."""
    pi = pi or spectral(K).stationary
    lp = np.asarray(pi.logp)
    if np.any(np.isneginf(lp)):
        raise NoCrossover("stationary law has states of zero mass")
    if math.isinf(alpha):
        return -float(lp.min())
    beta = holder_conjugate(alpha)
    norm = operator_norm(backward_channel(K, pi), pi, alpha, alpha, out=pi).value
    return beta * math.log(norm) - float(lp.min())


def _general_crossover(pair: str, K: Kernel, n: int, alpha: float) -> Crossover:
    an = spectral(K)
    beta = holder_conjugate(alpha)
    L = general_step_constant(K, alpha, an.stationary)
    notes = list(an.notes)
    # ours: (1/beta)(ln2 - 2 n t^2 + (n-1) L);  constant terms kept in the exact root
    num = (n - 1) * L / beta + (1.0 / beta - 1.0) * LN2
    if pair == "ours-vs-kontorovich-general":
        M = kontorovich_M([dobrushin_tv(K)], n)
        t, more = _root(num, n * (2.0 / beta - 1.0 / (2.0 * M * M)), pair)
        den = 4.0 * M * M - beta
        closed = math.sqrt(max((n - 1) / n * L * 2.0 * M * M / den, 0.0)) if den > 0 else None
        M_inf = kontorovich_M([dobrushin_tv(K)], 10 ** 9)
        den_inf = 4.0 * M_inf * M_inf - beta
        asym = math.sqrt(max(L * 2.0 * M_inf ** 2 / den_inf, 0.0)) if den_inf > 0 else None
        return Crossover(pair, t, closed, asym, notes + more, {"L": L, "M_n": M})
    if pair == "ours-vs-fan-general":
        lam = 1.0 - an.absolute_gap
        w = (1.0 - lam) / (1.0 + lam)
        t, more = _root(num, 2.0 * n * (1.0 / beta - w), pair)
        den = 1.0 + lam - beta * (1.0 - lam)
        closed = math.sqrt(max((n - 1) / n * L * (1.0 + lam) / (2.0 * den), 0.0)) if den > 0 else None
        asym = math.sqrt(max(L * (1.0 + lam) / (2.0 * den), 0.0)) if den > 0 else None
        return Crossover(pair, t, closed, asym, notes + more, {"L": L, "lambda_abs": lam})
    raise ValueError(f"unknown general pair {pair!r}")


PAIRS = ("ours-vs-kontorovich", "ours-vs-fan", "ours-vs-marton",
         "ours-vs-fan-general", "ours-vs-kontorovich-general")


def crossover_threshold(pair: str, n: int, alpha: float = math.inf, lam: float | None = None,
                        K: Kernel | None = None) -> Crossover:
    """t above which our log bound is the smaller one.

    ``exact`` is the root of the full log-bound difference; ``closed_form``
    drops the additive constants; ``asymptotic`` is its n -> inf limit.
    """
    if pair.endswith("-general"):
        if K is None:
            if lam is None:
                raise ValueError("general pairs need a kernel or a flip probability")
            K = Kernel.binary_flip(lam)
        return _general_crossover(pair, K, n, alpha)
    if lam is None:
        raise ValueError("binary pairs need lambda")
    return _binary_crossover(pair, lam, n, alpha)


def binary_pair_logs(pair: str, n: int, t: float, lam: float, alpha: float = math.inf) -> tuple[float, float]:
    """(ours, baseline) log bounds for a binary pair at a given t."""
    if pair == "ours-vs-kontorovich":
        return binary_ours_log(n, t, lam, alpha), binary_kontorovich(n, t, lam).log_bound
    if pair == "ours-vs-fan":
        return binary_ours_log(n, t, lam, alpha), binary_fan(n, t, lam).log_bound
    if pair == "ours-vs-marton":
        return binary_median_ours(n, t, lam).log_bound, binary_marton(n, t, lam).log_bound
    raise ValueError(f"unknown binary pair {pair!r}")


# ---------------------------------------------------------------------------
# Dependence matrix by brute force


def samson_matrix(proc: Process, n: int, limit: int = 2 ** 12) -> np.ndarray:
    """theta[i, j] = sup over x^{i-1}, w, w' of the TV distance between the laws of
    X_j..X_n given X^i = (x^{i-1}, w) and given (x^{i-1}, w'); ones on the diagonal."""
    if n > 12:
        raise TooLarge("brute force is limited to n <= 12")
    paths, lp = proc.enumerate(n, limit)
    p = np.exp(lp)
    theta = np.eye(n)
    for i in range(n - 1):  # 0-based position of w
        groups: dict[tuple, dict] = {}
        for row, w in zip(paths, p):
            groups.setdefault(tuple(row[:i]), {}).setdefault(int(row[i]), []).append((row, w))
        for j in range(i + 1, n):
            best = 0.0
            for by_w in groups.values():
                laws = []
                for rows in by_w.values():
                    tot = sum(w for _, w in rows)
                    law: dict[tuple, float] = {}
                    for row, w in rows:
                        key = tuple(row[j:])
                        law[key] = law.get(key, 0.0) + w / tot
                    laws.append(law)
                for u in range(len(laws)):
                    for v in range(u + 1, len(laws)):
                        keys = set(laws[u]) | set(laws[v])
                        tv = 0.5 * sum(abs(laws[u].get(k, 0.0) - laws[v].get(k, 0.0)) for k in keys)
                        best = max(best, tv)
            theta[i, j] = best
    return theta


def samson_norm(theta: np.ndarray) -> float:
    """Largest row sum, the quantity that enters the dependent McDiarmid constant."""
    return float(np.max(theta.sum(axis=1)))
