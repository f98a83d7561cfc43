"""Ready-made processes with their closed-form quantities.

Four settings: a binary symmetric chain, the simple symmetric random walk,
a binary process whose every step depends on the whole past, and MCMC
averages after a burn-in period.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .baselines import binary_kappa, kontorovich_bound
from .engine import (
    ALPHA_GRID,
    LN2,
    BoundParams,
    BoundReport,
    holder_conjugate,
    mean_gap_bound,
)
from .errors import InvalidPrefix, NoStationary, OutOfSupport, Unreachable
from .kernels import Kernel, spectral
from .measures import Dist, log_hellinger
from .processes import SSRW, HomogeneousChain, NonMarkovBinary

LOG2E = 1.0 / LN2


# ---------------------------------------------------------------------------
# Binary symmetric chain


def binary_chain(lam, init: Dist | None = None) -> HomogeneousChain:
    """States {0, 1}, flip probability ``lam``, uniform start by default."""
    K = Kernel.binary_flip(lam)
    return HomogeneousChain(init or Dist.uniform([0, 1]), K)


def binary_chain_bound(lam: float, n: int, t: float, alpha: float) -> BoundReport:
    """(1/beta)(ln 2 - 2 n t^2 + (n-1) ln(2 kappa_alpha)) with uniform start."""
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    params = BoundParams(n, t, alpha)
    beta = params.beta
    step = LN2 + binary_kappa(lam, alpha)
    log_b = (LN2 - 2.0 * n * t * t + (n - 1) * step) / beta
    thr = math.sqrt(max((n - 1) * step / (2.0 * n), 0.0))
    return BoundReport("binary_closed_form", log_b, params, thr, [],
                       {"log_H_term": (n - 1) * step / beta, "step_log_2kappa": step})


# ---------------------------------------------------------------------------
# Simple symmetric random walk


def _ssrw_logpmf(i: int, s: np.ndarray) -> np.ndarray:
    """log P(S_i = s), -inf off the support."""
    s = np.asarray(s)
    j = (i - s) / 2.0
    ok = (np.abs(s) <= i) & ((i - s) % 2 == 0)
    out = np.full(s.shape, -np.inf)
    jj = j[ok]
    out[ok] = gammaln(i + 1) - gammaln(jj + 1) - gammaln(i - jj + 1) - i * LN2
    return out


def ssrw_step_hellinger(i: int, x, alpha: float):
    """log H_alpha of the law of S_i given S_{i-1} = x against the law of S_i.

    Equal to log(2^-alpha (P(x+1)^(1-alpha) + P(x-1)^(1-alpha))).  Vectorised
    over ``x``.  At alpha = inf returns the log of the largest density ratio.
    """
    if i < 2:
        raise ValueError("steps start at i = 2")
    xs = np.atleast_1d(np.asarray(x))
    bad = (np.abs(xs) > i - 1) | ((i - 1 - xs) % 2 != 0)
    if np.any(bad):
        raise OutOfSupport(f"{xs[bad].tolist()} not in the support of S_{i - 1}")
    up, dn = _ssrw_logpmf(i, xs + 1), _ssrw_logpmf(i, xs - 1)
    if math.isinf(alpha):
        out = -LN2 - np.minimum(up, dn)
    else:
        out = -alpha * LN2 + np.logaddexp((1.0 - alpha) * up, (1.0 - alpha) * dn)
    return out if np.ndim(x) else float(out[0])


def ssrw_step_extreme(i: int, alpha: float, largest: bool = True) -> tuple[float, int]:
    """Extreme of the step Hellinger integral over the support of S_{i-1}.

    Evaluated at both boundary points and the centre, then over the whole
    support; the two must agree for the maximum, which the boundary attains.
    """
    xs = np.arange(-(i - 1), i, 2)
    vals = ssrw_step_hellinger(i, xs, alpha)
    k = int(np.argmax(vals) if largest else np.argmin(vals))
    if largest:
        cand = [-(i - 1), i - 1, int(xs[len(xs) // 2])]
        best_cand = max(ssrw_step_hellinger(i, c, alpha) for c in cand)
        assert best_cand >= vals[k] - 1e-9 * (1 + abs(vals[k])), "maximum off the boundary"
    return float(vals[k]), int(xs[k])


def ssrw_tensor_log2(n: int, alpha: float) -> float:
    """Per-step product upper bound on log2 H^(1/alpha)(joint || product) for the walk."""
    total = 0.0
    for i in range(2, n + 1):
        v, _ = ssrw_step_extreme(i, alpha)
        total += v if math.isinf(alpha) else v / alpha
    return total * LOG2E


def ssrw_dependence_upper_log2(n: int, alpha: float) -> float:
    return n * (n - 1) / (2.0 * holder_conjugate(alpha))


def ssrw_dependence_lower_log2(n: int, alpha: float) -> float:
    return (n - 2) / (4.0 * holder_conjugate(alpha))


def ssrw_step_upper_log2(i: int, alpha: float) -> float:
    """Per-step bound i/beta - 1 + 1/alpha on log2 H^(1/alpha)."""
    beta = holder_conjugate(alpha)
    return i / beta - 1.0 + (0.0 if math.isinf(alpha) else 1.0 / alpha)


def ssrw_bound(n: int, t: float, alpha: float, centering: str = "product") -> BoundReport:
    """(1/beta) ln 2 - 2 n t^2 / beta + n (n-1) ln 2 / (2 beta), with c_i = 1/n.

    ``centering="joint"`` moves the center to the joint mean by subtracting the
    mean-gap bound from t.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    params = BoundParams(n, t, alpha)
    beta = params.beta
    L = n * (n - 1) * LN2 / (2.0 * beta)  # (1/alpha) log H upper bound
    log_H = L if math.isinf(alpha) else alpha * L
    notes, extras = [], {"log_H_term": L}
    t_eff = t
    if centering == "joint":
        gap = mean_gap_bound(params, log_H)
        extras["mean_gap"] = gap.value
        t_eff = t - gap.value
        if t_eff <= 0:
            notes.append("t does not exceed the mean-gap bound; bound is trivial")
            return BoundReport("ssrw", 0.0, params, gap.value, notes, extras, "joint_mean")
    elif centering != "product":
        raise ValueError(f"unknown centering {centering!r}")
    log_b = LN2 / beta - 2.0 * n * t_eff ** 2 / beta + L
    thr = math.sqrt((n - 1) * LN2) / 2.0
    if centering == "joint":
        thr += extras["mean_gap"]
    return BoundReport("ssrw", log_b, params, thr, notes, extras,
                       "joint_mean" if centering == "joint" else "product")


def ssrw_kontorovich(n: int, t: float) -> BoundReport:
    return kontorovich_bound(n, t, [1.0])


# ---------------------------------------------------------------------------
# Process depending on its entire past


def nonmarkov_process(rule=None) -> NonMarkovBinary:
    return NonMarkovBinary(rule) if rule else NonMarkovBinary()


_DEFAULT_NM = NonMarkovBinary()


def nonmarkov_conditional(prefix: Sequence[int], proc: NonMarkovBinary | None = None) -> Dist:
    """Law of the next value given (x_0 = 1, x_1, ..., x_{k-1}).

    The leading 1 is the fixed initial value and must be included.
    """
    prefix = list(prefix)
    if not prefix or prefix[0] != 1:
        raise InvalidPrefix("the prefix starts with the fixed value x_0 = 1")
    return (proc or _DEFAULT_NM).conditional(prefix[1:])


def nonmarkov_bound(n: int, t: float, beta: float | None = None) -> BoundReport:
    """(1/beta)(ln 2 - 2 n t^2) + (n-1) ln 2, minimised over beta on the grid if not given.

    Each conditional step has H_alpha <= 2^alpha against the uniform marginal.
    """
    if n < 2:
        raise ValueError("n must be at least 2")

    def at(b: float) -> float:
        return (LN2 - 2.0 * n * t * t) / b + (n - 1) * LN2

    if beta is None:
        betas = [holder_conjugate(a) for a in ALPHA_GRID]
        vals = [at(b) for b in betas]
        k = int(np.argmin(vals))
        beta = betas[k]
    alpha = math.inf if beta == 1.0 else beta / (beta - 1.0)
    params = BoundParams(n, t, alpha)
    thr = math.sqrt((n - 1) / n * beta * LN2 / 2.0)
    return BoundReport("nonmarkov", at(beta), params, thr, [], {"beta_star": beta,
                       "log_H_term": (n - 1) * LN2})


# ---------------------------------------------------------------------------
# MCMC after burn-in


def _pushed_deviation(nu: Dist, K: Kernel, pi: Dist, n0: int) -> np.ndarray:
    """(nu - pi) K^n0, computed on the deviation to avoid cancellation."""
    d = np.array([nu.prob(s) for s in K.states]) - pi.probs
    if n0:
        d = d @ np.linalg.matrix_power(K.P, n0)
    return d


def burnin_constant(nu: Dist, K: Kernel, pi: Dist, n0: int, alpha: float) -> float:
    """(1/alpha) log H_alpha(nu K^n0 || pi), or the log max ratio at alpha = inf."""
    if any(nu.prob(s) > 0 and pi.prob(s) == 0 for s in nu.states):
        raise ValueError("starting law is not absolutely continuous w.r.t. pi")
    r = _pushed_deviation(nu, K, pi, n0) / pi.probs  # density - 1
    with np.errstate(divide="ignore"):
        lr = np.log1p(np.maximum(r, -1.0))
    if math.isinf(alpha):
        return max(float(np.max(lr)), 0.0)
    with np.errstate(divide="ignore"):
        v = float(logsumexp(np.log(pi.probs) + alpha * lr)) / alpha
    return max(v, 0.0)


def mcmc_bound(nu: Dist, K: Kernel, n0: int, n: int, t: float, alpha: float,
               range: tuple = (0.0, 1.0)) -> BoundReport:
    """One-sided bound on P(average of f over n post-burn-in steps - pi(f) > t).

    Ours: C - 2 n t^2 / (beta d^2) + (n-1) max_x (1/alpha) log H_alpha(K(.|x) || pi),
    and the coarser form with (n-1)(1/beta) log(1/min pi).  The spectral
    baseline shares the constant C.
    """
    an = spectral(K)
    pi = an.stationary
    if np.any(pi.probs <= 0):
        raise NoStationary("stationary law must be strictly positive")
    params = BoundParams(n, t, alpha)
    beta = params.beta
    d2 = (range[1] - range[0]) ** 2
    C = burnin_constant(nu, K, pi, n0, alpha)
    steps = [log_hellinger(K.row(x), pi, alpha) for x in K.states]
    step = max(steps) if math.isinf(alpha) else max(steps) / alpha
    step = max(step, 0.0)
    coarse_step = -float(np.min(np.log(pi.probs))) / beta
    decay = -2.0 * n * t * t / (beta * d2)
    ours = C + decay + (n - 1) * step
    lam_r = max(an.second_eigenvalue, 0.0)
    w = (1.0 - lam_r) / (1.0 + lam_r)
    fan = C + w * decay
    thr = None
    if lam_r > 0:
        thr = math.sqrt((n - 1) / n * d2 / 2.0 * (1.0 + lam_r) / (2.0 * lam_r) * beta * step)
    notes = ["one-sided deviation above pi(f)", "spectral baseline uses the same burn-in constant"]
    extras = {"C": C, "fan_log_bound": fan, "coarse_log_bound": C + decay + (n - 1) * coarse_step,
              "step_term": step, "lambda_r": an.second_eigenvalue, "crossover_t": thr, "n0": n0}
    return BoundReport("mcmc", ours, params, thr or 0.0, notes + list(an.notes), extras, "stationary_mean")


def min_burnin(nu: Dist, K: Kernel, n: int, t: float, alpha: float, target_log_prob: float,
               max_n0: int = 1 << 20) -> int:
    """Smallest n0 with mcmc_bound(...).log_bound <= target_log_prob.

    The burn-in constant is nonincreasing in n0 by data processing, so an
    exponential search followed by bisection finds the crossing.
    """
    an = spectral(K)
    if an.absolute_gap <= 0:
        raise Unreachable("kernel has no spectral gap")

    def lb(n0: int) -> float:
        return mcmc_bound(nu, K, n0, n, t, alpha).log_bound

    floor = lb(0) - mcmc_bound(nu, K, 0, n, t, alpha).extras["C"]
    if lb(0) <= target_log_prob:
        return 0
    if target_log_prob <= floor:
        raise Unreachable(f"target {target_log_prob} is not above the floor {floor}")
    hi = 1
    while lb(hi) > target_log_prob:
        hi *= 2
        if hi > max_n0:
            raise Unreachable("target not met within the burn-in budget")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if lb(mid) <= target_log_prob:
            hi = mid
        else:
            lo = mid
    return hi


SCENARIOS = ("binary", "ssrw", "nonmarkov", "mcmc")


def make_process(name: str, lam: float = 0.25):
    if name == "binary":
        return binary_chain(lam)
    if name == "ssrw":
        return SSRW()
    if name == "nonmarkov":
        return NonMarkovBinary()
    raise ValueError(f"unknown scenario {name!r}")
