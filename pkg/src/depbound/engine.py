"""McDiarmid-type tail bounds for dependent processes.

The central inequality, for f with bounded differences c_i and alpha > 1:

    log P(|f - E_prod f| >= t) <= (1/beta) ln 2 - 2 t^2 / (beta sum c_i^2) + (1/alpha) log H_alpha

where beta = alpha / (alpha - 1) and H_alpha is the Hellinger integral of the
joint law against the product of its marginals.  At alpha = inf the last term
is the log ess-sup of the density and beta = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import (
    DomainMismatch,
    NoHalfPoint,
    UnsupportedProcess,
    ZeroMarginal,
    ZeroMassState,
)
from .kernels import (
    Kernel,
    backward_channel,
    dsbs_gamma_star,
    dsbs_renyi_sdpi_rhs,
    gamma_star_numeric,
    operator_norm,
)
from .measures import NEG_INF, Dist, LogValue, log_hellinger, renyi_divergence
from .processes import InhomogeneousChain, Process
from .tensorize import tensor_upper_general, tensor_upper_markov

LN2 = math.log(2.0)
ALPHA_GRID = tuple([1.0 + 10.0 ** (k / 4.0) for k in range(-12, 25)] + [math.inf])


def holder_conjugate(alpha: float) -> float:
    if math.isinf(alpha):
        return 1.0
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    return alpha / (alpha - 1.0)


def root_term(log_H: float, alpha: float) -> float:
    """(1/alpha) log H_alpha; at alpha = inf the input is already the log ess-sup."""
    log_H = float(log_H)
    return log_H if math.isinf(alpha) else log_H / alpha


@dataclass
class BoundParams:
    n: int
    t: float
    alpha: float = math.inf
    c: Sequence[float] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if not self.alpha > 1:
            raise ValueError("alpha must exceed 1")
        if self.c is None:
            self.c = np.full(self.n, 1.0 / self.n)
            self._sum_c2 = 1.0 / self.n  # exact up to one rounding
        else:
            self.c = np.asarray(self.c, dtype=float)
            self._sum_c2 = math.fsum(self.c * self.c)
        if self.c.shape != (self.n,) or np.any(self.c < 0) or self._sum_c2 <= 0:
            raise ValueError("c must hold n nonnegative entries, not all zero")

    @property
    def beta(self) -> float:
        return holder_conjugate(self.alpha)

    @property
    def sum_c2(self) -> float:
        return self._sum_c2

    def with_t(self, t: float) -> "BoundParams":
        return BoundParams(self.n, t, self.alpha, self.c)

    def with_alpha(self, alpha: float) -> "BoundParams":
        return BoundParams(self.n, self.t, alpha, self.c)

    def to_dict(self) -> dict:
        uniform = bool(np.all(np.abs(self.c - 1.0 / self.n) < 1e-15))
        return {"n": self.n, "t": self.t, "alpha": self.alpha, "beta": self.beta,
                "sum_c2": self.sum_c2, "c": "uniform 1/n" if uniform else self.c.tolist()}


@dataclass
class BoundReport:
    method: str
    log_bound: float
    params: BoundParams | None = None
    threshold_t: float = 0.0
    notes: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    centering: str = "product"

    @property
    def trivial(self) -> bool:
        return self.log_bound >= 0.0

    @property
    def log2_bound(self) -> float:
        return self.log_bound / LN2

    @property
    def value(self) -> float:
        return math.exp(min(self.log_bound, 0.0)) if self.log_bound < 709 else 1.0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "log_bound": self.log_bound,
            "log2_bound": self.log2_bound,
            "trivial": self.trivial,
            "threshold_t": self.threshold_t,
            "centering": self.centering,
            "params": None if self.params is None else self.params.to_dict(),
            "notes": list(self.notes),
            "extras": dict(self.extras),
        }


# ---------------------------------------------------------------------------
# The basic inequality


def general_event_bound(log_p_indep: float, log_H: float, alpha: float) -> LogValue:
    """log P(E) <= (1/beta) log P_prod(E) + (1/alpha) log H_alpha."""
    log_p_indep, log_H = float(log_p_indep), float(log_H)
    if log_p_indep > 0:
        raise ValueError("log probability must be <= 0")
    if log_H < 0:
        raise ValueError("log H must be >= 0")
    if math.isinf(log_H):
        return LogValue(math.inf)
    beta = holder_conjugate(alpha)
    return LogValue(log_p_indep / beta + root_term(log_H, alpha))


def threshold_t(params: BoundParams, log_H: float) -> float:
    """Smallest t at which -2t^2/(beta S) + (1/alpha) log H turns negative."""
    L = root_term(log_H, params.alpha)
    if L <= 0:
        return 0.0
    return math.sqrt(params.beta * params.sum_c2 * L / 2.0)


def mcdiarmid_dep_bound(params: BoundParams, log_H: float, method: str = "mcdiarmid_dependent",
                        notes: Iterable[str] = ()) -> BoundReport:
    beta = params.beta
    L = root_term(log_H, params.alpha)
    log_b = LN2 / beta - 2.0 * params.t ** 2 / (beta * params.sum_c2) + L
    return BoundReport(method, float(log_b), params, threshold_t(params, log_H), list(notes),
                       {"log_H_term": L})


# ---------------------------------------------------------------------------
# Markov routes


def _finite_step(proc: Process, i: int) -> tuple[Kernel, Dist, Dist]:
    """Kernel mapping X_i to X_{i+1}, with the two marginals, checked for zero mass."""
    if not isinstance(proc, InhomogeneousChain):
        raise UnsupportedProcess(f"route needs a finite-state chain, got {proc.name}")
    K = proc.kernel(i + 1)
    P, Q = proc.marginal(i), proc.marginal(i + 1)
    for d in (P, Q):
        if set(d.states) != set(K.states) or np.any(d.logp == NEG_INF):
            zero = [s for s in K.states if d.logprob(s) == NEG_INF]
            raise ZeroMarginal(f"marginal without mass at states {zero}")
    return K, P, Q


def _is_dsbs(K: Kernel, P: Dist) -> float | None:
    """Flip probability if K is binary symmetric with lam <= 1/2 and P uniform."""
    if len(K) != 2 or abs(K.P[0, 1] - K.P[1, 0]) > 1e-15 or K.P[0, 1] > 0.5:
        return None
    if np.max(np.abs(P.probs - 0.5)) > 1e-12:
        return None
    return float(K.P[0, 1])


def _key(K: Kernel, *ds: Dist):
    return (K.P.tobytes(),) + tuple(np.round(d.probs, 13).tobytes() for d in ds)


def hyper_step_terms(proc: Process, n: int, alpha: float, gamma_tol: float = 1e-3,
                     cache: dict | None = None) -> tuple[list[float], list[str]]:
    """Per-step log ||K_i^<-||_{alpha -> gamma_i} - (1/gamma_bar_i) min_j log P_i(j)."""
    cache = {} if cache is None else cache
    terms, notes = [], []
    for i in range(1, n):
        K, P, Q = _finite_step(proc, i)
        min_logP = float(np.min(P.logp))
        if math.isinf(alpha):
            terms.append(-min_logP)
            continue
        key = _key(K, P, Q)
        if key not in cache:
            lam = _is_dsbs(K, P)
            if lam is not None:
                gamma, log_norm = dsbs_gamma_star(lam, alpha), 0.0
                src = "closed-form hypercontractivity exponent"
            else:
                try:
                    Kb = backward_channel(K, P)
                except ZeroMassState as e:
                    raise ZeroMarginal(str(e)) from None
                gamma = gamma_star_numeric(Kb, P, alpha, tol=gamma_tol, out=Q)
                log_norm = math.log(operator_norm(Kb, P, alpha, gamma, out=Q).value)
                src = "numerical hypercontractivity exponent"
            cache[key] = (gamma, log_norm, src)
        gamma, log_norm, src = cache[key]
        inv_gbar = 1.0 - 1.0 / gamma
        terms.append(log_norm - inv_gbar * min_logP)
        if src not in notes:
            notes.append(src)
    return terms, notes


def sdpi_eta(proc: Process, n: int, alpha: float) -> tuple[float, list[str]]:
    """Rényi SDPI constant over the steps used, and the sum of max_x -log P_{i-1}(x)."""
    notes = []
    eta = 0.0
    for i in range(2, n + 1):
        prev = proc.marginal(i - 1).restrict()
        cur = proc.marginal(i)
        for x, lp in zip(prev.states, prev.logp):
            if lp >= 0.0:
                continue
            d = renyi_divergence(proc.step(i, x), cur, alpha)
            eta = max(eta, d / (-lp))
    closed = None
    if isinstance(proc, InhomogeneousChain) and n >= 2:
        try:
            lams = {_is_dsbs(proc.kernel(i), proc.marginal(i - 1)) for i in range(2, n + 1)}
        except (IndexError, ValueError):
            lams = {None}
        if len(lams) == 1 and None not in lams:
            lam = lams.pop()
            if lam < 0.5:
                closed = dsbs_renyi_sdpi_rhs(lam, alpha)
    if closed is not None:
        if closed >= eta:
            notes.append("closed-form binary symmetric SDPI constant")
            eta = closed
        else:
            notes.append("closed-form SDPI constant below the pointwise ratio; pointwise value used")
    else:
        notes.append("pointwise SDPI ratio")
    return eta, notes


def markov_chain_bound(proc: Process, params: BoundParams, route: str = "tensor") -> BoundReport:
    """Tail bound for a Markov process through one of three routes.

    tensor: exact per-step maxima of the conditional Hellinger integrals.
    hyper:  hypercontractivity of the backward channels and the smallest marginal masses.
    sdpi:   a Rényi strong data-processing constant times -log of the smallest masses.
    """
    n, alpha, beta = params.n, params.alpha, params.beta
    if route == "tensor":
        if not proc.is_markov:
            raise UnsupportedProcess(f"{proc.name} is not Markov")
        tb = tensor_upper_markov(proc, n, alpha)
        rep = mcdiarmid_dep_bound(params, tb.value, "tensor")
        rep.extras["argmax_states"] = tb.argmax_states
        return rep
    if route == "hyper":
        terms, notes = hyper_step_terms(proc, n, alpha)
        L = float(np.sum(terms))
        log_b = LN2 / beta - 2.0 * params.t ** 2 / (beta * params.sum_c2) + L
        thr = math.sqrt(beta * params.sum_c2 * L / 2.0) if L > 0 else 0.0
        return BoundReport("hyper", log_b, params, thr, notes, {"log_H_term": L})
    if route == "sdpi":
        if not proc.is_markov:
            raise UnsupportedProcess(f"{proc.name} is not Markov")
        eta, notes = sdpi_eta(proc, n, alpha)
        total = 0.0
        for i in range(2, n + 1):
            lp = proc.marginal(i - 1).restrict().logp
            total += -float(np.min(lp))
        L = eta * total / beta
        log_b = (LN2 - 2.0 * params.t ** 2 / params.sum_c2) / beta + L
        thr = math.sqrt(beta * params.sum_c2 * L / 2.0) if L > 0 else 0.0
        return BoundReport("sdpi", log_b, params, thr, notes, {"eta_alpha": eta, "log_H_term": L})
    raise ValueError(f"unknown route {route!r}")


def general_process_bound(proc: Process, params: BoundParams) -> BoundReport:
    """Per-step maxima over whole prefixes: valid for any process."""
    tb = tensor_upper_general(proc, params.n, params.alpha)
    rep = mcdiarmid_dep_bound(params, tb.value, "tensor_general")
    rep.extras["argmax_prefixes"] = tb.argmax_states
    return rep


# ---------------------------------------------------------------------------
# Choice of alpha


def optimize_alpha(bound_fn: Callable[[float], BoundReport],
                   grid: Sequence[float] = ALPHA_GRID) -> tuple[float, BoundReport]:
    """Evaluate ``bound_fn`` on the grid and return the minimiser (first one on ties)."""
    best_a, best = None, None
    for a in grid:
        rep = bound_fn(a)
        if best is None or rep.log_bound < best.log_bound:
            best_a, best = a, rep
    best.extras["alpha_star"] = best_a
    return best_a, best


# ---------------------------------------------------------------------------
# Centering


@dataclass
class GapBound:
    value: float
    t_alpha: float
    degenerate: bool = False

    def __float__(self) -> float:
        return self.value


def mean_gap_bound(params: BoundParams, log_H: float) -> GapBound:
    """Bound on |E_joint f - E_prod f|.

    Integrating the tail bound: the gap is at most t_a + 2^(1/beta) beta S / (4 t_a),
    where t_a is the threshold at which the exponent vanishes.
    """
    L = root_term(log_H, params.alpha)
    if L <= 0:
        return GapBound(0.0, 0.0, True)
    t_a = threshold_t(params, log_H)
    beta, S = params.beta, params.sum_c2
    return GapBound(t_a + 2.0 ** (1.0 / beta) * beta * S / (4.0 * t_a), t_a)


@dataclass
class MedianShift:
    r0: float
    hbar: float
    median_constants: tuple | None = None
    mean_constants: tuple | None = None


def median_shift(log_tail: Callable[[float], float], C: float | None = None,
                 c: float | None = None, p: float | None = None,
                 r_max: float = 1e6) -> MedianShift:
    """Shift a tail bound h(r) around a constant into one around the median / mean.

    r0 solves h(r0) = 1/2 (the bound holds for any r0 above it); hbar is the
    integral of h.  For h <= C exp(-c r^p) the result is also packaged as
    (C', kappa) with tails C' exp(-kappa c r^p) around median and mean.
    """
    half = -LN2
    if log_tail(0.0) < half:
        raise NoHalfPoint("h(0) < 1/2 already")
    if log_tail(r_max) > half:
        raise NoHalfPoint("h never drops below 1/2")
    r0 = brentq(lambda r: log_tail(r) - half, 0.0, r_max, xtol=1e-15, rtol=1e-15)
    hbar, _ = quad(lambda r: math.exp(log_tail(r)), 0.0, math.inf, limit=200)
    med = mean = None
    if C is not None and c is not None and p is not None:
        kappa = 2.0 ** (-p)
        med = (2.0 * C, kappa)
        mean = (max(C, math.exp(c * hbar ** p)), kappa)
    return MedianShift(r0, hbar, med, mean)


def median_concentration_bound(n: int, t: float, C_n: float) -> BoundReport:
    """ln 2 - 2n (t - r0)^2 + C_n with r0 = sqrt((ln 4 + C_n) / (2n)), for t >= r0."""
    r0 = math.sqrt((2.0 * LN2 + C_n) / (2.0 * n))
    if t < r0:
        return BoundReport("median", 0.0, None, r0, ["t below the median shift; bound is trivial"],
                           {"r0": r0, "C_n": C_n}, "median")
    log_b = LN2 - 2.0 * n * (t - r0) ** 2 + C_n
    return BoundReport("median", log_b, None, r0, [], {"r0": r0, "C_n": C_n}, "median")
