"""Markov kernels: application, powers, adjoints, contraction and norms.

A ``Kernel`` is a square row-stochastic matrix over integer labels, with
``K[x, y] = K(y | x)``.  A ``RuleKernel`` produces its rows on demand and is
used for countable chains such as the random walk on the integers.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from .errors import ConvergenceFailure, DomainMismatch, NoStationary, ZeroMassState
from .measures import NEG_INF, Dist, DivergenceKind, log_of, parse_prob, phi_divergence

ROW_TOL = 1e-12


class Kernel:
    """Finite row-stochastic matrix over labelled states."""

    is_rule = False

    def __init__(self, states: Sequence[int], matrix, exact=None):
        states = tuple(int(s) for s in states)
        if any(b <= a for a, b in zip(states, states[1:])):
            raise ValueError("states must be strictly increasing")
        P = np.array(matrix, dtype=float)
        m = len(states)
        if P.shape != (m, m):
            raise ValueError("kernel must be square over its declared states")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > ROW_TOL):
            raise ValueError("rows must be probability vectors")
        P.setflags(write=False)
        self.states = states
        self.P = P
        self.exact = None
        if exact is not None:
            ex = tuple(tuple(Fraction(v) for v in row) for row in exact)
            if any(sum(r) != 1 for r in ex):
                raise ValueError("exact rows must sum to 1")
            self.exact = ex

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], states: Sequence[int] | None = None) -> "Kernel":
        vals = [[parse_prob(v) for v in row] for row in rows]
        if states is None:
            states = range(len(vals))
        exact = vals if all(isinstance(v, Fraction) for r in vals for v in r) else None
        return cls(states, [[float(v) for v in r] for r in vals], exact)

    @classmethod
    def binary_stay(cls, eps) -> "Kernel":
        """Two-state kernel that keeps its state with probability ``eps``."""
        e = parse_prob(eps)
        return cls.from_rows([[e, 1 - e], [1 - e, e]])

    @classmethod
    def binary_flip(cls, lam) -> "Kernel":
        """Binary symmetric kernel that flips its state with probability ``lam``."""
        lam = parse_prob(lam)
        return cls.from_rows([[1 - lam, lam], [lam, 1 - lam]])

    @classmethod
    def identity(cls, states: Sequence[int]) -> "Kernel":
        m = len(states)
        return cls.from_rows([[Fraction(int(i == j)) for j in range(m)] for i in range(m)], states)

    @classmethod
    def constant(cls, row: Dist) -> "Kernel":
        probs = row.exact if row.exact is not None else row.probs
        return cls.from_rows([list(probs)] * len(row), row.states)

    @classmethod
    def from_csv(cls, text: str) -> "Kernel":
        """Header row of state labels, then one row of probabilities per state."""
        rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
        states = [int(s) for s in rows[0]]
        return cls.from_rows([[c for c in r] for r in rows[1:]], states)

    @classmethod
    def from_json(cls, obj) -> "Kernel":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_rows(obj["rows"], obj.get("states"))

    def to_json(self) -> dict:
        if self.exact is not None:
            rows = [[f"{v.numerator}/{v.denominator}" for v in r] for r in self.exact]
        else:
            rows = [[repr(float(v)) for v in r] for r in self.P]
        return {"states": list(self.states), "rows": rows}

    def __len__(self) -> int:
        return len(self.states)

    def index(self, x: int) -> int:
        try:
            return self.states.index(int(x))
        except ValueError:
            raise DomainMismatch(f"state {x} not in kernel domain") from None

    def row(self, x: int) -> Dist:
        i = self.index(x)
        if self.exact is not None:
            return Dist.from_probs(self.exact[i], self.states)
        with np.errstate(divide="ignore"):
            return Dist(self.states, np.log(self.P[i]))

    @property
    def logP(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.P)

    def __repr__(self) -> str:
        return f"Kernel(states={self.states}, P={self.P.tolist()})"


@dataclass
class RuleKernel:
    """One-step kernel defined by a rule ``step(i, x) -> Dist``.

    ``growth`` is the number of new states the support can gain per step.
    """

    step: Callable[[int, int], Dist]
    growth: int = 1
    name: str = "rule"
    is_rule: bool = field(default=True, init=False)

    def row(self, x: int, i: int = 1) -> Dist:
        return self.step(i, x)


def binary_stay(eps) -> Kernel:
    return Kernel.binary_stay(eps)


def binary_flip(lam) -> Kernel:
    return Kernel.binary_flip(lam)


def _exact_vec(mu: Dist, K: Kernel):
    pos = {s: k for k, s in enumerate(K.states)}
    return [(pos[s], p) for s, p in zip(mu.states, mu.exact)]


def apply_kernel(mu: Dist, K: Kernel | RuleKernel, i: int = 1) -> Dist:
    """Push ``mu`` through ``K`` (``mu K``).  ``i`` is the time index for rule kernels."""
    if K.is_rule:
        acc: dict[int, float] = {}
        for s, lp in zip(mu.states, mu.logp):
            if lp == NEG_INF:
                continue
            row = K.step(i, s)
            for y, lq in zip(row.states, row.logp):
                acc[y] = np.logaddexp(acc.get(y, NEG_INF), lp + lq)
        states = sorted(acc)
        logp = np.array([acc[y] for y in states])
        return Dist(states, logp - logsumexp(logp))
    missing = set(mu.states) - set(K.states)
    if missing:
        raise DomainMismatch(f"states {sorted(missing)} outside the kernel domain")
    if mu.exact is not None and K.exact is not None:
        out = [Fraction(0)] * len(K)
        for k, p in _exact_vec(mu, K):
            if p:
                for j, q in enumerate(K.exact[k]):
                    out[j] += p * q
        return Dist(K.states, np.array([log_of(v) for v in out]), tuple(out))
    idx = [K.index(s) for s in mu.states]
    logp = logsumexp(mu.logp[:, None] + K.logP[idx, :], axis=0)
    logp = logp - logsumexp(logp)
    return Dist(K.states, logp)


def k_step(K: Kernel, kappa: int) -> Kernel:
    """The ``kappa``-step kernel K^kappa."""
    if K.is_rule:
        raise DomainMismatch("powers of rule kernels need path enumeration")
    if kappa < 1 or int(kappa) != kappa:
        raise ValueError("kappa must be a positive integer")
    kappa = int(kappa)
    if K.exact is not None and len(K) <= 8 and kappa <= 64:
        M = [list(r) for r in K.exact]
        R = M
        for _ in range(kappa - 1):
            R = [[sum(R[a][c] * M[c][b] for c in range(len(M))) for b in range(len(M))]
                 for a in range(len(M))]
        return Kernel(K.states, [[float(v) for v in r] for r in R], R)
    P = np.linalg.matrix_power(K.P, kappa)
    P = np.clip(P, 0.0, None)
    P = P / P.sum(axis=1, keepdims=True)
    return Kernel(K.states, P)


def backward_channel(K: Kernel, mu: Dist) -> Kernel:
    """Adjoint kernel K^<-(x | y) = K(y | x) mu(x) / (mu K)(y), rows indexed by y."""
    if K.is_rule:
        raise DomainMismatch("backward channel needs a finite kernel")
    muK = apply_kernel(mu, K)
    if np.any(muK.logp == NEG_INF):
        bad = [s for s, lp in zip(muK.states, muK.logp) if lp == NEG_INF]
        raise ZeroMassState(f"(mu K) has no mass at {bad}")
    m = len(K)
    full_mu = np.full(m, NEG_INF)
    full_mu[[K.index(s) for s in mu.states]] = mu.logp
    if mu.exact is not None and K.exact is not None and muK.exact is not None:
        ex_mu = [Fraction(0)] * m
        for k, p in _exact_vec(mu, K):
            ex_mu[k] = p
        rows = [[K.exact[x][y] * ex_mu[x] / muK.exact[y] for x in range(m)] for y in range(m)]
        return Kernel(K.states, [[float(v) for v in r] for r in rows], rows)
    logB = K.logP.T + full_mu[None, :] - muK.logp[:, None]
    B = np.exp(logB)
    B = B / B.sum(axis=1, keepdims=True)
    return Kernel(K.states, B)


def dobrushin_tv(K: Kernel) -> float:
    """sup over state pairs of the total-variation distance between rows."""
    if K.is_rule:
        raise DomainMismatch("finite kernel required")
    m = len(K)
    if K.exact is not None:
        best = Fraction(0)
        for a, b in itertools.combinations(range(m), 2):
            d = sum(abs(p - q) for p, q in zip(K.exact[a], K.exact[b])) / 2
            best = max(best, d)
        return float(best)
    if m < 2:
        return 0.0
    diffs = 0.5 * np.abs(K.P[:, None, :] - K.P[None, :, :]).sum(axis=2)
    return float(min(1.0, diffs.max()))


# ---------------------------------------------------------------------------
# Operator norms


@dataclass
class NormEstimate:
    value: float
    f: np.ndarray
    log_values: np.ndarray

    def __float__(self) -> float:
        return self.value


def _log_norm(logw: np.ndarray, logh: np.ndarray, p: float):
    """log ||h||_p in L^p(w) and its gradient w.r.t. logh."""
    z = logw + p * logh
    v = logsumexp(z) / p
    return v, softmax(z)


def operator_norm(K: Kernel, mu: Dist, alpha: float, gamma: float,
                  out: Dist | None = None, starts: int = 32, seed: int = 0,
                  agree_tol: float = 1e-6) -> NormEstimate:
    """Estimate sup_f ||K f||_alpha / ||f||_gamma.

    ``f`` lives on the output states of ``K`` and is measured in L^gamma(mu);
    ``K f`` lives on the input states and is measured in L^alpha(out), with
    ``out`` defaulting to ``mu``.  Nonnegative kernels satisfy |Kf| <= K|f|, so
    the search runs over positive f = exp(g) and the ratio is scale free.
    """
    if K.is_rule:
        raise DomainMismatch("finite kernel required")
    if alpha < 1 or gamma < 1 or math.isinf(alpha) or math.isinf(gamma):
        raise ValueError("finite alpha, gamma >= 1 required")
    out = mu if out is None else out
    m = len(K)

    def weights(d: Dist) -> np.ndarray:
        w = np.full(m, NEG_INF)
        w[[K.index(s) for s in d.states]] = d.logp
        if np.any(w == NEG_INF):
            raise ZeroMassState("reference measure must be strictly positive on the kernel states")
        return w

    lw_in, lw_out = weights(mu), weights(out)
    logK = K.logP

    def neg_log_ratio(g):
        # log (K e^g)(x) and its Jacobian weights
        A = logK + g[None, :]
        logKf = logsumexp(A, axis=1)
        J = np.exp(A - logKf[:, None])
        v_out, s_out = _log_norm(lw_out, logKf, alpha)
        v_in, s_in = _log_norm(lw_in, g, gamma)
        grad = s_out @ J - s_in
        return -(v_out - v_in), -grad

    rng = np.random.default_rng(seed)
    inits = [np.zeros(m)]
    if m <= 4:
        for r in range(1, m):
            for S in itertools.combinations(range(m), r):
                g = np.full(m, -20.0)
                g[list(S)] = 0.0
                inits.append(g)
                inits.append(np.where(g == 0.0, 1.0, -1.0))
    inits += [rng.normal(0.0, 2.0, m) for _ in range(starts)]
    results = []
    for g0 in inits:
        res = minimize(neg_log_ratio, g0, jac=True, method="L-BFGS-B",
                       bounds=[(-40.0, 40.0)] * m,
                       options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 2000})
        results.append((-float(res.fun), res.x))
    vals = np.array([r[0] for r in results])
    best = int(np.argmax(vals))
    if np.sum(vals >= vals[best] - agree_tol) < 2:
        raise ConvergenceFailure("multi-start ascent did not reproduce its best value")
    g = results[best][1]
    f = np.exp(g - g.max())
    return NormEstimate(float(np.exp(max(vals[best], 0.0))), f, vals)


def gamma_star_numeric(K: Kernel, mu: Dist, alpha: float, tol: float = 1e-6,
                       slack: float = 1e-9, starts: int = 8, seed: int = 0,
                       out: Dist | None = None) -> float:
    """Smallest gamma in [1, alpha] with ||K||_{alpha -> gamma} <= 1, by bisection."""
    lo, hi = 1.0, float(alpha)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if operator_norm(K, mu, alpha, mid, out=out, starts=starts, seed=seed).value <= 1.0 + slack:
            hi = mid
        else:
            lo = mid
    return hi


def dsbs_gamma_star(lam: float, alpha: float) -> float:
    """Hypercontractivity exponent of the binary symmetric kernel under uniform input."""
    if not 0.0 <= lam <= 0.5:
        raise ValueError("lambda must lie in [0, 1/2]")
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    rho2 = (1.0 - 2.0 * lam) ** 2
    if math.isinf(alpha):
        return 1.0 if rho2 == 0 else math.inf
    return 1.0 + rho2 * (alpha - 1.0)


def dsbs_renyi_sdpi_rhs(lam: float, alpha: float) -> float:
    """(1-2 lam)^(1+1/alpha) / (1-lam)^((alpha-1)/alpha)."""
    if not 0.0 <= lam < 0.5:
        raise ValueError("lambda must lie in [0, 1/2)")
    if math.isinf(alpha):
        return (1.0 - 2.0 * lam) / (1.0 - lam)
    return (1.0 - 2.0 * lam) ** (1.0 + 1.0 / alpha) / (1.0 - lam) ** ((alpha - 1.0) / alpha)


def sdpi_grid_estimate(K: Kernel, mu: Dist, kind: DivergenceKind, grid: int = 400) -> float:
    """Lower estimate of the SDPI constant of a two-state kernel by scanning nu."""
    if len(K) != 2:
        raise ValueError("grid estimate implemented for two-state kernels")
    muK = apply_kernel(mu, K)
    best = 0.0
    p0 = float(mu.probs[0])
    # cluster points near mu, where the ratio is largest for smooth divergences
    offsets = np.concatenate([np.geomspace(1e-5, 1.0, grid), -np.geomspace(1e-5, 1.0, grid)])
    for off in offsets:
        q = p0 + off * (p0 if off < 0 else 1.0 - p0)
        if not 0.0 < q < 1.0:
            continue
        nu = Dist.from_probs([q, 1.0 - q], K.states)
        num = phi_divergence(kind, apply_kernel(nu, K), muK)
        den = phi_divergence(kind, nu, mu)
        if den > 1e-14:
            best = max(best, num / den)
    return best


# ---------------------------------------------------------------------------
# Spectra


@dataclass
class KernelAnalysis:
    eta_tv: float
    second_eigenvalue: float
    absolute_gap: float
    stationary: Dist
    reversible: bool
    eigenvalues: np.ndarray
    gamma_star: Callable[[float], float] | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "eta_tv": self.eta_tv,
            "second_eigenvalue": self.second_eigenvalue,
            "absolute_gap": self.absolute_gap,
            "reversible": self.reversible,
            "stationary": self.stationary.to_json(),
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "notes": list(self.notes),
        }


def stationary_distribution(K: Kernel) -> Dist:
    """A stationary law of ``K`` (minimum-norm solution when it is not unique)."""
    m = len(K)
    A = np.vstack([K.P.T - np.eye(m), np.ones((1, m))])
    b = np.zeros(m + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    if np.max(np.abs(pi @ K.P - pi)) > 1e-9:
        raise NoStationary("no stationary distribution found")
    return Dist.from_probs(pi, K.states, normalize=True)


def spectral(K: Kernel) -> KernelAnalysis:
    if K.is_rule:
        raise DomainMismatch("finite kernel required")
    pi = stationary_distribution(K)
    p = pi.probs
    notes = []
    flow = p[:, None] * K.P
    reversible = bool(np.all(p > 0) and np.max(np.abs(flow - flow.T)) < 1e-10)
    d = np.sqrt(np.where(p > 0, p, 1.0))
    S = d[:, None] * K.P / d[None, :]
    if reversible:
        ev = np.sort(np.linalg.eigvalsh(0.5 * (S + S.T)))[::-1]
    else:
        notes.append("kernel is not reversible: singular values used in place of eigenvalues")
        ev = np.sort(np.linalg.svd(S, compute_uv=False))[::-1]
    rest = ev[1:] if len(ev) > 1 else np.array([0.0])
    second = float(rest[0])
    gap = float(min(1.0, max(0.0, 1.0 - np.max(np.abs(rest)))))
    gs = None
    if len(K) == 2 and np.allclose(K.P, K.P.T) and np.allclose(p, 0.5):
        lam = float(K.P[0, 1])
        if lam <= 0.5:
            gs = lambda a, lam=lam: dsbs_gamma_star(lam, a)
    return KernelAnalysis(dobrushin_tv(K), second, gap, pi, reversible, ev, gs, notes)
