"""Finite distributions in the log domain and the divergences built on them.

Probabilities are stored as natural logarithms throughout; a state with zero
mass carries ``-inf``.  Distributions built from rationals additionally keep
their exact ``Fraction`` weights so that golden values can be checked exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np
from scipy.special import logsumexp

from .errors import AbsoluteContinuityViolation

NEG_INF = -math.inf
NORMALIZATION_TOL = 1e-12


# ---------------------------------------------------------------------------
# Log-domain scalars


class LogValue:
    """Natural log of a nonnegative quantity.

    ``*`` multiplies the underlying quantities (adds logs), ``+`` adds them
    (log-sum-exp).  ``float(v)`` is the log itself.
    """

    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)

    @classmethod
    def from_linear(cls, x: float) -> "LogValue":
        if x < 0:
            raise ValueError("LogValue holds nonnegative quantities only")
        return cls(math.log(x) if x > 0 else NEG_INF)

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"LogValue({self.value!r})"

    def __mul__(self, other: "LogValue | float") -> "LogValue":
        return LogValue(self.value + float(other))

    __rmul__ = __mul__

    def __truediv__(self, other: "LogValue | float") -> "LogValue":
        return LogValue(self.value - float(other))

    def __add__(self, other: "LogValue | float") -> "LogValue":
        return LogValue(np.logaddexp(self.value, float(other)))

    __radd__ = __add__

    def __pow__(self, k: float) -> "LogValue":
        if k == 0:
            return LogValue(0.0)
        return LogValue(k * self.value)

    def __eq__(self, other) -> bool:
        try:
            return self.value == float(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other) -> bool:
        return self.value < float(other)

    def __le__(self, other) -> bool:
        return self.value <= float(other)

    def __gt__(self, other) -> bool:
        return self.value > float(other)

    def __ge__(self, other) -> bool:
        return self.value >= float(other)

    def __hash__(self) -> int:
        return hash(self.value)

    def exp(self) -> float:
        return math.exp(self.value) if self.value < 709.0 else math.inf

    @property
    def log2(self) -> float:
        return self.value / math.log(2.0)


# ---------------------------------------------------------------------------
# Parsing helpers


def parse_prob(p) -> Fraction | float:
    """Turn ``"a/b"``, decimal strings, ints and Fractions into exact rationals.

    Python floats stay floats (their binary expansion is not what the user meant).
    """
    if isinstance(p, Fraction):
        return p
    if isinstance(p, (bool, np.bool_)):
        raise TypeError("boolean is not a probability")
    if isinstance(p, (int, np.integer)):
        return Fraction(int(p))
    if isinstance(p, (float, np.floating)):
        return float(p)
    if isinstance(p, str):
        s = p.strip()
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(int(num.strip()), int(den.strip()))
        return Fraction(Decimal(s))
    raise TypeError(f"cannot interpret {p!r} as a probability")


def log_of(p: Fraction | float) -> float:
    """Correctly rounded natural log (``-inf`` for zero)."""
    if p < 0:
        raise ValueError("negative probability")
    if p == 0:
        return NEG_INF
    if isinstance(p, Fraction):
        with mpmath.workprec(160):
            return float(mpmath.log(mpmath.mpf(p.numerator) / p.denominator))
    return math.log(p)


# ---------------------------------------------------------------------------
# Distributions


@dataclass(frozen=True, eq=False)
class Dist:
    """Finite distribution over integer state labels, stored as log-probabilities."""

    states: tuple
    logp: np.ndarray
    exact: tuple | None = field(default=None)

    def __post_init__(self):
        states = tuple(int(s) for s in self.states)
        logp = np.asarray(self.logp, dtype=float).copy()
        if logp.ndim != 1 or len(states) != logp.shape[0]:
            raise ValueError("states and logp must have the same length")
        if len(states) == 0:
            raise ValueError("empty distribution")
        if any(b <= a for a, b in zip(states, states[1:])):
            raise ValueError("states must be strictly increasing")
        if np.any(np.isnan(logp)) or np.any(logp > 1e-12):
            raise ValueError("log-probabilities must be <= 0")
        total = logsumexp(logp)
        if abs(total) > NORMALIZATION_TOL:
            raise ValueError(f"distribution does not normalize (log-sum = {total:.3e})")
        logp.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "logp", logp)
        if self.exact is not None:
            ex = tuple(Fraction(x) for x in self.exact)
            if len(ex) != len(states) or sum(ex) != 1 or any(x < 0 for x in ex):
                raise ValueError("exact weights must be nonnegative and sum to 1")
            object.__setattr__(self, "exact", ex)

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_probs(cls, probs: Sequence, states: Sequence[int] | None = None,
                   normalize: bool = False) -> "Dist":
        vals = [parse_prob(p) for p in probs]
        if states is None:
            states = range(len(vals))
        states = [int(s) for s in states]
        order = np.argsort(states, kind="stable")
        states = [states[i] for i in order]
        vals = [vals[i] for i in order]
        if all(isinstance(v, Fraction) for v in vals):
            if normalize:
                tot = sum(vals)
                vals = [v / tot for v in vals]
            return cls(tuple(states), np.array([log_of(v) for v in vals]), tuple(vals))
        arr = np.array([float(v) for v in vals])
        if np.any(arr < 0):
            raise ValueError("negative probability")
        if normalize:
            arr = arr / arr.sum()
        with np.errstate(divide="ignore"):
            return cls(tuple(states), np.log(arr))

    @classmethod
    def from_logp(cls, states: Sequence[int], logp: Sequence[float]) -> "Dist":
        return cls(tuple(states), np.asarray(logp, dtype=float))

    @classmethod
    def parse(cls, text: str, states: Sequence[int] | None = None) -> "Dist":
        """``"1/3,2/3"`` -> Dist over states 0, 1."""
        return cls.from_probs([p for p in text.split(",") if p.strip()], states)

    @classmethod
    def point(cls, x: int, states: Sequence[int] | None = None) -> "Dist":
        states = [x] if states is None else sorted(int(s) for s in states)
        if x not in states:
            raise ValueError(f"{x} not among the states")
        return cls.from_probs([Fraction(int(s == x)) for s in states], states)

    @classmethod
    def uniform(cls, states: Sequence[int]) -> "Dist":
        m = len(states)
        return cls.from_probs([Fraction(1, m)] * m, states)

    @classmethod
    def from_json(cls, items: Iterable[dict]) -> "Dist":
        items = list(items)
        return cls.from_probs([it["prob"] for it in items], [it["state"] for it in items])

    # -- views ------------------------------------------------------------
    @property
    def probs(self) -> np.ndarray:
        if self.exact is not None:
            return np.array([float(x) for x in self.exact])
        return np.exp(self.logp)

    @property
    def support(self) -> tuple:
        return tuple(s for s, lp in zip(self.states, self.logp) if lp > NEG_INF)

    def __len__(self) -> int:
        return len(self.states)

    def index(self, x: int) -> int:
        try:
            return self.states.index(int(x))
        except ValueError:
            raise KeyError(x) from None

    def logprob(self, x: int) -> float:
        try:
            return float(self.logp[self.index(x)])
        except KeyError:
            return NEG_INF

    def prob(self, x: int) -> float:
        return math.exp(self.logprob(x))

    def restrict(self) -> "Dist":
        """Drop zero-mass states."""
        keep = self.logp > NEG_INF
        exact = None if self.exact is None else tuple(e for e, k in zip(self.exact, keep) if k)
        return Dist(tuple(s for s, k in zip(self.states, keep) if k), self.logp[keep], exact)

    def mean(self) -> float:
        return float(np.dot(self.probs, np.array(self.states, dtype=float)))

    def to_json(self) -> list:
        if self.exact is not None:
            ps = [f"{e.numerator}/{e.denominator}" for e in self.exact]
        else:
            ps = [repr(float(p)) for p in self.probs]
        return [{"state": s, "prob": p} for s, p in zip(self.states, ps)]

    def allclose(self, other: "Dist", atol: float = 1e-12) -> bool:
        _, a, b = align(self, other)
        return bool(np.max(np.abs(np.exp(a) - np.exp(b))) <= atol)

    def __repr__(self) -> str:
        body = ", ".join(f"{s}: {p:.6g}" for s, p in zip(self.states, self.probs))
        return f"Dist({{{body}}})"


def align(nu: Dist, mu: Dist) -> tuple[tuple, np.ndarray, np.ndarray]:
    """Express both distributions on the union of their state lists."""
    if nu.states == mu.states:
        return nu.states, np.asarray(nu.logp), np.asarray(mu.logp)
    states = tuple(sorted(set(nu.states) | set(mu.states)))
    a = np.full(len(states), NEG_INF)
    b = np.full(len(states), NEG_INF)
    pos = {s: i for i, s in enumerate(states)}
    a[[pos[s] for s in nu.states]] = nu.logp
    b[[pos[s] for s in mu.states]] = mu.logp
    return states, a, b


def _check_ac(a: np.ndarray, b: np.ndarray) -> None:
    bad = (a > NEG_INF) & (b == NEG_INF)
    if np.any(bad):
        raise AbsoluteContinuityViolation("first measure is not absolutely continuous w.r.t. the second")


# ---------------------------------------------------------------------------
# Divergences


def log_hellinger(nu: Dist, mu: Dist, order: float) -> float:
    """log of sum nu^order mu^(1-order) for any order > 0.

    For order > 1 absolute continuity is required; below 1 the sum runs over
    the common support.  ``order = inf`` gives the log of the largest
    likelihood ratio (the ess-sup), which is what H^(1/order) tends to.
    """
    _, a, b = align(nu, mu)
    if order <= 0:
        raise ValueError("order must be positive")
    if order == 1:
        return 0.0 if not np.any((a > NEG_INF) & (b == NEG_INF)) else float(logsumexp(a[b > NEG_INF]))
    if math.isinf(order):
        _check_ac(a, b)
        m = a > NEG_INF
        return float(np.max(a[m] - b[m]))
    if order > 1:
        _check_ac(a, b)
    m = (a > NEG_INF) & (b > NEG_INF)
    if not np.any(m):
        return NEG_INF
    return float(logsumexp(order * a[m] + (1.0 - order) * b[m]))


def hellinger_integral(nu: Dist, mu: Dist, alpha: float) -> LogValue:
    """log H_alpha(nu || mu) = log sum nu(x)^alpha mu(x)^(1-alpha), alpha > 1."""
    if not alpha > 1 or math.isinf(alpha):
        raise ValueError("Hellinger integral needs a finite alpha > 1")
    v = log_hellinger(nu, mu, alpha)
    # H >= 1 by Jensen; only rounding can push it below.
    return LogValue(max(v, 0.0))


def hellinger_integral_exact(nu: Dist, mu: Dist, alpha: int) -> Fraction:
    """Exact H_alpha for rational inputs and integer alpha >= 2."""
    if nu.exact is None or mu.exact is None:
        raise ValueError("exact weights required")
    if int(alpha) != alpha or alpha < 2:
        raise ValueError("integer alpha >= 2 required")
    alpha = int(alpha)
    states = sorted(set(nu.states) | set(mu.states))
    pn = dict(zip(nu.states, nu.exact))
    pm = dict(zip(mu.states, mu.exact))
    total = Fraction(0)
    for s in states:
        p, q = pn.get(s, Fraction(0)), pm.get(s, Fraction(0))
        if p == 0:
            continue
        if q == 0:
            raise AbsoluteContinuityViolation(f"state {s}")
        total += p ** alpha / q ** (alpha - 1)
    return total


def kl_divergence(nu: Dist, mu: Dist) -> float:
    _, a, b = align(nu, mu)
    _check_ac(a, b)
    m = a > NEG_INF
    return max(float(np.sum(np.exp(a[m]) * (a[m] - b[m]))), 0.0)


def renyi_divergence(nu: Dist, mu: Dist, alpha: float) -> float:
    """D_alpha(nu || mu) in nats.

    alpha = 1 is the KL divergence and alpha = inf the log of the largest
    likelihood ratio.  For alpha >= 1 without absolute continuity the result
    is +inf.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    try:
        if alpha == 1:
            return kl_divergence(nu, mu)
        if math.isinf(alpha):
            return max(log_hellinger(nu, mu, math.inf), 0.0)
        v = log_hellinger(nu, mu, alpha) / (alpha - 1.0)
    except AbsoluteContinuityViolation:
        return math.inf
    return max(v, 0.0)


@dataclass(frozen=True)
class DivergenceKind:
    """Which divergence to evaluate.  Build with the class-method constructors."""

    tag: str
    alpha: float | None = None
    phi: Callable[[np.ndarray], np.ndarray] | None = None

    @classmethod
    def kl(cls) -> "DivergenceKind":
        return cls("KL")

    @classmethod
    def tv(cls) -> "DivergenceKind":
        return cls("TV")

    @classmethod
    def chi2(cls) -> "DivergenceKind":
        return cls("CHI2")

    @classmethod
    def hellinger(cls, alpha: float) -> "DivergenceKind":
        if not alpha > 1:
            raise ValueError("HELLINGER_INTEGRAL needs alpha > 1")
        return cls("HELLINGER_INTEGRAL", alpha)

    @classmethod
    def renyi(cls, alpha: float) -> "DivergenceKind":
        if not alpha > 0:
            raise ValueError("RENYI needs alpha > 0")
        return cls("RENYI", alpha)

    @classmethod
    def tabulated(cls, ts: Sequence[float], values: Sequence[float]) -> "DivergenceKind":
        """Custom convex phi from a table, linearly interpolated.

        Convexity is the caller's responsibility; only a 3-point midpoint
        check is made.
        """
        ts = np.asarray(ts, dtype=float)
        vs = np.asarray(values, dtype=float)
        if ts.ndim != 1 or ts.shape != vs.shape or len(ts) < 3 or np.any(np.diff(ts) <= 0):
            raise ValueError("need >= 3 increasing abscissae with matching values")
        if ts[0] < 0:
            raise ValueError("phi lives on the nonnegative axis")

        def phi(x, ts=ts, vs=vs):
            x = np.asarray(x, dtype=float)
            if np.any(x < ts[0] - 1e-12) or np.any(x > ts[-1] + 1e-12):
                raise ValueError("likelihood ratio outside the tabulated range")
            return np.interp(x, ts, vs)

        lo, hi = ts[0], ts[-1]
        mid = 0.5 * (lo + hi)
        for a, b in ((lo, hi), (lo, mid), (mid, hi)):
            if phi(0.5 * (a + b)) > 0.5 * (phi(a) + phi(b)) + 1e-12:
                raise ValueError("tabulated phi fails the midpoint convexity check")
        return cls("PHI", None, phi)


def phi_divergence(kind: DivergenceKind, nu: Dist, mu: Dist) -> float:
    """sum_x mu(x) phi(nu(x)/mu(x)) for KL, TV, chi^2 or a tabulated phi."""
    _, a, b = align(nu, mu)
    if kind.tag == "TV":
        return 0.5 * float(np.sum(np.abs(np.exp(a) - np.exp(b))))
    if kind.tag == "KL":
        return kl_divergence(nu, mu)
    if kind.tag == "CHI2":
        return max(math.expm1(log_hellinger(nu, mu, 2.0)), 0.0)
    if kind.tag == "PHI":
        _check_ac(a, b)
        m = b > NEG_INF
        ratio = np.exp(a[m] - b[m])
        return float(np.sum(np.exp(b[m]) * kind.phi(ratio)))
    if kind.tag == "HELLINGER_INTEGRAL":
        return hellinger_integral(nu, mu, kind.alpha).exp()
    if kind.tag == "RENYI":
        return renyi_divergence(nu, mu, kind.alpha)
    raise ValueError(f"unknown divergence kind {kind.tag}")


def divergence(kind: DivergenceKind, nu: Dist, mu: Dist) -> float:
    return phi_divergence(kind, nu, mu)
