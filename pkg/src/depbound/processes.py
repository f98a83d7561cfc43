"""Joint laws of (X_1, ..., X_n): independent, Markov and non-Markov.

Time indices are 1-based throughout: ``marginal(1)`` is the law of X_1 and
``step(i, x)`` the law of X_i given X_{i-1} = x.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import InvalidPrefix, TooLarge, UnsupportedProcess
from .kernels import Kernel, RuleKernel, apply_kernel
from .measures import NEG_INF, Dist

MAX_PATHS = 2 ** 22
LN2 = math.log(2.0)


class Process:
    """Common interface.  Subclasses fill in ``marginal`` and ``conditional``."""

    name = "process"
    is_markov = True

    def __init__(self):
        self._marginals: dict[int, Dist] = {}

    def marginal(self, i: int) -> Dist:
        raise NotImplementedError

    def conditional(self, prefix: Sequence[int]) -> Dist:
        """Law of X_{k+1} given X_1..X_k = prefix."""
        if not prefix:
            return self.marginal(1)
        return self.step(len(prefix) + 1, prefix[-1])

    def step(self, i: int, x: int) -> Dist:
        raise UnsupportedProcess(f"{self.name} is not Markov")

    def support(self, i: int) -> tuple:
        return self.marginal(i).support

    # -- exact path enumeration ---------------------------------------------
    def enumerate(self, n: int, limit: int = MAX_PATHS) -> tuple[np.ndarray, np.ndarray]:
        """All positive-probability paths of length n and their log-probabilities."""
        d = self.marginal(1).restrict()
        paths = np.array(d.states, dtype=np.int64)[:, None]
        lp = np.array(d.logp, dtype=float)
        for i in range(2, n + 1):
            last = paths[:, -1]
            groups = []
            total = 0
            for x in np.unique(last):
                sel = np.flatnonzero(last == x)
                row = self.step(i, int(x)).restrict()
                groups.append((sel, row))
                total += len(sel) * len(row)
            if total > limit:
                raise TooLarge(f"{total} paths at step {i} exceed the budget of {limit}")
            new_p = np.empty((total, i), dtype=np.int64)
            new_lp = np.empty(total)
            k = 0
            for sel, row in groups:
                for y, l in zip(row.states, row.logp):
                    m = len(sel)
                    new_p[k:k + m, :-1] = paths[sel]
                    new_p[k:k + m, -1] = y
                    new_lp[k:k + m] = lp[sel] + l
                    k += m
            paths, lp = new_p, new_lp
        return paths, lp

    def sample(self, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """``size`` independent paths, shape (size, n)."""
        out = np.empty((size, n), dtype=np.int64)
        out[:, 0] = _draw(self.marginal(1), size, rng)
        for i in range(2, n + 1):
            prev = out[:, i - 2]
            for x in np.unique(prev):
                sel = np.flatnonzero(prev == x)
                out[sel, i - 1] = _draw(self.step(i, int(x)), len(sel), rng)
        return out

    def describe(self) -> dict:
        return {"kind": self.name}


def _draw(d: Dist, size: int, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(d.probs)
    idx = np.searchsorted(cum, rng.random(size) * cum[-1], side="right")
    idx = np.minimum(idx, len(d.states) - 1)
    return np.asarray(d.states, dtype=np.int64)[idx]


class IndependentProduct(Process):
    name = "independent"

    def __init__(self, dists: Sequence[Dist] | Dist, n: int | None = None):
        super().__init__()
        if isinstance(dists, Dist):
            if n is None:
                raise ValueError("n required when a single law is repeated")
            dists = [dists] * n
        self.dists = list(dists)

    def marginal(self, i: int) -> Dist:
        return self.dists[i - 1]

    def step(self, i: int, x: int) -> Dist:
        return self.dists[i - 1]

    def describe(self) -> dict:
        return {"kind": self.name, "n": len(self.dists)}


class InhomogeneousChain(Process):
    """X_1 ~ init and X_i | X_{i-1} = x ~ kernels[i-2](. | x)."""

    name = "inhomogeneous_chain"

    def __init__(self, init: Dist, kernels: Sequence[Kernel]):
        super().__init__()
        self.init = init
        self.kernels = list(kernels)

    def kernel(self, i: int) -> Kernel:
        """Kernel that produces X_i from X_{i-1}."""
        try:
            return self.kernels[i - 2]
        except IndexError:
            raise ValueError(f"no kernel for step {i}") from None

    def marginal(self, i: int) -> Dist:
        if i == 1:
            return self.init
        if i not in self._marginals:
            self._marginals[i] = apply_kernel(self.marginal(i - 1), self.kernel(i))
        return self._marginals[i]

    def step(self, i: int, x: int) -> Dist:
        return self.kernel(i).row(x)

    def sample(self, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
        # walk on state indices with cumulative rows, time-major for contiguous writes
        K0 = self.kernel(2) if n > 1 else None
        states = np.asarray(self.init.states if K0 is None else K0.states, dtype=np.int64)
        start = self.init.probs if K0 is None else np.array([self.init.prob(s) for s in K0.states])
        u = rng.random((n, size))
        idx = np.empty((n, size), dtype=np.intp)
        c0 = np.cumsum(start)
        idx[0] = np.minimum(np.searchsorted(c0, u[0] * c0[-1], side="right"), len(states) - 1)
        last = None
        for i in range(2, n + 1):
            K = self.kernel(i)
            if K is not last:
                cum = np.cumsum(K.P, axis=1)[:, :-1]
                last = K
            nxt = np.zeros(size, dtype=np.intp)
            for j in range(cum.shape[1]):
                nxt += u[i - 1] >= cum[idx[i - 2], j]
            idx[i - 1] = nxt
        return states[idx.T]

    def describe(self) -> dict:
        return {"kind": self.name, "init": self.init.to_json(),
                "kernels": [K.to_json() for K in self.kernels]}


class HomogeneousChain(InhomogeneousChain):
    name = "homogeneous_chain"

    def __init__(self, init: Dist, K: Kernel):
        Process.__init__(self)
        self.init = init
        self.K = K

    def kernel(self, i: int) -> Kernel:
        return self.K

    @property
    def kernels(self):
        return _Repeat(self.K)

    def describe(self) -> dict:
        return {"kind": self.name, "init": self.init.to_json(), "kernel": self.K.to_json()}


class _Repeat:
    def __init__(self, K):
        self.K = K

    def __getitem__(self, i):
        return self.K


def ssrw_kernel() -> RuleKernel:
    half = Fraction(1, 2)
    return RuleKernel(lambda i, x: Dist.from_probs([half, half], [x - 1, x + 1]), 1, "ssrw")


class SSRW(Process):
    """Simple symmetric random walk S_i = S_{i-1} + X_i, S_0 = 0; the process is (S_1..S_n)."""

    name = "ssrw"

    def __init__(self):
        super().__init__()
        self.K = ssrw_kernel()

    def marginal(self, i: int) -> Dist:
        if i < 1:
            raise ValueError("time index starts at 1")
        if i not in self._marginals:
            j = np.arange(i, -1, -1)
            states = i - 2 * j
            logp = gammaln(i + 1) - gammaln(j + 1) - gammaln(i - j + 1) - i * LN2
            logp = logp - logsumexp(logp)
            exact = None
            if i <= 256:
                exact = tuple(Fraction(math.comb(i, int(jj)), 2 ** i) for jj in j)
            self._marginals[i] = Dist(tuple(states), logp, exact)
        return self._marginals[i]

    def step(self, i: int, x: int) -> Dist:
        return self.K.step(i, x)

    def sample(self, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
        steps = np.where(rng.random((size, n)) < 0.5, -1, 1).astype(np.int64)
        return np.cumsum(steps, axis=1)


def geometric_rule(i: int) -> float:
    return 2.0 ** (-i - 1)


class NonMarkovBinary(Process):
    """±1 process with P(X_k = 1 | x_1..x_{k-1}) = p_0 + sum_{i=1}^{k-1} p_i x_i.

    The default weights are p_i = 2^{-i-1}.
    """

    name = "nonmarkov"
    is_markov = False
    states = (-1, 1)

    def __init__(self, rule: Callable[[int], float] = geometric_rule, horizon: int = 64):
        super().__init__()
        self.rule = rule
        self.p = np.array([rule(i) for i in range(horizon)], dtype=float)
        if np.any(self.p < 0) or not np.all(np.cumsum(self.p) < 1.0 + 1e-15):
            raise ValueError("weights must be nonnegative with partial sums below 1")
        self._m = [None]  # P(X_k = 1), 1-based

    def weights(self, k: int) -> np.ndarray:
        if k > len(self.p):
            extra = [self.rule(i) for i in range(len(self.p), k)]
            self.p = np.concatenate([self.p, extra])
        return self.p[:k]

    def prob_one(self, prefix: Sequence[int]) -> float:
        p = self.weights(len(prefix) + 1)
        return float(p[0] + np.dot(p[1:], np.asarray(prefix, dtype=float)))

    def conditional(self, prefix: Sequence[int]) -> Dist:
        if any(x not in (-1, 1) for x in prefix):
            raise InvalidPrefix("prefix entries must be ±1")
        q = self.prob_one(prefix)
        if not 0.0 < q < 1.0:
            raise InvalidPrefix(f"conditional probability {q} outside (0, 1)")
        p = self.weights(len(prefix) + 1)
        # exact arithmetic when the weights are dyadic, as for the default rule
        fr = [Fraction(float(v)) for v in p]
        qe = fr[0] + sum(w * x for w, x in zip(fr[1:], prefix))
        return Dist.from_probs([1 - qe, qe], [-1, 1])

    def marginal(self, i: int) -> Dist:
        while len(self._m) <= i:
            k = len(self._m)
            p = self.weights(k)
            m = p[0] + sum(p[j] * (2.0 * self._m[j] - 1.0) for j in range(1, k))
            self._m.append(float(m))
        m = self._m[i]
        if abs(m - 0.5) < 1e-15:
            return Dist.from_probs([Fraction(1, 2), Fraction(1, 2)], [-1, 1])
        return Dist.from_probs([1.0 - m, m], [-1, 1])

    def enumerate(self, n: int, limit: int = MAX_PATHS) -> tuple[np.ndarray, np.ndarray]:
        if 2 ** n > limit:
            raise TooLarge(f"2^{n} paths exceed the budget of {limit}")
        p = self.weights(n)
        paths = np.array([[-1], [1]], dtype=np.int64)
        lp = np.log(np.array([1.0 - p[0], p[0]]))
        for k in range(2, n + 1):
            q = p[0] + paths @ p[1:k]
            m = len(paths)
            new_p = np.empty((2 * m, k), dtype=np.int64)
            new_p[:m, :-1] = paths
            new_p[:m, -1] = -1
            new_p[m:, :-1] = paths
            new_p[m:, -1] = 1
            with np.errstate(divide="ignore"):
                lp = np.concatenate([lp + np.log1p(-q), lp + np.log(q)])
            paths = new_p
        keep = lp > NEG_INF
        return paths[keep], lp[keep]

    def sample(self, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
        p = self.weights(n)
        u = rng.random((n, size))
        out = np.empty((n, size), dtype=np.int64)
        q = np.full(size, p[0])
        for k in range(n):
            x = np.where(u[k] < q, 1, -1)
            out[k] = x
            if k + 1 < n and p[k + 1] > 0:
                q = q + p[k + 1] * x
        return out.T

    def describe(self) -> dict:
        return {"kind": self.name, "weights_head": [float(v) for v in self.p[:8]]}


ProcessSpec = Process


def joint_logprob(proc: Process, path: Sequence[int]) -> float:
    """log P(X_1..X_n = path), via the chain rule."""
    total = 0.0
    for k in range(len(path)):
        total += proc.conditional(list(path[:k])).logprob(path[k])
    return total


def product_logprob(proc: Process, paths: np.ndarray) -> np.ndarray:
    """log of the product of marginals, evaluated on each row of ``paths``."""
    n = paths.shape[1]
    out = np.zeros(paths.shape[0])
    for i in range(1, n + 1):
        d = proc.marginal(i)
        lut = dict(zip(d.states, d.logp))
        col = paths[:, i - 1]
        vals, inv = np.unique(col, return_inverse=True)
        out += np.array([lut.get(int(v), NEG_INF) for v in vals])[inv]
    return out


def logsumexp_masked(a: np.ndarray) -> float:
    a = a[a > NEG_INF]
    return float(logsumexp(a)) if a.size else NEG_INF
