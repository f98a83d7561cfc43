import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from depbound.engine import (
    ALPHA_GRID,
    LN2,
    BoundParams,
    general_event_bound,
    general_process_bound,
    holder_conjugate,
    markov_chain_bound,
    mcdiarmid_dep_bound,
    mean_gap_bound,
    median_concentration_bound,
    median_shift,
    optimize_alpha,
    root_term,
    threshold_t,
)
from depbound.errors import NoHalfPoint, UnsupportedProcess
from depbound.harness import NormalizedMean, exact_tails
from depbound.kernels import Kernel
from depbound.measures import Dist
from depbound.processes import SSRW, HomogeneousChain, IndependentProduct, NonMarkovBinary
from depbound.tensorize import exact_joint_hellinger


def test_conjugate_and_root():
    assert holder_conjugate(2.0) == 2.0
    assert holder_conjugate(math.inf) == 1.0
    with pytest.raises(ValueError):
        holder_conjugate(1.0)
    assert root_term(3.0, 3.0) == 1.0
    assert root_term(3.0, math.inf) == 3.0


def test_alpha_grid():
    assert len(ALPHA_GRID) == 38
    assert ALPHA_GRID[0] == pytest.approx(1.001) and ALPHA_GRID[-1] == math.inf
    assert list(ALPHA_GRID[:-1]) == sorted(ALPHA_GRID[:-1])


def test_params_validation():
    with pytest.raises(ValueError):
        BoundParams(0, 0.1)
    with pytest.raises(ValueError):
        BoundParams(3, -0.1)
    with pytest.raises(ValueError):
        BoundParams(3, 0.1, 1.0)
    with pytest.raises(ValueError):
        BoundParams(3, 0.1, c=[1, 1])
    assert BoundParams(4, 0.1).sum_c2 == pytest.approx(0.25)


@given(st.integers(1, 200), st.floats(0.0, 2.0), st.floats(0.01, 2.0))
def test_independence_recovers_mcdiarmid(n, t, scale):
    p = BoundParams(n, t, math.inf, [scale / n] * n)
    rep = mcdiarmid_dep_bound(p, 0.0)
    assert rep.log_bound == pytest.approx(LN2 - 2 * t * t / p.sum_c2, abs=1e-12)


def test_event_bound():
    assert general_event_bound(math.log(0.25), 0.0, 2.0).value == pytest.approx(math.log(0.5))
    assert general_event_bound(-3.0, 1.5, math.inf).value == pytest.approx(-1.5)


def test_threshold_is_where_bound_crosses_ln2():
    p = BoundParams(10, 0.0, 3.0)
    tt = threshold_t(p, 2.4)
    assert mcdiarmid_dep_bound(p.with_t(tt), 2.4).log_bound == pytest.approx(LN2 / p.beta)


@pytest.mark.parametrize("lam", [0.1, 0.25, 0.4])
@pytest.mark.parametrize("alpha", [2.0, math.inf])
def test_bound_dominates_exact_tail(lam, alpha):
    n = 10
    proc = HomogeneousChain(Dist.uniform([0, 1]), Kernel.binary_flip(lam))
    ts = np.linspace(0.01, 0.6, 20)
    exact = exact_tails(proc, n, NormalizedMean(), "product", ts)
    for t, e in zip(ts, exact):
        for route in ("tensor", "hyper", "sdpi"):
            rep = markov_chain_bound(proc, BoundParams(n, float(t), alpha), route)
            assert math.log(max(e.prob, 1e-300)) <= rep.log_bound + 1e-9


def test_routes_match_closed_forms_at_infinity():
    proc = HomogeneousChain(Dist.uniform([0, 1]), Kernel.binary_flip(0.25))
    n, t = 50, 0.4
    p = BoundParams(n, t)
    logs = {r: markov_chain_bound(proc, p, r).log_bound for r in ("tensor", "hyper", "sdpi")}
    base = LN2 - 2 * n * t * t
    assert logs["tensor"] == pytest.approx(base + (n - 1) * math.log(1.5), abs=1e-9)
    assert logs["hyper"] == pytest.approx(base + (n - 1) * LN2, abs=1e-9)
    assert logs["sdpi"] == pytest.approx(base + (n - 1) * LN2 * 2 / 3, abs=1e-6)
    assert logs["tensor"] < logs["sdpi"] < logs["hyper"]


def test_general_route_matches_markov_on_chain():
    proc = HomogeneousChain(Dist.parse("1/3,2/3"), Kernel.binary_stay("1/3"))
    p = BoundParams(6, 0.3, 2.0)
    a = general_process_bound(proc, p).log_bound
    assert a >= markov_chain_bound(proc, p).log_bound - 1e-12


def test_routes_reject_unsupported_processes():
    with pytest.raises(UnsupportedProcess):
        markov_chain_bound(NonMarkovBinary(), BoundParams(4, 0.3), "tensor")
    with pytest.raises(UnsupportedProcess):
        markov_chain_bound(SSRW(), BoundParams(4, 0.3), "hyper")


def test_optimize_alpha_picks_grid_minimiser():
    proc = HomogeneousChain(Dist.uniform([0, 1]), Kernel.binary_flip(0.25))

    def fn(a):
        return markov_chain_bound(proc, BoundParams(30, 0.3, a))

    a, rep = optimize_alpha(fn)
    assert rep.extras["alpha_star"] == a
    assert all(rep.log_bound <= fn(b).log_bound + 1e-12 for b in ALPHA_GRID)


def test_mean_gap_covers_exact_gap():
    proc = HomogeneousChain(Dist.parse("0.9,0.1"), Kernel.binary_stay("0.8"))
    n = 8
    e = exact_tails(proc, n, NormalizedMean(), "product", [0.0])[0]
    for a in (2.0, 4.0, math.inf):
        log_H = exact_joint_hellinger(proc, n, a).value
        g = mean_gap_bound(BoundParams(n, 0.0, a), log_H)
        assert abs(e.joint_mean - e.product_mean) <= g.value


def test_mean_gap_degenerate_under_independence():
    g = mean_gap_bound(BoundParams(5, 0.0, 2.0), 0.0)
    assert g.degenerate and g.value == 0.0


def test_median_shift_on_subgaussian_tail():
    # h(r) = 2 exp(-r^2): r0 = sqrt(ln 4), integral sqrt(pi)
    ms = median_shift(lambda r: LN2 - r * r, C=2.0, c=1.0, p=2.0)
    assert ms.r0 == pytest.approx(math.sqrt(2 * LN2), rel=1e-10)
    assert ms.hbar == pytest.approx(math.sqrt(math.pi), rel=1e-8)
    assert ms.median_constants == (4.0, 0.25)
    assert ms.mean_constants[0] == pytest.approx(math.exp(math.pi))
    with pytest.raises(NoHalfPoint):
        median_shift(lambda r: -1.0 - r)


def test_median_concentration_trivial_below_shift():
    rep = median_concentration_bound(100, 0.01, 2.0)
    assert rep.log_bound == 0.0 and rep.centering == "median"
    r0 = math.sqrt((2 * LN2 + 2.0) / 200)
    rep = median_concentration_bound(100, 0.5, 2.0)
    assert rep.log_bound == pytest.approx(LN2 - 200 * (0.5 - r0) ** 2 + 2.0)


def test_report_serialisation():
    rep = mcdiarmid_dep_bound(BoundParams(4, 0.2, 2.0), 0.3)
    d = rep.to_dict()
    assert d["params"]["beta"] == 2.0 and d["log2_bound"] == pytest.approx(rep.log_bound / LN2)
    assert IndependentProduct(Dist.uniform([0, 1]), 3).describe()
