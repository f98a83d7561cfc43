import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from depbound.errors import AbsoluteContinuityViolation
from depbound.measures import (
    Dist,
    DivergenceKind,
    LogValue,
    divergence,
    hellinger_integral,
    hellinger_integral_exact,
    kl_divergence,
    log_hellinger,
    parse_prob,
    renyi_divergence,
)


def probs(m):
    return st.lists(st.floats(0.01, 1.0), min_size=m, max_size=m).map(lambda v: np.array(v) / sum(v))


def test_parse_prob_keeps_rationals_exact():
    assert parse_prob("1/3") == Fraction(1, 3)
    assert parse_prob("0.25") == Fraction(1, 4)
    assert isinstance(parse_prob(0.3), float)


def test_logvalue_arithmetic():
    a, b = LogValue.from_linear(2.0), LogValue.from_linear(3.0)
    assert math.isclose((a * b).exp(), 6.0)
    assert math.isclose((a + b).exp(), 5.0)
    assert math.isclose((a / b).exp(), 2 / 3)
    assert LogValue.from_linear(0.0).value == -math.inf
    with pytest.raises(ValueError):
        LogValue.from_linear(-1)


def test_dist_rejects_bad_input():
    with pytest.raises(ValueError):
        Dist.parse("1/2,1/3")
    with pytest.raises(ValueError):
        Dist.from_probs([0.5, -0.1, 0.6])


def test_hellinger_golden_values(half):
    nu = Dist.parse("1/3,2/3")
    assert hellinger_integral_exact(nu, half, 2) == Fraction(10, 9)
    assert hellinger_integral_exact(Dist.parse("5/9,4/9"), half, 2) == Fraction(82, 81)
    assert math.isclose(hellinger_integral(nu, half, 2).exp(), 10 / 9, rel_tol=1e-14)


def test_hellinger_walk_step():
    nu = Dist.from_probs(["1/2", "1/2"], [0, 2])
    mu = Dist.from_probs(["1/4", "1/2", "1/4"], [-2, 0, 2])
    assert hellinger_integral_exact(nu, mu, 2) == Fraction(3, 2)
    assert math.isclose(hellinger_integral(nu, mu, 2).exp(), 1.5, rel_tol=1e-14)


def test_absolute_continuity_violation():
    a, b = Dist.parse("1,0"), Dist.parse("0,1")
    with pytest.raises(AbsoluteContinuityViolation):
        hellinger_integral(a, b, 2.0)
    assert renyi_divergence(a, b, 3.0) == math.inf


def test_point_mass_vs_uniform_is_log2(half):
    d0 = Dist.parse("1,0")
    for a in (0.5, 1.0, 2.0, 6.0, math.inf):
        assert math.isclose(renyi_divergence(d0, half, a), math.log(2), rel_tol=1e-12)


def test_phi_divergences(half):
    nu = Dist.parse("1/3,2/3")
    assert math.isclose(divergence(DivergenceKind.tv(), nu, half), 1 / 6)
    assert math.isclose(divergence(DivergenceKind.chi2(), nu, half), 1 / 9, rel_tol=1e-12)
    kl = 1 / 3 * math.log(2 / 3) + 2 / 3 * math.log(4 / 3)
    assert math.isclose(divergence(DivergenceKind.kl(), nu, half), kl, rel_tol=1e-12)


def test_tabulated_phi_matches_tv(half):
    xs = np.linspace(0, 4, 401)
    kind = DivergenceKind.tabulated(xs, 0.5 * np.abs(xs - 1))
    nu = Dist.parse("1/3,2/3")
    assert math.isclose(divergence(kind, nu, half), 1 / 6, rel_tol=1e-9)
    with pytest.raises(ValueError):
        DivergenceKind.tabulated([0, 1, 2], [0, 1, 0])


@given(probs(4), probs(4))
def test_renyi_monotone_in_order(p, q):
    nu, mu = Dist.from_probs(p), Dist.from_probs(q)
    vals = [renyi_divergence(nu, mu, a) for a in (0.5, 1.0, 1.5, 2.0, 4.0, math.inf)]
    assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))


@given(probs(3), probs(3), st.floats(1.05, 8.0))
def test_hellinger_at_least_one(p, q, a):
    assert log_hellinger(Dist.from_probs(p), Dist.from_probs(q), a) >= -1e-12


@given(probs(5))
def test_identity_case(p):
    d = Dist.from_probs(p)
    for a in (1.5, 3.0, math.inf):
        assert abs(log_hellinger(d, d, a)) < 1e-12
    assert kl_divergence(d, d) == 0.0


@given(probs(3), probs(3))
def test_renyi_two_matches_chi2(p, q):
    nu, mu = Dist.from_probs(p), Dist.from_probs(q)
    chi2 = divergence(DivergenceKind.chi2(), nu, mu)
    assert math.isclose(renyi_divergence(nu, mu, 2.0), math.log1p(chi2), rel_tol=1e-9, abs_tol=1e-12)


def test_json_round_trip():
    d = Dist.from_probs(["1/3", "2/3"], [-1, 1])
    e = Dist.from_json(d.to_json())
    assert e.exact == d.exact and e.states == d.states
