import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from depbound.errors import ScheduleInvalid, UnsupportedProcess
from depbound.kernels import Kernel
from depbound.measures import Dist
from depbound.processes import HomogeneousChain, IndependentProduct, InhomogeneousChain, NonMarkovBinary
from depbound.tensorize import (
    HolderSchedule,
    exact_joint_hellinger,
    renyi_tensor_upper,
    tensor_lower_general,
    tensor_lower_markov,
    tensor_upper_general,
    tensor_upper_markov,
)

TOL = 1e-9


def simplex(m):
    return st.lists(st.floats(0.05, 1.0), min_size=m, max_size=m).map(lambda v: list(np.array(v) / sum(v)))


@st.composite
def chains(draw, m=3):
    init = Dist.from_probs(draw(simplex(m)))
    ks = [Kernel(range(m), [draw(simplex(m)) for _ in range(m)]) for _ in range(3)]
    return InhomogeneousChain(init, ks)


def test_independent_process_has_zero_dependence():
    proc = IndependentProduct(Dist.parse("0.2,0.3,0.5"), 4)
    for a in (2.0, math.inf):
        assert abs(exact_joint_hellinger(proc, 4, a).value) < 1e-12
        assert abs(tensor_upper_markov(proc, 4, a).value) < 1e-12


def test_deterministic_chain_hits_upper_bound():
    proc = HomogeneousChain(Dist.uniform([0, 1]), Kernel.identity([0, 1]))
    n = 5
    # joint law is uniform on two constant paths, the product is uniform on 32
    assert exact_joint_hellinger(proc, n, math.inf).value == pytest.approx((n - 1) * math.log(2))
    assert tensor_upper_markov(proc, n, math.inf).value == pytest.approx((n - 1) * math.log(2))


@given(chains(), st.sampled_from([1.5, 2.0, 3.0, math.inf]))
def test_sandwich_random_chains(proc, a):
    n = 4
    exact = exact_joint_hellinger(proc, n, a).value
    assert tensor_lower_markov(proc, n, a).value <= exact + TOL
    assert exact <= tensor_upper_markov(proc, n, a).value + TOL


@given(chains(), st.floats(1.2, 4.0))
def test_geometric_schedules_bracket(proc, a):
    n = 4
    exact = exact_joint_hellinger(proc, n, a).value
    assert exact <= tensor_upper_markov(proc, n, a, HolderSchedule.geometric(n)).value + TOL
    assert tensor_lower_markov(proc, n, a, HolderSchedule.geometric_lower(n)).value <= exact + TOL


@given(chains(), st.floats(1.2, 4.0))
def test_renyi_form_agrees(proc, a):
    n = 4
    sched = HolderSchedule.geometric(n)
    up = tensor_upper_markov(proc, n, a, sched).value
    assert renyi_tensor_upper(proc, n, a, sched) == pytest.approx(up / (a - 1), rel=1e-9, abs=1e-12)


def test_general_bounds_on_non_markov():
    proc = NonMarkovBinary()
    for n in (3, 6, 9):
        for a in (2.0, math.inf):
            exact = exact_joint_hellinger(proc, n, a).value
            assert tensor_lower_general(proc, n, a).value <= exact + TOL
            assert exact <= tensor_upper_general(proc, n, a).value + TOL


def test_general_matches_markov_upper_at_infinity():
    proc = HomogeneousChain(Dist.parse("1/3,2/3"), Kernel.binary_stay("1/3"))
    a = tensor_upper_general(proc, 5, math.inf).value
    b = tensor_upper_markov(proc, 5, math.inf).value
    assert a == pytest.approx(b, abs=1e-12)


def test_argmax_tie_breaks_to_smallest_state():
    proc = HomogeneousChain(Dist.uniform([0, 1]), Kernel.binary_flip(0.25))
    up = tensor_upper_markov(proc, 3, math.inf)
    assert up.argmax_states == [0, 0]


def test_schedule_validation():
    proc = HomogeneousChain(Dist.uniform([0, 1]), Kernel.binary_flip(0.25))
    with pytest.raises(ScheduleInvalid):
        tensor_upper_markov(proc, 3, 2.0, HolderSchedule.custom([1.5]))
    with pytest.raises(ScheduleInvalid):
        tensor_upper_markov(proc, 3, 2.0, HolderSchedule.custom([0.5, 0.5]))
    with pytest.raises(ScheduleInvalid):
        tensor_lower_markov(proc, 3, 2.0, HolderSchedule.custom([1.5, 1.5]))
    with pytest.raises(ScheduleInvalid):
        tensor_upper_markov(proc, 3, math.inf, HolderSchedule.geometric(3))


def test_markov_route_refuses_non_markov():
    with pytest.raises(UnsupportedProcess):
        tensor_upper_markov(NonMarkovBinary(), 3, 2.0)
