"""Acceptance criteria, one test each, with a PASS/FAIL summary line per criterion."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from depbound.baselines import (
    binary_fan,
    binary_kontorovich,
    binary_marton,
    binary_median_ours,
    binary_ours_log,
    crossover_threshold,
)
from depbound.engine import (
    ALPHA_GRID,
    LN2,
    BoundParams,
    general_process_bound,
    markov_chain_bound,
    mcdiarmid_dep_bound,
)
from depbound.errors import PreconditionT, UnsupportedProcess
from depbound.harness import (
    AdjacentAgreement,
    NormalizedMean,
    TailQuery,
    empirical_tail,
    empirical_tails,
    exact_tail,
    exact_tails,
)
from depbound.kernels import (
    Kernel,
    apply_kernel,
    dobrushin_tv,
    dsbs_gamma_star,
    gamma_star_numeric,
    k_step,
)
from depbound.measures import Dist, DivergenceKind, divergence, hellinger_integral_exact, renyi_divergence
from depbound.processes import SSRW, HomogeneousChain, NonMarkovBinary
from depbound.scenarios import (
    binary_chain,
    binary_chain_bound,
    ssrw_dependence_lower_log2,
    ssrw_dependence_upper_log2,
    mcmc_bound,
    min_burnin,
    nonmarkov_bound,
    ssrw_bound,
    ssrw_kontorovich,
    ssrw_step_extreme,
    ssrw_tensor_log2,
)
from depbound.tensorize import (
    exact_joint_hellinger,
    tensor_lower_general,
    tensor_lower_markov,
    tensor_upper_general,
    tensor_upper_markov,
)

INF = math.inf
LOG2E = 1.0 / LN2
MC_SEED = 20240611
QUERY_SEED = 12345


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b))


def small_processes():
    procs = [(f"binary(lambda={lam})", binary_chain(lam)) for lam in (0.1, 0.25, 0.4)]
    return procs + [("ssrw", SSRW()), ("nonmarkov", NonMarkovBinary())]


def test_golden_values_of_two_state_example(criterion):
    t0 = time.perf_counter()
    nu, pi = Dist.parse("1/3,2/3"), Dist.parse("1/2,1/2")
    K1, K2 = Kernel.binary_stay("1/3"), Kernel.binary_stay("1/5")
    nuK, piK = apply_kernel(nu, K1), apply_kernel(pi, K1)
    h_after = hellinger_integral_exact(nuK, piK, 2)
    h_before = hellinger_integral_exact(nu, pi, 2)
    chi2 = DivergenceKind.chi2()
    chi_ratio = divergence(chi2, nuK, piK) / divergence(chi2, nu, pi)
    d0 = Dist.parse("1,0")
    ratio6 = renyi_divergence(apply_kernel(d0, K2), apply_kernel(pi, K2), 6) / renyi_divergence(d0, pi, 6)
    checks = {
        "push-forward (5/9, 4/9)": nuK.exact == (Fraction(5, 9), Fraction(4, 9)),
        "H2 after = 82/81": h_after == Fraction(82, 81),
        "H2 before = 10/9": h_before == Fraction(10, 9),
        "ratio = 41/45": h_after / h_before == Fraction(41, 45),
        "chi2 ratio = 1/9": rel_close(chi_ratio, 1 / 9, 1e-12),
        "eta_TV(K1) = 1/3": rel_close(dobrushin_tv(K1), 1 / 3, 1e-12),
        "eta_TV(K2) = 3/5": rel_close(dobrushin_tv(K2), 3 / 5, 1e-12),
        "order-6 ratio = 0.6138": abs(ratio6 - 0.6138) <= 1e-3,
    }
    elapsed = time.perf_counter() - t0
    bad = [k for k, v in checks.items() if not v]
    ok = not bad and elapsed < 1.0
    criterion(1, ok, f"{len(checks) - len(bad)}/{len(checks)} goldens match"
              + (f", failed: {bad}" if bad else "") + f", order-6 ratio {ratio6:.6f}",
              "1e-12 rel (ratio 1e-3)", elapsed, 1)
    assert ok, bad


def test_independent_case_recovers_mcdiarmid(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    # exponents 2 n t^2 span the range where the probability is a normal double
    for n in np.geomspace(1, 10 ** 6, 10).round().astype(int):
        for x in np.linspace(0.0, 700.0, 10):
            t = math.sqrt(x / (2.0 * n))
            rep = mcdiarmid_dep_bound(BoundParams(int(n), t, INF), 0.0)
            ref = 2.0 * math.exp(-2.0 * n * t * t)
            worst = max(worst, abs(math.exp(rep.log_bound) - ref) / ref)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1.0
    criterion(2, ok, f"max relative error {worst:.2e} over 100 (n, t) points", "1e-12 rel", elapsed, 1)
    assert ok


def test_tensorisation_sandwich(criterion):
    t0 = time.perf_counter()
    worst, count, fails = -INF, 0, []
    for name, proc in small_processes():
        for n in range(2, 13):
            for a in (1.5, 2.0, 4.0):
                exact = exact_joint_hellinger(proc, n, a).value
                if proc.is_markov:
                    lo, up = tensor_lower_markov(proc, n, a).value, tensor_upper_markov(proc, n, a).value
                else:
                    lo, up = tensor_lower_general(proc, n, a).value, tensor_upper_general(proc, n, a).value
                slack = max(lo - exact, exact - up)
                worst = max(worst, slack)
                count += 1
                if slack > 1e-10:
                    fails.append((name, n, a))
    elapsed = time.perf_counter() - t0
    ok = not fails and elapsed < 60
    criterion(3, ok, f"{count - len(fails)}/{count} cases with lower <= exact <= upper, "
              f"largest violation {worst:.2e}", "1e-10 in log", elapsed, 60)
    assert ok, fails[:5]


def test_random_walk_dependence_bracket(criterion):
    t0 = time.perf_counter()
    fails, count = [], 0
    for a in (1.5, 2.0, 4.0, INF):
        for n in range(3, 13):
            exact = exact_joint_hellinger(SSRW(), n, a).value
            exact2 = (exact if math.isinf(a) else exact / a) * LOG2E
            count += 1
            if not ssrw_dependence_lower_log2(n, a) - 1e-9 <= exact2 <= ssrw_dependence_upper_log2(n, a) + 1e-9:
                fails.append(("exact", a, n))
        total = 0.0
        for i in range(2, 201):
            v, _ = ssrw_step_extreme(i, a)
            total += (v if math.isinf(a) else v / a) * LOG2E
            count += 1
            if total > ssrw_dependence_upper_log2(i, a) + 1e-9:
                fails.append(("product", a, i))
    elapsed = time.perf_counter() - t0
    ok = not fails and elapsed < 30
    criterion(4, ok, f"{count - len(fails)}/{count} checks inside the bracket "
              "(exact n <= 12, per-step product n <= 200)", "1e-9 in log2", elapsed, 30)
    assert ok, fails[:5]


def _dominance_bounds(proc, n, t, a, c):
    params = BoundParams(n, t, a, c)
    reps = []
    if proc.is_markov:
        for route in ("tensor", "hyper", "sdpi"):
            try:
                reps.append(markov_chain_bound(proc, params, route))
            except UnsupportedProcess:
                pass
    else:
        reps.append(general_process_bound(proc, params))
        if c is None:
            reps.append(nonmarkov_bound(n, t, params.beta))
    return reps


def test_bounds_dominate_exact_tails(criterion):
    t0 = time.perf_counter()
    ts = np.linspace(0.025, 0.5, 20)
    checked = violations = 0
    detail = []
    for name, proc in small_processes():
        for n in (4, 8, 12):
            for f in (NormalizedMean(), AdjacentAgreement()):
                c = None if f.name == "normalized_mean" else f.certificate(n)
                tails = exact_tails(proc, n, f, "product", ts)
                for a in (1.5, 2.0, 4.0, INF):
                    for t, e in zip(ts, tails):
                        for rep in _dominance_bounds(proc, n, float(t), a, c):
                            if rep.trivial:
                                continue
                            checked += 1
                            if e.prob > math.exp(rep.log_bound) * (1 + 1e-12):
                                violations += 1
                                detail.append((name, n, f.name, a, float(t), rep.method))
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and checked > 0 and elapsed < 120
    criterion(5, ok, f"{violations} violations among {checked} non-trivial bounds", "0 violations",
              elapsed, 120)
    assert ok, detail[:5]


def test_random_walk_against_kontorovich(criterion):
    t0 = time.perf_counter()
    n = 1000
    t = math.sqrt(n)
    ours = ssrw_bound(n, t, INF).log_bound
    theirs = ssrw_kontorovich(n, t).log_bound
    elapsed = time.perf_counter() - t0
    ok = (ours <= -1e5 * (2 - LN2 / 2) and abs(theirs - (LN2 - 0.5)) <= 1e-12
          and theirs - ours >= 1e5 and elapsed < 1)
    criterion(6, ok, f"ours {ours:.6g} nats, Kontorovich {theirs:.6f} (ln2 - 1/2), gap {theirs - ours:.6g}",
              "gap >= 1e5 nats", elapsed, 1)
    assert ok


def test_crossovers_are_genuine(criterion):
    t0 = time.perf_counter()
    n = 10 ** 4
    fails, checked, skipped = [], 0, 0
    logs = {
        "ours-vs-kontorovich": lambda t, lam: (binary_ours_log(n, t, lam, INF),
                                               binary_kontorovich(n, t, lam).log_bound),
        "ours-vs-fan": lambda t, lam: (binary_ours_log(n, t, lam, INF), binary_fan(n, t, lam).log_bound),
        "ours-vs-marton": lambda t, lam: (binary_median_ours(n, t, lam).log_bound,
                                          binary_marton(n, t, lam).log_bound),
    }
    for pair, fn in logs.items():
        for lam in (0.1, 0.2, 0.3, 0.4):
            tbar = crossover_threshold(pair, n, INF, lam=lam).exact
            ours, base = fn(1.01 * tbar, lam)
            checked += 1
            if not ours < base:
                fails.append((pair, lam, "above"))
            try:
                ours, base = fn(0.5 * tbar, lam)
            except PreconditionT:
                skipped += 1
                continue
            checked += 1
            if not base < ours:
                fails.append((pair, lam, "below"))
    elapsed = time.perf_counter() - t0
    ok = not fails and elapsed < 5
    criterion(7, ok, f"{checked - len(fails)}/{checked} sides correct, {skipped} below-side checks "
              "undefined (under the blowing-up validity floor)", "strict", elapsed, 5)
    assert ok, fails


def _shifted(rep0, S):
    """Log bound as a function of t, from a report computed at t = 0.

    Every route has the form const - 2 t^2 / (beta S); only the constant
    needs the expensive per-step work.
    """
    beta = rep0.params.beta
    return lambda t: rep0.log_bound - 2.0 * t * t / (beta * S)


def _mc_scenarios(n):
    """(name, process, center, side, {method: t -> log bound}) for each simulated scenario."""
    lam = 0.25
    chain = binary_chain(lam)
    K = Kernel.binary_flip(lam)
    n0 = 5
    start = apply_kernel(Dist.point(0, [0, 1]), k_step(K, n0))
    burned = HomogeneousChain(start, K)
    S = 1.0 / n

    binary = {"closed_form(alpha opt)":
              lambda t: min(binary_chain_bound(lam, n, t, a).log_bound for a in ALPHA_GRID)}
    for a in (2.0, INF):
        for route in ("tensor", "hyper", "sdpi"):
            binary[f"{route}(alpha={a:g})"] = _shifted(markov_chain_bound(chain, BoundParams(n, 0.0, a), route), S)
    binary["kontorovich"] = lambda t: binary_kontorovich(n, t, lam).log_bound
    binary["fan"] = lambda t: binary_fan(n, t, lam).log_bound

    walk = {"closed_form(alpha opt)": lambda t: min(ssrw_bound(n, t, a).log_bound for a in ALPHA_GRID)}
    for a in (2.0, INF):
        L = ssrw_tensor_log2(n, a) * LN2
        rep0 = mcdiarmid_dep_bound(BoundParams(n, 0.0, a), L if math.isinf(a) else a * L)
        walk[f"tensor(alpha={a:g})"] = _shifted(rep0, S)

    nonmarkov = {"closed_form(beta opt)": lambda t: nonmarkov_bound(n, t).log_bound}

    mc_grid = (2.0, 4.0, 8.0, INF)
    mcmc = {
        "mcmc(alpha opt)": lambda t: min(mcmc_bound(Dist.point(0, [0, 1]), K, n0, n, t, a).log_bound
                                         for a in mc_grid),
        "mcmc_fan": lambda t: min(mcmc_bound(Dist.point(0, [0, 1]), K, n0, n, t, a).extras["fan_log_bound"]
                                  for a in mc_grid),
    }
    return [
        ("binary", chain, "product", "two", binary),
        ("ssrw", SSRW(), "product", "two", walk),
        ("nonmarkov", NonMarkovBinary(), "product", "two", nonmarkov),
        ("mcmc", burned, 0.5, "upper", mcmc),
    ]


def _t_for_target(fn, target, lo=0.0, hi=1.0):
    """Smallest t in [lo, hi] with fn(t) <= target (fn decreasing), or None."""
    if fn(hi) > target:
        return None
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if fn(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


# simulation resolves probabilities down to about 5e-6 at 10^6 paths;
# bounds are compared where they lie in this window
WINDOW = (1e-4, 0.5)


@pytest.mark.slow
def test_monte_carlo_consistency(criterion):
    t0 = time.perf_counter()
    samples = 10 ** 6
    checked = vacuous = unresolved = 0
    fails, notes = [], []
    task = 0
    for n in (100, 1000):
        for name, proc, center, side, methods in _mc_scenarios(n):
            ts = sorted({t for fn in methods.values() for v in (0.3, 1e-3)
                         if (t := _t_for_target(fn, math.log(v))) is not None})
            if not ts:
                ts = [0.1, 0.3, 0.5]
            ests = empirical_tails(proc, n, NormalizedMean(), center, ts, samples, MC_SEED,
                                   side=side, task_id=task)
            task += 1
            for t, est in zip(ts, ests):
                logs = {m: fn(t) for m, fn in methods.items()}
                nontrivial = {m: lb for m, lb in logs.items() if lb < 0}
                if not nontrivial:
                    vacuous += 1
                for m, lb in nontrivial.items():
                    if math.exp(lb) < WINDOW[0]:
                        unresolved += 1
                        continue
                    checked += 1
                    if not est.ci_high < math.exp(lb):
                        fails.append((name, n, t, m, est.ci_high, math.exp(lb)))
                tightest = min(logs.values())
                notes.append(f"{name} n={n} t={t:.4f}: hits {est.hits}, ci_high {est.ci_high:.2e}, "
                             f"smallest bound {math.exp(min(tightest, 0.0)):.2e}")
    part1 = not fails and checked > 0

    rng = np.random.default_rng(QUERY_SEED)
    contained = 0
    misses = []
    for k in range(50):
        which = int(rng.integers(0, 5))
        name, proc = small_processes()[which]
        n = int(rng.integers(4, 13))
        f = NormalizedMean() if rng.random() < 0.5 else AdjacentAgreement()
        t = float(rng.uniform(0.0, 0.4))
        q = TailQuery(proc, n, t, f)
        exact = exact_tail(q).prob
        est = empirical_tail(q, samples, seed=QUERY_SEED + k)
        if est.contains(exact):
            contained += 1
        else:
            misses.append((name, n, f.name, t, exact, est.ci_low, est.ci_high))
    part2 = contained >= 49
    elapsed = time.perf_counter() - t0
    ok = part1 and part2 and elapsed < 600
    criterion(8, ok, f"{checked - len(fails)}/{checked} bounds in [1e-4, 0.5] exceed the 99% CI upper limit, "
              f"{unresolved} non-trivial bounds below the window not resolvable, "
              f"{vacuous} (scenario, n, t) points with only trivial bounds; "
              f"{contained}/50 intervals contain the exact value",
              "99% Clopper-Pearson, >= 49/50", elapsed, 600)
    for line in notes:
        print("   ", line)
    assert ok, (fails[:5], misses)


def test_burn_in_grows_logarithmically(criterion):
    t0 = time.perf_counter()
    K = Kernel.binary_flip(0.25)
    nu = Dist.point(0, [0, 1])
    ns = np.array([10 ** 2, 10 ** 3, 10 ** 4])
    n0s = []
    for n in ns:
        # accuracy target: within a factor 1 + 1/n of the bound with no burn-in cost
        floor = mcmc_bound(Dist.uniform([0, 1]), K, 0, int(n), 0.6, INF).log_bound
        n0s.append(min_burnin(nu, K, int(n), 0.6, INF, floor + math.log1p(1.0 / n)))
    n0s = np.array(n0s, dtype=float)
    a, b = np.polyfit(np.log(ns), n0s, 1)
    resid = np.abs(a * np.log(ns) + b - n0s) / n0s
    elapsed = time.perf_counter() - t0
    ok = bool(np.all(resid < 0.25)) and a > 0
    criterion(9, ok, f"n0 = {n0s.astype(int).tolist()}, fit {a:.3f} log n + {b:.3f}, "
              f"max relative residual {resid.max():.3f}", "25%", elapsed)
    assert ok


def test_hypercontractive_exponent_cross_check(criterion):
    t0 = time.perf_counter()
    worst, fails = 0.0, []
    u = Dist.uniform([0, 1])
    for lam in (0.1, 0.25, 0.4):
        for a in (2.0, 3.0, 6.0):
            g = gamma_star_numeric(Kernel.binary_flip(lam), u, a, tol=1e-4)
            err = abs(g - dsbs_gamma_star(lam, a))
            worst = max(worst, err)
            if err > 1e-3:
                fails.append((lam, a, g))
    elapsed = time.perf_counter() - t0
    ok = not fails and elapsed < 60
    criterion(10, ok, f"bisection vs closed form, max error {worst:.2e} over 9 cases", "1e-3", elapsed, 60)
    assert ok, fails
