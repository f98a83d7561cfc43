"""
Checking a bound by simulation
==============================

Exact enumeration stops being possible around n = 20.  Past that we
sample paths with a counter-based generator, so every number below is
reproducible from the seed alone.
"""
import math

from depbound.engine import ALPHA_GRID
from depbound.harness import NormalizedMean, TailQuery, empirical_tail, empirical_tails, exact_tail
from depbound.scenarios import binary_chain, binary_chain_bound

chain = binary_chain(0.25)

# small n: the interval should cover the exact value
q = TailQuery(chain, 12, 0.2)
est = empirical_tail(q, 100_000, seed=7)
print("exact %.5f   estimate %.5f   99%% CI [%.5f, %.5f]"
      % (exact_tail(q).prob, est.point, est.ci_low, est.ci_high))

# large n: compare with the bound
n = 200
ts = [0.3, 0.4, 0.5]
ests = empirical_tails(chain, n, NormalizedMean(), "product", ts, 200_000, seed=7)
for t, e in zip(ts, ests):
    best = min(binary_chain_bound(0.25, n, t, a).log_bound for a in ALPHA_GRID)
    print(f"t = {t}: CI upper {e.ci_high:.2e}, bound {math.exp(min(best, 0.0)):.2e}")
