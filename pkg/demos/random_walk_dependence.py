"""
A random walk is about as dependent as it gets
==============================================

Partial sums of fair coin flips never forget where they started, so the
joint law sits far from the product of its marginals.  The dependence
term grows like n^2, and for the walk the bounded-difference bound with
a contraction coefficient is much sharper.
"""
import math

from depbound.engine import LN2
from depbound.processes import SSRW
from depbound.scenarios import (
    ssrw_dependence_lower_log2,
    ssrw_dependence_upper_log2,
    ssrw_bound,
    ssrw_kontorovich,
    ssrw_tensor_log2,
)
from depbound.tensorize import exact_joint_hellinger

alpha = 2.0
print("log2 of H^(1/alpha)(joint || product), alpha = 2")
print(f"{'n':>4} {'lower':>8} {'exact':>8} {'per-step':>9} {'upper':>8}")
for n in (4, 8, 12):
    exact = exact_joint_hellinger(SSRW(), n, alpha).value / alpha / LN2
    print(f"{n:4d} {ssrw_dependence_lower_log2(n, alpha):8.3f} {exact:8.3f} "
          f"{ssrw_tensor_log2(n, alpha):9.3f} {ssrw_dependence_upper_log2(n, alpha):8.3f}")

n = 1000
t = math.sqrt(n)
print()
print(f"n = {n}, t = sqrt(n)")
print("  ours        :", ssrw_bound(n, t, math.inf).log_bound, "nats")
print("  Kontorovich :", ssrw_kontorovich(n, t).log_bound, "nats")
