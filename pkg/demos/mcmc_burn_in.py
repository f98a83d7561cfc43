"""
Picking a burn-in
=================

Start a flip-1/4 chain in state 0 and discard the first n0 steps.  The
price of starting away from stationarity is a constant C(n0) that decays
geometrically, so the burn-in needed to reach a fixed relative accuracy
only grows like log n.
"""
import math

from depbound.kernels import Kernel
from depbound.measures import Dist
from depbound.scenarios import burnin_constant, mcmc_bound, min_burnin

K = Kernel.binary_flip(0.25)
pi = Dist.uniform([0, 1])
start = Dist.point(0, [0, 1])

for n0 in (0, 2, 4, 8, 16):
    print(f"n0 = {n0:2d}   C = {burnin_constant(start, K, pi, n0, math.inf):.3e}")

print()
t = 0.6
for n in (100, 1000, 10_000):
    floor = mcmc_bound(pi, K, 0, n, t, math.inf).log_bound
    n0 = min_burnin(start, K, n, t, math.inf, floor + math.log1p(1 / n))
    print(f"n = {n:6d}   minimal burn-in {n0:3d}   (log n = {math.log(n):.2f})")
