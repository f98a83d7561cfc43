"""
How much does one step of a two-state kernel shrink a divergence?
==================================================================

Push a biased coin through a "stay with probability 1/3" kernel and
compare the Hellinger integral before and after.  Then look at a case
where the Rényi divergence shrinks less than the Dobrushin coefficient
would suggest.
"""
from depbound.kernels import Kernel, apply_kernel, dobrushin_tv
from depbound.measures import Dist, DivergenceKind, divergence, hellinger_integral_exact, renyi_divergence

nu = Dist.parse("1/3,2/3")
pi = Dist.uniform([0, 1])
K1 = Kernel.binary_stay("1/3")

# exact rational arithmetic all the way through
nuK = apply_kernel(nu, K1)
print("nu K1          =", [str(p) for p in nuK.exact])

before = hellinger_integral_exact(nu, pi, 2)
after = hellinger_integral_exact(nuK, apply_kernel(pi, K1), 2)
print("H_2 before     =", before)
print("H_2 after      =", after)
print("ratio          =", after / before)

chi2 = DivergenceKind.chi2()
print("chi^2 ratio    =", divergence(chi2, nuK, pi) / divergence(chi2, nu, pi))
print("Dobrushin(K1)  =", dobrushin_tv(K1))

# A stickier kernel: stay with probability 1/5
K2 = Kernel.binary_stay("1/5")
d0 = Dist.point(0, [0, 1])
ratio = renyi_divergence(apply_kernel(d0, K2), apply_kernel(pi, K2), 6) / renyi_divergence(d0, pi, 6)
print()
print("order-6 Renyi ratio through K2 = %.4f" % ratio)
print("Dobrushin(K2)                  = %.4f" % dobrushin_tv(K2))
print("the ratio is larger, so the TV coefficient does not bound Renyi contraction")
