"""Norm of the Schwarzian of coordinatewise convex maps of the polydisk.

The bound sqrt(8(n+3)(n-1))/(n+1) comes from a Cauchy-Schwarz step.  This
demo follows the extremal family (1/(1-z_i)) along the real diagonal and
compares the true pointwise norm with the Cauchy-Schwarz quantity and with
the bound.  The Cauchy-Schwarz quantity reaches the bound, the norm does not.
"""

from schwarzian import Coordinatewise, cs_bound, one_d, pointwise_norm, theorem1_bound

for n in (2, 3):
    f = Coordinatewise((one_d("cayley"),) * n)
    bound = theorem1_bound(n)
    print(f"n = {n}, bound {bound:.4f}")
    print("   t          norm     cs_bound   norm/bound")
    for m in (1, 2, 3, 5, 7):
        t = 1 - 10.0**-m
        z = [t] * n
        value = pointwise_norm(f, z).value
        print(f"   1-1e-{m}   {value:.5f}  {cs_bound(f, z).cs_bound:.5f}    {value / bound:.4f}")
    print()
