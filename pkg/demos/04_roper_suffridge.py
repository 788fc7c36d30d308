"""Roper-Suffridge extensions: restricted axis versus the true maximum.

For v = (v1, 0, ..., 0) the norm factors as a one-variable prefactor times
h(x, y) with x = |z1|^2 and y = |z'|^2.  That candidate is compared with the
generic maximization over all Bergman-unit v, and the domain supremum is
set against the constant 2/(3 sqrt(3(n+1))).
"""

import numpy as np

from schwarzian import GridSpec, domain_sup, one_d, pointwise_norm, roper_suffridge, rs_closed_form, theorem2_constant

n = 2
f = roper_suffridge(one_d("strip"), n)
print("strip base, n = 2")
print("   point            restricted   generic")
for z in ([0.0, 0.5], [0.5, 0.5], [0.9, 0.3], [0.3j, 0.6]):
    rep = pointwise_norm(f, z)
    print(f"   {np.round(z, 2)!s:16} {rs_closed_form(f.base, z, n).value:.5f}      {rep.value:.5f}")

sup = domain_sup(f, grid=GridSpec(resolution=3, phases=3), rays=("z2", "hpath"), probes=512)
print(f"\ndomain sup estimate {sup.sup:.4f} at {np.round(sup.witness_z, 3)} ({sup.witness.source})")
print(f"constant 2/(3 sqrt(3(n+1))) = {theorem2_constant(n):.4f}")
