"""The Schwarzian tensor S^k_ij and S^0_ij of maps in C^n.

Shows the worked example (cayley, identity) at the origin, the vanishing
on Moebius maps, and the identities every tensor satisfies.
"""

import numpy as np

from schwarzian import (
    Composition,
    Coordinatewise,
    canonical_trace_residual,
    chain_rule_residual,
    moebius_from_matrix,
    one_d,
    pde_residual,
    roper_suffridge,
    schwarzian_tensor,
)

f = Coordinatewise((one_d("cayley"), one_d("identity")))
t = schwarzian_tensor(f, [0, 0])
print("f = (1/(1-z1), z2) at the origin")
for k in range(2):
    print(f"  S^{k + 1} =", np.round(t.upper[k].real, 6).tolist())
print("  S^0 =", np.round(t.zero.real, 6).tolist())
print("  trace sum_j S^j_ij:", canonical_trace_residual(t))

rng = np.random.default_rng(0)
A = np.eye(3) + 0.3 * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
M = moebius_from_matrix(A)
print("\nA random Moebius map has a vanishing tensor:")
print("  max |coefficient| at (0.1, 0.2i):", schwarzian_tensor(M, [0.1, 0.2j]).max_abs())

g = roper_suffridge(one_d("strip"), 3)
z = np.array([0.3, 0.2j, -0.4])
outer = moebius_from_matrix(np.eye(4) + 0.1 * np.ones((4, 4)))
print("\nRoper-Suffridge extension of the strip map, n = 3, at", z)
print("  chain rule residual with a Moebius map on the outside:", chain_rule_residual(g, outer, z))
diff = schwarzian_tensor(Composition(outer, g), z).upper - schwarzian_tensor(g, z).upper
print("  max |S(M o g) - S(g)|:", np.max(np.abs(diff)))
print("  residuals of the PDE system for u0, u1, u2, u3:", [f"{pde_residual(g, z, w):.1e}" for w in range(4)])
