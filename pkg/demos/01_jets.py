"""Truncated Taylor jets: the arithmetic under every Schwarzian computation.

A Jet3 holds the Taylor coefficients of a function of n complex variables
through total degree 3.  Products, quotients and analytic functions of jets
give exact derivatives, with no finite-difference step to tune.
"""

import numpy as np

from schwarzian import extract_derivatives, jet_analytic, seed_variables

z1, z2 = seed_variables([0.3 + 0.1j, -0.2j])
u = jet_analytic(1 + z1 * z2, "log") / (1 - z1)
value, grad, hess, third = extract_derivatives(u)

print("u = log(1 + z1 z2) / (1 - z1) at (0.3+0.1i, -0.2i)")
print("  value       ", np.round(value, 6))
print("  gradient    ", np.round(grad, 6))
print("  Hessian     ", np.round(hess, 6).tolist())
print("  d3u/dz1^3   ", np.round(third[0, 0, 0], 6))

# a central difference for comparison: the jet needs no step size
h = 1e-5
f = lambda a, b: np.log(1 + a * b) / (1 - a)
a0, b0 = 0.3 + 0.1j, -0.2j
fd = (f(a0 + h, b0) - f(a0 - h, b0)) / (2 * h)
print(f"  du/dz1 by central difference {fd:.10f}, by jet {grad[0]:.10f}")

# branches are explicit: sqrt of (1-z)^-2 on the branch through 1 is 1/(1-z)
(z,) = seed_variables([0.0])
root = jet_analytic((1 - z) * (1 - z), "pow", alpha=-0.5, branch=1.0)
print("sqrt((1-z)^-2) at 0 has Taylor coefficients", [root.coeff((k,)).real for k in range(4)])
