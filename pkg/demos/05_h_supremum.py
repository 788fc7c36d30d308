"""The auxiliary function h(x, y) = (1-x-y)^2 y / ((1-x)^3 (1-y)^2).

Along x = 1 - t, y = t/3 it tends to 4/27, but the slice x = 0 gives
h(0, y) = y, so the supremum over the triangle is 1.
"""

from schwarzian import h_function, optimize_h

for t in (1e-1, 1e-2, 1e-3):
    print(f"h(1-t, t/3) at t={t:g}: {float(h_function(1 - t, t / 3)):.6f}")
for y in (0.5, 0.9, 0.99):
    print(f"h(0, {y}) = {float(h_function(0, y)):.6f}")

rep = optimize_h(400)
print(f"\ngrid + refinement supremum {rep.sup_estimate:.4f} at (x, y) = ({rep.argmax[0]:.3f}, {rep.argmax[1]:.4f})")
print(f"claimed value 4/27 = {rep.claimed:.6f}; discrepancy flagged: {rep.discrepancy}")
