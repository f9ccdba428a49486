"""
Squeezing a potential onto the circle
=====================================

Replace the shell by a layer of half-width eps carrying B h_eps(p). As eps
shrinks, the layer eigenvalues do not approach those of the shell with the
same couplings. They approach the shell with renormalised couplings, which
come from exponentiating the jump across the layer.
"""

import numpy as np

from shellspec import Couplings, renormalize_forward
from shellspec.approximation import BOX, RAISED_COSINE, convergence_table, field_checks, richardson_limit
from shellspec.disk_oracle import disk_eigenvalues
from shellspec.geometry import ellipse

c = Couplings(1.0, 0.0, 0.0)
hat = renormalize_forward(c)
print("layer couplings       ", c)
print("renormalised couplings", hat)

naive = disk_eigenvalues(c)
target = disk_eigenvalues(hat)
print("\nshell with the same couplings:", ", ".join(f"{z:.6f}" for z, _ in naive))
print("shell with renormalised ones: ", ", ".join(f"{z:.6f}" for z, _ in target))

for prof in (BOX, RAISED_COSINE):
    table = convergence_table(1.0, 1.0, c, prof, max_channel=3)
    print(f"\n{prof.name} profile")
    print("   eps      channel  eigenvalue        error")
    for r in table:
        print(f"  {r.epsilon:7.0e}  {r.channel:+d}      {r.eigenvalue:.10f}  {r.abs_err:.2e}")
    # the error is linear in eps, so two points extrapolate well
    for n in sorted({r.channel for r in table}):
        part = [r for r in table if r.channel == n][-2:]
        limit = richardson_limit([r.epsilon for r in part], [r.eigenvalue for r in part])
        print(f"  channel {n:+d}: extrapolated {limit:.10f}, shell {part[0].oracle_limit:.10f}")

# a purely magnetic layer tends to the pairing with the shell current
res = field_checks(ellipse(1.5, 1.0))
print("\nmagnetic layer on an ellipse")
for e, a, b in zip(res.eps, res.errors_vector_potential, res.errors_magnetic_field):
    print(f"  eps {e:7.0e}  A error {a:.2e}  B error {b:.2e}")
print(f"  observed orders {res.order_vector_potential:.2f} and {res.order_magnetic_field:.2f}")
