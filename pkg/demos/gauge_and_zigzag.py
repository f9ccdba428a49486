"""
Two special regimes: an anomalous magnetic term and the confining shell
=======================================================================

A constant normal term omega can be gauged away. The reduced couplings are
a multiple X of the original ones and come from a quadratic, so there are
two roots with the same spectrum.

At d = -4 the shell decouples inside from outside. The lambda = 2 shell
gives zig-zag conditions, and the interior spectrum sits at
sqrt(m^2 + j_{n,k}^2 / R^2), embedded in the continuum.
"""

import numpy as np

from shellspec import Couplings, classify
from shellspec.couplings import gauge_reductions
from shellspec.disk_oracle import antiholomorphic_kernel_check, zigzag_spectrum
from shellspec.geometry import circle
from shellspec.shell_operator import ShellDiscretization, eigenvalue_scan

c = Couplings(1.0, 0.0, 0.0, 1.0)
print("couplings", c, "hints:", ", ".join(classify(c).hints))
disk = ShellDiscretization(circle(1.0), 128)
for red in gauge_reductions(c):
    zs = [e.z for e in eigenvalue_scan(disk, red.reduced, 1.0, grid_size=120)]
    print(f"  X = {red.X:+.6f}  z = {red.z:.6f}  |z| = {abs(red.z):.15f}  spectrum {zs}")

zig = Couplings(0.0, 0.0, 2.0)
report = classify(zig)
print("\ncouplings", zig, "confining", report.confining, "zigzag", report.zigzag)
print("  interior eigenvalues on the unit disk, m = 1")
for value, mult, n, k in zigzag_spectrum(1.0, 1.0, 8):
    print(f"  {value:.10f}  multiplicity {mult}  from j_{n},{k} = {np.sqrt(value**2 - 1):.10f}")

# the other half of the zig-zag problem: an infinite-dimensional kernel
print("  antiholomorphic zero modes, residual of the boundary condition")
for k in (0, 1, 5, 10):
    print(f"    conj(z)^{k}: {antiholomorphic_kernel_check(1.0, k):.1e}")
