"""
Heterodyne capacity of a speckled channel
=========================================

A single speckle spot carries a transmitted intensity that fluctuates from
one disorder realisation to the next with an exponential law. Averaging
log2(1 + R) over that law gives a capacity C that only depends on the mean
signal-to-noise ratio R_eff. Here we tabulate C next to the naive value
C0 = log2(1 + R_eff), which ignores the fluctuations, and check both limits.
"""

import math

import numpy as np

from ampcap import c0_reference, c_heterodyne_avg
from ampcap.oracle import RngSpec, mc_average_capacity, quad_average_moments
from ampcap.medium import MediumParams
from ampcap.specfun import EULER_GAMMA

# a log grid of effective signal-to-noise ratios
grid = np.logspace(-3, 4, 15)

print(f"{'R_eff':>10} {'C':>12} {'C0':>12} {'C0 - C':>10}")
for r in grid:
    c = c_heterodyne_avg(r).bits
    c0 = c0_reference(r).bits
    print(f"{r:10.3e} {c:12.6f} {c0:12.6f} {c0 - c:10.6f}")

# Fluctuations always cost capacity. For weak signals both curves follow
# R/ln 2; for strong ones the loss saturates at gamma/ln 2 bits.
print()
print("small R:  C / (R/ln2) at R = 1e-4  =", c_heterodyne_avg(1e-4).bits / (1e-4 / math.log(2)))
print("large R:  C0 - C at R = 1e6        =", c0_reference(1e6).bits - c_heterodyne_avg(1e6).bits)
print("          gamma / ln 2             =", EULER_GAMMA / math.log(2))

# The closed form can be checked two independent ways: adaptive quadrature of
# the exponential average, and plain sampling of the transmitted intensity.
r = 1.0
quad = quad_average_moments("heterodyne", r, 1.0, abs_tol=1e-12)
# no gain and l/L = 0.05 with P/NP0 = 15 gives R_eff = (4/3)(0.05)(15) = 1
p = MediumParams.from_power_per_mode(10, 0.0, 0.05, 15.0)
mc = mc_average_capacity("heterodyne", p, 200_000, RngSpec(master_seed=1))
print()
print(f"R_eff = 1: closed form {c_heterodyne_avg(r).bits:.10f}")
print(f"           quadrature  {quad.bits:.10f}  (error bound {quad.err_estimate:.1e})")
print(f"           sampling    {mc.mean:.5f} +/- {mc.std_error:.5f}")
