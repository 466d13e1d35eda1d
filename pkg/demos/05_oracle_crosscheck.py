"""
Cross-checking closed forms against independent oracles
=======================================================

Every closed-form capacity is compared with a deterministic quadrature and
with Monte Carlo sampling from a counter-based generator. The sampling
results do not depend on how many threads draw them.
"""

import math

from ampcap import MediumParams, c_heterodyne_avg, c_holevo_avg, r_eff
from ampcap.oracle import RngSpec, mc_average_capacity, mutual_info_gaussian, quad_average_capacity

points = [
    MediumParams.from_power_per_mode(10, 0.5, 0.05, 1.0),
    MediumParams.from_power_per_mode(10, 1.5, 0.01, 10.0),
    MediumParams.from_power_per_mode(10, 3.0, 0.14, 0.1),
]

print(f"{'L/l_a':>6} {'l/L':>5} {'P/NP0':>6}  {'kind':<10} {'closed':>12} {'quadrature':>12} {'MC mean':>10} {'z':>6}")
for i, p in enumerate(points):
    for j, (kind, closed) in enumerate(
        (("heterodyne", c_heterodyne_avg(r_eff(p)).bits), ("holevo", c_holevo_avg(p).bits))
    ):
        quad = quad_average_capacity(kind, p).bits
        mc = mc_average_capacity(kind, p, 200_000, RngSpec(7, 2 * i + j), workers=4)
        z = (mc.mean - closed) / mc.std_error
        print(
            f"{p.length_ratio:6.2f} {p.mfp_ratio:5.2f} {p.power_per_mode:6.1f}  {kind:<10} "
            f"{closed:12.9f} {quad:12.9f} {mc.mean:10.6f} {z:6.2f}"
        )

# Thread count never changes a sampled result.
p = points[0]
one = mc_average_capacity("holevo", p, 300_000, RngSpec(7, 99), workers=1)
many = mc_average_capacity("holevo", p, 300_000, RngSpec(7, 99), workers=8)
print()
print("1 thread vs 8 threads identical:", one == many)

# The Gaussian channel behind all of this: sampling the log-likelihood ratio
# with the exact output marginal reproduces log2(1 + r).
print()
for r in (0.1, 1.0, 3.0, 10.0):
    est = mutual_info_gaussian(r, 500_000, RngSpec(3, int(r * 10)))
    print(f"r = {r:5.1f}: sampled {est.mean:.4f} +/- {est.std_error:.4f}, log2(1+r) = {math.log2(1 + r):.4f}")
