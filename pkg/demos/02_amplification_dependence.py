"""
Capacity versus amount of amplification
=======================================

Pumping the waveguide raises the transmitted signal but also adds
spontaneous-emission noise. Sweeping L/l_a from zero up to the laser
threshold at pi shows that heterodyne detection always profits, while the
Holevo capacity first drops before it recovers. Both meet the same limiting
value at threshold, which depends only on the power per mode.
"""

import math

import numpy as np

from ampcap import MediumParams, c_heterodyne_avg, c_holevo_avg, c_holevo_noamp, c_infinity, diffusion_averages, r_eff
from ampcap.capacity import holevo_initial_decrease_term

power_per_mode = 1.0
c_inf = c_infinity(power_per_mode).bits
print(f"capacity at threshold for P/NP0 = {power_per_mode}: {c_inf:.6f} bits")

for mfp_ratio in (0.05, 0.14):
    base = MediumParams.from_power_per_mode(10, 0.0, mfp_ratio, power_per_mode)
    c_h0 = c_holevo_noamp(diffusion_averages(base).tau_bar, base.power_per_p0).bits
    print()
    print(f"l/L = {mfp_ratio}   (no gain: C_H = {c_h0:.6f}, C = {c_heterodyne_avg(r_eff(base)).bits:.6f})")
    print(f"{'L/l_a':>8} {'C':>10} {'C_H':>10}")
    for lam in np.linspace(0.25, math.pi - 1e-4, 13):
        p = base.with_length_ratio(float(lam))
        print(f"{lam:8.4f} {c_heterodyne_avg(r_eff(p)).bits:10.6f} {c_holevo_avg(p).bits:10.6f}")

# Where does the Holevo dip bottom out?
base = MediumParams.from_power_per_mode(10, 0.0, 0.05, power_per_mode)
lams = np.linspace(0.01, math.pi - 1e-3, 600)
holevo = [c_holevo_avg(base.with_length_ratio(float(x))).bits for x in lams]
i = int(np.argmin(holevo))
print()
print(f"l/L = 0.05: lowest C_H = {holevo[i]:.5f} bits at L/l_a = {lams[i]:.3f}")

# For weak gain the drop is often summarised as (4 l L^2 / 3 l_a^2) log2(pi l_a / L).
# That is a leading-log estimate; the exact drop approaches it only slowly.
c0 = c_holevo_noamp(diffusion_averages(base).tau_bar, base.power_per_p0, abs_tol=1e-12).bits
print()
print(f"{'L/l_a':>8} {'exact drop':>12} {'estimate':>12} {'ratio':>7}")
for lam in (0.1, 0.05, 1e-2, 1e-3):
    p = base.with_length_ratio(lam)
    exact = c0 - c_holevo_avg(p).bits
    est = holevo_initial_decrease_term(p)
    print(f"{lam:8.0e} {exact:12.4e} {est:12.4e} {exact / est:7.3f}")
