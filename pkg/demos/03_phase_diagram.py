"""
Where strong amplification pays off
===================================

At the laser threshold the capacity no longer depends on l/L. Comparing it
with the unamplified Holevo capacity splits the (l/L, P/NP0) plane in two:
below the separatrix, pumping all the way to threshold helps; above it, it
does not. For small powers the boundary follows a closed asymptote, and for
large powers it saturates near l/L = 3/(8e).
"""

import math

from ampcap.phase import SATURATION_MFP, saturation_mfp, separatrix_curve, small_power_asymptote

grid = [0.02, 0.03, 0.04, 0.05, 0.07, 0.1, 0.12, 0.13, 0.135, 0.2]
print(f"{'l/L':>6} {'P/NP0 root':>14} {'asymptote':>12} {'ratio':>7}  note")
for pt in separatrix_curve(grid):
    guess = small_power_asymptote(pt.mfp_ratio)
    if pt.solved:
        print(f"{pt.mfp_ratio:6.3f} {pt.power_per_mode:14.6e} {guess:12.4e} {pt.power_per_mode / guess:7.3f}  {pt.branch_info}")
    else:
        print(f"{pt.mfp_ratio:6.3f} {'':>14} {guess:12.4e} {'':>7}  {pt.branch_info}")

# The asymptote is accurate deep in the small-power corner and drifts by a
# few percent once it predicts P/NP0 around 1e-2.
print()
for top in (1e2, 1e4, 1e6):
    print(f"largest l/L with a crossing below P/NP0 = {top:.0e}: {saturation_mfp(top):.6f}")
print(f"3/(8e) = {SATURATION_MFP:.6f}  ({3 / (8 * math.e):.7f})")
