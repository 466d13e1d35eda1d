"""
A disordered lattice waveguide with gain
========================================

The closed forms rest on two microscopic facts: transmitted intensities of a
diffusive sample follow an exponential law, and gain makes the scattering
matrix super-unitary, so every output mode picks up extra noise. A
tight-binding strip with on-site disorder and a uniform imaginary potential
lets us look at both directly.
"""

import numpy as np

from ampcap.capacity import c_heterodyne_avg
from ampcap.wgsim import LatticeSpec, calibrate_mfp, run_ensemble, scattering_matrix, snr_instances

# First find the transport mean free path from a length sweep without gain.
base = LatticeSpec(width=10, length=50, disorder_strength=1.0)
fit = calibrate_mfp(base, (50, 100, 200), n_samples=200)
print(f"mean free path {fit.mfp:.2f} sites (fit residual {fit.residual:.3f})")

# A sample about eight mean free paths long sits in the diffusive window.
length = int(round(8 * fit.mfp))
spec = base.replace(length=length)
print(f"sample length {length} sites, l/L = {fit.mfp / length:.3f}, {spec.n_modes} modes")

passive = run_ensemble(spec, 1000)
ks, p_value = passive.ks_exponential()
print()
print("no gain")
print(f"  max |S S^+ - 1|      {passive.unitarity_max_violation:.1e}")
print(f"  mean tau             {passive.tau_bar_hat:.5f}")
print(f"  KS vs exponential    D = {ks:.4f}, p = {p_value:.3f}")

# Histogram of tau / <tau> against the exponential law
x = passive.tau_samples / passive.tau_bar_hat
counts, edges = np.histogram(x, bins=[0, 0.5, 1, 1.5, 2, 3, 4, np.inf])
expected = len(x) * (np.exp(-edges[:-1]) - np.exp(-edges[1:]))
print("  tau/<tau> bin     counts   exponential")
for lo, hi, c, e in zip(edges[:-1], edges[1:], counts, expected):
    print(f"  [{lo:3.1f}, {hi:3.1f})  {c:8d}  {e:11.1f}")

# Switch on gain. The noise weight sigma grows above one and S S^+ - 1 stays
# positive semidefinite.
print()
print(f"{'gain':>6} {'sigma':>8} {'+/-':>7} {'min eig':>10} {'<log2(1+R)>':>12} {'closed form':>12}")
for gain in (0.0, 0.001, 0.002):
    st = run_ensemble(spec.replace(gain=gain), 500)
    emp = float(np.mean(np.log2(1 + snr_instances(st, 10.0))))
    ref = c_heterodyne_avg(10.0 * st.tau_bar_hat / st.sigma_bar_hat).bits
    print(
        f"{gain:6.3f} {st.sigma_bar_hat:8.4f} {st.stderr(st.sigma_samples):7.4f} "
        f"{st.min_eig_ssdagger:10.2e} {emp:12.5f} {ref:12.5f}"
    )

s = scattering_matrix(spec.replace(gain=0.002), 0)
print()
print("eigenvalues of S S^+ - 1 for one realisation with gain:")
print(np.array2string(s.excess_eigenvalues(), precision=3))
