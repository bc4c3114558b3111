"""
Field enhancement at resonance
==============================

Driving the plate at the real part of a resonance builds an O(1/eps) standing
wave in the hole.  We scan the first peak, look at the mode shape, and read off
the far-field monopole.
"""
# %%
import numpy as np

from aperture_fp.fields import (Incidence, axial_profile, enhancement_spectrum, far_field_amplitude,
                                find_peaks, solve_system)
from aperture_fp.greens import Geometry, Truncation
from aperture_fp.resonance import ResonanceFunctions, find_resonance

eps = 0.02
geom, trunc = Geometry(eps), Truncation(n_max=0)
root = find_resonance("odd", 1, eps, ResonanceFunctions(eps)).k_numeric
print(f"first odd resonance {root.real:.6f}{root.imag:+.2e}j")

# %%
# A fine scan across the peak.  Its width is about twice |Im k|.
grid = np.linspace(root.real - 0.02, root.real + 0.02, 41)
rows = enhancement_spectrum(geom, trunc, Incidence(), grid, z_samples=5)
peak = find_peaks(rows)[0]
print(f"peak of |m1| at k = {peak:.4f}, max |m1| = {max(abs(r['m1']) for r in rows):.1f}")

# %%
# At the peak the hole holds half a wavelength: a cosine centred on mid-hole.
sol = solve_system(root.real, geom, Truncation())
z = np.linspace(0, 1, 11)
u = axial_profile(sol, geom, z)
scale = u[np.argmax(np.abs(u))]
for zz, v in zip(z, u / scale):
    print(f"z = {zz:.1f}  u/u_max = {v.real:+.4f}  cos(k(z - 1/2)) = {np.cos(root.real * (zz - 0.5)):+.4f}")

# %%
# Far away the hole radiates like a monopole of strength eps^2 m1, close to
# 2 pi / k at resonance.
amp = far_field_amplitude(sol)
print(f"eps^2 |m1| = {amp:.5f},  2 pi / k = {2 * np.pi / root.real:.5f}")
