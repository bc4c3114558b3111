"""
Low-frequency limit and the end correction
==========================================

At small k the pressure in the hole is close to linear in z.  The hole
behaves as if slightly longer than the plate: each face adds pi/|alpha| hole
radii, the classical flanged-pipe end correction.
"""
# %%
import numpy as np

from aperture_fp.fields import quasi_static
from aperture_fp.greens import Geometry, Truncation
from aperture_fp.operators import ALPHA_REFERENCE

k = 0.05
z = np.linspace(0, 1, 6)
for eps in (0.025, 0.0125):
    qs = quasi_static(k, Geometry(eps), Truncation())
    law = 1 + (2 * z - 1) / (1 + 2 * np.pi / abs(ALPHA_REFERENCE) * eps)
    u = np.array([qs.profile(t) for t in z])
    print(f"eps = {eps}")
    for zz, uu, ll in zip(z, u, law):
        print(f"  z = {zz:.1f}  u0 = {uu.real:.5f}  end-corrected line {ll:.5f}  2z = {2 * zz:.1f}")
    print(f"  axial velocity at mid-hole times k/2: {abs(qs.p3 * k / 2):.4f}")

# %%
# The gap to 2z therefore shrinks linearly with eps, not with k eps.
