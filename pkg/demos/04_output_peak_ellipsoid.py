"""
Output peak through an invariant ellipsoid
==========================================

An LP finds P with x0 inside {x'Px <= 1}, V non-increasing on the data, and
z'z <= x'Px / lambda. Then |z(t)| <= 1/sqrt(lambda) for all t.
"""

import numpy as np

from trajcert import (
    PEAK_SDP_REFERENCE_BOUND,
    LtiModel,
    build_data_matrices,
    differentiate,
    ellipsoid_invariance_check,
    peak_bound,
    simulate,
)
from trajcert.cli import ellipse_points

model = LtiModel([[0.0, 1.0], [-4.0, -2.0]], C=[[1.0, 0.0]])
x0 = np.array([3.0, 3.0])
traj = simulate(model, x0, T=5.0, dt=0.1)

res = peak_bound(build_data_matrices(differentiate(traj, "central")), x0)
print(f"learned bound {res.bound:.4f}   SDP reference {PEAK_SDP_REFERENCE_BOUND}")
print("observed peak along the trajectory:", np.abs(traj.outputs).max())

# 100 fresh starts on the boundary; none should leave the ellipsoid
rep = ellipsoid_invariance_check(model, res.P, samples=100, T=10.0, dt=0.01)
print(f"max x'Px = {rep.max_level:.8f}, max |z| = {rep.max_output_norm:.4f}, violations = {rep.violations}")

# boundary points, ready for any plotting tool
pts = ellipse_points(res.P)
print(pts.shape, "boundary points, widest |x1| =", np.abs(pts[:, 0]).max())
