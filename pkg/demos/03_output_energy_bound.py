"""
Bounding the output energy
==========================

The smallest x0'Px0 with Vdot <= -z'z on the data bounds the energy
int z'z dt released from x0. The exact answer is x0' W x0 with W the
observability gramian.
"""

import numpy as np

from trajcert import (
    LtiModel,
    build_data_matrices,
    differentiate,
    energy_bound,
    max_output_energy_sim,
    observability_gramian,
    simulate,
)

model = LtiModel([[0.0, 1.0], [-4.0, -2.0]], C=[[1.0, 0.0]])
x0 = np.array([2.0, 2.0])
traj = simulate(model, x0, T=5.0, dt=0.1)

W = observability_gramian(model.A, model.C)
print("gramian value x0'Wx0 =", x0 @ W @ x0)
print("simulated energy     =", max_output_energy_sim(model, x0, T=30.0, dt=1e-3))

# dt = 0.1 is coarse; the derivative scheme matters
for scheme in ("forward", "central"):
    res = energy_bound(build_data_matrices(differentiate(traj, scheme)), x0)
    print(f"{scheme:8s} bound = {res.bound:.4f}")

res = energy_bound(build_data_matrices(differentiate(traj).with_exact_derivatives(model)), x0)
print("exact    bound =", res.bound)
print("P =\n", res.P)
