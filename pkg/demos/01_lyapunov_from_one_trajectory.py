"""
Learning a Lyapunov function from one trajectory
=================================================

Simulate a stable second-order system once, differentiate the samples, and
ask an LP for a quadratic V(x) = x'Px that is positive and decreasing at
every recorded point.
"""

import numpy as np

from trajcert import LtiModel, build_data_matrices, differentiate, learn_lyapunov, simulate

model = LtiModel([[0.0, 1.0], [-1.0, -3.0]])
traj = simulate(model, [2.0, 2.0], T=1.0, dt=0.01)
print(traj.num_samples, "samples, dt =", traj.dt)

# forward differences, exactly as a measurement pipeline would do it
data = differentiate(traj)
cert = learn_lyapunov(build_data_matrices(data))
print("P =\n", cert.P)

# the model was never shown to the LP; use it now only to check the answer
S = cert.P @ model.A + model.A.T @ cert.P
print("eigenvalues of PA + A'P:", np.linalg.eigvalsh(S))

# start somewhere new on the level set V(x) = 1000 and watch V fall
rng = np.random.default_rng(1)
d = rng.standard_normal(2)
x0 = d * np.sqrt(1000.0 / (d @ cert.P @ d))
fresh = simulate(model, x0, T=3.0, dt=0.01)
V = cert.V(fresh.states)
print(f"V: {V[0]:.1f} -> {V[-1]:.3f}, monotone: {bool(np.all(np.diff(V) < 0))}")
