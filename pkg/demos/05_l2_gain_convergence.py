"""
L2 gain from a step response
============================

One unit-step response from rest. Longer records expose more of the DC
behaviour, so the learned gain climbs towards the H-infinity norm, 15.
"""

from trajcert import LtiModel, build_data_matrices, differentiate, hinf_norm, l2_gain, simulate

model = LtiModel([[0.0, 1.0], [-1.0, -2.0]], [[1.0], [2.0]], [[4.0, 1.0]])
full = simulate(model, [0.0, 0.0], "step", T=16.0, dt=0.01)
print("H-infinity norm:", hinf_norm(model))

print(" T   gamma")
for T in range(2, 17, 2):
    g = l2_gain(build_data_matrices(differentiate(full.truncate(T))))
    print(f"{T:2d}  {g.gamma:.5f}")
