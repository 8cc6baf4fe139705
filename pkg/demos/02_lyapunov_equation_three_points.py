"""
The Lyapunov equation from three samples
========================================

P has n(n+1)/2 unknowns, so for n = 2 three samples of (x, xdot) pin down
the solution of PA + A'P = -Q without ever forming A.
"""

import numpy as np

from trajcert import LtiModel, differentiate, lyap_solve_model, simulate, solve_lyapunov_equation

model = LtiModel([[0.0, 1.0], [-1.0, -3.0]])
data = differentiate(simulate(model, [2.0, 2.0], T=1.0, dt=0.01)).subset([0, 50, 100])
print("sample times:", data.times)

P = solve_lyapunov_equation(data, np.eye(2))
print("from finite differences:\n", P)

P_exact = solve_lyapunov_equation(data.with_exact_derivatives(model), np.eye(2))
P_model = lyap_solve_model(model.A, np.eye(2))
print("with exact derivatives:\n", P_exact)
print("max deviation from the model-based solve:", np.max(np.abs(P_exact - P_model)))
