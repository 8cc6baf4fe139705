"""
The LP solver on its own
========================

Small problems with free variables and mixed row types, including the
three verdicts besides Optimal.
"""

import numpy as np

from trajcert.lp import LpProblem, solve

# maximize x1 + x2 over a clipped box
prob = LpProblem([1.0, 1.0], "maximize", [[1, 0], [0, 1], [1, 1]], ["<=", "<=", "<="], [2, 3, 4])
sol = solve(prob)
print(sol.status.value, sol.x, sol.objective, f"({sol.iterations} pivots)")

# rows can be added one at a time
prob = LpProblem([1.0, 2.0, 3.0])
prob.add_row([1, 1, 1], "==", 6).add_row([1, -1, 0], "==", 0)
for j in range(3):
    prob.add_row(np.eye(3)[j], ">=", 0)
print(solve(prob).x)

print(solve(LpProblem([0.0], A=[[1.0], [1.0]], rel=["<=", ">="], b=[-1.0, 1.0])).status.value)
print(solve(LpProblem([-1.0])).status.value)
print(solve(prob, max_iterations=1).status.value)
