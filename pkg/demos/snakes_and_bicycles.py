"""
Why an unsatisfiable 2-SAT formula is unsatisfiable
===================================================

A snake is a list of distinct, pairwise non-complementary literals.  Its
formula chains them into an implication cycle that forces some literal both
ways, so it is never satisfiable.  Conversely every unsatisfiable 2-SAT
formula contains a bicycle: s + 1 two-literal clauses on s variables forming
such a chain.
"""

import numpy as np

from commsat.model import Instance, Layout
from commsat.solver import check_certificate, find_bicycle, is_bicycle, snake_formula, solve_2sat

snake = snake_formula([1, -2, 3, 4], 2)
print("snake clauses:", snake.clauses)
result = solve_2sat(snake)
print("status:", result.status)

# the certificate is the pair of implication paths x -> -x -> x
cert = result.certificate
print("contradiction on variable", cert.variable)
print("forward path:", [lit for lit, _ in cert.path_fwd])
print("backward path:", [lit for lit, _ in cert.path_bwd])
print("certificate checks:", check_certificate(snake, cert))

# %%
# Bicycles in random formulas
# ---------------------------
rng = np.random.default_rng(5)
layout = Layout(12, 1, 12)
for _ in range(200):
    vs = rng.integers(1, 13, size=(30, 2))
    clauses = [(int(a) * int(rng.choice([-1, 1])), int(b) * int(rng.choice([-1, 1]))) for a, b in vs if a != b]
    inst = Instance.from_clauses(layout, clauses)
    if not solve_2sat(inst).sat:
        break
bike = find_bicycle(inst)
print(f"unsatisfiable formula with {len(inst)} clauses contains a bicycle of {len(bike)}:")
print(bike.clauses, "is_bicycle:", is_bicycle(bike))
