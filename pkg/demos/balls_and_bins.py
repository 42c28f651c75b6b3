"""
Balls, bins and the Poisson limit
=================================

Throw M = C B^(1 - 1/s) balls into B bins.  The number X of bins holding
exactly s balls tends to a Poisson law with mean C^s / s!, and the maximum
load is s - 1 or s.  For s = 2 and C = 1 that mean is 1/2.
"""

import math

from commsat.analysis import raab_steger_lower, raab_steger_upper, solve_dc
from commsat.ballsbins import critical_ball_count, exact_binomial_moment
from commsat.experiments import balls_battery

B, s, C = 10**6, 2, 1.0
M = critical_ball_count(C, B, s)
battery = balls_battery(B, M, s, trials=2000, seed=3)
summary = battery.summary()

print(f"B={B}, M={M}, s={s}")
print(f"E[X]        empirical {summary['mean_x']:.4f}  exact {summary['exact_1']:.4f}  limit {summary['lambda']:.4f}")
print(f"E[C(X,2)]   empirical {summary['mean_binom2']:.4f}  exact {summary['exact_2']:.4f}  limit {summary['lambda2_half']:.4f}")
print(f"P(X=0)      empirical {summary['p_zero']:.4f}  limit {math.exp(-summary['lambda']):.4f}")
print("max loads seen:", sorted(set(battery.max_loads.tolist())))

# exact moments are rationals when they fit
print(exact_binomial_moment(3, 3, 1, 3))

# %%
# Heavier loads
# -------------
# With M = c B ln B balls the maximum load is about d_c ln B, where d_c > c
# solves 1 + x(ln c - ln x + 1) = c.  For c = 1 the root is e.
for c in (0.5, 1, 2):
    print(f"c={c}: d_c = {solve_dc(c):.6f}")

B = 10**5
M = round(B * math.log(B))
heavy = balls_battery(B, M, 2, trials=20, seed=4)
print(f"B={B}, M={M}: max load {heavy.max_loads.min()}..{heavy.max_loads.max()}, "
      f"lower bound (delta=0.5) {raab_steger_lower(M, B, 0.5, 'critical'):.2f}")

bound, valid = raab_steger_upper(10**6, 100)
print(f"B=100, M=1e6: upper bound {bound:.1f} (regime holds: {valid})")
