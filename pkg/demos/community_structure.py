"""
Clauses that live inside communities
====================================

A layout splits n variables into B communities of h consecutive variables.
A clause type such as (3, 2) says: three variables from one community, two
from another.  This walk-through samples a small instance, reads the types
back, and then compares satisfiability with and without communities.
"""

from collections import Counter

from commsat.experiments import Model, run_cells
from commsat.generator import GeneratorConfig, decompose_single_community, sample_instance
from commsat.model import ClauseType, Layout, Mixture, clause_type_of, sample_space_size, write_dimacs

# 1000 variables in 10 communities of 100
layout = Layout.from_n(1000, 10)
mixture = Mixture.parse("3:0.2;1,1,1:0.8")
instance = sample_instance(GeneratorConfig(layout, 8, mixture, seed=7))
print(write_dimacs(instance))

# every clause reports the type it was drawn from
print(Counter(clause_type_of(c, layout).entries for c in instance))

# number of distinct clauses of one type, signs included
for entries in [(3,), (1, 1, 1), (3, 2)]:
    print(entries, sample_space_size(layout, ClauseType(entries)))

# single-community clauses grouped by their community
dec = decompose_single_community(instance)
print("per-community counts:", dec.counts.tolist(), "rest:", len(dec.remainder))

# %%
# Community structure costs satisfiability
# ----------------------------------------
# At density 0.95 a uniform 2-SAT formula is almost always satisfiable.  Cut
# the same variables into sqrt(n) communities of sqrt(n) and draw every clause
# inside one community: each community now sees a density near 1 on a tiny
# formula, and a few of them are bound to fail.
n = 100**2
m = round(0.95 * n)
two = Mixture.single(2)
for model in (Model(two, B=1), Model(two, h_power=0.5)):
    cell = run_cells(model.layout(n), two, [m], 200, seed=1)[0]
    lo, hi = cell.ci
    print(f"{model.label():>16}: {cell.sat_fraction:.3f}  [{lo:.3f}, {hi:.3f}]")
