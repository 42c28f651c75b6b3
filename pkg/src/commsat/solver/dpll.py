"""DPLL with unit propagation for clauses of any length.

Branching picks the literal occurring most often in the not-yet-satisfied
clauses (ties: lowest variable, positive first), so runs are deterministic.
"""
from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from ..errors import BudgetExceeded, PartialAssignment
from ..model import Instance
from .twosat import SolveResult

DEFAULT_BUDGET = 10**7


def solve_dpll(instance: Instance, budget: int = DEFAULT_BUDGET) -> SolveResult:
    """Decide ``instance``; raises :class:`BudgetExceeded` past ``budget`` nodes."""
    n = instance.layout.n
    clauses = instance.clauses
    occurs = {}
    for idx, clause in enumerate(clauses):
        for lit in clause:
            occurs.setdefault(lit, []).append(idx)
    value = [0] * (n + 1)
    trail = []

    def assign(lit):
        value[abs(lit)] = 1 if lit > 0 else -1
        trail.append(lit)

    def propagate(head):
        while head < len(trail):
            falsified = -trail[head]
            head += 1
            for idx in occurs.get(falsified, ()):
                unit = 0
                free = 0
                for lit in clauses[idx]:
                    val = value[abs(lit)]
                    if val == 0:
                        free += 1
                        unit = lit
                    elif (val > 0) == (lit > 0):
                        break
                else:
                    if free == 0:
                        return False
                    if free == 1:
                        assign(unit)
        return True

    def choose():
        counts = {}
        for clause in clauses:
            free = []
            for lit in clause:
                val = value[abs(lit)]
                if val == 0:
                    free.append(lit)
                elif (val > 0) == (lit > 0):
                    break
            else:
                for lit in free:
                    counts[lit] = counts.get(lit, 0) + 1
        if not counts:
            return None
        return min(counts, key=lambda l: (-counts[l], abs(l), l < 0))

    def result_sat(nodes):
        witness = np.array([v > 0 for v in value[1:]], dtype=bool)
        return SolveResult("SAT", witness, nodes=nodes)

    for clause in clauses:
        if len(clause) == 1:
            lit = clause[0]
            val = value[abs(lit)]
            if val == 0:
                assign(lit)
            elif (val > 0) != (lit > 0):
                return SolveResult("UNSAT")
    if not propagate(0):
        return SolveResult("UNSAT")

    nodes = 0
    decisions = []  # (trail length before, literal, flipped)
    while True:
        lit = choose()
        if lit is None:
            return result_sat(nodes)
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(nodes - 1)
        decisions.append((len(trail), lit, False))
        assign(lit)
        ok = propagate(len(trail) - 1)
        while not ok:
            while decisions and decisions[-1][2]:
                decisions.pop()
            if not decisions:
                return SolveResult("UNSAT", nodes=nodes)
            mark, lit, _ = decisions.pop()
            while len(trail) > mark:
                value[abs(trail.pop())] = 0
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(nodes - 1)
            decisions.append((mark, -lit, True))
            assign(-lit)
            ok = propagate(mark)


def verify_assignment(instance: Instance, assignment) -> bool:
    """True iff every clause has a true literal.

    ``assignment`` is either a mapping ``variable -> bool`` covering every
    variable of the instance, or a boolean array of length ``n`` indexed by
    ``variable - 1``.
    """
    n = instance.layout.n
    if isinstance(assignment, Mapping):
        used = instance.variables()
        missing = [int(v) for v in used if int(v) not in assignment]
        if missing:
            raise PartialAssignment(f"no value for variables {missing[:10]}")
        values = np.zeros(n, dtype=bool)
        for v, x in assignment.items():
            if 1 <= v <= n:
                values[v - 1] = bool(x)
    else:
        values = np.asarray(assignment, dtype=bool)
        if values.shape != (n,):
            raise PartialAssignment(f"expected {n} values, got shape {values.shape}")
    if len(instance) == 0:
        return True
    lits = instance.literals
    truth = values[np.abs(lits) - 1] ^ (lits < 0)
    return bool(np.logical_or.reduceat(truth, instance.offsets[:-1]).all())
