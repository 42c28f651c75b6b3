"""Satisfiability deciders and the 2-SAT certificate machinery."""
from ..errors import BudgetExceeded, ClauseTooLong
from .certificates import find_bicycle, is_bicycle, snake_formula
from .dpll import DEFAULT_BUDGET, solve_dpll, verify_assignment
from .twosat import (
    ContradictionCertificate,
    SolveResult,
    check_certificate,
    is_satisfiable_2sat,
    solve_2sat,
)


def solve(instance, budget=DEFAULT_BUDGET):
    """2-SAT when every clause has at most two literals, DPLL otherwise."""
    if instance.max_clause_length <= 2:
        return solve_2sat(instance)
    return solve_dpll(instance, budget)


__all__ = [
    "BudgetExceeded",
    "ClauseTooLong",
    "ContradictionCertificate",
    "SolveResult",
    "check_certificate",
    "find_bicycle",
    "is_bicycle",
    "is_satisfiable_2sat",
    "snake_formula",
    "solve",
    "solve_2sat",
    "solve_dpll",
    "verify_assignment",
]
