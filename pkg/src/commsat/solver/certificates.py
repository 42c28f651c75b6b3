"""Snakes and bicycles: the two small UNSAT structures of random 2-SAT.

A snake is a sequence ``l_1..l_s`` of distinct, pairwise non-complementary
literals; for a pivot ``t`` its formula has the ``s+1`` clauses
``(-l_i | l_{i+1})``, ``0 <= i <= s``, where ``l_0 = l_{s+1} = -l_t``.  It is
always unsatisfiable.

A bicycle over distinct variables ``v_1..v_s`` (``s >= 2``) is a chain of
implications ``l_1 => l_2 => ... => l_s`` closed off by an entry clause
``(u | l_1)`` and an exit clause ``(-l_s | v)``, with ``u`` and ``v`` literals
over the same variables.  Every unsatisfiable 2-CNF with two-literal clauses
contains one.
"""
from __future__ import annotations

from ..errors import ClauseTooLong, ComplementaryPair, IndexOutOfRange, ValidationError
from ..model import Instance, Layout
from .twosat import solve_2sat


def snake_formula(literals, t: int, layout: Layout | None = None) -> Instance:
    lits = [int(l) for l in literals]
    s = len(lits)
    if s < 2:
        raise ValidationError("a snake needs at least two literals")
    if 0 in lits:
        raise ValidationError("literal 0 is not allowed")
    if len(set(lits)) != s:
        raise ValidationError("snake literals must be distinct")
    if any(-l in set(lits) for l in lits):
        raise ComplementaryPair("snake contains a literal and its complement")
    if not 1 <= t <= s:
        raise IndexOutOfRange(f"pivot t={t} not in [1, {s}]")
    if layout is None:
        n = max(abs(l) for l in lits)
        layout = Layout(n, 1, n)
    ends = -lits[t - 1]
    seq = [ends] + lits + [ends]
    clauses = []
    for i in range(s + 1):
        a, b = -seq[i], seq[i + 1]
        clauses.append((a,) if a == b else (a, b))
    return Instance.from_clauses(layout, clauses)


def _pairs(instance: Instance) -> list:
    out = []
    for clause in instance:
        if len(clause) > 2:
            raise ClauseTooLong(f"clause {clause} is longer than 2")
        out.append(clause if len(clause) == 2 else (clause[0], clause[0]))
    return out


def is_bicycle(instance: Instance) -> bool:
    """Does the clause multiset have exactly the bicycle shape?

    Exhaustive search over orderings and signs; meant for small ``s``.
    """
    pairs = _pairs(instance)
    variables = sorted({abs(l) for p in pairs for l in p})
    s = len(variables)
    if s < 2 or len(pairs) != s + 1:
        return False
    used = [False] * len(pairs)

    def closes(first, last):
        rest = [pairs[i] for i in range(len(pairs)) if not used[i]]
        a, b = rest
        return (first in a and -last in b) or (first in b and -last in a)

    def extend(path, seen):
        if len(path) == s:
            return closes(path[0], path[-1])
        want = -path[-1]
        for i, (x, y) in enumerate(pairs):
            if used[i] or x == y:
                continue
            if x == want:
                nxt = y
            elif y == want:
                nxt = x
            else:
                continue
            if abs(nxt) in seen:
                continue
            used[i] = True
            seen.add(abs(nxt))
            path.append(nxt)
            if extend(path, seen):
                return True
            path.pop()
            seen.discard(abs(nxt))
            used[i] = False
        return False

    for v in variables:
        for first in (v, -v):
            if extend([first], {v}):
                return True
    return False


def find_bicycle(instance: Instance) -> Instance | None:
    """A bicycle contained in an unsatisfiable 2-CNF, or None.

    The contradiction certificate gives a closed implication walk
    ``x => ... => -x => ... => x``.  A maximal stretch of that walk with
    pairwise distinct variables is a chain whose neighbouring literals repeat
    one of its variables, which is exactly a bicycle; the stretch's entry and
    exit edges give ``C_0`` and ``C_s``.  Returns None for satisfiable input
    (and for the degenerate single-variable contradiction ``(x) & (-x)``).
    """
    _pairs(instance)
    result = solve_2sat(instance)
    if result.sat:
        return None
    walk = result.certificate.walk()
    size = len(walk) - 1
    lits = [lit for lit, _ in walk[:size]]
    into = [walk[size][1]] + [clause for _, clause in walk[1:size]]

    def var(k):
        return abs(lits[k % size])

    for start in range(size):
        lo = hi = start
        seen = {var(start)}
        while hi - lo + 1 < size and var(hi + 1) not in seen:
            hi += 1
            seen.add(var(hi))
        while hi - lo + 1 < size and var(lo - 1) not in seen:
            lo -= 1
            seen.add(var(lo))
        if hi - lo + 1 < 2:
            continue
        chosen = [into[k % size] for k in range(lo, hi + 2)]
        if len(set(chosen)) != len(chosen):
            continue
        candidate = instance.take(chosen)
        if is_bicycle(candidate):
            return candidate
    return None
