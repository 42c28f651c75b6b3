"""Linear-time 2-SAT via the implication graph and Tarjan's SCC algorithm.

Literal ``v`` maps to graph node ``2*(v-1)``, ``-v`` to ``2*(v-1)+1``, so
negation is ``node ^ 1``.  A clause ``(a | b)`` adds ``~a -> b`` and
``~b -> a``; a unit clause ``(a)`` is read as ``(a | a)`` and adds the single
edge ``~a -> a``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from ..errors import ClauseTooLong
from ..model import Instance


@dataclass(frozen=True)
class ContradictionCertificate:
    """Implication paths ``x => ... => -x`` and ``-x => ... => x``.

    Each path is a list of ``(literal, clause_index)`` steps: the literal
    reached and the clause that forced it.  The first entry has clause index
    ``-1``.
    """

    variable: int
    path_fwd: list
    path_bwd: list

    def walk(self) -> list:
        """Closed walk ``x, ..., -x, ..., x`` as ``(literal, clause)`` pairs."""
        return list(self.path_fwd) + list(self.path_bwd[1:])


@dataclass
class SolveResult:
    status: str  # "SAT" or "UNSAT"
    witness: Optional[np.ndarray] = None  # bool per variable, index v-1
    certificate: Optional[ContradictionCertificate] = None
    nodes: int = 0

    @property
    def sat(self) -> bool:
        return self.status == "SAT"

    def assignment(self) -> dict:
        return {v + 1: bool(x) for v, x in enumerate(self.witness)}


def literal_nodes(literals: np.ndarray) -> np.ndarray:
    lits = np.asarray(literals, dtype=np.int64)
    return 2 * (np.abs(lits) - 1) + (lits < 0)


def node_literal(node: int) -> int:
    v = node // 2 + 1
    return -v if node & 1 else v


@numba.njit(cache=True)
def _pair_nodes(literals, offsets):
    m = offsets.shape[0] - 1
    a = np.empty(m, dtype=np.int32)
    b = np.empty(m, dtype=np.int32)
    for i in range(m):
        first = literals[offsets[i]]
        last = literals[offsets[i + 1] - 1]
        a[i] = 2 * (abs(first) - 1) + (first < 0)
        b[i] = 2 * (abs(last) - 1) + (last < 0)
    return a, b


def clause_pairs(instance: Instance) -> tuple:
    """Node arrays ``(a, b)`` with ``b == a`` for unit clauses."""
    if instance.max_clause_length > 2:
        raise ClauseTooLong(f"clause of length {instance.max_clause_length} in a 2-SAT instance")
    return _pair_nodes(instance.literals, instance.offsets)


@numba.njit(cache=True)
def _build_graph(num_nodes, a, b, with_clauses):
    """CSR implication graph; ``eclause[e]`` is the clause behind edge ``e``
    (empty unless ``with_clauses``)."""
    m = a.shape[0]
    ptr = np.zeros(num_nodes + 1, dtype=np.int32)
    for i in range(m):
        ptr[(a[i] ^ 1) + 1] += 1
        if a[i] != b[i]:
            ptr[(b[i] ^ 1) + 1] += 1
    for v in range(num_nodes):
        ptr[v + 1] += ptr[v]
    fill = ptr[:-1].copy()
    adj = np.empty(ptr[num_nodes], dtype=np.int32)
    eclause = np.empty(ptr[num_nodes] if with_clauses else 0, dtype=np.int64)
    for i in range(m):
        u = a[i] ^ 1
        adj[fill[u]] = b[i]
        if with_clauses:
            eclause[fill[u]] = i
        fill[u] += 1
        if a[i] != b[i]:
            u = b[i] ^ 1
            adj[fill[u]] = a[i]
            if with_clauses:
                eclause[fill[u]] = i
            fill[u] += 1
    return ptr, adj, eclause


# per-variable peeling state: two saturating 7-bit occurrence counters, then flags
_COUNT_BITS = 7
_COUNT_MASK = 0x7F
_DEAD_BIT = 14
_VALUE_BIT = 15


@numba.njit(cache=True)
def _peel(num_nodes, a, b):
    """Iterated pure-literal elimination.

    A variable occurring with one sign only among the remaining clauses is
    set to that sign, which satisfies (and removes) all its clauses.  The
    clauses are swept in order, repeatedly, until a sweep removes nothing.
    Each variable's state lives in one 16-bit word (saturating counts of
    ``x`` and ``-x``, a dead flag, the chosen value), which keeps the working
    set small and makes a clause visit touch one word per variable.  A saturated count is never decremented; its variable
    then merely stays in the core, which is always safe.

    Returns ``(alive, value, kept)``: the variables of the remaining core,
    which holds every implication cycle and so every contradiction, the
    values chosen for the peeled ones, and the indices of the core clauses
    in increasing order.
    """
    n = num_nodes // 2
    state = np.zeros(n, dtype=np.uint16)
    m = a.shape[0]
    one = np.uint16(1)
    for i in range(m):
        for p in (a[i], b[i]):
            shift = _COUNT_BITS * (p & 1)
            if (state[p >> 1] >> shift) & _COUNT_MASK != _COUNT_MASK:
                state[p >> 1] += one << shift
            if b[i] == a[i]:
                break
    idx = np.arange(m).astype(np.int32)
    live = m
    while live > 0:
        k = 0
        for j in range(live):
            i = idx[j]
            p = a[i]
            q = b[i]
            drop = False
            for z in (p >> 1, q >> 1):
                s = state[z]
                if (s >> _DEAD_BIT) & 1:
                    drop = True
                elif (s & _COUNT_MASK) == 0 or ((s >> _COUNT_BITS) & _COUNT_MASK) == 0:
                    pure_true = np.uint16((s & _COUNT_MASK) > 0)
                    state[z] = s | (one << _DEAD_BIT) | (pure_true << _VALUE_BIT)
                    drop = True
            if drop:
                for r in (p, q):
                    s = state[r >> 1]
                    shift = _COUNT_BITS * (r & 1)
                    if (s >> _DEAD_BIT) & 1 == 0 and (s >> shift) & _COUNT_MASK != _COUNT_MASK:
                        state[r >> 1] = s - (one << shift)
                    if q == p:
                        break
            else:
                idx[k] = i
                k += 1
        if k == live:
            break
        live = k
    alive = np.empty(n, dtype=np.bool_)
    value = np.empty(n, dtype=np.bool_)
    for x in range(n):
        s = state[x]
        alive[x] = (s >> _DEAD_BIT) & 1 == 0 and (s & ((one << _DEAD_BIT) - one)) != 0
        value[x] = (s >> _VALUE_BIT) == 1
    return alive, value, idx[:live].copy()


@numba.njit(cache=True)
def _scc(num_nodes, ptr, adj, stop_on_conflict):
    """Strongly connected components, Pearce's one-array variant of Tarjan.

    Returns ``(comp, conflict)``.  Component ids are handed out from
    ``num_nodes`` downwards as components close, so sinks of the condensation
    get the largest ids.  While the search runs, ``comp`` doubles as the
    visitation rank of open nodes; ranks stay below every id issued so far.
    ``conflict`` is a node sharing its component with its complement, or -1;
    with ``stop_on_conflict`` the search returns at the first one.
    """
    comp = np.zeros(num_nodes, dtype=np.int32)
    is_root = np.zeros(num_nodes, dtype=np.bool_)
    stack = np.empty(num_nodes, dtype=np.int32)
    call_node = np.empty(num_nodes, dtype=np.int32)
    call_edge = np.empty(num_nodes, dtype=np.int32)
    sp = 0
    rank = 1
    next_id = num_nodes
    conflict = -1
    for r in range(num_nodes):
        if comp[r] != 0:
            continue
        comp[r] = rank
        rank += 1
        is_root[r] = True
        call_node[0] = r
        call_edge[0] = ptr[r]
        depth = 1
        while depth > 0:
            v = call_node[depth - 1]
            e = call_edge[depth - 1]
            if e < ptr[v + 1]:
                call_edge[depth - 1] = e + 1
                w = adj[e]
                if comp[w] == 0:
                    comp[w] = rank
                    rank += 1
                    is_root[w] = True
                    call_node[depth] = w
                    call_edge[depth] = ptr[w]
                    depth += 1
                elif comp[w] < comp[v]:
                    comp[v] = comp[w]
                    is_root[v] = False
                continue
            depth -= 1
            if is_root[v]:
                rank -= 1
                bottom = sp
                while bottom > 0 and comp[v] <= comp[stack[bottom - 1]]:
                    bottom -= 1
                for j in range(bottom, sp):
                    comp[stack[j]] = next_id
                    rank -= 1
                comp[v] = next_id
                for j in range(bottom, sp):
                    if comp[stack[j] ^ 1] == next_id and conflict == -1:
                        conflict = stack[j]
                if comp[v ^ 1] == next_id and conflict == -1:
                    conflict = v
                sp = bottom
                next_id -= 1
                if stop_on_conflict and conflict != -1:
                    return comp, conflict
            else:
                stack[sp] = v
                sp += 1
            if depth > 0:
                u = call_node[depth - 1]
                if comp[v] < comp[u]:
                    comp[u] = comp[v]
                    is_root[u] = False
    return comp, conflict


class CoreSystem:
    """The clauses of an instance that can take part in a contradiction.

    Built once for a whole instance; because peeling is monotone, the core of
    any prefix of the instance lies inside the core of the full instance, so
    :meth:`prefix_satisfiable` decides every prefix from this small system.
    Core variable ``j`` is original variable ``variables[j] + 1`` and core
    clause ``i`` is original clause ``clause_index[i]``.
    """

    def __init__(self, instance: Instance):
        a, b = clause_pairs(instance)
        if 2 * a.size >= 2**31:
            raise ValueError("instance too large for 32-bit edge offsets")
        self.m = len(instance)
        alive, self.pure_value, keep = _peel(2 * instance.layout.n, a, b)
        self.clause_index = keep
        self.variables = np.flatnonzero(alive)
        self.num_vars = self.variables.size
        ka, kb = a[keep], b[keep]
        self.a = 2 * np.searchsorted(self.variables, ka >> 1) + (ka & 1)
        self.b = 2 * np.searchsorted(self.variables, kb >> 1) + (kb & 1)

    def graph(self, cut: int | None = None, with_clauses: bool = False):
        cut = self.a.size if cut is None else cut
        return _build_graph(2 * self.num_vars, self.a[:cut], self.b[:cut], with_clauses)

    def prefix_satisfiable(self, m: int) -> bool:
        cut = int(np.searchsorted(self.clause_index, m))
        if cut == 0:
            return True
        ptr, adj, _ = self.graph(cut)
        _, conflict = _scc(2 * self.num_vars, ptr, adj, True)
        return conflict == -1

    def literal(self, node: int) -> int:
        """Original literal of core node ``node``."""
        v = int(self.variables[node >> 1]) + 1
        return -v if node & 1 else v


def is_satisfiable_2sat(instance: Instance) -> bool:
    """Decision only: peel to the core, then look for a contradictory SCC."""
    if len(instance) == 0:
        return True
    return CoreSystem(instance).prefix_satisfiable(len(instance))


def solve_2sat(instance: Instance, certificate: bool = True) -> SolveResult:
    """Decide a 2-SAT instance in O(n + m).

    Pure literals are peeled off first; the components of what remains decide
    the instance.  SAT results carry a witness: peeled variables take their
    pure value, core literals are true when their component comes later in
    topological order than their complement's.  UNSAT results carry a
    :class:`ContradictionCertificate` unless ``certificate`` is False.
    """
    n = instance.layout.n
    if len(instance) == 0:
        return SolveResult("SAT", np.zeros(n, dtype=bool))
    core = CoreSystem(instance)
    witness = core.pure_value.copy()
    if core.num_vars == 0:
        return SolveResult("SAT", witness)
    ptr, adj, eclause = core.graph(with_clauses=certificate)
    comp, conflict = _scc(2 * core.num_vars, ptr, adj, False)
    if conflict != -1:
        cert = None
        if certificate:
            cert = _certificate(core, conflict, comp, ptr, adj, eclause)
        return SolveResult("UNSAT", certificate=cert)
    # sinks get large ids; pick the literal whose component is "later"
    witness[core.variables] = comp[0::2] > comp[1::2]
    return SolveResult("SAT", witness)


def _shortest_path(core, src, dst, comp, ptr, adj, eclause):
    """BFS inside the strongly connected component of ``src``, as original
    ``(literal, clause)`` steps."""
    target = comp[src]
    parent = {src: (-1, -1)}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        if v == dst:
            break
        for e in range(ptr[v], ptr[v + 1]):
            w = int(adj[e])
            if comp[w] == target and w not in parent:
                parent[w] = (v, int(eclause[e]))
                queue.append(w)
    path = []
    node = dst
    while node != -1:
        prev, clause = parent[node]
        path.append((core.literal(node), int(core.clause_index[clause]) if clause >= 0 else -1))
        node = prev
    path.reverse()
    return path


def _certificate(core, node, comp, ptr, adj, eclause) -> ContradictionCertificate:
    pos = node & ~1
    neg = pos | 1
    fwd = _shortest_path(core, pos, neg, comp, ptr, adj, eclause)
    bwd = _shortest_path(core, neg, pos, comp, ptr, adj, eclause)
    return ContradictionCertificate(core.literal(pos), fwd, bwd)


def check_certificate(instance: Instance, cert: ContradictionCertificate) -> bool:
    """Every step ``a => b`` must be backed by clause ``(-a | b)``."""
    x = cert.variable
    for path, start, end in ((cert.path_fwd, x, -x), (cert.path_bwd, -x, x)):
        if not path or path[0][0] != start or path[-1][0] != end:
            return False
        for (lit_a, _), (lit_b, idx) in zip(path, path[1:]):
            clause = instance.clause(idx)
            if set(clause) != {-lit_a, lit_b}:
                return False
    return True
