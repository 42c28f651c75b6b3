"""Core types of the community-structured random SAT model.

Variables are the integers ``1..n`` and literals are nonzero signed integers
(``-v`` is the negation of ``v``).  The ``n = B*h`` variables are split into
``B`` consecutive communities of ``h`` variables each, so community ``i``
(1-indexed) owns ``(i-1)*h+1 .. i*h``.

Instances keep their clauses in a flat CSR layout (one literal array plus
clause offsets) because the experiment harness routinely handles a million
clauses per instance.
"""
from __future__ import annotations

import io
import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DuplicateType,
    EntryTooLarge,
    InvalidType,
    NonMonotoneType,
    OutOfRange,
    ParseError,
    TypeTooLong,
    ValidationError,
    WeightSumError,
)

WEIGHT_TOLERANCE = 1e-9

Clause = tuple  # sorted tuple of int literals, see make_clause()


@dataclass(frozen=True)
class Layout:
    n: int
    B: int
    h: int

    def __post_init__(self):
        for name in ("n", "B", "h"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value!r}")
        if self.n != self.B * self.h:
            raise ValidationError(f"n={self.n} is not B*h={self.B}*{self.h}")

    @classmethod
    def from_blocks(cls, B: int, h: int) -> "Layout":
        return cls(B * h, B, h)

    @classmethod
    def from_n(cls, n: int, B: int) -> "Layout":
        if B < 1 or n % B:
            raise ValidationError(f"B={B} does not divide n={n}")
        return cls(n, B, n // B)

    def community(self, i: int) -> range:
        """Variables of community ``i`` (1-indexed)."""
        if not 1 <= i <= self.B:
            raise OutOfRange(f"community {i} not in [1, {self.B}]")
        return range((i - 1) * self.h + 1, i * self.h + 1)


@dataclass(frozen=True)
class ClauseType:
    """Per-community variable counts ``(k_1, ..., k_l)``, largest first."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(k) for k in self.entries))

    @classmethod
    def parse(cls, text: str) -> "ClauseType":
        try:
            return cls(tuple(int(tok) for tok in text.split(",")))
        except ValueError:
            raise ParseError(f"bad clause type {text!r}") from None

    @property
    def length(self) -> int:
        return sum(self.entries)

    @property
    def ell(self) -> int:
        return len(self.entries)

    def __str__(self):
        return ",".join(str(k) for k in self.entries)

    def check(self, layout: Layout | None = None) -> None:
        """Raise if the type is malformed or does not fit ``layout``."""
        if not self.entries or any(k < 1 for k in self.entries):
            raise InvalidType(f"type ({self}) needs positive entries")
        if any(a < b for a, b in zip(self.entries, self.entries[1:])):
            raise NonMonotoneType(f"type ({self}) is not non-increasing")
        if layout is not None:
            if self.ell > layout.B:
                raise TypeTooLong(f"type ({self}) spans {self.ell} > B={layout.B} communities")
            if self.entries[0] > layout.h:
                raise EntryTooLarge(f"type ({self}) takes {self.entries[0]} > h={layout.h} variables")


@dataclass(frozen=True)
class Mixture:
    """The clause distribution: a list of ``(ClauseType, weight)`` pairs."""

    components: tuple

    def __post_init__(self):
        comps = []
        for ctype, weight in self.components:
            if not isinstance(ctype, ClauseType):
                ctype = ClauseType(tuple(ctype))
            comps.append((ctype, float(weight)))
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def single(cls, *entries: int) -> "Mixture":
        return cls(((ClauseType(entries), 1.0),))

    @classmethod
    def parse(cls, text: str) -> "Mixture":
        """Parse ``"3:0.2;1,1,1:0.8"`` style specs."""
        comps = []
        for part in text.strip().split(";"):
            part = part.strip()
            if not part:
                continue
            if ":" not in part:
                raise ParseError(f"mixture component {part!r} lacks ':<weight>'")
            ctype, weight = part.rsplit(":", 1)
            try:
                comps.append((ClauseType.parse(ctype.strip()), float(weight)))
            except ValueError:
                raise ParseError(f"bad weight in mixture component {part!r}") from None
        if not comps:
            raise ParseError(f"empty mixture spec {text!r}")
        return cls(tuple(comps))

    @property
    def types(self) -> list:
        return [c for c, _ in self.components]

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.components], dtype=float)

    @property
    def max_length(self) -> int:
        return max(c.length for c in self.types)

    def spec(self) -> str:
        return ";".join(f"{c}:{w:g}" for c, w in self.components)

    def __str__(self):
        return self.spec()


def validate(layout: Layout, mixture: Mixture) -> Mixture:
    """Check ``mixture`` against ``layout``.

    Returns the mixture with its weights renormalized to sum to one.  Raises a
    :class:`ValidationError` subclass naming the first violated invariant.
    """
    weights = mixture.weights
    if np.any(weights <= 0):
        raise WeightSumError(f"weights must be positive, got {weights.tolist()}")
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise WeightSumError(f"weights sum to {total!r}, not 1")
    seen = set()
    for ctype in mixture.types:
        ctype.check(layout)
        if ctype.entries in seen:
            raise DuplicateType(f"type ({ctype}) listed twice")
        seen.add(ctype.entries)
    return Mixture(tuple((c, w / total) for c, w in mixture.components))


def community_of(var: int, layout: Layout) -> int:
    if not 1 <= var <= layout.n:
        raise OutOfRange(f"variable {var} not in [1, {layout.n}]")
    return (var - 1) // layout.h + 1


def make_clause(literals: Iterable[int]) -> Clause:
    """Canonical clause: literals sorted by variable, distinct variables."""
    lits = sorted((int(l) for l in literals), key=abs)
    if not lits:
        raise ValidationError("empty clause")
    if lits[0] == 0:
        raise ValidationError("literal 0 is not allowed")
    for a, b in zip(lits, lits[1:]):
        if abs(a) == abs(b):
            raise ValidationError(f"variable {abs(a)} repeated in clause {lits}")
    return tuple(lits)


def clause_type_of(clause: Sequence[int], layout: Layout) -> ClauseType:
    counts = Counter(community_of(abs(l), layout) for l in clause)
    return ClauseType(tuple(sorted(counts.values(), reverse=True)))


def sample_space_size(layout: Layout, ctype: ClauseType) -> int:
    """Number of distinct clauses of type ``ctype`` over ``layout``.

    Ordered community choices are divided by the factorials of the
    multiplicities of equal entries, since communities holding the same count
    are interchangeable.  Exact integer arithmetic.
    """
    ctype = ctype if isinstance(ctype, ClauseType) else ClauseType(tuple(ctype))
    try:
        ctype.check(layout)
    except ValidationError as exc:
        raise InvalidType(str(exc)) from None
    communities = math.perm(layout.B, ctype.ell)
    for mult in Counter(ctype.entries).values():
        communities //= math.factorial(mult)
    variables = math.prod(math.comb(layout.h, k) for k in ctype.entries)
    return communities * variables * 2 ** ctype.length


class Instance:
    """An ordered list of clauses over a :class:`Layout`.

    ``literals`` holds every clause back to back, and clause ``i`` is
    ``literals[offsets[i]:offsets[i+1]]``.  Duplicate clauses are allowed.
    """

    def __init__(self, layout: Layout, literals, offsets, metadata=None, check=True):
        self.layout = layout
        self.literals = np.asarray(literals, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.metadata = dict(metadata or {})
        if check:
            self._check()

    def _check(self):
        lits, offs, n = self.literals, self.offsets, self.layout.n
        if offs.ndim != 1 or offs.size < 1 or offs[0] != 0 or offs[-1] != lits.size:
            raise ValidationError("malformed clause offsets")
        lengths = np.diff(offs)
        if np.any(lengths < 1):
            raise ValidationError("empty clause")
        if lits.size:
            mag = np.abs(lits)
            if mag.min() < 1 or mag.max() > n:
                raise OutOfRange(f"literal outside [1, {n}]")
            # within a clause, variables strictly increase
            starts = np.zeros(lits.size, dtype=bool)
            starts[offs[:-1]] = True
            if np.any((mag[1:] <= mag[:-1]) & ~starts[1:]):
                raise ValidationError("clause literals must be distinct variables sorted by index")

    @classmethod
    def from_clauses(cls, layout: Layout, clauses: Iterable[Iterable[int]], metadata=None) -> "Instance":
        canon = [make_clause(c) for c in clauses]
        lengths = np.fromiter((len(c) for c in canon), dtype=np.int64, count=len(canon))
        offsets = np.zeros(len(canon) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        flat = np.fromiter((l for c in canon for l in c), dtype=np.int64, count=int(offsets[-1]))
        return cls(layout, flat, offsets, metadata)

    @classmethod
    def empty(cls, layout: Layout) -> "Instance":
        return cls(layout, np.zeros(0, np.int64), np.zeros(1, np.int64))

    @classmethod
    def from_array(cls, layout: Layout, rows: np.ndarray, metadata=None, check=True) -> "Instance":
        """Build from an ``(m, k)`` array of canonical fixed-width clauses."""
        rows = np.asarray(rows, dtype=np.int64)
        m, k = rows.shape
        return cls(layout, rows.reshape(-1), np.arange(m + 1, dtype=np.int64) * k, metadata, check)

    def __len__(self):
        return self.offsets.size - 1

    @property
    def m(self) -> int:
        return len(self)

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def max_clause_length(self) -> int:
        return int(self.lengths.max()) if len(self) else 0

    def clause(self, i: int) -> Clause:
        return tuple(int(l) for l in self.literals[self.offsets[i]:self.offsets[i + 1]])

    def __iter__(self) -> Iterator[Clause]:
        lits = self.literals.tolist()
        offs = self.offsets.tolist()
        for a, b in zip(offs, offs[1:]):
            yield tuple(lits[a:b])

    @property
    def clauses(self) -> list:
        return list(self)

    def prefix(self, m: int) -> "Instance":
        """The first ``m`` clauses (shares memory with ``self``)."""
        if not 0 <= m <= len(self):
            raise OutOfRange(f"prefix length {m} not in [0, {len(self)}]")
        offs = self.offsets[: m + 1]
        return Instance(self.layout, self.literals[: offs[-1]], offs, self.metadata, check=False)

    def take(self, indices) -> "Instance":
        """Clauses at ``indices``, in the given order."""
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        lengths = self.lengths[idx]
        offsets = np.zeros(idx.size + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        pos = np.arange(offsets[-1], dtype=np.int64) + np.repeat(self.offsets[idx] - offsets[:-1], lengths)
        return Instance(self.layout, self.literals[pos], offsets, self.metadata, check=False)

    def variables(self) -> np.ndarray:
        return np.unique(np.abs(self.literals))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.layout == other.layout
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.literals, other.literals)
        )

    def __repr__(self):
        return f"Instance(layout={self.layout}, m={len(self)})"


def build_incidence_multigraph(instance: Instance):
    """Variable incidence multigraph: one edge per co-occurring pair per clause.

    Edges carry the index of the clause that produced them in the ``clause``
    attribute.
    """
    import networkx as nx

    graph = nx.MultiGraph()
    graph.add_nodes_from(range(1, instance.layout.n + 1))
    for idx, clause in enumerate(instance):
        vs = [abs(l) for l in clause]
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                graph.add_edge(vs[a], vs[b], clause=idx)
    return graph


# -- DIMACS ------------------------------------------------------------------

_LAYOUT_RE = re.compile(r"^c\s+layout\s+B=(\d+)\s+h=(\d+)\s*$")
_PROV_RE = re.compile(r"^c\s+(seed=\S+.*)$")


def write_dimacs(instance: Instance, stream=None) -> str | None:
    """Serialize ``instance``; returns the text when ``stream`` is None."""
    out = io.StringIO() if stream is None else stream
    lay = instance.layout
    out.write(f"c layout B={lay.B} h={lay.h}\n")
    meta = instance.metadata
    if "seed" in meta:
        extra = f" mixture={meta['mixture']}" if "mixture" in meta else ""
        out.write(f"c seed={meta['seed']}{extra}\n")
    out.write(f"p cnf {lay.n} {len(instance)}\n")
    lits = instance.literals.tolist()
    offs = instance.offsets.tolist()
    chunk = []
    for a, b in zip(offs, offs[1:]):
        chunk.append(" ".join(map(str, lits[a:b])) + " 0\n")
        if len(chunk) >= 65536:
            out.write("".join(chunk))
            chunk.clear()
    out.write("".join(chunk))
    return out.getvalue() if stream is None else None


def read_dimacs(source) -> Instance:
    """Parse DIMACS CNF text (a string or a text stream).

    A ``c layout B=<B> h=<h>`` comment fixes the community layout; without one
    the whole variable set is a single community.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    layout_hdr = None
    metadata = {}
    header = None
    clauses = []
    current = []
    lineno = 0
    for lineno, line in enumerate(source, start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("%"):
            break
        if text.startswith("c"):
            if match := _LAYOUT_RE.match(text):
                layout_hdr = (int(match.group(1)), int(match.group(2)), lineno)
            elif match := _PROV_RE.match(text):
                for tok in match.group(1).split():
                    key, _, value = tok.partition("=")
                    metadata[key] = int(value) if key == "seed" and value.isdigit() else value
            continue
        if text.startswith("p"):
            parts = text.split()
            if header is not None:
                raise ParseError("second problem line", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad problem line {text!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError(f"bad problem line {text!r}", lineno) from None
            if header[0] < 1 or header[1] < 0:
                raise ParseError(f"bad problem line {text!r}", lineno)
            continue
        if header is None:
            raise ParseError("clause before problem line", lineno)
        for tok in text.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                try:
                    clauses.append(make_clause(current))
                except ValidationError as exc:
                    raise ParseError(str(exc), lineno) from None
                current = []
            else:
                if abs(lit) > header[0]:
                    raise ParseError(f"literal {lit} exceeds n={header[0]}", lineno)
                current.append(lit)
    if header is None:
        raise ParseError("missing problem line", lineno or None)
    if current:
        raise ParseError("last clause not terminated by 0", lineno)
    n, m = header
    if len(clauses) != m:
        raise ParseError(f"problem line declares {m} clauses, found {len(clauses)}", lineno)
    if layout_hdr is None:
        layout = Layout(n, 1, n)
    else:
        B, h, hline = layout_hdr
        if B * h != n:
            raise ParseError(f"layout B={B} h={h} does not match n={n}", hline)
        layout = Layout(n, B, h)
    return Instance.from_clauses(layout, clauses, metadata)
