"""Sampling instances of F(n, m, B, P).

Every clause picks its type from the mixture, then an ordered tuple of
distinct communities, then distinct variables inside each community, and
finally a fair sign per literal.  All randomness comes from an explicit
``numpy.random.Generator``; :func:`stream` derives reproducible per-trial
generators so parallel trials do not depend on scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import ClauseType, Instance, Layout, Mixture, validate


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``, e.g. ``stream(seed, trial)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))))


@dataclass(frozen=True)
class GeneratorConfig:
    layout: Layout
    m: int
    mixture: Mixture
    seed: int = 0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ValidationError(f"m must be a nonnegative integer, got {self.m!r}")
        object.__setattr__(self, "mixture", validate(self.layout, self.mixture))
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 unsigned bits")


def _distinct_rows(rng: np.random.Generator, rows: int, k: int, pool: int) -> np.ndarray:
    """``rows`` ordered k-tuples of distinct values from ``range(pool)``, uniformly.

    Draw j picks uniformly among the ``pool - j`` values not used yet, which
    is a partial Fisher-Yates shuffle done column by column.
    """
    out = np.empty((rows, k), dtype=np.int64)
    for j in range(k):
        x = rng.integers(0, pool - j, size=rows, dtype=np.int64)
        if j == 1:
            x += x >= out[:, 0]
        elif j:
            used = np.sort(out[:, :j], axis=1)
            for c in range(j):
                x += x >= used[:, c]
        out[:, j] = x
    return out


def _sample_type(rng, layout: Layout, ctype: ClauseType, rows: int) -> np.ndarray:
    """``(rows, k)`` array of canonical clauses of one type."""
    h = layout.h
    comms = _distinct_rows(rng, rows, ctype.ell, layout.B)
    blocks = []
    for j, kj in enumerate(ctype.entries):
        offsets = _distinct_rows(rng, rows, kj, h)
        blocks.append(comms[:, j : j + 1] * h + offsets + 1)
    variables = np.concatenate(blocks, axis=1) if len(blocks) > 1 else blocks[0]
    signs = rng.integers(0, 2, size=variables.shape, dtype=np.int8)
    if variables.shape[1] == 2:
        a, b = variables[:, 0], variables[:, 1]
        variables = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
    elif variables.shape[1] > 2:
        variables = np.sort(variables, axis=1)
    return np.where(signs == 1, -variables, variables)


def sample_clauses(layout: Layout, mixture: Mixture, m: int, rng: np.random.Generator) -> Instance:
    """``m`` i.i.d. clauses as an :class:`Instance` (no metadata)."""
    comps = mixture.components
    if m == 0:
        return Instance.empty(layout)
    if len(comps) == 1:
        rows = _sample_type(rng, layout, comps[0][0], m)
        return Instance.from_array(layout, rows, check=False)
    which = rng.choice(len(comps), size=m, p=mixture.weights / mixture.weights.sum())
    widths = np.array([c.length for c, _ in comps], dtype=np.int64)[which]
    offsets = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(widths, out=offsets[1:])
    literals = np.empty(int(offsets[-1]), dtype=np.int64)
    for t, (ctype, _) in enumerate(comps):
        idx = np.flatnonzero(which == t)
        if idx.size == 0:
            continue
        rows = _sample_type(rng, layout, ctype, idx.size)
        pos = offsets[idx][:, None] + np.arange(ctype.length)
        literals[pos] = rows
    return Instance(layout, literals, offsets, check=False)


def sample_clause(layout: Layout, mixture: Mixture, rng: np.random.Generator) -> tuple:
    return sample_clauses(layout, mixture, 1, rng).clause(0)


def sample_instance(config: GeneratorConfig) -> Instance:
    """One instance of ``F(n, m, B, P)``; a deterministic function of the config."""
    inst = sample_clauses(config.layout, config.mixture, config.m, stream(config.seed))
    inst.metadata.update(seed=config.seed, mixture=config.mixture.spec())
    return inst


@dataclass
class Decomposition:
    """Single-community sub-instances of an instance.

    ``parts[i-1]`` holds the clauses living entirely in community ``i`` and
    ``counts`` their sizes (the ``W_i``).  Clauses touching several
    communities go to ``remainder``.
    """

    parts: list
    counts: np.ndarray
    remainder: Instance

    def __iter__(self):
        return iter(enumerate(self.parts, start=1))


def community_index(instance: Instance) -> np.ndarray:
    """Community (1-indexed) of each clause, or 0 if it spans several."""
    m = len(instance)
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    comm = (np.abs(instance.literals) - 1) // instance.layout.h + 1
    starts = instance.offsets[:-1]
    lo = np.minimum.reduceat(comm, starts)
    hi = np.maximum.reduceat(comm, starts)
    return np.where(lo == hi, lo, 0)


def decompose_single_community(instance: Instance) -> Decomposition:
    layout = instance.layout
    owner = community_index(instance)
    counts = np.bincount(owner, minlength=layout.B + 1)
    parts = []
    for i in range(1, layout.B + 1):
        parts.append(instance.take(np.flatnonzero(owner == i)))
    remainder = instance.take(np.flatnonzero(owner == 0))
    return Decomposition(parts, counts[1:], remainder)

