"""Monte-Carlo harness: satisfiability probabilities, scans and balls batteries.

Trial ``i`` of a cell always draws from ``stream(seed, i, *cell_key)``, so
results do not depend on how trials are spread over worker processes; they
are reduced in trial order.

Density scans use prefix coupling: each trial samples the largest clause
count once and decides every requested prefix of that instance.  Adding
clauses can only destroy satisfiability, so along one trial the SAT
indicator is non-increasing in ``m``.
"""
from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ballsbins import count_bins_with_exactly, exact_binomial_moment, max_load, poisson_limit_param, throw
from .errors import BudgetExceeded, ParseError, ValidationError
from .generator import GeneratorConfig, sample_clauses, stream
from .model import Layout, Mixture, validate
from .solver.dpll import DEFAULT_BUDGET, solve_dpll
from .solver.twosat import CoreSystem

Z95 = 1.959963984540054
CSV_FIELDS = [
    "n", "B", "h", "m", "mixture", "trials", "sat", "unsat", "unknown",
    "sat_fraction", "ci_lo", "ci_hi", "mean_solve_ms", "seed",
]
SAT, UNSAT, UNKNOWN = 1, 0, -1


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple:
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # the interval touches 0 or 1 exactly at the extremes; rounding would miss it
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return (lo, hi)


# -- plan pieces ---------------------------------------------------------------


@dataclass(frozen=True)
class Model:
    """A mixture plus a rule giving the community layout for each ``n``.

    Exactly one of ``B`` (fixed community count), ``h`` (fixed community size)
    or ``h_power`` (``h = n**h_power``) is set.
    """

    mixture: Mixture
    B: Optional[int] = None
    h: Optional[int] = None
    h_power: Optional[float] = None

    def __post_init__(self):
        if sum(x is not None for x in (self.B, self.h, self.h_power)) != 1:
            raise ValidationError("a model needs exactly one of B, h, h_power")

    def layout(self, n: int) -> Layout:
        if self.B is not None:
            return Layout.from_n(n, self.B)
        h = self.h if self.h is not None else int(round(n**self.h_power))
        if h < 1 or n % h:
            raise ValidationError(f"community size {h} does not divide n={n}")
        return Layout(n, n // h, h)

    def label(self) -> str:
        if self.B is not None:
            lay = f"B={self.B}"
        elif self.h is not None:
            lay = f"h={self.h}"
        else:
            lay = f"h=n^{self.h_power:g}"
        return f"{lay} | {self.mixture.spec()}"

    @classmethod
    def parse(cls, text: str) -> "Model":
        """``"B=2 | 1,1:1"``, ``"h=2 | 2:1"`` or ``"h=n^0.5 | 2:1"``."""
        if "|" not in text:
            raise ParseError(f"model {text!r} must read '<layout> | <mixture>'")
        lay, mix = (part.strip() for part in text.split("|", 1))
        mixture = Mixture.parse(mix)
        key, _, value = lay.partition("=")
        try:
            if key == "B":
                return cls(mixture, B=int(value))
            if key == "h" and value.startswith("n^"):
                return cls(mixture, h_power=float(value[2:]))
            if key == "h":
                return cls(mixture, h=int(value))
        except ValueError:
            pass
        raise ParseError(f"bad model layout {lay!r}")


@dataclass(frozen=True)
class MRule:
    """Clause counts as a function of ``n``.

    kinds: ``explicit`` (the values themselves), ``alpha`` (``a*n``),
    ``window`` (``n + c*n^(2/3)``) and ``power`` (``beta*n^gamma``).
    """

    kind: str
    values: tuple
    gamma: Optional[float] = None

    def resolve(self, n: int) -> list:
        if self.kind == "explicit":
            ms = [int(v) for v in self.values]
        elif self.kind == "alpha":
            ms = [int(round(a * n)) for a in self.values]
        elif self.kind == "window":
            ms = [int(round(n + c * n ** (2.0 / 3.0))) for c in self.values]
        elif self.kind == "power":
            ms = [int(round(beta * n**self.gamma)) for beta in self.values]
        else:
            raise ValidationError(f"unknown m rule {self.kind!r}")
        if any(m < 0 for m in ms):
            raise ValidationError(f"negative clause count from {self}")
        return ms

    @classmethod
    def parse(cls, text: str) -> "MRule":
        """``window:-1,0,1,2``, ``alpha:0.8``, ``explicit:1000`` or ``power:0.75:0.1,10``."""
        kind, _, rest = text.strip().partition(":")
        try:
            if kind == "power":
                gamma, _, betas = rest.partition(":")
                return cls(kind, tuple(float(v) for v in betas.split(",")), float(gamma))
            if kind in ("explicit", "alpha", "window"):
                return cls(kind, tuple(float(v) for v in rest.split(",")))
        except ValueError:
            pass
        raise ParseError(f"bad m rule {text!r}")


@dataclass
class ExperimentPlan:
    sizes: list
    models: list
    m_rule: MRule
    trials: int = 100
    seed: int = 0
    solver: str = "auto"
    budget: int = DEFAULT_BUDGET
    threads: Optional[int] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.solver not in ("auto", "2sat", "dpll"):
            raise ValidationError(f"unknown solver {self.solver!r}")
        for model in self.models:
            for n in self.sizes:
                validate(model.layout(n), model.mixture)


def parse_plan(text: str) -> ExperimentPlan:
    """Read a ``key=value`` plan file (see ``plans/table4.plan``)."""
    fields = {"model": []}
    version = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not value:
            raise ParseError(f"expected key=value, got {raw!r}", lineno)
        try:
            if key == "plan_version":
                version = int(value)
            elif key == "model":
                fields["model"].append(Model.parse(value))
            elif key == "n":
                fields["sizes"] = [int(float(v)) for v in value.split(",")]
            elif key == "m":
                fields["m_rule"] = MRule.parse(value)
            elif key in ("trials", "seed", "budget", "threads"):
                fields[key] = int(float(value))
            elif key == "solver":
                fields["solver"] = value
            else:
                raise ParseError(f"unknown key {key!r}", lineno)
        except ParseError as exc:
            if exc.line is None:
                raise ParseError(str(exc), lineno) from None
            raise
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if version != 1:
        raise ParseError("plan must declare plan_version=1")
    missing = [k for k in ("sizes", "m_rule") if k not in fields]
    if missing or not fields["model"]:
        raise ParseError(f"plan is missing {missing or ['model']}")
    models = fields.pop("model")
    return ExperimentPlan(models=models, **fields)


@dataclass
class CellResult:
    n: int
    B: int
    h: int
    m: int
    mixture: str
    trials: int
    sat: int
    unsat: int
    unknown: int
    seed: int
    mean_solve_ms: Optional[float] = None
    outcomes: list = field(default_factory=list, repr=False)

    @property
    def decided(self) -> int:
        return self.sat + self.unsat

    @property
    def sat_fraction(self) -> float:
        return self.sat / self.decided if self.decided else float("nan")

    @property
    def ci(self) -> tuple:
        return wilson_interval(self.sat, self.decided)

    def row(self) -> dict:
        lo, hi = self.ci
        return {
            "n": self.n, "B": self.B, "h": self.h, "m": self.m, "mixture": self.mixture,
            "trials": self.trials, "sat": self.sat, "unsat": self.unsat, "unknown": self.unknown,
            "sat_fraction": f"{self.sat_fraction:.6f}", "ci_lo": f"{lo:.6f}", "ci_hi": f"{hi:.6f}",
            "mean_solve_ms": "" if self.mean_solve_ms is None else f"{self.mean_solve_ms:.3f}",
            "seed": self.seed,
        }


def write_csv(cells: Sequence[CellResult], stream_out=None) -> str | None:
    out = io.StringIO() if stream_out is None else stream_out
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for cell in cells:
        writer.writerow(cell.row())
    return out.getvalue() if stream_out is None else None


# -- trial execution -------------------------------------------------------------


def _pick_solver(solver: str, mixture: Mixture) -> str:
    if solver == "auto":
        return "2sat" if mixture.max_length <= 2 else "dpll"
    if solver == "2sat" and mixture.max_length > 2:
        raise ValidationError("2-SAT solver selected for clauses longer than 2")
    return solver


def _decide_prefixes(instance, ms, solver, budget, exhaustive):
    """Outcome per clause count in ``ms`` (sorted ascending) and seconds spent."""
    t0 = time.perf_counter()
    outcomes = [None] * len(ms)
    if solver == "2sat":
        core = CoreSystem(instance)
        for j, m in enumerate(ms):
            outcomes[j] = SAT if core.prefix_satisfiable(m) else UNSAT
        return outcomes, time.perf_counter() - t0

    def decide(j):
        try:
            return SAT if solve_dpll(instance.prefix(ms[j]), budget).sat else UNSAT
        except BudgetExceeded:
            return UNKNOWN

    if exhaustive:
        outcomes = [decide(j) for j in range(len(ms))]
        return outcomes, time.perf_counter() - t0
    # bisect over the prefixes; monotonicity fills in the rest
    pending = [(0, len(ms) - 1)]
    while pending:
        lo, hi = pending.pop()
        if lo > hi:
            continue
        mid = (lo + hi) // 2
        res = decide(mid)
        outcomes[mid] = res
        if res == UNSAT:
            for j in range(mid + 1, hi + 1):
                outcomes[j] = UNSAT
            pending.append((lo, mid - 1))
        elif res == SAT:
            for j in range(lo, mid):
                outcomes[j] = SAT
            pending.append((mid + 1, hi))
        else:
            pending.append((lo, mid - 1))
            pending.append((mid + 1, hi))
    return outcomes, time.perf_counter() - t0


def _run_trials(args):
    layout, mixture, ms, seed, key, trial_ids, solver, budget, exhaustive = args
    order = sorted(range(len(ms)), key=lambda j: ms[j])
    sorted_ms = [ms[j] for j in order]
    results = []
    for trial in trial_ids:
        rng = stream(seed, trial, *key)
        inst = sample_clauses(layout, mixture, sorted_ms[-1], rng)
        outcomes, seconds = _decide_prefixes(inst, sorted_ms, solver, budget, exhaustive)
        per_m = [None] * len(ms)
        for pos, j in enumerate(order):
            per_m[j] = outcomes[pos]
        results.append((per_m, seconds))
    return results


def _default_workers():
    return os.cpu_count() or 1


def run_cells(layout, mixture, ms, trials, seed, key=(), solver="auto", budget=DEFAULT_BUDGET,
              workers=None, exhaustive=False, timing=False) -> list:
    """One :class:`CellResult` per clause count in ``ms`` (prefix-coupled)."""
    mixture = validate(layout, mixture)
    solver = _pick_solver(solver, mixture)
    ms = [int(m) for m in ms]
    workers = workers or 1
    base = (layout, mixture, ms, seed, tuple(key))
    tail = (solver, budget, exhaustive)
    if workers <= 1 or trials < 2:
        per_trial = _run_trials(base + (range(trials),) + tail)
    else:
        chunks = np.array_split(np.arange(trials), min(trials, workers * 4))
        jobs = [base + (c.tolist(),) + tail for c in chunks if c.size]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = [r for part in pool.map(_run_trials, jobs) for r in part]
    cells = []
    for j, m in enumerate(ms):
        outcomes = [res[0][j] for res in per_trial]
        mean_ms = None
        if timing:
            mean_ms = 1000.0 * sum(sec for _, sec in per_trial) / (len(per_trial) * len(ms))
        cells.append(
            CellResult(
                n=layout.n, B=layout.B, h=layout.h, m=m, mixture=mixture.spec(), trials=trials,
                sat=outcomes.count(SAT), unsat=outcomes.count(UNSAT), unknown=outcomes.count(UNKNOWN),
                seed=seed, mean_solve_ms=mean_ms, outcomes=outcomes,
            )
        )
    return cells


def estimate_sat_probability(config: GeneratorConfig, trials: int, solver: str = "auto",
                             budget: int = DEFAULT_BUDGET, workers=None, timing=False) -> CellResult:
    """Fraction of satisfiable instances among ``trials`` independent draws.

    Trial ``i`` uses ``stream(config.seed, i)``.  DPLL budget exhaustion is
    counted in ``unknown`` and excluded from the fraction.
    """
    return run_cells(config.layout, config.mixture, [config.m], trials, config.seed, (),
                     solver, budget, workers, timing=timing)[0]


def run_plan(plan: ExperimentPlan, workers=None, exhaustive=False, timing=False) -> list:
    """All cells of a plan: models, then sizes, then clause counts, in plan order."""
    workers = workers or plan.threads or _default_workers()
    cells = []
    for mi, model in enumerate(plan.models):
        for si, n in enumerate(plan.sizes):
            cells.extend(
                run_cells(model.layout(n), model.mixture, plan.m_rule.resolve(n), plan.trials, plan.seed,
                          (mi, si), plan.solver, plan.budget, workers, exhaustive, timing)
            )
    return cells


WINDOW_MODELS = (
    Model(Mixture.single(1, 1), B=2),
    Model(Mixture.single(2), B=1),
    Model(Mixture.single(2), B=2),
)

# reference satisfiable fractions at n = 1e6, rows as WINDOW_MODELS, columns c = -1, 0, 1, 2
WINDOW_REFERENCE = (
    (0.980, 0.909, 0.641, 0.201),
    (0.980, 0.908, 0.644, 0.203),
    (0.946, 0.827, 0.521, 0.142),
)


def scan_window(n: int, c_values: Sequence[float], models: Sequence[Model] = WINDOW_MODELS,
                trials: int = 2000, seed: int = 0, workers=None, timing=False) -> list:
    """Cells for ``m = n + c n^(2/3)`` over 2-SAT models (rows: model, then c)."""
    for model in models:
        if model.mixture.max_length > 2:
            raise ValidationError("window scans need 2-SAT mixtures")
    plan = ExperimentPlan([n], list(models), MRule("window", tuple(c_values)), trials, seed, "2sat")
    return run_plan(plan, workers, timing=timing)


@dataclass(frozen=True)
class Regime:
    """A named row of the asymptotic regime tables, made concrete."""

    name: str
    model: Model
    m_rule: MRule
    expect: str  # "sat", "unsat" or "between"; informational


REGIMES = {
    # fixed h = 2, k = 2: critical clause count n^(3/4)
    "fixed_h_sub": Regime("fixed_h_sub", Model(Mixture.single(2), h=2), MRule("power", (0.1,), 0.75), "sat"),
    "fixed_h_crit": Regime("fixed_h_crit", Model(Mixture.single(2), h=2), MRule("power", (1.0,), 0.75), "between"),
    "fixed_h_super": Regime("fixed_h_super", Model(Mixture.single(2), h=2), MRule("power", (10.0,), 0.75), "unsat"),
    # k = 2, m = alpha n, community size against sqrt(n)
    "small_h_below1": Regime("small_h_below1", Model(Mixture.single(2), h_power=0.25), MRule("alpha", (0.95,)), "unsat"),
    "sqrt_h_below1": Regime("sqrt_h_below1", Model(Mixture.single(2), h_power=0.5), MRule("alpha", (0.95,)), "between"),
    "sqrt_h_at1": Regime("sqrt_h_at1", Model(Mixture.single(2), h_power=0.5), MRule("alpha", (1.0,)), "unsat"),
    "mid_h_below1": Regime("mid_h_below1", Model(Mixture.single(2), h_power=0.75), MRule("alpha", (0.9,)), "sat"),
    "linear_h_below1": Regime("linear_h_below1", Model(Mixture.single(2), B=1), MRule("alpha", (0.9,)), "sat"),
    "linear_h_at1": Regime("linear_h_at1", Model(Mixture.single(2), B=1), MRule("alpha", (1.0,)), "between"),
}


def scan_regimes(regime: Regime | str, sizes: Sequence[int], trials: int, seed: int = 0,
                 workers=None, solver="auto") -> list:
    """Satisfiable fraction of one regime at each size, for trend inspection."""
    if isinstance(regime, str):
        regime = REGIMES[regime]
    plan = ExperimentPlan(list(sizes), [regime.model], regime.m_rule, trials, seed, solver)
    return run_plan(plan, workers)


# -- balls and bins -----------------------------------------------------------------


@dataclass
class BallsBattery:
    bins: int
    balls: int
    s: int
    seed: int
    max_loads: np.ndarray
    x_exact: np.ndarray

    def rows(self) -> list:
        return [
            {"trial": i, "max_load": int(ml), "x_exact_s": int(x)}
            for i, (ml, x) in enumerate(zip(self.max_loads, self.x_exact))
        ]

    def summary(self) -> dict:
        x = self.x_exact.astype(float)
        pairs = x * (x - 1) / 2
        trials = x.size
        c = self.balls / self.bins ** (1.0 - 1.0 / self.s) if self.s >= 1 else float("nan")
        lam = poisson_limit_param(c, self.s)
        return {
            "trials": trials,
            "mean_x": float(x.mean()),
            "se_x": float(x.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan"),
            "mean_binom2": float(pairs.mean()),
            "se_binom2": float(pairs.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan"),
            "p_zero": float(np.mean(x == 0)),
            "exact_1": float(exact_binomial_moment(self.bins, self.balls, self.s, 1)),
            "exact_2": float(exact_binomial_moment(self.bins, self.balls, self.s, 2)) if self.bins >= 2 else 0.0,
            "lambda": lam,
            "lambda2_half": lam**2 / 2,
        }

    def write_csv(self, out=None) -> str | None:
        buf = io.StringIO() if out is None else out
        writer = csv.DictWriter(buf, fieldnames=["trial", "max_load", "x_exact_s"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue() if out is None else None


def balls_battery(B: int, M: int, s: int, trials: int, seed: int = 0) -> BallsBattery:
    """Throw ``M`` balls into ``B`` bins ``trials`` times; trial ``i`` uses ``stream(seed, i)``."""
    max_loads = np.empty(trials, dtype=np.int64)
    x_exact = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        occ = throw(M, B, stream(seed, i))
        max_loads[i] = max_load(occ)
        x_exact[i] = count_bins_with_exactly(occ, s)
    return BallsBattery(B, M, s, seed, max_loads, x_exact)
