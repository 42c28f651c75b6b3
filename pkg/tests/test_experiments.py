import csv
import io
import math
from pathlib import Path

import numpy as np
import pytest

from commsat.errors import ParseError, ValidationError
from commsat.experiments import (
    CSV_FIELDS,
    REGIMES,
    WINDOW_MODELS,
    ExperimentPlan,
    Model,
    MRule,
    balls_battery,
    estimate_sat_probability,
    parse_plan,
    run_cells,
    run_plan,
    scan_regimes,
    scan_window,
    wilson_interval,
    write_csv,
)
from commsat.generator import GeneratorConfig, stream
from commsat.model import Layout, Mixture

PLANS = Path(__file__).resolve().parent.parent / "plans"

SMALL_PLAN = """\
plan_version=1
# two models, two sizes, three densities
model = B=2 | 1,1:1
model = B=1 | 2:1
n = 1000, 2000
m = alpha:0.8,1.0,1.2
trials = 40
seed = 5
"""


def test_wilson_examples():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and hi - lo == pytest.approx(0.192, abs=0.002)
    assert wilson_interval(0, 10)[0] == 0.0 and wilson_interval(10, 10)[1] == 1.0
    assert wilson_interval(0, 0) == (0.0, 1.0)


@pytest.mark.parametrize("p", [0.5, 0.3, 0.1, 0.9])
def test_wilson_coverage(p):
    rng = stream(17, int(p * 100))
    reps, trials = 1000, 200
    hits = rng.binomial(trials, p, size=reps)
    covered = 0
    for k in hits:
        lo, hi = wilson_interval(int(k), trials)
        covered += lo <= p <= hi
    assert covered >= 0.93 * reps


def test_model_and_mrule_parsing():
    m = Model.parse("h=n^0.5 | 2:1")
    assert m.layout(10_000) == Layout(10_000, 100, 100)
    assert Model.parse("h=2 | 2:1").layout(10) == Layout(10, 5, 2)
    assert Model.parse("B=2 | 1,1:1").label() == "B=2 | 1,1:1"
    with pytest.raises(ParseError):
        Model.parse("B=2 2:1")
    with pytest.raises(ParseError):
        Model.parse("q=2 | 2:1")
    with pytest.raises(ValidationError):
        Model.parse("h=3 | 2:1").layout(10)
    assert MRule.parse("window:-1,0,1,2").resolve(10**6) == [990_000, 1_000_000, 1_010_000, 1_020_000]
    assert MRule.parse("power:0.75:0.1,10").resolve(10**4) == [100, 10_000]
    assert MRule.parse("alpha:0.5").resolve(101) == [50]
    assert MRule.parse("explicit:0,7").resolve(3) == [0, 7]
    with pytest.raises(ParseError):
        MRule.parse("linear:1")
    with pytest.raises(ValidationError):
        MRule.parse("alpha:-1").resolve(10)


def test_parse_plan_fields():
    plan = parse_plan(SMALL_PLAN)
    assert plan.sizes == [1000, 2000] and plan.trials == 40 and plan.seed == 5
    assert [m.label() for m in plan.models] == ["B=2 | 1,1:1", "B=1 | 2:1"]
    assert plan.m_rule == MRule("alpha", (0.8, 1.0, 1.2))
    assert plan.solver == "auto" and plan.threads is None


@pytest.mark.parametrize(
    "text, line",
    [
        ("plan_version=1\nmodel=B=1 | 2:1\nn=10\nm=alpha:1\nfoo=3\n", 5),
        ("plan_version=1\nmodel=B=1 | 2:1\nn=ten\nm=alpha:1\n", 3),
        ("plan_version=1\nmodel=B=1 | 2:1\nn=10\nm=linear:1\n", 4),
        ("plan_version=1\nmodel=B=1 2:1\nn=10\nm=alpha:1\n", 2),
        ("plan_version=1\nmodel=B=1 | 2:1\nn=10\nm\n", 4),
    ],
)
def test_parse_plan_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_plan(text)
    assert info.value.line == line


def test_parse_plan_structural_errors():
    with pytest.raises(ParseError):
        parse_plan("model=B=1 | 2:1\nn=10\nm=alpha:1\n")
    with pytest.raises(ParseError):
        parse_plan("plan_version=2\nmodel=B=1 | 2:1\nn=10\nm=alpha:1\n")
    with pytest.raises(ParseError):
        parse_plan("plan_version=1\nn=10\nm=alpha:1\n")
    with pytest.raises(ValidationError):
        parse_plan("plan_version=1\nmodel=B=1 | 2:1\nn=10\nm=alpha:1\ntrials=0\n")
    with pytest.raises(ValidationError):
        parse_plan("plan_version=1\nmodel=B=3 | 2:1\nn=10\nm=alpha:1\n")


def test_window_plan_file_shape():
    plan = parse_plan((PLANS / "table4.plan").read_text())
    assert plan.sizes == [10**6] and plan.trials == 2000 and plan.solver == "2sat"
    assert [m.label() for m in plan.models] == [m.label() for m in WINDOW_MODELS]
    assert plan.m_rule.resolve(10**6) == [990_000, 1_000_000, 1_010_000, 1_020_000]
    plan.trials = 1
    plan.sizes = [1000]
    rows = list(csv.DictReader(io.StringIO(write_csv(run_plan(plan, workers=1)))))
    assert len(rows) == 12


def test_zero_clauses_always_sat():
    cfg = GeneratorConfig(Layout(100, 4, 25), 0, Mixture.single(2), seed=3)
    cell = estimate_sat_probability(cfg, 20)
    assert cell.sat_fraction == 1.0 and cell.sat == 20


def test_single_trial_fraction_is_zero_or_one():
    for seed in range(5):
        cfg = GeneratorConfig(Layout(400, 1, 400), 400, Mixture.single(2), seed=seed)
        cell = estimate_sat_probability(cfg, 1)
        assert cell.sat_fraction in (0.0, 1.0)
        assert cell.ci[0] <= cell.sat_fraction <= cell.ci[1]


def test_estimate_is_deterministic_and_matches_run_cells():
    cfg = GeneratorConfig(Layout(500, 5, 100), 450, Mixture.single(2), seed=9)
    a = estimate_sat_probability(cfg, 30)
    b = run_cells(cfg.layout, cfg.mixture, [450], 30, 9)[0]
    assert a.outcomes == b.outcomes and a.row() == b.row()


def test_cell_row_invariants():
    cells = run_cells(Layout(2000, 1, 2000), Mixture.single(2), [1600, 2000, 2400], 60, 1)
    for cell in cells:
        lo, hi = cell.ci
        assert 0 <= cell.sat <= cell.trials and cell.sat + cell.unsat + cell.unknown == cell.trials
        assert lo <= cell.sat_fraction <= hi
        assert cell.row()["mean_solve_ms"] == ""


def test_timing_fills_mean_solve_ms():
    cell = run_cells(Layout(200, 1, 200), Mixture.single(2), [100], 3, 1, timing=True)[0]
    assert cell.mean_solve_ms is not None and cell.mean_solve_ms >= 0


def test_csv_header_and_determinism_across_workers():
    plan = parse_plan(SMALL_PLAN)
    one = write_csv(run_plan(plan, workers=1))
    two = write_csv(run_plan(plan, workers=2))
    three = write_csv(run_plan(plan, workers=3))
    assert one == two == three
    assert one.splitlines()[0] == ",".join(CSV_FIELDS)
    assert len(one.splitlines()) == 1 + 2 * 2 * 3


def test_prefix_coupling_is_monotone_per_trial_2sat():
    cells = run_cells(Layout(1000, 10, 100), Mixture.parse("2:0.5;1,1:0.5"), list(range(0, 1501, 100)), 60, 4)
    per_trial = np.array([c.outcomes for c in cells]).T
    assert np.all(np.diff(per_trial, axis=1) <= 0)
    assert per_trial[:, 0].all() and not per_trial[:, -1].any()


def test_prefix_coupling_is_monotone_per_trial_dpll():
    # exhaustive mode decides every prefix on its own, so monotonicity is a real check
    ms = [150, 200, 250, 300, 350]
    cells = run_cells(Layout(60, 1, 60), Mixture.single(3), ms, 20, 6, exhaustive=True)
    per_trial = np.array([c.outcomes for c in cells]).T
    assert np.all(np.diff(per_trial, axis=1) <= 0)
    bisected = run_cells(Layout(60, 1, 60), Mixture.single(3), ms, 20, 6)
    assert [c.outcomes for c in bisected] == [c.outcomes for c in cells]


def test_unknowns_are_counted_separately():
    cfg = GeneratorConfig(Layout(60, 1, 60), 255, Mixture.single(3), seed=2)
    cell = estimate_sat_probability(cfg, 20, budget=1)
    assert cell.unknown > 0
    assert cell.sat + cell.unsat + cell.unknown == 20
    if cell.decided:
        assert cell.sat_fraction == cell.sat / cell.decided
    else:
        assert math.isnan(cell.sat_fraction)


def test_solver_choice_validation():
    with pytest.raises(ValidationError):
        run_cells(Layout(30, 1, 30), Mixture.single(3), [10], 1, 0, solver="2sat")
    with pytest.raises(ValidationError):
        ExperimentPlan([10], [Model(Mixture.single(2), B=1)], MRule("alpha", (1.0,)), solver="minisat")
    with pytest.raises(ValidationError):
        scan_window(1000, [0], [Model(Mixture.single(3), B=1)], trials=1)


def test_scan_window_grid_shape_and_order():
    cells = scan_window(1000, [-1, 0, 1, 2], trials=5, seed=1, workers=1)
    assert len(cells) == 12
    assert [c.m for c in cells[:4]] == [900, 1000, 1100, 1200]
    assert [(c.B, c.mixture) for c in cells[::4]] == [(2, "1,1:1"), (1, "2:1"), (2, "2:1")]


def test_community_penalty():
    n = 316**2
    m = round(0.95 * n)
    mix = Mixture.single(2)
    blocks = run_cells(Model(mix, h_power=0.5).layout(n), mix, [m], 500, 41)[0]
    flat = run_cells(Layout(n, 1, n), mix, [m], 500, 42)[0]
    assert blocks.sat_fraction <= flat.sat_fraction
    assert blocks.ci[1] < flat.ci[0]


def test_fixed_h_regimes():
    low, crit, high = (scan_regimes(name, [10**6], 200, seed=3)[0] for name in ("fixed_h_sub", "fixed_h_crit", "fixed_h_super"))
    assert low.sat_fraction >= 0.95
    assert high.sat_fraction <= 0.05
    assert high.sat_fraction <= crit.sat_fraction <= low.sat_fraction


def test_linear_h_below_threshold_is_sat():
    cell = scan_regimes(REGIMES["linear_h_below1"], [10**5], 200, seed=4)[0]
    assert cell.sat_fraction >= 0.95


def test_balls_battery_csv_and_zero_balls():
    battery = balls_battery(100, 10, 2, 3, seed=1)
    text = battery.write_csv()
    lines = text.splitlines()
    assert lines[0] == "trial,max_load,x_exact_s" and len(lines) == 4
    assert balls_battery(100, 10, 2, 3, seed=1).write_csv() == text
    empty = balls_battery(50, 0, 2, 10)
    assert not empty.x_exact.any() and not empty.max_loads.any()


def test_balls_battery_critical_moments():
    summary = balls_battery(10**6, 1000, 2, 2000, seed=2).summary()
    assert summary["lambda"] == pytest.approx(0.5) and summary["lambda2_half"] == pytest.approx(0.125)
    assert abs(summary["mean_x"] - summary["exact_1"]) <= 4 * summary["se_x"]
    assert abs(summary["mean_binom2"] - summary["exact_2"]) <= 4 * summary["se_binom2"]


@pytest.mark.parametrize("B, M, s", [(2, 2, 2), (3, 5, 1), (4, 4, 2), (5, 5, 1), (5, 3, 0)])
def test_balls_battery_small_grid_matches_exact(B, M, s):
    summary = balls_battery(B, M, s, 4000, seed=B * 10 + M).summary()
    assert abs(summary["mean_x"] - summary["exact_1"]) <= 4 * summary["se_x"] + 1e-12
    assert abs(summary["mean_binom2"] - summary["exact_2"]) <= 4 * summary["se_binom2"] + 1e-12


def test_more_trials_extend_rather_than_reshuffle():
    layout, mix = Layout(1000, 2, 500), Mixture.single(1, 1)
    short = run_cells(layout, mix, [900, 1100], 10, 8, key=(0, 0))
    long = run_cells(layout, mix, [900, 1100], 25, 8, key=(0, 0))
    for a, b in zip(short, long):
        assert b.outcomes[:10] == a.outcomes
