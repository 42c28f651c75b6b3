import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commsat.errors import (
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
from commsat.model import (
    ClauseType,
    Instance,
    Layout,
    Mixture,
    build_incidence_multigraph,
    clause_type_of,
    community_of,
    read_dimacs,
    sample_space_size,
    validate,
    write_dimacs,
)

from oracles import enumerate_type

BIG = Layout(1000, 10, 100)


def test_layout_requires_n_equal_B_times_h():
    with pytest.raises(ValidationError):
        Layout(10, 3, 3)
    assert Layout.from_n(1000, 10) == BIG
    assert list(BIG.community(5)) == list(range(401, 501))


def test_validate_accepts_mixed_types():
    mix = Mixture(((ClauseType((3, 2)), 0.5), (ClauseType((5,)), 0.5)))
    assert validate(BIG, mix).weights.tolist() == [0.5, 0.5]


@pytest.mark.parametrize(
    "layout, spec, error",
    [
        (Layout(10, 5, 2), "3:1", EntryTooLarge),
        (Layout(6, 3, 2), "1,1:0.5;1,1:0.5", DuplicateType),
        (Layout(6, 3, 2), "1,1,1,1:1", TypeTooLong),
        (Layout(6, 3, 2), "1,2:1", NonMonotoneType),
        (Layout(6, 3, 2), "1:0.5;2:0.4", WeightSumError),
        (Layout(6, 3, 2), "1:1.5;2:-0.5", WeightSumError),
    ],
)
def test_validate_rejects(layout, spec, error):
    with pytest.raises(error):
        validate(layout, Mixture.parse(spec))


def test_validate_renormalizes_within_tolerance():
    mix = validate(Layout(6, 3, 2), Mixture.parse("1:0.5;2:0.5000000001"))
    assert math.fsum(mix.weights) == pytest.approx(1.0, abs=1e-15)


def test_mixture_spec_round_trip():
    mix = Mixture.parse("3:0.2;1,1,1:0.8")
    assert [c.entries for c in mix.types] == [(3,), (1, 1, 1)]
    assert Mixture.parse(mix.spec()) == mix
    with pytest.raises(ParseError):
        Mixture.parse("3")


@pytest.mark.parametrize("var, expected", [(423, 5), (1, 1), (1000, 10), (100, 1), (101, 2)])
def test_community_of(var, expected):
    assert community_of(var, BIG) == expected


@pytest.mark.parametrize("var", [0, 1001, -3])
def test_community_of_out_of_range(var):
    with pytest.raises(OutOfRange):
        community_of(var, BIG)


@pytest.mark.parametrize(
    "clause, entries",
    [
        ((237, -250, 911, 917, -939), (3, 2)),
        ((401, 423, -427, 450, 500), (5,)),
        ((156, 437, 626), (1, 1, 1)),
    ],
)
def test_clause_type_of(clause, entries):
    assert clause_type_of(clause, BIG).entries == entries


def test_sample_space_size_examples():
    assert sample_space_size(BIG, ClauseType((3, 2))) == 10 * 9 * math.comb(100, 3) * math.comb(100, 2) * 2**5
    assert sample_space_size(BIG, ClauseType((3, 2))) == 2_305_195_200_000
    assert sample_space_size(BIG, ClauseType((5,))) == 10 * math.comb(100, 5) * 2**5
    assert sample_space_size(Layout(2, 2, 1), ClauseType((1,))) == 4


def test_sample_space_size_invalid_type():
    with pytest.raises(InvalidType):
        sample_space_size(Layout(4, 2, 2), ClauseType((3,)))
    with pytest.raises(InvalidType):
        sample_space_size(Layout(4, 2, 2), ClauseType((1, 2)))


def _types_fitting(B, h):
    out = []

    def rec(prefix, cap):
        if prefix:
            out.append(tuple(prefix))
        if len(prefix) == B:
            return
        for k in range(min(cap, h), 0, -1):
            rec(prefix + [k], k)

    rec([], h)
    return out


@pytest.mark.parametrize("B, h", [(B, h) for B in range(1, 9) for h in range(1, 9) if B * h <= 8])
def test_sample_space_size_matches_enumeration(B, h):
    layout = Layout.from_blocks(B, h)
    for entries in _types_fitting(B, h):
        brute = enumerate_type(layout.n, B, h, entries)
        assert sample_space_size(layout, ClauseType(entries)) == len(brute), entries


@pytest.mark.parametrize("B, h", [(B, h) for B in range(1, 4) for h in range(1, 4)])
def test_enumerated_clauses_classify_back(B, h):
    layout = Layout.from_blocks(B, h)
    for entries in _types_fitting(B, h):
        for clause in enumerate_type(layout.n, B, h, entries):
            assert clause_type_of(tuple(clause), layout).entries == entries


def test_multigraph_edges():
    layout = Layout(4, 1, 4)
    assert build_incidence_multigraph(Instance.empty(layout)).number_of_edges() == 0
    g = build_incidence_multigraph(Instance.from_clauses(layout, [(1, 2, 3)]))
    assert sorted(tuple(sorted(e)) for e in g.edges()) == [(1, 2), (1, 3), (2, 3)]
    g = build_incidence_multigraph(Instance.from_clauses(layout, [(1, -2), (-1, 2)]))
    assert g.number_of_edges(1, 2) == 2
    assert g.number_of_nodes() == 4


clause_lists = st.integers(1, 6).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(
            st.lists(st.integers(1, n), min_size=1, max_size=n, unique=True).flatmap(
                lambda vs: st.tuples(*[st.sampled_from([v, -v]) for v in vs])
            ),
            max_size=12,
        ),
    )
)


@settings(max_examples=200, deadline=None)
@given(clause_lists)
def test_multigraph_edge_count_property(data):
    n, clauses = data
    inst = Instance.from_clauses(Layout(n, 1, n), clauses)
    g = build_incidence_multigraph(inst)
    assert g.number_of_edges() == sum(math.comb(len(c), 2) for c in clauses)


@settings(max_examples=200, deadline=None)
@given(clause_lists, st.sampled_from([1, 2, 3, 6]))
def test_dimacs_round_trip_property(data, B):
    _, clauses = data
    layout = Layout.from_n(6, B)
    inst = Instance.from_clauses(layout, clauses)
    back = read_dimacs(write_dimacs(inst))
    assert back == inst
    assert back.clauses == inst.clauses


def test_dimacs_plain_input():
    inst = read_dimacs("p cnf 2 1\n1 -2 0\n")
    assert inst.layout == Layout(2, 1, 2)
    assert inst.clauses == [(1, -2)]


def test_dimacs_layout_header_and_provenance():
    text = "c layout B=10 h=100\nc seed=7 mixture=3:0.2;1,1,1:0.8\np cnf 1000 1\n423 -401 0\n"
    inst = read_dimacs(text)
    assert inst.layout == BIG
    assert inst.clauses == [(-401, 423)]
    assert inst.metadata == {"seed": 7, "mixture": "3:0.2;1,1,1:0.8"}
    assert write_dimacs(inst) == "c layout B=10 h=100\nc seed=7 mixture=3:0.2;1,1,1:0.8\np cnf 1000 1\n-401 423 0\n"


def test_dimacs_clauses_may_span_lines():
    assert read_dimacs("p cnf 3 2\n1 2\n3 0 -1\n0\n").clauses == [(1, 2, 3), (-1,)]


@pytest.mark.parametrize(
    "text, line",
    [
        ("p cnf 2 1\n1 x 0\n", 2),
        ("p cnf 2 1\n1 3 0\n", 2),
        ("1 2 0\np cnf 2 1\n", 1),
        ("p cnf 2 2\n1 2 0\n", 2),
        ("p cnf 2 1\n1 2\n", 2),
        ("c layout B=3 h=1\np cnf 2 0\n", 1),
        ("p dnf 2 1\n", 1),
        ("p cnf 2 1\n1 -1 0\n", 2),
    ],
)
def test_dimacs_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        read_dimacs(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_instance_prefix_and_take():
    layout = Layout(4, 2, 2)
    inst = Instance.from_clauses(layout, [(1,), (2, -3), (-1, 2, 4), (4,)])
    assert inst.prefix(2).clauses == [(1,), (2, -3)]
    assert inst.take([3, 1, 1]).clauses == [(4,), (2, -3), (2, -3)]
    assert Counter(inst.lengths.tolist()) == {1: 2, 2: 1, 3: 1}
    with pytest.raises(ValidationError):
        Instance.from_clauses(layout, [(1, -1)])
    with pytest.raises(OutOfRange):
        Instance.from_clauses(layout, [(5,)])
