from fractions import Fraction

import pytest

from compsynth import (
    ExitControlRelation,
    IndexFunction,
    Library,
    convert_min_even_priorities,
    pad_exits,
    validate_index,
    validate_library,
)
from compsynth.mdp import component_view

from helpers import m_good, make_component, ONE


def test_wellformed_library_has_no_diagnostics():
    good, _ = m_good()
    assert validate_library(Library(width=2, components=(good,))) == []


def test_distribution_sum_violation_is_reported():
    bad = make_component(
        "bad", ("s", "e0", "e1"), "s", ("e0", "e1"),
        {"s": "x", "e0": "x", "e1": "y"},
        {("s", "a"): {"e0": Fraction(999, 1000)}, ("s", "b"): {"e1": ONE}},
    )
    diags = validate_library(Library(width=2, components=(bad,)))
    assert any("sum != 1" in d for d in diags)


def test_width_mismatch_is_reported():
    two = make_component(
        "two", ("s", "e0", "e1"), "s", ("e0", "e1"),
        {"s": "x", "e0": "x", "e1": "y"},
        {("s", "a"): {"e0": ONE}, ("s", "b"): {"e1": ONE}},
    )
    three = make_component(
        "three", ("s", "e0", "e1", "e2"), "s", ("e0", "e1", "e2"),
        {"s": "x", "e0": "x", "e1": "y", "e2": "y"},
        {("s", "a"): {"e0": ONE}, ("s", "b"): {"e1": ONE}},
    )
    diags = validate_library(Library(width=2, components=(two, three)))
    assert any("width mismatch" in d for d in diags)


def test_missing_row_and_exit_row_are_reported():
    bad = make_component(
        "bad", ("s", "e0", "e1"), "s", ("e0", "e1"),
        {"s": "x", "e0": "x", "e1": "y"},
        {("s", "a"): {"e0": ONE}, ("e0", "a"): {"e0": ONE}},
    )
    diags = validate_library(Library(width=2, components=(bad,)))
    assert any("missing row" in d for d in diags)
    assert any("exit state" in d for d in diags)


def test_index_warns_beyond_wlog_bound_but_does_not_reject():
    good, _ = m_good()
    lib = Library(width=2, components=(good,))
    alpha = IndexFunction.from_map({("good", q): 9 for q in good.states})
    diags = validate_index(lib, alpha)
    assert any(d.startswith("warning:") for d in diags)
    assert all(d.startswith("warning:") for d in diags)


def test_pad_exits_identity_and_growth():
    good, alpha = m_good()
    assert pad_exits(good, 2) is good
    padded = pad_exits(good, 4)
    assert padded.width == 4
    # new exits have no incoming transitions
    new = set(padded.exits) - set(good.exits)
    for (_q, _a), row in padded.transitions.items():
        assert not new & set(row)
    with pytest.raises(ValueError):
        pad_exits(good, 1)


def test_pad_exits_preserves_reachable_fragment():
    good, alpha = m_good()
    padded = pad_exits(good, 3)
    alpha2 = IndexFunction.from_map({**alpha.priority, ("good", "_pad0"): 1})
    before = component_view(good, alpha)
    after = component_view(padded, alpha2)
    reach = {good.start}
    frontier = [good.start]
    while frontier:
        q = frontier.pop()
        for q2 in after.full_succ[q]:
            if q2 not in reach:
                reach.add(q2)
                frontier.append(q2)
    assert reach == set(good.states)
    for q in reach:
        for a in good.inputs:
            assert before.succ[(q, a)] == after.succ[(q, a)]


@pytest.mark.parametrize("priority,expected", [
    ({"s0": 1, "s1": 2}, {"s0": 3, "s1": 2}),
    ({"s0": 1, "s1": 2, "s2": 3}, {"s0": 3, "s1": 2, "s2": 1}),
    ({"s0": 2}, {"s0": 2}),
])
def test_min_even_conversion_reverses_order_and_keeps_parity(priority, expected):
    assert convert_min_even_priorities(priority) == expected


def test_total_relation_allows_everything():
    good, _ = m_good()
    lib = Library(width=2, components=(good,))
    rel = ExitControlRelation.total(lib)
    assert rel.allows(0, "good") and rel.allows(1, "good")
    assert not rel.allows(0, "other")
