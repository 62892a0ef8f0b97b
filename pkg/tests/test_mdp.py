import itertools
import random
from fractions import Fraction

import pytest

from compsynth import (
    IndexFunction,
    Library,
    MemorylessStrategy,
    component_labels,
    environment_can_win,
    environment_wins_memoryless,
    ergodic_sets,
    even_sink_feasible,
    induced_graph,
    is_odd_sink,
    label_member,
    labels,
    remove_odd_sinks,
    satisfies_index,
)
from compsynth.mdp import (
    LabelTriple,
    SupportGraph,
    _iter_supports,
    _label_fast_path,
    _support_label,
    component_view,
)
from compsynth.oracle import enumerate_pure_memoryless, enumerate_supports

from helpers import (
    HALF,
    ONE,
    family_library,
    m_evensink,
    m_good,
    m_risky,
    make_component,
    random_component,
)


def single_state_component(rows):
    states = ("s", "e0", "e1")
    return make_component("m", states, "s", ("e0", "e1"),
                          {"s": "x", "e0": "x", "e1": "y"}, rows)


def test_induced_graph_self_loop():
    comp = single_state_component({("s", "a"): {"s": ONE}, ("s", "b"): {"e0": ONE}})
    alpha = IndexFunction.from_map({("m", q): 2 for q in comp.states})
    g = induced_graph(comp, MemorylessStrategy({"s": frozenset("a")}), alpha)
    assert ("s", "s") in g.edges
    assert ("s", "e0") not in g.edges
    assert ("e0", "e0") in g.edges and ("e1", "e1") in g.edges


def test_induced_graph_expands_probabilistic_support():
    comp = single_state_component({("s", "a"): {"e0": HALF, "e1": HALF},
                                   ("s", "b"): {"s": ONE}})
    alpha = IndexFunction.from_map({("m", q): 2 for q in comp.states})
    g = induced_graph(comp, MemorylessStrategy({"s": frozenset("a")}), alpha)
    assert {("s", "e0"), ("s", "e1"), ("e0", "e0"), ("e1", "e1")} == set(g.edges)


def test_induced_graph_requires_total_strategy():
    comp = single_state_component({("s", "a"): {"e0": ONE}, ("s", "b"): {"e1": ONE}})
    alpha = IndexFunction.from_map({("m", q): 2 for q in comp.states})
    with pytest.raises(ValueError):
        induced_graph(comp, MemorylessStrategy({}), alpha)


def test_ergodic_sets_chain_and_cycles():
    chain = SupportGraph(vertices=("a", "b", "c"),
                         edges=frozenset({("a", "b"), ("b", "c"), ("c", "c")}),
                         start="a")
    assert ergodic_sets(chain) == [frozenset({"c"})]
    cycles = SupportGraph(
        vertices=("a", "b", "c", "d"),
        edges=frozenset({("a", "b"), ("b", "a"), ("c", "d"), ("d", "c")}),
        start="a")
    assert sorted(ergodic_sets(cycles), key=sorted) == [frozenset({"a", "b"}),
                                                        frozenset({"c", "d"})]


def brute_force_ergodic_sets(g: SupportGraph):
    """Definition check: reachability closures that are closed and mutually
    reaching."""
    reach = {}
    for v in g.vertices:
        seen = {v}
        frontier = [v]
        while frontier:
            u = frontier.pop()
            for w in g.succ[u]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        reach[v] = seen
    out = []
    for v in g.vertices:
        if all(v in reach[w] for w in reach[v]):
            if reach[v] not in out:
                out.append(reach[v])
    return sorted((frozenset(s) for s in out), key=sorted)


@pytest.mark.parametrize("seed", range(25))
def test_ergodic_sets_match_brute_force_on_random_digraphs(seed):
    rng = random.Random(seed)
    n = 8
    vertices = tuple(range(n))
    edges = set()
    for v in vertices:
        for w in rng.sample(vertices, rng.randint(1, 3)):
            edges.add((v, w))
    g = SupportGraph(vertices=vertices, edges=frozenset(edges), start=0)
    assert sorted(ergodic_sets(g), key=sorted) == brute_force_ergodic_sets(g)


def test_all_even_priorities_never_win():
    comp = single_state_component({("s", "a"): {"s": ONE}, ("s", "b"): {"e0": ONE}})
    alpha = IndexFunction.from_map({("m", q): 2 for q in comp.states})
    assert environment_can_win(comp, alpha) is None
    assert satisfies_index(comp, alpha)


def test_reachable_odd_absorbing_state_wins():
    comp = single_state_component({("s", "a"): {"e0": ONE}, ("s", "b"): {"e1": ONE}})
    alpha = IndexFunction.from_map({("m", "s"): 2, ("m", "e0"): 1, ("m", "e1"): 2})
    f = MemorylessStrategy({"s": frozenset("a")})
    assert environment_wins_memoryless(comp, alpha, f)
    assert environment_can_win(comp, alpha) is not None


def test_risky_component_examples():
    risky, alpha = m_risky()
    f = MemorylessStrategy({"s": frozenset("b")})
    assert environment_wins_memoryless(risky, alpha, f)
    witness = environment_can_win(risky, alpha)
    assert witness is not None and witness.support["s"] == frozenset("b")
    assert is_odd_sink(risky, alpha)
    assert not satisfies_index(risky, alpha)


def test_good_loop_composition_satisfies():
    from compsynth import compose
    from helpers import loop_composer
    good, alpha = m_good()
    lib = Library(width=2, components=(good,))
    t = compose(loop_composer("good"), lib)
    assert satisfies_index(t.to_view(alpha))


@pytest.mark.parametrize("seed", range(40))
def test_environment_can_win_agrees_with_pure_enumeration(seed):
    rng = random.Random(1000 + seed)
    comp, prio = random_component(rng, "r", max_states=6, n_letters=3, width=2)
    alpha = IndexFunction.from_map(prio)
    verdict = environment_can_win(comp, alpha)
    brute = any(environment_wins_memoryless(comp, alpha, f)
                for f in enumerate_pure_memoryless(comp))
    assert (verdict is not None) == brute
    if verdict is not None:
        assert verdict.is_pure()
        assert environment_wins_memoryless(comp, alpha, verdict)


def test_evensink_component_examples():
    evensink, alpha = m_evensink()
    assert even_sink_feasible(evensink, alpha, frozenset())
    assert not is_odd_sink(evensink, alpha)
    lib = Library(width=2, components=(evensink,))
    triples = {(tuple(sorted(t.exits)), t.priority) for t in labels(lib, alpha)}
    assert ((), 4) in triples


def test_component_leaving_immediately_has_no_sinks():
    comp = single_state_component({("s", "a"): {"e0": ONE}, ("s", "b"): {"e1": ONE}})
    alpha = IndexFunction.from_map({("m", q): 2 for q in comp.states})
    assert not is_odd_sink(comp, alpha)
    for x in (frozenset(), frozenset({0}), frozenset({1}), frozenset({0, 1})):
        assert not even_sink_feasible(comp, alpha, x)


def test_good_labels_are_exactly_three():
    good, alpha = m_good()
    lib = Library(width=2, components=(good,))
    got = {(tuple(sorted(t.exits)), t.priority) for t in labels(lib, alpha)}
    assert got == {((0,), 2), ((1,), 2), ((0, 1), 2)}


def test_label_member_range_and_members():
    good, alpha = m_good()
    assert label_member(frozenset({0}), 2, good, alpha)
    assert not label_member(frozenset({0}), 1, good, alpha)
    assert not label_member(frozenset({0}), 5, good, alpha)  # above 2*max


def test_labels_of_empty_library_is_empty():
    lib = Library(width=2, components=())
    alpha = IndexFunction.from_map({})
    assert labels(lib, alpha) == frozenset()


def test_family_labels_respect_size_bound():
    lib, alpha = family_library()
    gamma = labels(lib, alpha)
    assert len(gamma) <= alpha.max_priority * len(lib.components) * 2 ** lib.width


def test_remove_odd_sinks_on_family():
    lib, alpha = family_library()
    pruned = remove_odd_sinks(lib, alpha)
    assert {c.name for c in pruned.components} == {"good", "evensink"}


def test_remove_odd_sinks_keeps_all_even_library():
    good, alpha = m_good()
    alpha = IndexFunction.from_map({("good", q): 2 for q in good.states})
    lib = Library(width=2, components=(good,))
    assert remove_odd_sinks(lib, alpha).components == lib.components


@pytest.mark.parametrize("seed", range(30))
def test_fast_path_agrees_with_support_enumeration(seed):
    rng = random.Random(2000 + seed)
    comp, prio = random_component(rng, "r", max_states=6, n_letters=3, width=2)
    alpha = IndexFunction.from_map(prio)
    view = component_view(comp, alpha)
    truth: dict[tuple, bool] = {}
    non_sink: set[tuple] = set()
    for support in _iter_supports(view):
        x, j = _support_label(view, support)
        truth[(x, j)] = True
        if j <= alpha.max_priority:
            # the label arose from a strategy that is not an even sink; check
            # whether it is sink-free altogether
            g = induced_graph(view, MemorylessStrategy(support))
            from compsynth.mdp import ergodic_sets as ergo, reachable_states
            reach = reachable_states(g)
            if all(e & view.exits or not (e & reach) for e in ergo(g)):
                non_sink.add((x, j))
    for x_bits in range(4):
        x = frozenset(d for d in (0, 1) if x_bits >> d & 1)
        for j in range(1, 2 * alpha.max_priority + 1):
            fast = _label_fast_path(view, x, j)
            assert not (fast and not truth.get((x, j), False)), "fast path unsound"
            if (x, j) in non_sink:
                assert fast, f"fast path missed non-sink label {(set(x), j)}"


def test_region_full_support_reach_is_maximal():
    # monotonicity: the full-support strategy on an allowed region reaches a
    # superset of the states reachable by any strategy confined to it
    rng = random.Random(7)
    for _ in range(20):
        comp, prio = random_component(rng, "r", max_states=6, n_letters=2, width=2)
        alpha = IndexFunction.from_map(prio)
        view = component_view(comp, alpha)
        full = {q: frozenset(view.letters) for q in view.non_exit_states()}
        g_full = induced_graph(view, MemorylessStrategy(full))
        from compsynth.mdp import reachable_states
        max_reach = reachable_states(g_full)
        for support in itertools.islice(_iter_supports(view), 10):
            g = induced_graph(view, MemorylessStrategy(support))
            assert reachable_states(g) <= max_reach
