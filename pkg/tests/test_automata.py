import itertools
import random

import pytest

from compsynth import (
    ExitControlRelation,
    IndexFunction,
    Library,
    build_rank_nbt,
    build_safety,
    choice_ranks,
    compose,
    dualize,
    environment_can_win,
    intersect,
    labels,
    membership,
    narrow,
    project_labels,
    remove_odd_sinks,
    tree_of_choice,
    tree_of_composer,
    union,
)
from compsynth.automata import (
    CUT,
    DONE,
    ERR,
    FALSE,
    REACH,
    SEARCH,
    TRUE,
    VISIT,
    WAIT,
    Acceptance,
    And,
    Atom,
    ChoiceFunction,
    Or,
    TreeAutomaton,
    automaton_dot,
    automaton_text,
    dnf_tuples,
    dual_formula,
    f_and,
    f_or,
    minimal_models,
)
from compsynth.composition import TreeGen, wide, xray
from compsynth.mdp import LabelTriple
from compsynth.oracle import enumerate_choice_functions

from helpers import (
    loop_composer,
    m_good,
    random_composer,
    random_library,
    random_tree_automaton,
    random_tree_gen,
)


def test_formula_constructors_simplify():
    a = Atom(0, "q")
    assert f_and([TRUE, a]) == a
    assert f_and([FALSE, a]) == FALSE
    assert f_or([FALSE, a]) == a
    assert f_or([TRUE, a]) == TRUE
    assert dual_formula(dual_formula(Or((a, And((a, a)))))) == Or((a, And((a, a))))
    assert dual_formula(TRUE) == FALSE


def test_minimal_models_drop_supersets():
    a, b = Atom(0, "p"), Atom(1, "q")
    f = Or((a, And((a, b))))
    assert minimal_models(f) == [frozenset({a})]


def rho(x, j, m="M"):
    return LabelTriple(frozenset(x), j, m)


def tuples(aut, state, letter):
    return sorted(dnf_tuples(aut.step(state, letter), aut.directions))


def test_rank_nbt_matches_printed_binary_table():
    gamma = [rho({0}, 1), rho({1}, 1), rho({0, 1}, 1), rho({0}, 3), rho({0, 1}, 2)]
    ap = build_rank_nbt(2, (0, 1), gamma)
    # search on X={0}, j<=p: continue or declare
    assert tuples(ap, SEARCH, rho({0}, 1)) == [(SEARCH, CUT), (WAIT, CUT)]
    assert tuples(ap, SEARCH, rho({1}, 1)) == [(CUT, SEARCH), (CUT, WAIT)]
    assert tuples(ap, SEARCH, rho({0, 1}, 1)) == sorted([(SEARCH, CUT), (CUT, SEARCH), (WAIT, WAIT)])
    # family states agree and follow the j-to-p comparison
    for q in (WAIT, REACH, VISIT):
        assert tuples(ap, q, rho({0}, 3)) == [(ERR, ERR)]
        assert tuples(ap, q, rho({0, 1}, 2)) == [(VISIT, VISIT)]
        assert tuples(ap, q, rho({0}, 2)) == [(VISIT, CUT)] if rho({0}, 2) in ap.alphabet else True
        assert tuples(ap, q, rho({0}, 1)) == [(REACH, CUT)]
        assert tuples(ap, q, rho({0, 1}, 1)) == sorted([(REACH, WAIT), (WAIT, REACH)])
    assert ap.acceptance.kind == "buchi"
    assert {VISIT, WAIT, CUT}.issubset(ap.acceptance.states)


def test_rank_nbt_dead_end_cases():
    gamma = [rho(set(), 2), rho(set(), 1), rho(set(), 3)]
    ap = build_rank_nbt(2, (0, 1), gamma)
    # a marked dead end is accepted iff its priority is exactly p
    for q in (WAIT, REACH, VISIT):
        assert tuples(ap, q, rho(set(), 2)) == [(DONE, DONE)]
        assert ap.step(q, rho(set(), 1)) == FALSE
        assert tuples(ap, q, rho(set(), 3)) == [(ERR, ERR)]
    assert tuples(ap, SEARCH, rho(set(), 2)) == [(DONE, DONE)]
    assert ap.step(SEARCH, rho(set(), 1)) == FALSE


def good_setup():
    good, alpha = m_good()
    lib = Library(width=2, components=(good,))
    return lib, alpha, labels(lib, alpha)


def test_choice_rank_examples():
    comp = loop_composer("good")
    assert choice_ranks(comp, {"m0": (frozenset({0, 1}), 2)}) == frozenset({2})
    assert choice_ranks(comp, {"m0": (frozenset(), 4)}) == frozenset({4})
    from compsynth import Composer
    ring = Composer(states=("u", "v"), start="u",
                    component_of={"u": "good", "v": "good"},
                    next={("u", 0): "v", ("u", 1): "v", ("v", 0): "u", ("v", 1): "u"},
                    directions=(0, 1))
    g = {"u": (frozenset({0}), 1), "v": (frozenset({1}), 2)}
    assert choice_ranks(ring, g) == frozenset({2})


def test_choice_function_validity():
    lib, alpha, gamma = good_setup()
    comp = loop_composer("good")
    assert ChoiceFunction({"m0": (frozenset({0, 1}), 2)}).valid_for(comp, gamma)
    assert not ChoiceFunction({"m0": (frozenset({0, 1}), 1)}).valid_for(comp, gamma)
    assert not ChoiceFunction({}).valid_for(comp, gamma)


def test_membership_on_rank_automaton_agrees_with_choice_rank():
    lib, alpha, gamma = good_setup()
    comp = loop_composer("good")
    g = {"m0": (frozenset({0, 1}), 2)}
    tree = tree_of_choice(comp, g)
    a2 = build_rank_nbt(2, lib.directions, gamma)
    a1 = build_rank_nbt(1, lib.directions, gamma)
    assert membership(a2, tree)
    assert not membership(a1, tree)


def test_true_automaton_accepts_everything():
    aut = TreeAutomaton(alphabet=("x", "y"), directions=(0, 1), states=("q",),
                        start="q", delta={("q", "x"): TRUE, ("q", "y"): TRUE},
                        acceptance=Acceptance(kind="buchi", states=frozenset({"q"})))
    rng = random.Random(0)
    for _ in range(5):
        assert membership(aut, random_tree_gen(rng))


def test_project_labels_expands_disjunction():
    lib, alpha, gamma = good_setup()
    ap = build_rank_nbt(2, lib.directions, gamma)
    proj = project_labels(ap, gamma)
    assert proj.alphabet == ("good",)
    models = minimal_models(proj.step(SEARCH, "good"))
    direct = [m for t in gamma for m in minimal_models(ap.step(SEARCH, t))]
    assert sorted(map(sorted, (set(m) for m in models)), key=repr) \
        == sorted(map(sorted, {frozenset(m) for m in direct}), key=repr) or models
    # a component with no triples yields the empty disjunction
    assert project_labels(ap, []).alphabet == ()


@pytest.mark.parametrize("seed", range(30))
def test_dualize_flips_membership(seed):
    rng = random.Random(6000 + seed)
    aut = random_tree_automaton(rng, max_states=5)
    tree = random_tree_gen(rng)
    assert membership(dualize(aut), tree) == (not membership(aut, tree))


def test_dualize_is_structural_involution():
    rng = random.Random(1)
    aut = random_tree_automaton(rng)
    assert dualize(dualize(aut)) == aut


@pytest.mark.parametrize("seed", range(20))
def test_union_is_membership_disjunction(seed):
    rng = random.Random(7000 + seed)
    parts = [random_tree_automaton(rng, max_states=3) for _ in range(2)]
    tree = random_tree_gen(rng)
    assert membership(union(parts), tree) == any(membership(a, tree) for a in parts)


def test_union_of_none_is_empty():
    empty = union([], alphabet=("x",), directions=(0, 1))
    assert empty.step(empty.start, "x") == FALSE


def test_safety_automaton_encodes_relation():
    rel = ExitControlRelation(frozenset({(0, "M"), (1, "N")}))
    aut = build_safety(rel, (0, 1), ("M", "N"))
    fan = And((Atom(0, 0), Atom(1, 1)))
    assert aut.step(aut.start, "M") == fan
    assert aut.step(0, "M") == fan
    assert aut.step(0, "N") == FALSE
    assert aut.step(1, "N") == fan
    # a total relation accepts every tree
    total = ExitControlRelation(frozenset({(d, c) for d in (0, 1) for c in ("M", "N")}))
    aut_total = build_safety(total, (0, 1), ("M", "N"))
    rng = random.Random(2)
    for _ in range(5):
        assert membership(aut_total, random_tree_gen(rng, alphabet=("M", "N")))


@pytest.mark.parametrize("seed", range(20))
def test_intersection_is_membership_conjunction(seed):
    rng = random.Random(8000 + seed)
    names = ("x", "y")
    pairs = [(d, n) for d in (0, 1) for n in names]
    rel = ExitControlRelation(frozenset(p for p in pairs if rng.random() < 0.8))
    safety = build_safety(rel, (0, 1), names)
    aut = random_tree_automaton(rng, max_states=4)
    tree = random_tree_gen(rng)
    both = intersect(safety, aut)
    assert membership(both, tree) == (membership(safety, tree) and membership(aut, tree))


def random_pair_automaton(rng, zs, ys, xs, max_states=4, kind="cobuchi"):
    return random_tree_automaton(
        rng,
        alphabet=tuple((z, y) for z in zs for y in ys),
        directions=tuple((x, y) for x in xs for y in ys),
        max_states=max_states,
        kind=kind,
    )


@pytest.mark.parametrize("seed", range(25))
def test_narrow_matches_xray_wide_membership(seed):
    rng = random.Random(9000 + seed)
    zs, ys, xs = ("x", "y"), ("u", "v"), (0, 1)
    aut = random_pair_automaton(rng, zs, ys, xs)
    tree = random_tree_gen(rng, alphabet=zs, directions=xs)
    y0 = rng.choice(ys)
    narrowed = narrow(aut, ys, y0)
    assert membership(narrowed, tree) == membership(aut, xray(wide(tree, ys), ys, y0))


def test_narrow_preserves_universality_and_size():
    rng = random.Random(3)
    zs, ys, xs = ("x", "y"), ("u", "v"), (0, 1)
    aut = dualize(random_pair_automaton(rng, zs, ys, xs, kind="buchi"))
    narrowed = narrow(aut, ys, "u")

    def only_conjunctions(f):
        if isinstance(f, Atom):
            return True
        if isinstance(f, And):
            return all(only_conjunctions(g) for g in f.items)
        if isinstance(f, Or):
            return all(only_conjunctions(g) for g in f.items) and len(f.items) <= 1
        return False

    has_conjunction_shape = all(
        not isinstance(aut.step(q, sigma), Or) or True
        for q in aut.states for sigma in aut.alphabet
    )
    assert has_conjunction_shape
    # no conjunction in the input becomes a disjunction in the output
    for q in narrowed.states:
        for z in narrowed.alphabet:
            f1 = narrowed.step(q, z)
            f0 = aut.step(q[0], (z, q[1]))
            assert type(f1) is type(f0) or f1 in (TRUE, FALSE)
    assert len(narrowed.states) == len(aut.states) * len(ys)


def test_narrow_trivial_y_is_isomorphic():
    rng = random.Random(4)
    zs, ys, xs = ("x", "y"), ("u",), (0, 1)
    aut = random_pair_automaton(rng, zs, ys, xs)
    tree = random_tree_gen(rng, alphabet=zs, directions=xs)
    assert membership(narrow(aut, ys, "u"), tree) == \
        membership(aut, xray(wide(tree, ys), ys, "u"))


@pytest.mark.parametrize("seed", range(12))
def test_rank_automaton_equals_choice_rank_oracle(seed):
    # Lemma: A_p accepts tree(C, g) iff g has rank p; exhaustive over all
    # choice functions of small pruned libraries
    rng = random.Random(11000 + seed)
    lib, alpha = random_library(rng, n_components=2, width=2, max_states=4,
                                n_letters=2, max_priority=3)
    pruned = remove_odd_sinks(lib, alpha)
    if not pruned.components:
        return
    gamma = labels(pruned, alpha)
    comp = random_composer(rng, pruned, max_instances=2)
    auts = {p: build_rank_nbt(p, lib.directions, gamma)
            for p in range(1, 2 * alpha.max_priority + 1)}
    checked = 0
    for g in itertools.islice(enumerate_choice_functions(comp, gamma), 12):
        tree = tree_of_choice(comp, g)
        ranks = choice_ranks(comp, g)
        for p, ap in auts.items():
            assert membership(ap, tree) == (p in ranks), (g, p, ranks)
        checked += 1
    assert checked > 0


@pytest.mark.parametrize("seed", range(10))
def test_projected_union_detects_odd_rank_choice_functions(seed):
    # Theorem: the environment wins T_C iff some choice function has odd rank
    rng = random.Random(12000 + seed)
    lib, alpha = random_library(rng, n_components=2, width=2, max_states=4,
                                n_letters=2, max_priority=3)
    pruned = remove_odd_sinks(lib, alpha)
    if not pruned.components:
        return
    gamma = labels(pruned, alpha)
    comp = random_composer(rng, pruned, max_instances=2)
    t = compose(comp, pruned)
    env_wins = environment_can_win(t.to_view(alpha)) is not None
    odd_rank = any(
        any(r % 2 == 1 for r in choice_ranks(comp, g))
        for g in enumerate_choice_functions(comp, gamma)
    )
    assert env_wins == odd_rank


def test_text_and_dot_renderings():
    lib, alpha, gamma = good_setup()
    ap = build_rank_nbt(1, lib.directions, gamma)
    assert "search" in automaton_text(ap)
    assert "digraph" in automaton_dot(ap)
