"""Shared builders and seeded random generators for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from compsynth import (
    Component,
    Composer,
    Dpw,
    ExitControlRelation,
    IndexFunction,
    Library,
)
from compsynth.automata import (
    FALSE,
    TRUE,
    Acceptance,
    And,
    Atom,
    Or,
    TreeAutomaton,
)
from compsynth.composition import TreeGen

ONE = Fraction(1)
HALF = Fraction(1, 2)


def make_component(name, states, start, exits, output, trans,
                   inputs=("a", "b"), outputs=("x", "y")) -> Component:
    return Component(name=name, inputs=inputs, outputs=outputs, states=states,
                     start=start, exits=exits, output=output, transitions=trans)


def m_good() -> tuple[Component, IndexFunction]:
    comp = make_component(
        "good", ("s", "e0", "e1"), "s", ("e0", "e1"),
        {"s": "x", "e0": "x", "e1": "y"},
        {("s", "a"): {"e0": ONE}, ("s", "b"): {"e1": ONE}},
    )
    alpha = IndexFunction.from_map({("good", "s"): 2, ("good", "e0"): 2, ("good", "e1"): 1})
    return comp, alpha


def m_risky() -> tuple[Component, IndexFunction]:
    comp = make_component(
        "risky", ("s", "e0", "e1"), "s", ("e0", "e1"),
        {"s": "x", "e0": "x", "e1": "y"},
        {("s", "a"): {"e0": ONE}, ("s", "b"): {"s": ONE}},
    )
    alpha = IndexFunction.from_map({("risky", "s"): 1, ("risky", "e0"): 2, ("risky", "e1"): 2})
    return comp, alpha


def m_evensink() -> tuple[Component, IndexFunction]:
    comp = make_component(
        "evensink", ("s", "e0", "e1"), "s", ("e0", "e1"),
        {"s": "x", "e0": "x", "e1": "y"},
        {("s", "a"): {"s": ONE}, ("s", "b"): {"e0": ONE}},
    )
    alpha = IndexFunction.from_map({("evensink", "s"): 2, ("evensink", "e0"): 2, ("evensink", "e1"): 2})
    return comp, alpha


def family_library() -> tuple[Library, IndexFunction]:
    good, a1 = m_good()
    risky, a2 = m_risky()
    evensink, a3 = m_evensink()
    alpha = IndexFunction.from_map({**a1.priority, **a2.priority, **a3.priority})
    return Library(width=2, components=(good, risky, evensink)), alpha


def loop_composer(component_name: str, width: int = 2) -> Composer:
    return Composer(
        states=("m0",),
        start="m0",
        component_of={"m0": component_name},
        next={("m0", d): "m0" for d in range(width)},
        directions=tuple(range(width)),
    )


def xy_emitters() -> Library:
    def emitter(name, out):
        return make_component(name, ("s", "e"), "s", ("e",),
                              {"s": out, "e": out},
                              {("s", "a"): {"e": ONE}, ("s", "b"): {"e": ONE}})
    return Library(width=1, components=(emitter("mx", "x"), emitter("my", "y")))


def y_inf_monitor() -> Dpw:
    return Dpw(alphabet=("x", "y"), states=("sx", "sy"), start="sx",
               next={("sx", "x"): "sx", ("sx", "y"): "sy",
                     ("sy", "x"): "sx", ("sy", "y"): "sy"},
               priority={"sx": 1, "sy": 2})


def random_distribution(rng: random.Random, targets) -> dict:
    support = rng.sample(targets, rng.randint(1, min(3, len(targets))))
    weights = [rng.randint(1, 3) for _ in support]
    total = sum(weights)
    return {t: Fraction(w, total) for t, w in zip(support, weights)}


def random_component(rng: random.Random, name: str, *, max_states=6, n_letters=2,
                     width=2, max_priority=4,
                     inputs=None, outputs=("x", "y")) -> tuple[Component, dict]:
    inputs = inputs if inputs is not None else ("a", "b", "c")[:n_letters]
    n = rng.randint(width + 1, max_states)
    states = tuple(f"q{i}" for i in range(n))
    exits = tuple(rng.sample(states[1:], width))
    output = {q: rng.choice(outputs) for q in states}
    trans = {}
    for q in states:
        if q in exits:
            continue
        for a in inputs:
            trans[(q, a)] = random_distribution(rng, list(states))
    priorities = {(name, q): rng.randint(1, max_priority) for q in states}
    comp = Component(name=name, inputs=inputs, outputs=outputs, states=states,
                     start=states[0], exits=exits, output=output, transitions=trans)
    return comp, priorities


def random_library(rng: random.Random, *, n_components=2, width=2, max_states=5,
                   n_letters=2, max_priority=4) -> tuple[Library, IndexFunction]:
    priorities = {}
    comps = []
    for i in range(n_components):
        comp, prio = random_component(rng, f"c{i}", max_states=max_states,
                                      n_letters=n_letters, width=width,
                                      max_priority=max_priority)
        comps.append(comp)
        priorities.update(prio)
    alpha = IndexFunction.from_map(priorities)
    alpha = IndexFunction(priority=alpha.priority, max_priority=max_priority)
    return Library(width=width, components=tuple(comps)), alpha


def random_composer(rng: random.Random, lib: Library, *, max_instances=3) -> Composer:
    n = rng.randint(1, max_instances)
    states = tuple(f"m{i}" for i in range(n))
    return Composer(
        states=states,
        start="m0",
        component_of={m: rng.choice(lib.components).name for m in states},
        next={(m, d): rng.choice(states) for m in states for d in lib.directions},
        directions=lib.directions,
    )


def random_dpw(rng: random.Random, alphabet=("x", "y"), *, max_states=3,
               max_priority=3) -> Dpw:
    n = rng.randint(1, max_states)
    states = tuple(f"s{i}" for i in range(n))
    return Dpw(
        alphabet=alphabet,
        states=states,
        start=states[0],
        next={(s, a): rng.choice(states) for s in states for a in alphabet},
        priority={s: rng.randint(1, max_priority) for s in states},
    )


def random_formula(rng: random.Random, directions, states, depth=0):
    roll = rng.random()
    if roll < 0.04:
        return TRUE
    if roll < 0.08:
        return FALSE
    if roll < 0.5 or depth >= 2:
        return Atom(rng.choice(directions), rng.choice(states))
    ctor = And if rng.random() < 0.5 else Or
    children = tuple(random_formula(rng, directions, states, depth + 1)
                     for _ in range(rng.randint(1, 3)))
    return ctor(children)


def random_tree_automaton(rng: random.Random, *, alphabet=("x", "y"), directions=(0, 1),
                          max_states=6, kind="buchi") -> TreeAutomaton:
    n = rng.randint(1, max_states)
    states = tuple(f"q{i}" for i in range(n))
    delta = {(q, sigma): random_formula(rng, directions, states)
             for q in states for sigma in alphabet}
    member = frozenset(q for q in states if rng.random() < 0.5)
    return TreeAutomaton(
        alphabet=alphabet,
        directions=directions,
        states=states,
        start=states[0],
        delta=delta,
        acceptance=Acceptance(kind=kind, states=member),
    )


def random_tree_gen(rng: random.Random, *, alphabet=("x", "y"), directions=(0, 1),
                    max_states=3) -> TreeGen:
    n = rng.randint(1, max_states)
    states = tuple(f"v{i}" for i in range(n))
    return TreeGen(
        directions=directions,
        states=states,
        start=states[0],
        label={v: rng.choice(alphabet) for v in states},
        delta={(v, d): rng.choice(states) for v in states for d in directions},
    )
