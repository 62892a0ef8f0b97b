"""Alternating tree automata over labeled full D-trees.

Transition formulas are positive Boolean formulas over (direction, state)
atoms; True is the empty conjunction and False the empty disjunction, so
dualization is a plain connective swap.  The module builds the rank
automaton for choice-labeled trees, its projection to component-labeled
trees, unions, duals, the routing-safety automaton, products with it, and
the narrow operator that undoes xray-widening.  Membership of a regular
tree is decided by a parity game.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .composition import TreeGen
from .mdp import LabelTriple, strongly_connected_components
from .model import DirValue, ExitControlRelation, Name, State


# --- positive Boolean formulas -------------------------------------------


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    __slots__ = ("direction", "state")
    direction: DirValue
    state: State


@dataclass(frozen=True)
class And(Formula):
    __slots__ = ("items",)
    items: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    __slots__ = ("items",)
    items: tuple[Formula, ...]


TRUE = And(())
FALSE = Or(())


def f_and(items: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for f in items:
        if f == FALSE:
            return FALSE
        if f == TRUE:
            continue
        if isinstance(f, And):
            flat.extend(f.items)
        else:
            flat.append(f)
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def f_or(items: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for f in items:
        if f == TRUE:
            return TRUE
        if f == FALSE:
            continue
        if isinstance(f, Or):
            flat.extend(f.items)
        else:
            flat.append(f)
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def dual_formula(f: Formula) -> Formula:
    if isinstance(f, Atom):
        return f
    if isinstance(f, And):
        return Or(tuple(dual_formula(g) for g in f.items))
    if isinstance(f, Or):
        return And(tuple(dual_formula(g) for g in f.items))
    raise TypeError(f"not a formula: {f!r}")


def map_atoms(f: Formula, fn) -> Formula:
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, And):
        return f_and(map_atoms(g, fn) for g in f.items)
    if isinstance(f, Or):
        return f_or(map_atoms(g, fn) for g in f.items)
    raise TypeError(f"not a formula: {f!r}")


def minimal_models(f: Formula) -> list[frozenset[Atom]]:
    """Inclusion-minimal atom sets satisfying the formula."""
    if isinstance(f, Atom):
        return [frozenset([f])]
    if isinstance(f, Or):
        candidates: list[frozenset[Atom]] = []
        for g in f.items:
            candidates.extend(minimal_models(g))
    elif isinstance(f, And):
        candidates = [frozenset()]
        for g in f.items:
            candidates = [c | m for c in candidates for m in minimal_models(g)]
    else:
        raise TypeError(f"not a formula: {f!r}")
    candidates = sorted(set(candidates), key=len)
    kept: list[frozenset[Atom]] = []
    for c in candidates:
        if not any(k <= c for k in kept):
            kept.append(c)
    return kept


# --- automata --------------------------------------------------------------


BUCHI = "buchi"
COBUCHI = "cobuchi"
PARITY_MIN_EVEN = "parity-min-even"
PARITY_MIN_ODD = "parity-min-odd"


@dataclass(frozen=True)
class Acceptance:
    kind: str
    states: frozenset[State] = frozenset()
    priority: Mapping[State, int] | None = None

    def dual(self) -> "Acceptance":
        swap = {BUCHI: COBUCHI, COBUCHI: BUCHI,
                PARITY_MIN_EVEN: PARITY_MIN_ODD, PARITY_MIN_ODD: PARITY_MIN_EVEN}
        return Acceptance(kind=swap[self.kind], states=self.states, priority=self.priority)


@dataclass(frozen=True)
class TreeAutomaton:
    alphabet: tuple
    directions: tuple[DirValue, ...]
    states: tuple[State, ...]
    start: State
    delta: Mapping[tuple[State, object], Formula]
    acceptance: Acceptance

    def step(self, q: State, letter) -> Formula:
        return self.delta.get((q, letter), FALSE)


@dataclass(frozen=True)
class ChoiceFunction:
    """One (exit set, priority) pick per composer instance."""

    assignment: Mapping[Name, tuple[frozenset[DirValue], int]]

    def valid_for(self, composer, labels: Iterable[LabelTriple]) -> bool:
        table = {(t.component, t.exits, t.priority) for t in labels}
        return all(
            (composer.component_of[m], frozenset(x), j) in table
            for m, (x, j) in self.assignment.items()
        ) and all(m in self.assignment for m in composer.states)


def choice_ranks(composer, g: Mapping[Name, tuple[frozenset[DirValue], int]]) -> frozenset[int]:
    """Ranks of a choice function: the maximum priorities of the reachable
    ergodic sets of the graph it induces on the composer."""
    succ: dict[Name, set[Name]] = {m: set() for m in composer.states}
    prio: dict[Name, int] = {}
    for m in composer.states:
        x, j = g[m]
        prio[m] = j
        for d in x:
            succ[m].add(composer.next[(m, d)])
    reach = {composer.start}
    frontier = [composer.start]
    while frontier:
        m = frontier.pop()
        for m2 in succ[m]:
            if m2 not in reach:
                reach.add(m2)
                frontier.append(m2)
    sccs = strongly_connected_components(
        [m for m in composer.states if m in reach],
        lambda m: sorted(succ[m] & reach, key=repr),
    )
    ranks = set()
    for scc in sccs:
        if all(succ[m] <= scc for m in scc):
            ranks.add(max(prio[m] for m in scc))
    return frozenset(ranks)


def has_rank(composer, g, p: int) -> bool:
    return p in choice_ranks(composer, g)


# --- the rank automaton -----------------------------------------------------

SEARCH, CUT, WAIT, REACH, VISIT, ERR, DONE = (
    "search", "cut", "wait", "reach", "visit", "err", "done")


def _fanout(directions, assign: Mapping[DirValue, State], default: State) -> Formula:
    return And(tuple(Atom(d, assign.get(d, default)) for d in directions))


def build_rank_nbt(p: int, directions: tuple[DirValue, ...],
                   labels: Iterable[LabelTriple]) -> TreeAutomaton:
    """Nondeterministic Buchi automaton accepting tree(C, g) iff g has rank p.

    It guesses a full subtree through marked nodes: `search` walks to the
    subtree root and declares it (requiring its own priority <= p), `wait`
    and `reach` then guess, from every marked node, a marked path to a
    priority-p node, which is signalled by `visit`.  A marked dead end is
    accepted immediately if its priority is exactly p and refused otherwise.
    """
    alphabet = tuple(sorted(set(labels), key=repr))
    delta: dict[tuple[State, object], Formula] = {}
    for rho in alphabet:
        x, j = rho.exits, rho.priority
        in_order = tuple(d for d in directions if d in x)
        for q in (CUT, ERR, DONE):
            delta[(q, rho)] = _fanout(directions, {}, q)
        # search: keep looking in one marked child, or declare this node
        options: list[Formula] = [
            _fanout(directions, {d: SEARCH}, CUT) for d in in_order
        ]
        if j <= p:
            if in_order:
                options.append(_fanout(directions, {d: WAIT for d in in_order}, CUT))
            elif j == p:
                options.append(_fanout(directions, {}, DONE))
        delta[(SEARCH, rho)] = f_or(options)
        # wait/reach/visit agree on transitions and differ only in acceptance
        if j > p:
            row = _fanout(directions, {}, ERR)
        elif j == p:
            row = _fanout(directions, {d: VISIT for d in in_order}, CUT) if in_order \
                else _fanout(directions, {}, DONE)
        else:
            row = f_or(
                _fanout(directions, {**{d2: WAIT for d2 in in_order}, d: REACH}, CUT)
                for d in in_order
            )
        for q in (WAIT, REACH, VISIT):
            delta[(q, rho)] = row
    return TreeAutomaton(
        alphabet=alphabet,
        directions=directions,
        states=(SEARCH, CUT, WAIT, REACH, VISIT, ERR, DONE),
        start=SEARCH,
        delta=delta,
        acceptance=Acceptance(kind=BUCHI, states=frozenset({VISIT, WAIT, CUT, DONE})),
    )


def project_labels(aut: TreeAutomaton, labels: Iterable[LabelTriple]) -> TreeAutomaton:
    """Read component-labeled trees by guessing the (exit set, priority) part."""
    triples = sorted(set(labels), key=repr)
    names = tuple(dict.fromkeys(t.component for t in triples))
    delta: dict[tuple[State, object], Formula] = {}
    for q in aut.states:
        for name in names:
            delta[(q, name)] = f_or(
                aut.step(q, t) for t in triples if t.component == name
            )
    return TreeAutomaton(
        alphabet=names,
        directions=aut.directions,
        states=aut.states,
        start=aut.start,
        delta=delta,
        acceptance=aut.acceptance,
    )


def union(automata: Sequence[TreeAutomaton], *, alphabet=None, directions=None) -> TreeAutomaton:
    """Disjoint union with a fresh start whose rows disjoin the old starts'."""
    if automata:
        alphabet = automata[0].alphabet
        directions = automata[0].directions
        for a in automata[1:]:
            if a.alphabet != alphabet or a.directions != directions:
                raise ValueError("union requires identical alphabets and directions")
            if a.acceptance.kind != BUCHI:
                raise ValueError("union is defined for Buchi automata")
    elif alphabet is None or directions is None:
        raise ValueError("union of no automata needs an explicit alphabet and directions")
    start = ("union", "start")
    states: list[State] = [start]
    delta: dict[tuple[State, object], Formula] = {}
    accepting: set[State] = set()
    for i, a in enumerate(automata):
        for q in a.states:
            states.append((i, q))
        accepting.update((i, q) for q in a.acceptance.states)
        for (q, sigma), f in a.delta.items():
            delta[((i, q), sigma)] = map_atoms(f, lambda at, i=i: Atom(at.direction, (i, at.state)))
    for sigma in alphabet:
        delta[(start, sigma)] = f_or(
            map_atoms(a.step(a.start, sigma), lambda at, i=i: Atom(at.direction, (i, at.state)))
            for i, a in enumerate(automata)
        )
    return TreeAutomaton(
        alphabet=alphabet,
        directions=directions,
        states=tuple(states),
        start=start,
        delta=delta,
        acceptance=Acceptance(kind=BUCHI, states=frozenset(accepting)),
    )


def dualize(aut: TreeAutomaton) -> TreeAutomaton:
    """Complement over full trees: swap and/or (hence True/False) and
    dualize the acceptance condition."""
    return TreeAutomaton(
        alphabet=aut.alphabet,
        directions=aut.directions,
        states=aut.states,
        start=aut.start,
        delta={k: dual_formula(f) for k, f in aut.delta.items()},
        acceptance=aut.acceptance.dual(),
    )


def build_safety(rel: ExitControlRelation, directions: tuple[DirValue, ...],
                 component_names: Sequence[Name]) -> TreeAutomaton:
    """Deterministic safety automaton accepting tree(C) iff every routing
    step lands on a component the relation allows for that direction.

    State d remembers the direction a node was entered by; the root is
    unconstrained.
    """
    start: State = ("safety", "start")
    states = (start,) + tuple(directions)
    fan = And(tuple(Atom(d, d) for d in directions))
    delta: dict[tuple[State, object], Formula] = {}
    for name in component_names:
        delta[(start, name)] = fan
        for d in directions:
            delta[(d, name)] = fan if rel.allows(d, name) else FALSE
    return TreeAutomaton(
        alphabet=tuple(component_names),
        directions=directions,
        states=states,
        start=start,
        delta=delta,
        acceptance=Acceptance(kind=BUCHI, states=frozenset(states)),
    )


def _deterministic_rows(aut: TreeAutomaton) -> Mapping[tuple[State, object], Optional[Mapping[DirValue, State]]]:
    rows: dict[tuple[State, object], Optional[Mapping[DirValue, State]]] = {}
    for q in aut.states:
        for sigma in aut.alphabet:
            f = aut.step(q, sigma)
            if f == FALSE:
                rows[(q, sigma)] = None
                continue
            models = minimal_models(f)
            if len(models) != 1:
                raise ValueError("automaton is not deterministic")
            assign: dict[DirValue, State] = {}
            for at in models[0]:
                if at.direction in assign:
                    raise ValueError("automaton is not deterministic")
                assign[at.direction] = at.state
            if set(assign) != set(aut.directions):
                raise ValueError("deterministic automaton must cover every direction")
            rows[(q, sigma)] = assign
    return rows


def intersect(safety: TreeAutomaton, aut: TreeAutomaton) -> TreeAutomaton:
    """Product with a deterministic safety automaton; acceptance is inherited
    from the second argument."""
    if safety.alphabet != aut.alphabet or safety.directions != aut.directions:
        raise ValueError("intersection requires identical alphabets and directions")
    rows = _deterministic_rows(safety)
    states = tuple((s, q) for s in safety.states for q in aut.states)
    delta: dict[tuple[State, object], Formula] = {}
    for s in safety.states:
        for q in aut.states:
            for sigma in aut.alphabet:
                row = rows[(s, sigma)]
                if row is None:
                    delta[((s, q), sigma)] = FALSE
                else:
                    delta[((s, q), sigma)] = map_atoms(
                        aut.step(q, sigma),
                        lambda at, row=row: Atom(at.direction, (row[at.direction], at.state)),
                    )
    acc = aut.acceptance
    if acc.kind in (BUCHI, COBUCHI):
        lifted = Acceptance(kind=acc.kind,
                            states=frozenset(st for st in states if st[1] in acc.states))
    else:
        lifted = Acceptance(kind=acc.kind, priority={st: acc.priority[st[1]] for st in states})
    return TreeAutomaton(
        alphabet=aut.alphabet,
        directions=aut.directions,
        states=states,
        start=(safety.start, aut.start),
        delta=delta,
        acceptance=lifted,
    )


def narrow(aut: TreeAutomaton, extra: tuple, root_tag) -> TreeAutomaton:
    """From an automaton over (Z x Y)-labeled (X x Y)-trees, one over
    Z-labeled X-trees accepting T iff the original accepts xray(Y, wide(T)).

    States are paired with the Y-direction they read; atoms drop their Y
    coordinate and record it in the successor state instead.
    """
    for (_x, y) in aut.directions:
        if y not in extra:
            raise ValueError("directions do not factor through the given Y set")
    xs = tuple(dict.fromkeys(x for (x, _y) in aut.directions))
    zs = tuple(dict.fromkeys(z for (z, _y) in aut.alphabet))
    if root_tag not in extra:
        raise ValueError(f"root tag {root_tag!r} is not a Y value")
    states = tuple((q, y) for q in aut.states for y in extra)
    delta: dict[tuple[State, object], Formula] = {}
    for q in aut.states:
        for y in extra:
            for z in zs:
                f = aut.delta.get((q, (z, y)), FALSE)
                delta[((q, y), z)] = map_atoms(
                    f, lambda at: Atom(at.direction[0], (at.state, at.direction[1]))
                )
    acc = aut.acceptance
    if acc.kind in (BUCHI, COBUCHI):
        lifted = Acceptance(kind=acc.kind,
                            states=frozenset(st for st in states if st[0] in acc.states))
    else:
        lifted = Acceptance(kind=acc.kind, priority={st: acc.priority[st[0]] for st in states})
    return TreeAutomaton(
        alphabet=zs,
        directions=xs,
        states=states,
        start=(aut.start, root_tag),
        delta=delta,
        acceptance=lifted,
    )


def prune(aut: TreeAutomaton) -> TreeAutomaton:
    """Restrict to states reachable from the start through formula atoms."""
    reach = {aut.start}
    frontier = [aut.start]
    while frontier:
        q = frontier.pop()
        for sigma in aut.alphabet:
            for m in minimal_models(aut.step(q, sigma)):
                for at in m:
                    if at.state not in reach:
                        reach.add(at.state)
                        frontier.append(at.state)
    states = tuple(q for q in aut.states if q in reach)
    delta = {(q, sigma): aut.step(q, sigma) for q in states for sigma in aut.alphabet}
    acc = aut.acceptance
    if acc.kind in (BUCHI, COBUCHI):
        acc = Acceptance(kind=acc.kind, states=acc.states & reach)
    else:
        acc = Acceptance(kind=acc.kind, priority={q: acc.priority[q] for q in states})
    return TreeAutomaton(
        alphabet=aut.alphabet,
        directions=aut.directions,
        states=states,
        start=aut.start,
        delta=delta,
        acceptance=acc,
    )


def dnf_tuples(f: Formula, directions: tuple[DirValue, ...]) -> list[tuple[State, ...]]:
    """The direction-indexed successor tuples of a nondeterministic row."""
    tuples = []
    for m in minimal_models(f):
        assign: dict[DirValue, State] = {}
        for at in m:
            if at.direction in assign:
                raise ValueError("formula is not in nondeterministic form")
            assign[at.direction] = at.state
        if set(assign) != set(directions):
            raise ValueError("nondeterministic rows must cover every direction")
        tuples.append(tuple(assign[d] for d in directions))
    return tuples


# --- membership games --------------------------------------------------------


def _max_even_priorities(acc: Acceptance, states: Iterable[State]) -> Mapping[State, int]:
    """Translate the acceptance condition into max-even parity values."""
    if acc.kind == BUCHI:
        return {q: 2 if q in acc.states else 1 for q in states}
    if acc.kind == COBUCHI:
        return {q: 1 if q in acc.states else 0 for q in states}
    prio = dict(acc.priority)
    if acc.kind == PARITY_MIN_ODD:
        prio = {q: p + 1 for q, p in prio.items()}
    k = max(prio.values()) if prio else 1
    if k % 2 == 0:
        k += 1
    return {q: k + 1 - prio[q] for q in states}


def membership(aut: TreeAutomaton, tree: TreeGen) -> bool:
    """Whether the automaton accepts the tree the generator unwinds to.

    Solved as a parity game: the automaton player resolves disjunctions, the
    pathfinder resolves conjunctions and thereby chooses directions.
    """
    from .games import GameArena, solve_parity_game

    prio = _max_even_priorities(aut.acceptance, aut.states)
    owner: dict = {}
    priority: dict = {}
    succ: dict = {}
    seen: set = set()
    initial = ("s", aut.start, tree.start)
    stack = [initial]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        kind = v[0]
        if kind == "s":
            _, q, t = v
            f = aut.step(q, tree.label[t])
            owner[v] = 0
            priority[v] = prio[q]
            succ[v] = (("f", t, f),)
        elif kind == "f":
            _, t, f = v
            priority[v] = 0
            if isinstance(f, Atom):
                owner[v] = 0
                succ[v] = (("s", f.state, tree.delta[(t, f.direction)]),)
            elif isinstance(f, Or):
                owner[v] = 0
                succ[v] = tuple(("f", t, g) for g in f.items) or (("lose", 0),)
            elif isinstance(f, And):
                owner[v] = 1
                succ[v] = tuple(("f", t, g) for g in f.items) or (("win", 0),)
            else:
                raise TypeError(f"not a formula: {f!r}")
        elif kind == "win":
            owner[v], priority[v], succ[v] = 0, 0, (v,)
        elif kind == "lose":
            owner[v], priority[v], succ[v] = 0, 1, (v,)
        stack.extend(w for w in succ[v] if w not in seen)
    arena = GameArena(
        vertices=tuple(seen),
        owner=owner,
        priority=priority,
        succ=succ,
        initial=initial,
    )
    solution = solve_parity_game(arena)
    return initial in solution.winning[0]


def automaton_text(aut: TreeAutomaton) -> str:
    """Human-readable transition table."""

    def fmt(f: Formula) -> str:
        if f == TRUE:
            return "true"
        if f == FALSE:
            return "false"
        if isinstance(f, Atom):
            return f"({f.direction},{f.state})"
        sep = " & " if isinstance(f, And) else " | "
        return "(" + sep.join(fmt(g) for g in f.items) + ")"

    lines = [
        f"alphabet: {list(aut.alphabet)}",
        f"directions: {list(aut.directions)}",
        f"start: {aut.start}",
        f"acceptance: {aut.acceptance.kind} {sorted(aut.acceptance.states, key=repr) if aut.acceptance.kind in (BUCHI, COBUCHI) else dict(aut.acceptance.priority)}",
    ]
    for q in aut.states:
        for sigma in aut.alphabet:
            lines.append(f"  d({q}, {sigma}) = {fmt(aut.step(q, sigma))}")
    return "\n".join(lines)


def automaton_dot(aut: TreeAutomaton) -> str:
    """GraphViz rendering of the atom-level transition structure."""
    ids = {q: f"q{i}" for i, q in enumerate(aut.states)}
    lines = ["digraph automaton {"]
    for q in aut.states:
        accent = ", peripheries=2" if aut.acceptance.kind in (BUCHI, COBUCHI) and q in aut.acceptance.states else ""
        lines.append(f'  {ids[q]} [label="{q}"{accent}];')
    edges = set()
    for (q, sigma), f in aut.delta.items():
        for m in minimal_models(f):
            for at in m:
                edges.add((q, at.state, f"{sigma}/{at.direction}"))
    for q, q2, lab in sorted(edges, key=repr):
        lines.append(f'  {ids[q]} -> {ids[q2]} [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines)
