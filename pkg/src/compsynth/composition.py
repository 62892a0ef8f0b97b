"""Control-flow compositions, monitor products, and regular-tree generators.

A composer stitches component instances into one exitless transducer T_C;
its unwinding tree(C) is only ever represented by a finite generator.  The
wide/hide/xray operators transfer trees between direction alphabets D and
D x Q_A for the monitor reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .mdp import LabelTriple, McView
from .model import (
    Component,
    Composer,
    DirValue,
    Dist,
    Dpw,
    ExitControlRelation,
    IndexFunction,
    Letter,
    Library,
    Name,
    State,
)

ONE = Fraction(1)


@dataclass(frozen=True)
class Composition:
    """The exitless probabilistic transducer defined by a composer.

    States are (instance, component-state) pairs; exit states of each
    instance carry a single probability-1 edge to the start state of the
    instance the composer routes to.
    """

    inputs: tuple[Letter, ...]
    outputs: tuple[Letter, ...]
    states: tuple[State, ...]
    start: State
    output: Mapping[State, Letter]
    transitions: Mapping[tuple[State, Letter], Dist]
    instance_component: Mapping[Name, Name]

    def to_view(self, alpha: IndexFunction) -> McView:
        succ = {
            key: frozenset(q2 for q2, p in row.items() if p > 0)
            for key, row in self.transitions.items()
        }
        return McView(
            states=self.states,
            start=self.start,
            letters=self.inputs,
            succ=succ,
            exits=frozenset(),
            exit_dir={},
            priority={
                (m, q): alpha.of(self.instance_component[m], q) for (m, q) in self.states
            },
            max_priority=alpha.max_priority,
        )


def compose(comp: Composer, lib: Library) -> Composition:
    """Build T_C.  Internal rows copy the component rows; each exit state of
    an instance feeds the routed instance's start state with probability 1."""
    for m in comp.states:
        name = comp.component_of[m]
        if name not in lib.by_name:
            raise KeyError(f"composer instance {m!r} names missing component {name!r}")
    states: list[State] = []
    output: dict[State, Letter] = {}
    transitions: dict[tuple[State, Letter], Dist] = {}
    base = lib.components[0]
    for m in comp.states:
        c = lib.component(comp.component_of[m])
        for q in c.states:
            states.append((m, q))
            output[(m, q)] = c.output[q]
        for q in c.states:
            if c.is_exit(q):
                target = comp.route(m, lib.directions[c.exit_position[q]])
                entry = (target, lib.component(comp.component_of[target]).start)
                for a in c.inputs:
                    transitions[((m, q), a)] = {entry: ONE}
            else:
                for a in c.inputs:
                    transitions[((m, q), a)] = {
                        (m, q2): p for q2, p in c.transitions[(q, a)].items()
                    }
    start_component = lib.component(comp.component_of[comp.start])
    return Composition(
        inputs=base.inputs,
        outputs=base.outputs,
        states=tuple(states),
        start=(comp.start, start_component.start),
        output=output,
        transitions=transitions,
        instance_component=dict(comp.component_of),
    )


def product_with_monitor(comp: Component, monitor: Dpw, s: State) -> Component:
    """The component M x A_s: run the monitor alongside the component.

    A product state (q, t) says the monitor has just consumed the output of
    q and sits at t, so the monitor advances on the output of the state
    being entered and the start is (q0, step(s, out(q0))).  Under this
    convention a control transfer hands the exit's monitor state directly to
    the entered component and no output letter is ever skipped, which is
    what makes the exit-control relation of the augmented library sound.
    Exits are ordered direction-major, then by monitor-state order.
    """
    if set(comp.outputs) != set(monitor.alphabet):
        raise ValueError(
            f"component {comp.name!r} outputs {comp.outputs} but the monitor reads {monitor.alphabet}"
        )
    states = tuple((q, t) for q in comp.states for t in monitor.states)
    exits = tuple((q, t) for q in comp.exits for t in monitor.states)
    output = {(q, t): comp.output[q] for (q, t) in states}
    transitions: dict[tuple[State, Letter], Dist] = {}
    for q in comp.states:
        if comp.is_exit(q):
            continue
        for t in monitor.states:
            for a in comp.inputs:
                row: dict[State, object] = {}
                for q2, p in comp.transitions[(q, a)].items():
                    row[(q2, monitor.step(t, comp.output[q2]))] = p
                transitions[((q, t), a)] = row
    return Component(
        name=(comp.name, s),
        inputs=comp.inputs,
        outputs=comp.outputs,
        states=states,
        start=(comp.start, monitor.step(s, comp.output[comp.start])),
        exits=exits,
        output=output,
        transitions=transitions,
    )


@dataclass(frozen=True)
class AugmentedLibrary:
    """Library of monitor products, its exit-control relation and priorities."""

    library: Library
    relation: ExitControlRelation
    index: IndexFunction
    base: Library
    monitor: Dpw


def augment_library(lib: Library, monitor: Dpw) -> AugmentedLibrary:
    """All products M x A_s with width D x Q_A, the relation that forces the
    entered product to carry the monitor state recorded in the exit
    direction, and priorities read off the monitor coordinate."""
    components = tuple(
        product_with_monitor(c, monitor, s) for c in lib.components for s in monitor.states
    )
    directions = tuple((d, s) for d in lib.directions for s in monitor.states)
    width = lib.width * len(monitor.states)
    allowed = frozenset(
        ((d, s), (c.name, s))
        for d in lib.directions
        for s in monitor.states
        for c in lib.components
    )
    priority = {
        (c.name, (q, t)): monitor.priority[t] for c in components for (q, t) in c.states
    }
    return AugmentedLibrary(
        library=Library(width=width, components=components, directions=directions),
        relation=ExitControlRelation(allowed),
        index=IndexFunction.from_map(priority),
        base=lib,
        monitor=monitor,
    )


def augment_composer(comp: Composer, monitor: Dpw) -> Composer:
    """Pair every instance with a monitor state; routing keeps the monitor
    state carried by the exit direction."""
    states = tuple((m, s) for m in comp.states for s in monitor.states)
    nxt = {
        ((m, s), (d, s2)): (comp.next[(m, d)], s2)
        for m in comp.states
        for s in monitor.states
        for d in comp.directions
        for s2 in monitor.states
    }
    return Composer(
        states=states,
        start=(comp.start, monitor.start),
        component_of={(m, s): (comp.component_of[m], s) for (m, s) in states},
        next=nxt,
        directions=tuple((d, s) for d in comp.directions for s in monitor.states),
    )


def monitored_composition_view(t: Composition, monitor: Dpw) -> McView:
    """Qualitative view of T_C x A with monitor priorities (max-even)."""
    if set(t.outputs) != set(monitor.alphabet):
        raise ValueError("composition outputs do not match the monitor alphabet")
    states = tuple((q, s) for q in t.states for s in monitor.states)
    succ: dict[tuple[State, Letter], frozenset[State]] = {}
    for q in t.states:
        for s in monitor.states:
            s2 = monitor.step(s, t.output[q])
            for a in t.inputs:
                succ[((q, s), a)] = frozenset(
                    (q2, s2) for q2, p in t.transitions[(q, a)].items() if p > 0
                )
    return McView(
        states=states,
        start=(t.start, monitor.start),
        letters=t.inputs,
        succ=succ,
        exits=frozenset(),
        exit_dir={},
        priority={(q, s): monitor.priority[s] for (q, s) in states},
        max_priority=max(monitor.priority.values()),
    )


@dataclass(frozen=True)
class TreeGen:
    """Finite generator of a regular labeled full D-tree."""

    directions: tuple[DirValue, ...]
    states: tuple[State, ...]
    start: State
    label: Mapping[State, object]
    delta: Mapping[tuple[State, DirValue], State]

    def node_state(self, word: Sequence[DirValue]) -> State:
        v = self.start
        for d in word:
            v = self.delta[(v, d)]
        return v

    def node_label(self, word: Sequence[DirValue]):
        return self.label[self.node_state(word)]


def tree_of_composer(comp: Composer) -> TreeGen:
    """Generator of tree(C): node x is labeled with the component name of the
    instance reached along x."""
    return TreeGen(
        directions=comp.directions,
        states=comp.states,
        start=comp.start,
        label=dict(comp.component_of),
        delta=dict(comp.next),
    )


def tree_of_choice(comp: Composer, g: Mapping[Name, tuple[frozenset[DirValue], int]]) -> TreeGen:
    """Generator of tree(C, g): labels are (exit set, priority, component)."""
    labels = {}
    for m in comp.states:
        if m not in g:
            raise KeyError(f"choice function is not defined on instance {m!r}")
        x, j = g[m]
        labels[m] = LabelTriple(frozenset(x), j, comp.component_of[m])
    return TreeGen(
        directions=comp.directions,
        states=comp.states,
        start=comp.start,
        label=labels,
        delta=dict(comp.next),
    )


def marked_nodes(tree: TreeGen, depth: int) -> frozenset[tuple[DirValue, ...]]:
    """Marked nodes of a choice-labeled tree up to the given depth.

    The root is marked, and a child x.d is marked iff x is marked and d lies
    in the selected-exit set of the label at x.
    """
    marked = {(): True}
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for word in frontier:
            x = tree.node_label(word).exits
            for d in tree.directions:
                child = word + (d,)
                marked[child] = marked[word] and d in x
                nxt.append(child)
        frontier = nxt
    return frozenset(w for w, m in marked.items() if m)


def wide(tree: TreeGen, extra: tuple, *, major: bool = True) -> TreeGen:
    """Widen a Z-labeled X-tree to an (X x Y)-tree that ignores the Y part."""
    directions = tuple((x, y) for x in tree.directions for y in extra)
    delta = {
        (v, (x, y)): tree.delta[(v, x)] for v in tree.states for (x, y) in directions
    }
    return TreeGen(
        directions=directions,
        states=tree.states,
        start=tree.start,
        label=dict(tree.label),
        delta=delta,
    )


def hide(word: Sequence[tuple], extra: tuple) -> tuple:
    """Project a word over X x Y onto its X coordinates."""
    return tuple(x for (x, _y) in word)


def xray(tree: TreeGen, extra: tuple, root_tag) -> TreeGen:
    """Pair each node's label with the node's own Y-direction; the root gets
    the designated tag."""
    if root_tag not in extra:
        raise ValueError(f"root tag {root_tag!r} is not a Y value of {extra!r}")
    for (x, y) in tree.directions:
        if y not in extra:
            raise ValueError(f"direction {(x, y)!r} does not carry a Y coordinate in {extra!r}")
    states = tuple((v, y) for v in tree.states for y in extra)
    delta = {}
    label = {}
    for v in tree.states:
        for y in extra:
            label[(v, y)] = (tree.label[v], y)
            for (x, y2) in tree.directions:
                delta[((v, y), (x, y2))] = (tree.delta[(v, (x, y2))], y2)
    return TreeGen(
        directions=tree.directions,
        states=states,
        start=(tree.start, root_tag),
        label=label,
        delta=delta,
    )


def same_tree(a: TreeGen, b: TreeGen) -> bool:
    """Whether two generators unwind to the same labeled tree (bisimulation
    over reachable state pairs)."""
    if tuple(a.directions) != tuple(b.directions):
        return False
    seen = {(a.start, b.start)}
    frontier = [(a.start, b.start)]
    while frontier:
        va, vb = frontier.pop()
        if a.label[va] != b.label[vb]:
            return False
        for d in a.directions:
            nxt = (a.delta[(va, d)], b.delta[(vb, d)])
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return True


def composition_dot(t: Composition) -> str:
    """GraphViz rendering of the support structure of a composition."""
    lines = ["digraph composition {", '  rankdir="LR";']
    ids = {q: f"n{i}" for i, q in enumerate(t.states)}
    for q in t.states:
        shape = "doublecircle" if q == t.start else "circle"
        lines.append(f'  {ids[q]} [label="{q}\\n{t.output[q]}", shape={shape}];')
    for (q, a), row in sorted(t.transitions.items(), key=repr):
        for q2, p in sorted(row.items(), key=repr):
            if p > 0:
                lines.append(f'  {ids[q]} -> {ids[q2]} [label="{a}:{p}"];')
    lines.append("}")
    return "\n".join(lines)


def tree_dot(tree: TreeGen) -> str:
    """GraphViz rendering of a regular-tree generator."""
    lines = ["digraph generator {"]
    ids = {v: f"n{i}" for i, v in enumerate(tree.states)}
    for v in tree.states:
        shape = "doublecircle" if v == tree.start else "circle"
        lines.append(f'  {ids[v]} [label="{v}\\n{tree.label[v]}", shape={shape}];')
    for (v, d), v2 in sorted(tree.delta.items(), key=repr):
        lines.append(f'  {ids[v]} -> {ids[v2]} [label="{d}"];')
    lines.append("}")
    return "\n".join(lines)
