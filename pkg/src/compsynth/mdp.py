"""Qualitative analysis of probabilistic transducers.

Everything here works on supports only: a strategy wins for the environment
iff the graph it induces has a reachable ergodic set whose highest priority
is odd, so probability-one questions reduce to reachability and strongly
connected components.  End components stand in for ergodic sets when
quantifying over strategies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Optional

from .model import (
    Component,
    DirValue,
    IndexFunction,
    Letter,
    Library,
    MemorylessStrategy,
    Name,
    State,
)


@dataclass(frozen=True)
class SupportGraph:
    """Positive-probability edges of a transducer under a fixed strategy."""

    vertices: tuple[State, ...]
    edges: frozenset[tuple[State, State]]
    start: State

    @cached_property
    def succ(self) -> Mapping[State, frozenset[State]]:
        out: dict[State, set[State]] = {v: set() for v in self.vertices}
        for a, b in self.edges:
            out[a].add(b)
        return {v: frozenset(s) for v, s in out.items()}


@dataclass(frozen=True)
class LabelTriple:
    """Realizable per-component summary: exit set, priority, component name."""

    exits: frozenset[DirValue]
    priority: int
    component: Name


@dataclass(frozen=True)
class EndComponent:
    """A closed, strongly connected sub-MDP with its staying letters."""

    states: frozenset[State]
    letters: Mapping[State, frozenset[Letter]]


@dataclass(frozen=True)
class McView:
    """Uniform qualitative view of a transducer: exits are made absorbing."""

    states: tuple[State, ...]
    start: State
    letters: tuple[Letter, ...]
    succ: Mapping[tuple[State, Letter], frozenset[State]]
    exits: frozenset[State]
    exit_dir: Mapping[State, DirValue]
    priority: Mapping[State, int]
    max_priority: int

    @cached_property
    def full_succ(self) -> Mapping[State, frozenset[State]]:
        """Successors under the full support (any letter)."""
        return {
            q: frozenset().union(*(self.succ[(q, a)] for a in self.letters))
            for q in self.states
        }

    def non_exit_states(self) -> tuple[State, ...]:
        return tuple(q for q in self.states if q not in self.exits)


def component_view(comp: Component, alpha: IndexFunction,
                   directions: tuple[DirValue, ...] | None = None) -> McView:
    if directions is None:
        directions = tuple(range(comp.width))
    succ: dict[tuple[State, Letter], frozenset[State]] = {}
    for q in comp.states:
        for a in comp.inputs:
            if comp.is_exit(q):
                succ[(q, a)] = frozenset([q])
            else:
                succ[(q, a)] = comp.support(q, a)
    return McView(
        states=comp.states,
        start=comp.start,
        letters=comp.inputs,
        succ=succ,
        exits=comp.exit_set,
        exit_dir={q: directions[d] for d, q in enumerate(comp.exits)},
        priority={q: alpha.of(comp.name, q) for q in comp.states},
        max_priority=alpha.max_priority,
    )


def as_view(m, alpha: IndexFunction | None = None,
            directions: tuple[DirValue, ...] | None = None) -> McView:
    if isinstance(m, McView):
        return m
    if alpha is None:
        raise ValueError("an index function is required to view a component")
    return component_view(m, alpha, directions)


def strongly_connected_components(vertices: Iterable[State],
                                  succ: Callable[[State], Iterable[State]]) -> list[frozenset[State]]:
    """Iterative Tarjan; deterministic given vertex and successor order."""
    index: dict[State, int] = {}
    low: dict[State, int] = {}
    on_stack: set[State] = set()
    stack: list[State] = []
    sccs: list[frozenset[State]] = []
    counter = 0
    for root in vertices:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work: list[tuple[State, Iterator[State]]] = [(root, iter(succ(root)))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == v:
                        break
                sccs.append(frozenset(scc))
    return sccs


def induced_graph(m, f: MemorylessStrategy, alpha: IndexFunction | None = None) -> SupportGraph:
    """Graph with an edge q1 -> q2 iff some supported letter reaches q2.

    Exits carry self-loops (they are absorbing).  Raises ValueError if the
    strategy is missing a non-exit state.
    """
    view = as_view(m, alpha)
    edges: set[tuple[State, State]] = set()
    for q in view.states:
        if q in view.exits:
            edges.add((q, q))
            continue
        if q not in f.support:
            raise ValueError(f"strategy defines no letters at state {q!r}")
        if not f.support[q]:
            raise ValueError(f"strategy support is empty at state {q!r}")
        for a in f.support[q]:
            for q2 in view.succ[(q, a)]:
                edges.add((q, q2))
    return SupportGraph(vertices=view.states, edges=frozenset(edges), start=view.start)


def ergodic_sets(g: SupportGraph) -> list[frozenset[State]]:
    """Maximal SCCs without outgoing edges, i.e. the minimal elements of the
    reachability order on SCCs."""
    sccs = strongly_connected_components(g.vertices, lambda v: sorted(g.succ[v], key=repr))
    return [scc for scc in sccs if all(g.succ[v] <= scc for v in scc)]


def reachable_states(g: SupportGraph, source: State | None = None) -> frozenset[State]:
    src = g.start if source is None else source
    seen = {src}
    frontier = [src]
    while frontier:
        v = frontier.pop()
        for w in g.succ[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return frozenset(seen)


def environment_wins_memoryless(m, alpha: IndexFunction | None, f: MemorylessStrategy) -> bool:
    """True iff some reachable ergodic set of the induced graph has odd max priority."""
    view = as_view(m, alpha)
    g = induced_graph(view, f)
    reach = reachable_states(g)
    for ergo in ergodic_sets(g):
        if ergo & reach and max(view.priority[q] for q in ergo) % 2 == 1:
            return True
    return False


def maximal_end_components(view: McView,
                           allowed: frozenset[State]) -> list[EndComponent]:
    """MEC decomposition of the sub-MDP restricted to `allowed` states."""
    letters: dict[State, set[Letter]] = {}
    current: set[State] = set()
    for q in view.states:
        if q not in allowed:
            continue
        keep = {a for a in view.letters if view.succ[(q, a)] <= allowed}
        if keep:
            letters[q] = keep
            current.add(q)
    while True:
        # prune letters that escape the surviving state set, then refine by SCC
        changed = True
        while changed:
            changed = False
            for q in list(current):
                keep = {a for a in letters[q] if view.succ[(q, a)] <= current}
                if keep != letters[q]:
                    letters[q] = keep
                    changed = True
                if not keep:
                    current.discard(q)
                    changed = True
        if not current:
            return []
        order = [q for q in view.states if q in current]

        def succ_fn(q):
            out: set[State] = set()
            for a in letters[q]:
                out |= view.succ[(q, a)]
            return sorted(out, key=repr)

        sccs = strongly_connected_components(order, succ_fn)
        scc_of: dict[State, frozenset[State]] = {}
        for scc in sccs:
            for q in scc:
                scc_of[q] = scc
        changed = False
        for q in list(current):
            keep = {a for a in letters[q] if view.succ[(q, a)] <= scc_of[q]}
            if keep != letters[q]:
                letters[q] = keep
                changed = True
            if not keep:
                current.discard(q)
                changed = True
        if not changed:
            return [
                EndComponent(states=scc, letters={q: frozenset(letters[q]) for q in scc})
                for scc in sccs
            ]


def _reachable_full(view: McView, targets: frozenset[State]) -> bool:
    seen = {view.start}
    frontier = [view.start]
    while frontier:
        q = frontier.pop()
        if q in targets:
            return True
        for q2 in view.full_succ[q]:
            if q2 not in seen:
                seen.add(q2)
                frontier.append(q2)
    return bool(targets & seen)


def _winning_end_component(view: McView, *, non_exit_only: bool) -> Optional[EndComponent]:
    """A reachable end component with odd maximum priority, if one exists."""
    present = sorted({p for p in view.priority.values() if p % 2 == 1})
    for p in present:
        allowed = frozenset(
            q for q in view.states
            if view.priority[q] <= p and not (non_exit_only and q in view.exits)
        )
        for mec in maximal_end_components(view, allowed):
            if max(view.priority[q] for q in mec.states) != p:
                continue
            if _reachable_full(view, mec.states):
                return mec
    return None


def _assemble_witness(view: McView, mec: EndComponent) -> MemorylessStrategy:
    """Pure reach-then-confine strategy making the end component a reachable
    ergodic set.  Letter ties break on input-alphabet order."""
    target = next(
        q for q in view.states
        if q in mec.states and view.priority[q] == max(view.priority[s] for s in mec.states)
    )
    choice: dict[State, Letter] = {}
    if target not in view.exits:
        choice[target] = next(a for a in view.letters if a in mec.letters[target])
    # confine: a tree of edges pointing toward the target inside the component
    chosen = {target}
    remaining = {q for q in mec.states if q != target and q not in view.exits}
    while remaining:
        progressed = False
        for q in [s for s in view.states if s in remaining]:
            hit = next(
                (a for a in view.letters
                 if a in mec.letters[q] and view.succ[(q, a)] & chosen),
                None,
            )
            if hit is not None:
                choice[q] = hit
                chosen.add(q)
                remaining.discard(q)
                progressed = True
        if not progressed:  # cannot happen: the component is strongly connected
            raise AssertionError("end component is not strongly connected")
    # reach: shortest-path letters toward the component everywhere else,
    # found by backward BFS over the full-support graph
    dist: dict[State, int] = {q: 0 for q in mec.states}
    frontier = list(mec.states)
    incoming: dict[State, list[State]] = {q: [] for q in view.states}
    for q in view.states:
        for q2 in view.full_succ[q]:
            incoming[q2].append(q)
    level = 0
    while frontier:
        level += 1
        nxt = []
        for q in frontier:
            for q0 in incoming[q]:
                if q0 not in dist:
                    dist[q0] = level
                    nxt.append(q0)
        frontier = nxt
    for q in view.states:
        if q in view.exits or q in choice:
            continue
        if q in dist and dist[q] > 0:
            choice[q] = next(
                a for a in view.letters
                if any(dist.get(q2, -1) == dist[q] - 1 for q2 in view.succ[(q, a)])
            )
        else:
            choice[q] = view.letters[0]
    return MemorylessStrategy.pure(choice)


def environment_can_win(m, alpha: IndexFunction | None = None) -> Optional[MemorylessStrategy]:
    """A pure memoryless winning strategy for the environment, or None.

    Decided by end-component analysis: a winning strategy exists iff some end
    component with odd maximum priority is reachable in the full-support
    graph.  Exit states count here (they are absorbing singletons).
    """
    view = as_view(m, alpha)
    mec = _winning_end_component(view, non_exit_only=False)
    if mec is None:
        return None
    return _assemble_witness(view, mec)


def satisfies_index(m, alpha: IndexFunction | None = None) -> bool:
    """True iff the environment has no winning strategy."""
    return environment_can_win(m, alpha) is None


def is_odd_sink(m, alpha: IndexFunction | None = None) -> bool:
    """True iff some strategy confines control in a reachable set of non-exit
    states whose maximum priority is odd."""
    view = as_view(m, alpha)
    return _winning_end_component(view, non_exit_only=True) is not None


def _iter_supports(view: McView) -> Iterator[Mapping[State, frozenset[Letter]]]:
    """All assignments of non-empty letter sets to non-exit states.

    Deterministic order: states in declaration order, subsets by bitmask over
    letter indices.
    """
    non_exit = view.non_exit_states()
    subsets = []
    k = len(view.letters)
    for mask in range(1, 2 ** k):
        subsets.append(frozenset(view.letters[i] for i in range(k) if mask >> i & 1))
    for combo in itertools.product(subsets, repeat=len(non_exit)):
        yield dict(zip(non_exit, combo))


def _support_label(view: McView, support: Mapping[State, frozenset[Letter]]) -> tuple[frozenset[DirValue], int]:
    """The (exit set, priority) summary of one memoryless strategy."""
    g = induced_graph(view, MemorylessStrategy(support))
    reach = reachable_states(g)
    exits_selected = frozenset(view.exit_dir[q] for q in reach & view.exits)
    even_sink = False
    for ergo in ergodic_sets(g):
        if ergo & reach and not ergo & view.exits:
            if max(view.priority[q] for q in ergo) % 2 == 0:
                even_sink = True
                break
    if even_sink:
        j = 2 * view.max_priority
    else:
        j = max(view.priority[q] for q in reach)
    return exits_selected, j


def even_sink_feasible(m, alpha: IndexFunction | None, exits: frozenset[DirValue],
                       directions: tuple[DirValue, ...] | None = None) -> bool:
    """True iff some strategy selects exactly `exits` and confines positive
    probability in a non-exit ergodic set with even maximum priority."""
    view = as_view(m, alpha, directions)
    want = frozenset(exits)
    for support in _iter_supports(view):
        g = induced_graph(view, MemorylessStrategy(support))
        reach = reachable_states(g)
        if frozenset(view.exit_dir[q] for q in reach & view.exits) != want:
            continue
        for ergo in ergodic_sets(g):
            if ergo & reach and not ergo & view.exits:
                if max(view.priority[q] for q in ergo) % 2 == 0:
                    return True
    return False


def _label_fast_path(view: McView, exits: frozenset[DirValue], j: int) -> bool:
    """Polynomial membership check for labels realized by non-sink strategies.

    Greatest fixpoint of: keep states with priority <= j whose exits lie in
    the wanted set, keep letters whose whole support stays inside, and drop
    states from which no wanted exit remains reachable.  The full-support
    strategy on the final region is then sink-free by construction and its
    label is read off directly.  Sound always; complete whenever some
    non-sink witness exists.
    """
    if j > view.max_priority:
        return False  # non-sink labels never exceed the highest priority
    region = {
        q for q in view.states
        if view.priority[q] <= j and (q not in view.exits or view.exit_dir[q] in exits)
    }
    letters: dict[State, set[Letter]] = {}
    while True:
        changed = True
        while changed:
            changed = False
            for q in list(region):
                if q in view.exits:
                    continue
                keep = {a for a in view.letters if view.succ[(q, a)] <= region}
                letters[q] = keep
                if not keep:
                    region.discard(q)
                    changed = True
        exit_states = {q for q in region if q in view.exits}
        # states that can no longer reach a wanted exit are doomed to sink
        can_exit = set(exit_states)
        grew = True
        while grew:
            grew = False
            for q in region:
                if q in can_exit or q in view.exits:
                    continue
                if any(view.succ[(q, a)] & can_exit for a in letters[q]):
                    can_exit.add(q)
                    grew = True
        doomed = region - can_exit
        if not doomed:
            break
        region -= doomed
    if view.start not in region:
        return False
    seen = {view.start}
    frontier = [view.start]
    while frontier:
        q = frontier.pop()
        if q in view.exits:
            continue
        for a in letters[q]:
            for q2 in view.succ[(q, a)]:
                if q2 not in seen:
                    seen.add(q2)
                    frontier.append(q2)
    reached_exits = frozenset(view.exit_dir[q] for q in seen & view.exits)
    return reached_exits == frozenset(exits) and max(view.priority[q] for q in seen) == j


def label_member(exits: frozenset[DirValue], j: int, m, alpha: IndexFunction | None = None,
                 directions: tuple[DirValue, ...] | None = None) -> bool:
    """Whether (exits, j) summarizes some memoryless strategy of the component.

    The region fast path answers non-sink labels polynomially; sink labels
    fall back to support enumeration, which is the ground truth throughout.
    """
    view = as_view(m, alpha, directions)
    if not 1 <= j <= 2 * view.max_priority:
        return False
    if _label_fast_path(view, frozenset(exits), j):
        return True
    want = (frozenset(exits), j)
    return any(_support_label(view, s) == want for s in _iter_supports(view))


def component_labels(comp: Component, alpha: IndexFunction,
                     directions: tuple[DirValue, ...] | None = None) -> frozenset[LabelTriple]:
    """All label triples of a single component, by support enumeration."""
    view = component_view(comp, alpha, directions)
    found = {_support_label(view, s) for s in _iter_supports(view)}
    return frozenset(LabelTriple(x, j, comp.name) for x, j in found)


def labels(lib: Library, alpha: IndexFunction) -> frozenset[LabelTriple]:
    """LABELS of the whole library: the union of per-component summaries."""
    out: set[LabelTriple] = set()
    for comp in lib.components:
        out |= component_labels(comp, alpha, lib.directions)
    return frozenset(out)


def remove_odd_sinks(lib: Library, alpha: IndexFunction) -> Library:
    """Drop every component in which some strategy can confine control with
    odd maximum priority; such components lose in every composition."""
    keep = tuple(
        c for c in lib.components
        if not is_odd_sink(component_view(c, alpha, lib.directions))
    )
    return Library(width=lib.width, components=keep, directions=lib.directions)
