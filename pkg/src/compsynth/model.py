"""Core domain types: components, libraries, composers and parity monitors.

Probabilities are exact rationals (`fractions.Fraction`); every qualitative
algorithm in this package consumes only the *support* of a distribution, so
no tolerances appear anywhere.  All types are immutable after validation and
safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Optional

# Component names are strings in parsed libraries and (name, monitor-state)
# pairs in augmented libraries; direction values are ints resp. pairs.
State = Hashable
Letter = str
Name = Hashable
DirValue = Hashable

Dist = Mapping[State, Fraction]

ONE = Fraction(1)


@dataclass(frozen=True)
class Component:
    """A probabilistic transducer with an ordered sequence of exit states.

    ``exits[d]`` is the exit state in direction ``d``; exit states carry no
    transition rows.  ``transitions[(q, a)]`` is an exact distribution over
    successor states, one row per non-exit state and input letter.
    """

    name: Name
    inputs: tuple[Letter, ...]
    outputs: tuple[Letter, ...]
    states: tuple[State, ...]
    start: State
    exits: tuple[State, ...]
    output: Mapping[State, Letter]
    transitions: Mapping[tuple[State, Letter], Dist]

    @cached_property
    def exit_set(self) -> frozenset[State]:
        return frozenset(self.exits)

    @cached_property
    def exit_position(self) -> Mapping[State, int]:
        return {q: d for d, q in enumerate(self.exits)}

    @property
    def width(self) -> int:
        return len(self.exits)

    def is_exit(self, q: State) -> bool:
        return q in self.exit_set

    def non_exit_states(self) -> tuple[State, ...]:
        return tuple(q for q in self.states if q not in self.exit_set)

    def support(self, q: State, a: Letter) -> frozenset[State]:
        """Positive-probability successors of ``q`` under letter ``a``."""
        row = self.transitions.get((q, a))
        if row is None:
            raise KeyError(f"no transition row for ({q!r}, {a!r}) in {self.name!r}")
        return frozenset(q2 for q2, p in row.items() if p > 0)


@dataclass(frozen=True)
class Library:
    """A set of components sharing alphabets and a common exit width.

    ``directions`` fixes the shared index space of exits: ``directions[d]``
    is the direction value of exit position ``d`` (plain ints for parsed
    libraries, ``(direction, monitor-state)`` pairs for augmented ones).
    """

    width: int
    components: tuple[Component, ...]
    directions: tuple[DirValue, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.directions is None:
            object.__setattr__(self, "directions", tuple(range(self.width)))

    @cached_property
    def by_name(self) -> Mapping[Name, Component]:
        return {c.name: c for c in self.components}

    def component(self, name: Name) -> Component:
        try:
            return self.by_name[name]
        except KeyError:
            raise KeyError(f"library has no component named {name!r}") from None

    def direction_position(self, d: DirValue) -> int:
        return self.directions.index(d)


@dataclass(frozen=True)
class IndexFunction:
    """Priorities for every state of every component of a library."""

    priority: Mapping[tuple[Name, State], int]
    max_priority: int

    @staticmethod
    def from_map(priority: Mapping[tuple[Name, State], int]) -> "IndexFunction":
        if not priority:
            return IndexFunction(priority={}, max_priority=1)
        return IndexFunction(priority=dict(priority), max_priority=max(priority.values()))

    def of(self, component: Name, state: State) -> int:
        return self.priority[(component, state)]

    def restricted_to(self, names: Iterable[Name]) -> "IndexFunction":
        """Priorities of the given components only; max_priority is kept."""
        keep = set(names)
        pruned = {k: v for k, v in self.priority.items() if k[0] in keep}
        return IndexFunction(priority=pruned, max_priority=self.max_priority)


@dataclass(frozen=True)
class ExitControlRelation:
    """Allowed (direction value, component name) routing pairs."""

    allowed: frozenset[tuple[DirValue, Name]]

    @staticmethod
    def total(lib: Library) -> "ExitControlRelation":
        pairs = frozenset((d, c.name) for d in lib.directions for c in lib.components)
        return ExitControlRelation(allowed=pairs)

    def allows(self, direction: DirValue, component: Name) -> bool:
        return (direction, component) in self.allowed

    def restricted_to(self, names: Iterable[Name]) -> "ExitControlRelation":
        keep = set(names)
        return ExitControlRelation(frozenset(p for p in self.allowed if p[1] in keep))


@dataclass(frozen=True)
class Composer:
    """Deterministic controller routing exit directions to component instances."""

    states: tuple[Name, ...]            # instance names
    start: Name
    component_of: Mapping[Name, Name]   # instance -> component name
    next: Mapping[tuple[Name, DirValue], Name]
    directions: tuple[DirValue, ...]

    def route(self, instance: Name, d: DirValue) -> Name:
        return self.next[(instance, d)]


@dataclass(frozen=True)
class Dpw:
    """Deterministic parity word automaton over the library's output alphabet.

    Priorities are stored in the max-even convention: a run is accepting iff
    the highest priority visited infinitely often is even.  Min-even input is
    converted at parse time (see `convert_min_even_priorities`).
    """

    alphabet: tuple[Letter, ...]
    states: tuple[State, ...]
    start: State
    next: Mapping[tuple[State, Letter], State]
    priority: Mapping[State, int]

    def step(self, s: State, a: Letter) -> State:
        return self.next[(s, a)]


@dataclass(frozen=True)
class MemorylessStrategy:
    """An environment strategy depending only on the current state.

    ``support[q]`` is the non-empty set of letters chosen with positive
    probability at ``q``; optional ``weights`` refine the support into an
    exact distribution.  Qualitative verdicts depend on the support alone.
    """

    support: Mapping[State, frozenset[Letter]]
    weights: Optional[Mapping[State, Mapping[Letter, Fraction]]] = None

    def is_pure(self) -> bool:
        return all(len(s) == 1 for s in self.support.values())

    @staticmethod
    def pure(choice: Mapping[State, Letter]) -> "MemorylessStrategy":
        return MemorylessStrategy({q: frozenset([a]) for q, a in choice.items()})


def convert_min_even_priorities(priority: Mapping[State, int]) -> dict[State, int]:
    """Map a min-even priority assignment to the equivalent max-even one.

    With k = max priority rounded up to odd, p -> k + 1 - p reverses the
    order and preserves parity, so min-i.o.-even becomes max-i.o.-even.
    """
    if not priority:
        return {}
    k = max(priority.values())
    if k % 2 == 0:
        k += 1
    return {s: k + 1 - p for s, p in priority.items()}


def validate_library(lib: Library) -> list[str]:
    """Structural diagnostics for a library; empty iff all invariants hold."""
    diags: list[str] = []
    seen_names: set[Name] = set()
    if len(lib.directions) != lib.width:
        diags.append(f"library: {len(lib.directions)} direction values for width {lib.width}")
    for comp in lib.components:
        if comp.name in seen_names:
            diags.append(f"duplicate component name {comp.name!r}")
        seen_names.add(comp.name)
        diags.extend(_validate_component(comp))
        if comp.width != lib.width:
            diags.append(
                f"component {comp.name!r}: width mismatch, {comp.width} exits for library width {lib.width}"
            )
        if tuple(comp.inputs) != tuple(lib.components[0].inputs):
            diags.append(f"component {comp.name!r}: input alphabet differs from {lib.components[0].name!r}")
        if tuple(comp.outputs) != tuple(lib.components[0].outputs):
            diags.append(f"component {comp.name!r}: output alphabet differs from {lib.components[0].name!r}")
    return diags


def _validate_component(comp: Component) -> list[str]:
    diags: list[str] = []
    state_set = set(comp.states)
    if len(state_set) != len(comp.states):
        diags.append(f"component {comp.name!r}: duplicate state ids")
    if comp.start not in state_set:
        diags.append(f"component {comp.name!r}: start state {comp.start!r} unknown")
    if len(set(comp.exits)) != len(comp.exits):
        diags.append(f"component {comp.name!r}: exit states not distinct")
    for q in comp.exits:
        if q not in state_set:
            diags.append(f"component {comp.name!r}: exit state {q!r} unknown")
    for q in comp.states:
        if q not in comp.output:
            diags.append(f"component {comp.name!r}: state {q!r} has no output letter")
        elif comp.output[q] not in comp.outputs:
            diags.append(f"component {comp.name!r}: state {q!r} outputs unknown letter {comp.output[q]!r}")
    exit_set = set(comp.exits)
    for (q, a), row in comp.transitions.items():
        if q in exit_set:
            diags.append(f"component {comp.name!r}: exit state {q!r} has a transition row")
            continue
        if q not in state_set:
            diags.append(f"component {comp.name!r}: transition row for unknown state {q!r}")
            continue
        if a not in comp.inputs:
            diags.append(f"component {comp.name!r}: transition row for unknown letter {a!r}")
        total = Fraction(0)
        for q2, p in row.items():
            if q2 not in state_set:
                diags.append(f"component {comp.name!r}: transition ({q!r}, {a!r}) targets unknown state {q2!r}")
            if p < 0 or p > 1:
                diags.append(f"component {comp.name!r}: probability {p} outside [0,1] at ({q!r}, {a!r})")
            total += p
        if total != ONE:
            diags.append(f"component {comp.name!r}: distribution sum != 1 at ({q!r}, {a!r}), got {total}")
    for q in comp.states:
        if q in exit_set:
            continue
        for a in comp.inputs:
            if (q, a) not in comp.transitions:
                diags.append(f"component {comp.name!r}: missing row for non-exit state {q!r} on letter {a!r}")
    return diags


def validate_index(lib: Library, alpha: IndexFunction) -> list[str]:
    """Index-function diagnostics; w.l.o.g.-bound violations are warnings."""
    diags: list[str] = []
    for comp in lib.components:
        for q in comp.states:
            key = (comp.name, q)
            if key not in alpha.priority:
                diags.append(f"index: no priority for state {q!r} of component {comp.name!r}")
            elif alpha.priority[key] < 1:
                diags.append(f"index: priority {alpha.priority[key]} < 1 at state {q!r} of {comp.name!r}")
    if alpha.priority and alpha.max_priority != max(alpha.priority.values()):
        diags.append(f"index: cached max priority {alpha.max_priority} != actual {max(alpha.priority.values())}")
    if lib.components:
        bound = 2 * max(len(c.states) for c in lib.components)
        if alpha.max_priority > bound:
            diags.append(f"warning: max priority {alpha.max_priority} exceeds 2*max component size {bound}")
    return diags


def validate_relation(lib: Library, rel: ExitControlRelation) -> list[str]:
    diags: list[str] = []
    names = {c.name for c in lib.components}
    dirs = set(lib.directions)
    for d, name in sorted(rel.allowed, key=repr):
        if name not in names:
            diags.append(f"relation: pair ({d!r}, {name!r}) names an unknown component")
        if d not in dirs:
            diags.append(f"relation: pair ({d!r}, {name!r}) uses an unknown direction")
    return diags


def validate_composer(comp: Composer, lib: Library) -> list[str]:
    diags: list[str] = []
    names = {c.name for c in lib.components}
    if comp.start not in comp.states:
        diags.append(f"composer: start instance {comp.start!r} unknown")
    for m in comp.states:
        target = comp.component_of.get(m)
        if target is None:
            diags.append(f"composer: instance {m!r} has no component")
        elif target not in names:
            diags.append(f"composer: instance {m!r} names missing component {target!r}")
        for d in comp.directions:
            if (m, d) not in comp.next:
                diags.append(f"composer: no route from instance {m!r} in direction {d!r}")
            elif comp.next[(m, d)] not in comp.states:
                diags.append(f"composer: route from {m!r} in direction {d!r} targets unknown instance")
    return diags


def is_compatible(comp: Composer, rel: ExitControlRelation,
                  component_of: Mapping[Name, Name] | None = None) -> bool:
    """Structural exit-control check: every route (m, d) -> m' has (d, component(m')) allowed."""
    cof = component_of if component_of is not None else comp.component_of
    return all(rel.allows(d, cof[m2]) for (_m, d), m2 in comp.next.items())


def pad_exits(comp: Component, target_width: int) -> Component:
    """Append unreachable dummy exits until the component has `target_width` of them.

    Raises ValueError if the component is already wider than the target.  The
    reachable fragment is untouched: dummy exits have no incoming transitions.
    """
    if comp.width > target_width:
        raise ValueError(
            f"component {comp.name!r} has {comp.width} exits, cannot pad down to {target_width}"
        )
    if comp.width == target_width:
        return comp
    existing = set(comp.states)
    new_exits = []
    i = 0
    while len(new_exits) < target_width - comp.width:
        q = f"_pad{i}"
        if q not in existing:
            new_exits.append(q)
            existing.add(q)
        i += 1
    out_letter = comp.outputs[0]
    return Component(
        name=comp.name,
        inputs=comp.inputs,
        outputs=comp.outputs,
        states=comp.states + tuple(new_exits),
        start=comp.start,
        exits=comp.exits + tuple(new_exits),
        output={**dict(comp.output), **{q: out_letter for q in new_exits}},
        transitions=comp.transitions,
    )
