"""Brute-force ground truth for property testing at desk scale.

Enumerations are duplicate-free and complete against their closed-form
cardinalities; the bounded composer search enumerates canonical machines
only (instances numbered in first-use order), which quotients away instance
renaming without losing any verdict.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Mapping, Optional

from . import mdp
from .mdp import LabelTriple, McView
from .model import (
    Component,
    Composer,
    Dpw,
    ExitControlRelation,
    IndexFunction,
    Letter,
    Library,
    MemorylessStrategy,
    Name,
    State,
)

SOFT_STATE_LIMIT = 8
SOFT_LETTER_LIMIT = 3
SEARCH_BOUND_LIMIT = 4


def enumerate_pure_memoryless(comp: Component) -> Iterator[MemorylessStrategy]:
    """All |letters|^|non-exit states| pure strategies, in deterministic
    order (states as declared, letters by alphabet index)."""
    non_exit = tuple(q for q in comp.states if not comp.is_exit(q))
    for combo in itertools.product(comp.inputs, repeat=len(non_exit)):
        yield MemorylessStrategy.pure(dict(zip(non_exit, combo)))


def enumerate_supports(comp: Component | McView,
                       alpha: IndexFunction | None = None) -> Iterator[MemorylessStrategy]:
    """All assignments of non-empty letter subsets to non-exit states."""
    view = mdp.as_view(comp, alpha) if not isinstance(comp, McView) else comp
    for support in mdp._iter_supports(view):
        yield MemorylessStrategy(support)


def enumerate_choice_functions(comp: Composer, labels: Iterable[LabelTriple]
                               ) -> Iterator[Mapping[Name, tuple[frozenset, int]]]:
    """Cartesian product of admissible (exit set, priority) picks per instance.

    An instance whose component contributes no triples empties the iterator.
    """
    triples = sorted(set(labels), key=repr)
    per_instance = []
    for m in comp.states:
        options = [(t.exits, t.priority) for t in triples if t.component == comp.component_of[m]]
        per_instance.append(options)
    for combo in itertools.product(*per_instance):
        yield dict(zip(comp.states, combo))


def enumerate_composers(lib: Library, rel: ExitControlRelation, bound: int) -> Iterator[Composer]:
    """All relation-compatible composers with at most `bound` instances, one
    representative per instance-renaming class (canonical first-use order)."""
    dirs = lib.directions
    names = [c.name for c in lib.components]

    def rec(comp_of: list[Name], trans: dict[tuple[int, int], int], cell: int) -> Iterator[Composer]:
        num = len(comp_of)
        if cell == num * len(dirs):
            yield Composer(
                states=tuple(f"m{i}" for i in range(num)),
                start="m0",
                component_of={f"m{i}": comp_of[i] for i in range(num)},
                next={
                    (f"m{i}", d): f"m{trans[(i, di)]}"
                    for i in range(num)
                    for di, d in enumerate(dirs)
                },
                directions=dirs,
            )
            return
        i, di = divmod(cell, len(dirs))
        d = dirs[di]
        for j in range(num):
            if rel.allows(d, comp_of[j]):
                trans[(i, di)] = j
                yield from rec(comp_of, trans, cell + 1)
                del trans[(i, di)]
        if num < bound:
            for name in names:
                if rel.allows(d, name):
                    comp_of.append(name)
                    trans[(i, di)] = num
                    yield from rec(comp_of, trans, cell + 1)
                    del trans[(i, di)]
                    comp_of.pop()

    for first in names:
        yield from rec([first], {}, 0)


def bounded_composer_search(lib: Library, rel: ExitControlRelation,
                            alpha: IndexFunction | None = None,
                            monitor: Dpw | None = None,
                            bound: int = 4) -> Optional[Composer]:
    """First canonical composer (at most `bound` instances) that verifies
    against the index function or the monitor; None if none does."""
    from . import synthesis  # deferred: synthesis imports this module's siblings

    if (alpha is None) == (monitor is None):
        raise ValueError("exactly one of an index function or a monitor is required")
    if bound > SEARCH_BOUND_LIMIT:
        raise ValueError(f"search bound {bound} exceeds the supported limit {SEARCH_BOUND_LIMIT}")
    for comp in enumerate_composers(lib, rel, bound):
        if alpha is not None:
            ok = synthesis.verify_embedded(comp, lib, alpha)
        else:
            ok = synthesis.verify_dpw(comp, lib, monitor)
        if ok:
            return comp
    return None
