"""End-to-end synthesis pipelines and their independent verifiers.

`synth_embedded` decides whether a library realizes an index function under
an exit-control relation and extracts a composer when it does; `synth_dpw`
reduces a deterministic parity monitor to the embedded problem over the
augmented library and undoes the widening with `narrow`.  Every returned
composer is re-checked by the corresponding verifier before it leaves this
module.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from . import automata, composition, emptiness, mdp
from .composition import TreeGen
from .model import (
    Composer,
    Dpw,
    ExitControlRelation,
    IndexFunction,
    Library,
    Name,
    is_compatible,
)


@dataclass(frozen=True)
class SynthesisResult:
    composer: Optional[Composer]
    removed: tuple[Name, ...]
    diagnostics: tuple[str, ...]
    seconds: float

    @property
    def realizable(self) -> bool:
        return self.composer is not None


def composer_from_tree(tree: TreeGen) -> Composer:
    """Reinterpret a component-labeled regular tree as a composer (instances
    renamed m0, m1, ... in breadth-first order)."""
    order: list = [tree.start]
    names = {tree.start: "m0"}
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for d in tree.directions:
            w = tree.delta[(v, d)]
            if w not in names:
                names[w] = f"m{len(names)}"
                order.append(w)
    return Composer(
        states=tuple(names[v] for v in order),
        start="m0",
        component_of={names[v]: tree.label[v] for v in order},
        next={(names[v], d): names[tree.delta[(v, d)]] for v in order for d in tree.directions},
        directions=tree.directions,
    )


def _embedded_uct(lib: Library, rel: ExitControlRelation,
                  alpha: IndexFunction) -> tuple[Optional[automata.TreeAutomaton], Library]:
    """The universal co-Buchi automaton whose nonemptiness decides
    realizability over the odd-sink-free part of the library."""
    pruned = mdp.remove_odd_sinks(lib, alpha)
    if not pruned.components:
        return None, pruned
    gamma = mdp.labels(pruned, alpha)
    odd = range(1, alpha.max_priority + 1, 2)
    parts = [
        automata.project_labels(automata.build_rank_nbt(p, lib.directions, gamma), gamma)
        for p in odd
    ]
    names = parts[0].alphabet
    odd_union = automata.union(parts)
    complement = automata.dualize(odd_union)
    safety = automata.build_safety(rel, lib.directions, names)
    return automata.intersect(safety, complement), pruned


def synth_embedded(lib: Library, rel: ExitControlRelation,
                   alpha: IndexFunction) -> SynthesisResult:
    """Composer realizing the index function under the relation, or None."""
    t0 = time.perf_counter()
    uct, pruned = _embedded_uct(lib, rel, alpha)
    removed = tuple(c.name for c in lib.components if c.name not in pruned.by_name)
    diags = [f"removed odd sink {name!r}" for name in removed]
    if uct is None:
        diags.append("no components survive odd-sink removal")
        return SynthesisResult(None, removed, tuple(diags), time.perf_counter() - t0)
    witness = emptiness.uct_emptiness(uct)
    if witness is None:
        return SynthesisResult(None, removed, tuple(diags), time.perf_counter() - t0)
    comp = composer_from_tree(witness)
    if not verify_embedded(comp, lib, alpha):
        raise RuntimeError("synthesized composer failed verification")
    if not is_compatible(comp, rel):
        raise RuntimeError("synthesized composer violates the exit-control relation")
    return SynthesisResult(comp, removed, tuple(diags), time.perf_counter() - t0)


def synth_dpw(lib: Library, monitor: Dpw) -> SynthesisResult:
    """Composer whose composition satisfies the monitor almost surely."""
    t0 = time.perf_counter()
    base = lib.components[0]
    if set(base.outputs) != set(monitor.alphabet):
        raise ValueError("the monitor must read the library's output alphabet")
    aug = composition.augment_library(lib, monitor)
    uct, pruned = _embedded_uct(aug.library, aug.relation, aug.index)
    removed = tuple(
        c.name for c in aug.library.components if c.name not in pruned.by_name
    )
    diags = [f"removed odd sink {name!r}" for name in removed]
    if uct is None:
        diags.append("no augmented components survive odd-sink removal")
        return SynthesisResult(None, removed, tuple(diags), time.perf_counter() - t0)
    narrowed = automata.narrow(uct, monitor.states, monitor.start)
    witness = emptiness.uct_emptiness(narrowed)
    if witness is None:
        return SynthesisResult(None, removed, tuple(diags), time.perf_counter() - t0)
    comp = composer_from_tree(witness)
    if not verify_dpw(comp, lib, monitor, cross_check=True):
        raise RuntimeError("synthesized composer failed monitor verification")
    return SynthesisResult(comp, removed, tuple(diags), time.perf_counter() - t0)


def verify_embedded(comp: Composer, lib: Library, alpha: IndexFunction) -> bool:
    """Qualitative check that the composition satisfies the index function."""
    t = composition.compose(comp, lib)
    return mdp.satisfies_index(t.to_view(alpha))


def verify_dpw_via_product(comp: Composer, lib: Library, monitor: Dpw) -> bool:
    """Monitor check on the product of the composition with the monitor."""
    t = composition.compose(comp, lib)
    return mdp.satisfies_index(composition.monitored_composition_view(t, monitor))


def verify_dpw_via_augmentation(comp: Composer, lib: Library, monitor: Dpw) -> bool:
    """Monitor check through the augmented composer and library."""
    aug = composition.augment_library(lib, monitor)
    lifted = composition.augment_composer(comp, monitor)
    return verify_embedded(lifted, aug.library, aug.index)


def verify_dpw(comp: Composer, lib: Library, monitor: Dpw, *, cross_check: bool = False) -> bool:
    """Whether the composition satisfies the monitor with probability 1.

    With `cross_check`, the product route and the augmentation route are
    both computed and must agree.
    """
    direct = verify_dpw_via_product(comp, lib, monitor)
    if cross_check:
        lifted = verify_dpw_via_augmentation(comp, lib, monitor)
        if lifted != direct:
            raise RuntimeError(
                f"verification routes disagree: product={direct}, augmentation={lifted}"
            )
    return direct
