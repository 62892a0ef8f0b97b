"""Two-player parity games with memoryless strategy extraction.

The solver is Zielonka's recursion in McNaughton's loop form: the recursion
only ever descends to strictly smaller top priorities, so its depth is
bounded by the number of distinct priorities.  Convention is max-even:
player 0 wins a play iff the highest priority seen infinitely often is even.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional


@dataclass(frozen=True)
class GameArena:
    """Finite arena; every vertex must have at least one successor (resolve
    dead ends as losses for their owner before construction)."""

    vertices: tuple
    owner: Mapping[object, int]
    priority: Mapping[object, int]
    succ: Mapping[object, tuple]
    initial: object | None = None


@dataclass(frozen=True)
class ParitySolution:
    winning: tuple[frozenset, frozenset]
    strategy: tuple[Mapping, Mapping]


def solve_parity_game(arena: GameArena) -> ParitySolution:
    """Exact winning regions and memoryless strategies for both players."""
    succ = arena.succ
    owner = arena.owner
    priority = arena.priority
    preds: dict = {v: [] for v in arena.vertices}
    for v in arena.vertices:
        if not succ[v]:
            raise ValueError(f"vertex {v!r} has no successors")
        for w in succ[v]:
            preds[w].append(v)

    def attract(universe: set, target: set, player: int) -> tuple[set, dict]:
        """Least set containing `target` from which `player` can force entry,
        with the player's attractor moves (edges chosen in successor order)."""
        region = set(target)
        strat: dict = {}
        out_count = {}
        queue = list(target)
        while queue:
            v = queue.pop()
            for u in preds[v]:
                if u not in universe or u in region:
                    continue
                if owner[u] == player:
                    region.add(u)
                    strat[u] = next(w for w in succ[u] if w in region)
                    queue.append(u)
                else:
                    if u not in out_count:
                        out_count[u] = sum(1 for w in succ[u] if w in universe)
                    out_count[u] -= 1
                    if out_count[u] == 0:
                        region.add(u)
                        queue.append(u)
        return region, strat

    def solve(universe: frozenset) -> tuple[set, set, dict, dict]:
        wins = {0: set(), 1: set()}
        strat = {0: {}, 1: {}}
        vs = set(universe)
        while vs:
            p = max(priority[v] for v in vs)
            player = 0 if p % 2 == 0 else 1
            opp = 1 - player
            top = {v for v in vs if priority[v] == p}
            attracted, reach_strat = attract(vs, top, player)
            sub = solve(frozenset(vs - attracted))
            sub_wins = {0: sub[0], 1: sub[1]}
            sub_strat = {0: sub[2], 1: sub[3]}
            if not sub_wins[opp]:
                wins[player] |= vs
                strat[player].update(sub_strat[player])
                strat[player].update(reach_strat)
                for v in top:
                    if owner[v] == player and v not in strat[player]:
                        strat[player][v] = next(w for w in succ[v] if w in vs)
                return wins[0], wins[1], strat[0], strat[1]
            escaped, cut_strat = attract(vs, sub_wins[opp], opp)
            wins[opp] |= escaped
            strat[opp].update(sub_strat[opp])
            strat[opp].update(cut_strat)
            vs -= escaped
        return wins[0], wins[1], strat[0], strat[1]

    w0, w1, s0, s1 = solve(frozenset(arena.vertices))
    return ParitySolution(
        winning=(frozenset(w0), frozenset(w1)),
        strategy=(s0, s1),
    )


def solve_buchi_game(arena_vertices, owner, succ, accepting, initial=None) -> ParitySolution:
    """Buchi objective for player 0 (visit `accepting` infinitely often),
    expressed as the parity game with priorities 2 and 1."""
    priority = {v: 2 if v in accepting else 1 for v in arena_vertices}
    arena = GameArena(
        vertices=tuple(arena_vertices),
        owner=owner,
        priority=priority,
        succ=succ,
        initial=initial,
    )
    return solve_parity_game(arena)


def arena_dot(arena: GameArena) -> str:
    """GraphViz dump of an arena (squares for player 1)."""
    ids = {v: f"v{i}" for i, v in enumerate(arena.vertices)}
    lines = ["digraph arena {"]
    for v in arena.vertices:
        shape = "box" if arena.owner[v] == 1 else "ellipse"
        lines.append(f'  {ids[v]} [label="{v}\\np{arena.priority[v]}", shape={shape}];')
    for v in arena.vertices:
        for w in arena.succ[v]:
            lines.append(f"  {ids[v]} -> {ids[w]};")
    lines.append("}")
    return "\n".join(lines)
