"""Textual formats for libraries, monitors, composers and choice functions.

Rationals are mandatory ("2/3" or "1"); floats are rejected so that the
exact-support contract cannot be silently weakened.  `#` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .model import (
    Component,
    Composer,
    Dpw,
    ExitControlRelation,
    IndexFunction,
    Library,
    convert_min_even_priorities,
)

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")


class ParseError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


@dataclass
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[list[_Tok]]:
    lines: list[list[_Tok]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [_Tok(m.group(0), ln, m.start() + 1) for m in re.finditer(r"\S+", body)]
        if toks:
            lines.append(toks)
    return lines


def _kv(tok: _Tok, key: str) -> str:
    prefix = key + "="
    if not tok.text.startswith(prefix):
        raise ParseError(tok.line, tok.col, f"expected {prefix}..., found {tok.text!r}")
    return tok.text[len(prefix):]


def _nat(tok: _Tok, value: str) -> int:
    if not value.isdigit():
        raise ParseError(tok.line, tok.col, f"expected a natural number, found {value!r}")
    return int(value)


def _ident(tok: _Tok, value: str) -> str:
    if not _IDENT.match(value):
        raise ParseError(tok.line, tok.col, f"invalid identifier {value!r}")
    return value


def _rational(tok: _Tok, value: str) -> Fraction:
    if not _RATIONAL.match(value):
        raise ParseError(tok.line, tok.col,
                         f"expected a rational like 2/3 or 1 (floats are not accepted), found {value!r}")
    return Fraction(value)


def parse_library(text: str) -> tuple[Library, IndexFunction, ExitControlRelation]:
    """Parse the library format; raises ParseError with line/column on
    syntax problems.  Structural validation is a separate step."""
    lines = _tokenize(text)
    if not lines or lines[0][0].text != "library":
        tok = lines[0][0] if lines else _Tok("", 1, 1)
        raise ParseError(tok.line, tok.col, "file must start with a 'library' header")
    header = lines[0]
    if len(header) != 4:
        raise ParseError(header[0].line, header[0].col,
                         "header must be: library width=<n> inputs=<id,...> outputs=<id,...>")
    width = _nat(header[1], _kv(header[1], "width"))
    inputs = tuple(_ident(header[2], v) for v in _kv(header[2], "inputs").split(","))
    outputs = tuple(_ident(header[3], v) for v in _kv(header[3], "outputs").split(","))

    allow_pairs: list[tuple[int, str]] = []
    allow_all = False
    components: list[Component] = []
    priorities: dict[tuple[str, str], int] = {}

    cur_name: str | None = None
    cur_states: list[str] = []
    cur_exits: dict[int, str] = {}
    cur_output: dict[str, str] = {}
    cur_trans: dict[tuple[str, str], dict[str, Fraction]] = {}
    cur_line = 0

    def finish_component(at: _Tok | None):
        nonlocal cur_name
        if cur_name is None:
            return
        dirs = sorted(cur_exits)
        if dirs != list(range(len(dirs))):
            raise ParseError(cur_line, 1,
                             f"component {cur_name!r}: exit directions must be 0..{len(dirs) - 1}, got {dirs}")
        start = cur_states[0] if cur_states else None
        if start is None:
            raise ParseError(cur_line, 1, f"component {cur_name!r} declares no states")
        components.append(Component(
            name=cur_name,
            inputs=inputs,
            outputs=outputs,
            states=tuple(cur_states),
            start=start,
            exits=tuple(cur_exits[d] for d in dirs),
            output=dict(cur_output),
            transitions={k: dict(v) for k, v in cur_trans.items()},
        ))
        cur_name = None

    for toks in lines[1:]:
        head = toks[0]
        if head.text == "allow":
            if len(toks) == 2 and toks[1].text == "all":
                allow_all = True
                continue
            if len(toks) != 3:
                raise ParseError(head.line, head.col, "expected: allow dir=<n> component=<id>")
            allow_pairs.append((
                _nat(toks[1], _kv(toks[1], "dir")),
                _ident(toks[2], _kv(toks[2], "component")),
            ))
        elif head.text == "component":
            finish_component(head)
            if len(toks) != 2:
                raise ParseError(head.line, head.col, "expected: component <id>")
            cur_name = _ident(toks[1], toks[1].text)
            if any(c.name == cur_name for c in components):
                raise ParseError(toks[1].line, toks[1].col, f"duplicate component name {cur_name!r}")
            cur_states, cur_exits, cur_output, cur_trans = [], {}, {}, {}
            cur_line = head.line
        elif head.text in ("state", "exit"):
            if cur_name is None:
                raise ParseError(head.line, head.col, f"{head.text!r} outside a component")
            want = 4 if head.text == "state" else 5
            if len(toks) != want:
                raise ParseError(head.line, head.col,
                                 f"expected: {head.text} <id> out=<id> prio=<n>" +
                                 (" dir=<n>" if head.text == "exit" else ""))
            sid = _ident(toks[1], toks[1].text)
            if sid in cur_states:
                raise ParseError(toks[1].line, toks[1].col, f"duplicate state name {sid!r}")
            cur_states.append(sid)
            cur_output[sid] = _ident(toks[2], _kv(toks[2], "out"))
            priorities[(cur_name, sid)] = _nat(toks[3], _kv(toks[3], "prio"))
            if head.text == "exit":
                d = _nat(toks[4], _kv(toks[4], "dir"))
                if d in cur_exits:
                    raise ParseError(toks[4].line, toks[4].col,
                                     f"duplicate exit direction {d} in component {cur_name!r}")
                cur_exits[d] = sid
        elif head.text == "trans":
            if cur_name is None:
                raise ParseError(head.line, head.col, "'trans' outside a component")
            if len(toks) < 5 or toks[3].text != "->":
                raise ParseError(head.line, head.col,
                                 "expected: trans <state> <letter> -> <state>:<rational> ...")
            src = toks[1].text
            if src not in cur_states:
                raise ParseError(toks[1].line, toks[1].col,
                                 f"unknown state {src!r} (declare states before transitions)")
            letter = toks[2].text
            if letter not in inputs:
                raise ParseError(toks[2].line, toks[2].col, f"unknown input letter {letter!r}")
            if (src, letter) in cur_trans:
                raise ParseError(toks[1].line, toks[1].col,
                                 f"duplicate transition row for ({src!r}, {letter!r})")
            row: dict[str, Fraction] = {}
            for tok in toks[4:]:
                if ":" not in tok.text:
                    raise ParseError(tok.line, tok.col,
                                     f"expected <state>:<rational>, found {tok.text!r}")
                target, prob = tok.text.rsplit(":", 1)
                if target not in cur_states:
                    raise ParseError(tok.line, tok.col,
                                     f"unknown state {target!r} (declare states before transitions)")
                if target in row:
                    raise ParseError(tok.line, tok.col, f"state {target!r} listed twice in one row")
                row[target] = _rational(tok, prob)
            cur_trans[(src, letter)] = row
        else:
            raise ParseError(head.line, head.col, f"unexpected directive {head.text!r}")
    finish_component(None)

    lib = Library(width=width, components=tuple(components))
    if allow_all:
        rel = ExitControlRelation.total(lib)
    else:
        rel = ExitControlRelation(frozenset(allow_pairs))
    return lib, IndexFunction.from_map(priorities), rel


def render_library(lib: Library, alpha: IndexFunction, rel: ExitControlRelation) -> str:
    base = lib.components[0]
    lines = [
        f"library width={lib.width} inputs={','.join(base.inputs)} outputs={','.join(base.outputs)}"
    ]
    if rel.allowed == ExitControlRelation.total(lib).allowed:
        lines.append("allow all")
    else:
        for d, name in sorted(rel.allowed, key=repr):
            lines.append(f"allow dir={d} component={name}")
    for comp in lib.components:
        lines.append(f"component {comp.name}")
        for q in comp.states:
            prio = alpha.of(comp.name, q)
            if comp.is_exit(q):
                lines.append(f"  exit {q} out={comp.output[q]} prio={prio} dir={comp.exit_position[q]}")
            else:
                lines.append(f"  state {q} out={comp.output[q]} prio={prio}")
        for q in comp.states:
            if comp.is_exit(q):
                continue
            for a in comp.inputs:
                row = comp.transitions[(q, a)]
                cells = " ".join(f"{t}:{p}" for t, p in row.items())
                lines.append(f"  trans {q} {a} -> {cells}")
    return "\n".join(lines) + "\n"


def parse_dpw(text: str) -> Dpw:
    """Parse a deterministic parity monitor; min-even priorities are
    converted to the max-even convention on the way in."""
    lines = _tokenize(text)
    if not lines or lines[0][0].text != "dpw":
        tok = lines[0][0] if lines else _Tok("", 1, 1)
        raise ParseError(tok.line, tok.col, "file must start with a 'dpw' header")
    header = lines[0]
    alphabet: tuple[str, ...] | None = None
    convention = "max-even"
    for tok in header[1:]:
        if tok.text.startswith("inputs="):
            alphabet = tuple(_ident(tok, v) for v in _kv(tok, "inputs").split(","))
        elif tok.text.startswith("convention="):
            convention = _kv(tok, "convention")
            if convention not in ("max-even", "min-even"):
                raise ParseError(tok.line, tok.col, f"unknown convention {convention!r}")
        else:
            raise ParseError(tok.line, tok.col, f"unexpected header token {tok.text!r}")
    if alphabet is None:
        raise ParseError(header[0].line, header[0].col, "dpw header needs inputs=<id,...>")
    states: list[str] = []
    priority: dict[str, int] = {}
    start: str | None = None
    edges: dict[tuple[str, str], str] = {}
    for toks in lines[1:]:
        head = toks[0]
        if head.text == "state":
            if len(toks) not in (3, 4) or (len(toks) == 4 and toks[3].text != "start"):
                raise ParseError(head.line, head.col, "expected: state <id> prio=<n> [start]")
            sid = _ident(toks[1], toks[1].text)
            if sid in states:
                raise ParseError(toks[1].line, toks[1].col, f"duplicate state name {sid!r}")
            states.append(sid)
            priority[sid] = _nat(toks[2], _kv(toks[2], "prio"))
            if len(toks) == 4:
                if start is not None:
                    raise ParseError(toks[3].line, toks[3].col, "more than one start state")
                start = sid
        elif head.text == "edge":
            if len(toks) != 5 or toks[3].text != "->":
                raise ParseError(head.line, head.col, "expected: edge <state> <letter> -> <state>")
            src, letter, dst = toks[1].text, toks[2].text, toks[4].text
            for tok, sid in ((toks[1], src), (toks[4], dst)):
                if sid not in states:
                    raise ParseError(tok.line, tok.col,
                                     f"unknown state {sid!r} (declare states before edges)")
            if letter not in alphabet:
                raise ParseError(toks[2].line, toks[2].col, f"unknown letter {letter!r}")
            if (src, letter) in edges:
                raise ParseError(toks[1].line, toks[1].col,
                                 f"duplicate edge for ({src!r}, {letter!r})")
            edges[(src, letter)] = dst
        else:
            raise ParseError(head.line, head.col, f"unexpected directive {head.text!r}")
    if start is None:
        raise ParseError(header[0].line, header[0].col, "no state is marked 'start'")
    for s in states:
        for a in alphabet:
            if (s, a) not in edges:
                raise ParseError(header[0].line, header[0].col,
                                 f"monitor is not total: no edge for ({s!r}, {a!r})")
    if convention == "min-even":
        priority = convert_min_even_priorities(priority)
    return Dpw(
        alphabet=alphabet,
        states=tuple(states),
        start=start,
        next=edges,
        priority=priority,
    )


def render_dpw(monitor: Dpw) -> str:
    lines = [f"dpw inputs={','.join(monitor.alphabet)} convention=max-even"]
    for s in monitor.states:
        flag = " start" if s == monitor.start else ""
        lines.append(f"state {s} prio={monitor.priority[s]}{flag}")
    for s in monitor.states:
        for a in monitor.alphabet:
            lines.append(f"edge {s} {a} -> {monitor.next[(s, a)]}")
    return "\n".join(lines) + "\n"


def parse_composer(text: str) -> Composer:
    lines = _tokenize(text)
    if not lines or not lines[0][0].text == "composer":
        tok = lines[0][0] if lines else _Tok("", 1, 1)
        raise ParseError(tok.line, tok.col, "file must start with a 'composer' header")
    header = lines[0]
    if len(header) != 2:
        raise ParseError(header[0].line, header[0].col, "expected: composer start=<id>")
    start = _ident(header[1], _kv(header[1], "start"))
    instances: list[str] = []
    component_of: dict[str, str] = {}
    routes: dict[tuple[str, int], str] = {}
    for toks in lines[1:]:
        head = toks[0]
        if head.text == "instance":
            if len(toks) != 3:
                raise ParseError(head.line, head.col, "expected: instance <id> component=<id>")
            mid = _ident(toks[1], toks[1].text)
            if mid in component_of:
                raise ParseError(toks[1].line, toks[1].col, f"duplicate instance {mid!r}")
            instances.append(mid)
            component_of[mid] = _ident(toks[2], _kv(toks[2], "component"))
        elif head.text == "route":
            if len(toks) != 5 or toks[3].text != "->":
                raise ParseError(head.line, head.col, "expected: route <id> dir=<n> -> <id>")
            src = toks[1].text
            d = _nat(toks[2], _kv(toks[2], "dir"))
            dst = toks[4].text
            for tok, mid in ((toks[1], src), (toks[4], dst)):
                if mid not in component_of:
                    raise ParseError(tok.line, tok.col,
                                     f"unknown instance {mid!r} (declare instances before routes)")
            if (src, d) in routes:
                raise ParseError(toks[1].line, toks[1].col, f"duplicate route ({src!r}, {d})")
            routes[(src, d)] = dst
        else:
            raise ParseError(head.line, head.col, f"unexpected directive {head.text!r}")
    if start not in component_of:
        raise ParseError(header[0].line, header[0].col, f"start instance {start!r} is never declared")
    width = max((d for (_m, d) in routes), default=-1) + 1
    return Composer(
        states=tuple(instances),
        start=start,
        component_of=component_of,
        next=routes,
        directions=tuple(range(width)),
    )


def render_composer(comp: Composer) -> str:
    lines = [f"composer start={comp.start}"]
    for m in comp.states:
        lines.append(f"instance {m} component={comp.component_of[m]}")
    for m in comp.states:
        for d in comp.directions:
            lines.append(f"route {m} dir={d} -> {comp.next[(m, d)]}")
    return "\n".join(lines) + "\n"


def parse_choices(text: str) -> dict[str, tuple[frozenset[int], int]]:
    """Choice-function format: one `choice <instance> exits=<n,...|none>
    prio=<n>` line per instance."""
    out: dict[str, tuple[frozenset[int], int]] = {}
    for toks in _tokenize(text):
        head = toks[0]
        if head.text != "choice":
            raise ParseError(head.line, head.col, f"unexpected directive {head.text!r}")
        if len(toks) != 4:
            raise ParseError(head.line, head.col, "expected: choice <instance> exits=<n,...|none> prio=<n>")
        mid = _ident(toks[1], toks[1].text)
        if mid in out:
            raise ParseError(toks[1].line, toks[1].col, f"duplicate choice for instance {mid!r}")
        raw = _kv(toks[2], "exits")
        if raw == "none":
            exits: frozenset[int] = frozenset()
        else:
            exits = frozenset(_nat(toks[2], v) for v in raw.split(","))
        out[mid] = (exits, _nat(toks[3], _kv(toks[3], "prio")))
    return out
