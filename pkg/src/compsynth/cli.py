"""Command-line interface.

Exit codes: 0 = realizable / verified / clean, 1 = unrealizable / refuted /
diagnostics found, 2 = input error (parse or validation failure on a file,
or an --oracle disagreement, which is always a hard failure).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import (
    automata,
    composition,
    mdp,
    model,
    oracle,
    synthesis,
    textio,
)

OK, REFUTED, INPUT_ERROR = 0, 1, 2


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SystemExit(_fail(f"cannot read {path}: {e}"))


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return INPUT_ERROR


def _load_problem(path: str):
    text = _read(path)
    try:
        lib, alpha, rel = textio.parse_library(text)
    except textio.ParseError as e:
        raise SystemExit(_fail(f"{path}: {e}"))
    diags = (model.validate_library(lib) + model.validate_index(lib, alpha)
             + model.validate_relation(lib, rel))
    hard = [d for d in diags if not d.startswith("warning:")]
    for d in diags:
        print(f"{path}: {d}", file=sys.stderr)
    if hard:
        raise SystemExit(INPUT_ERROR)
    return lib, alpha, rel


def _load_dpw(path: str):
    try:
        return textio.parse_dpw(_read(path))
    except textio.ParseError as e:
        raise SystemExit(_fail(f"{path}: {e}"))


def _load_composer(path: str):
    try:
        return textio.parse_composer(_read(path))
    except textio.ParseError as e:
        raise SystemExit(_fail(f"{path}: {e}"))


def cmd_validate(args) -> int:
    text = _read(args.file)
    try:
        lib, alpha, rel = textio.parse_library(text)
    except textio.ParseError as e:
        return _fail(f"{args.file}: {e}")
    diags = (model.validate_library(lib) + model.validate_index(lib, alpha)
             + model.validate_relation(lib, rel))
    for d in diags:
        print(d)
    if any(not d.startswith("warning:") for d in diags):
        return REFUTED
    print(f"ok: {len(lib.components)} components, width {lib.width}, max priority {alpha.max_priority}")
    return OK


def cmd_labels(args) -> int:
    lib, alpha, _rel = _load_problem(args.file)
    gamma = mdp.labels(lib, alpha)
    for t in sorted(gamma, key=lambda t: (repr(t.component), sorted(t.exits), t.priority)):
        exits = ",".join(str(d) for d in sorted(t.exits)) or "none"
        print(f"component={t.component} exits={exits} prio={t.priority}")
    bound = alpha.max_priority * len(lib.components) * 2 ** lib.width
    print(f"count={len(gamma)} bound={bound} within-bound={len(gamma) <= bound}")
    if args.oracle:
        for comp in lib.components:
            view = mdp.component_view(comp, alpha, lib.directions)
            for x in _powerset(lib.directions):
                for j in range(1, 2 * alpha.max_priority + 1):
                    fast = mdp._label_fast_path(view, frozenset(x), j)
                    truth = mdp.LabelTriple(frozenset(x), j, comp.name) in gamma
                    if fast and not truth:
                        return _fail(f"fast path disagrees with enumeration on "
                                     f"({comp.name}, {set(x)}, {j})")
        print("oracle: fast path agrees with enumeration")
    return OK if len(gamma) <= bound else REFUTED


def _powerset(items):
    out = [()]
    for it in items:
        out += [prev + (it,) for prev in out]
    return out


def cmd_preprocess(args) -> int:
    lib, alpha, _rel = _load_problem(args.file)
    pruned = mdp.remove_odd_sinks(lib, alpha)
    removed = [c.name for c in lib.components if c.name not in pruned.by_name]
    for name in removed:
        print(f"removed odd sink: {name}")
    print(f"kept {len(pruned.components)} of {len(lib.components)} components")
    return OK


def _write_dots(dot_dir: str, lib, result) -> None:
    out = Path(dot_dir)
    out.mkdir(parents=True, exist_ok=True)
    if result.composer is not None:
        tree = composition.tree_of_composer(result.composer)
        (out / "composer_tree.dot").write_text(composition.tree_dot(tree), encoding="utf-8")
        t = composition.compose(result.composer, lib)
        (out / "composition.dot").write_text(composition.composition_dot(t), encoding="utf-8")


def cmd_synth_embedded(args) -> int:
    lib, alpha, rel = _load_problem(args.file)
    result = synthesis.synth_embedded(lib, rel, alpha)
    for d in result.diagnostics:
        print(d)
    print(f"{'realizable' if result.realizable else 'unrealizable'} in {result.seconds:.3f}s")
    if args.oracle:
        found = oracle.bounded_composer_search(lib, rel, alpha=alpha, bound=args.oracle_bound)
        if found is not None and not result.realizable:
            return _fail("oracle disagreement: bounded search found a composer "
                         "but the pipeline reported unrealizable")
        print(f"oracle: bounded search (<= {args.oracle_bound} instances) "
              f"{'found a composer' if found is not None else 'found none'}")
    if result.composer is not None:
        rendered = textio.render_composer(result.composer)
        if args.out:
            Path(args.out).write_text(rendered, encoding="utf-8")
            print(f"composer written to {args.out}")
        else:
            print(rendered, end="")
        if args.dot:
            _write_dots(args.dot, lib, result)
        return OK
    return REFUTED


def cmd_synth_dpw(args) -> int:
    lib, _alpha, _rel = _load_problem(args.file)
    monitor = _load_dpw(args.monitor)
    try:
        result = synthesis.synth_dpw(lib, monitor)
    except ValueError as e:
        return _fail(str(e))
    for d in result.diagnostics:
        print(d)
    print(f"{'realizable' if result.realizable else 'unrealizable'} in {result.seconds:.3f}s")
    if args.oracle:
        rel = model.ExitControlRelation.total(lib)
        found = oracle.bounded_composer_search(lib, rel, monitor=monitor, bound=args.oracle_bound)
        if found is not None and not result.realizable:
            return _fail("oracle disagreement: bounded search found a composer "
                         "but the pipeline reported unrealizable")
        print(f"oracle: bounded search (<= {args.oracle_bound} instances) "
              f"{'found a composer' if found is not None else 'found none'}")
    if result.composer is not None:
        rendered = textio.render_composer(result.composer)
        if args.out:
            Path(args.out).write_text(rendered, encoding="utf-8")
            print(f"composer written to {args.out}")
        else:
            print(rendered, end="")
        if args.dot:
            _write_dots(args.dot, lib, result)
        return OK
    return REFUTED


def cmd_verify(args) -> int:
    lib, alpha, rel = _load_problem(args.file)
    comp = _load_composer(args.composer)
    # the library fixes the direction space; routes must cover all of it
    comp = model.Composer(
        states=comp.states,
        start=comp.start,
        component_of=comp.component_of,
        next=comp.next,
        directions=lib.directions,
    )
    diags = model.validate_composer(comp, lib)
    if diags:
        for d in diags:
            print(d, file=sys.stderr)
        return INPUT_ERROR
    compatible = model.is_compatible(comp, rel)
    print(f"relation-compatible: {compatible}")
    if args.monitor:
        monitor = _load_dpw(args.monitor)
        ok = synthesis.verify_dpw(comp, lib, monitor, cross_check=args.oracle)
        print(f"monitor satisfied almost surely: {ok}")
    else:
        ok = synthesis.verify_embedded(comp, lib, alpha)
        print(f"index function satisfied almost surely: {ok}")
    return OK if (ok and compatible) else REFUTED


def cmd_rank(args) -> int:
    lib, alpha, _rel = _load_problem(args.file)
    comp = _load_composer(args.composer)
    try:
        choices = textio.parse_choices(_read(args.choices))
    except textio.ParseError as e:
        return _fail(f"{args.choices}: {e}")
    missing = [m for m in comp.states if m not in choices]
    if missing:
        return _fail(f"choice function missing instances: {missing}")
    gamma = mdp.labels(lib, alpha)
    g = {m: (frozenset(choices[m][0]), choices[m][1]) for m in comp.states}
    valid = automata.ChoiceFunction(g).valid_for(comp, gamma)
    ranks = sorted(automata.choice_ranks(comp, g))
    print(f"valid-choice-function: {valid}")
    print(f"ranks: {ranks}")
    return OK if valid else REFUTED


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="compsynth",
        description="almost-sure control-flow synthesis from probabilistic components",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a library file against all invariants")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("labels", help="print the realizable exit-set/priority summaries")
    p.add_argument("file")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check the polynomial fast path against enumeration")
    p.set_defaults(func=cmd_labels)

    p = sub.add_parser("preprocess", help="report components removed as odd sinks")
    p.add_argument("file")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("synth-embedded", help="synthesize against the embedded priorities")
    p.add_argument("file")
    p.add_argument("--out", help="write the composer to this file")
    p.add_argument("--dot", help="write GraphViz dumps into this directory")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check the verdict against bounded composer search")
    p.add_argument("--oracle-bound", type=int, default=3)
    p.set_defaults(func=cmd_synth_embedded)

    p = sub.add_parser("synth-dpw", help="synthesize against a parity monitor")
    p.add_argument("file")
    p.add_argument("--monitor", required=True)
    p.add_argument("--out", help="write the composer to this file")
    p.add_argument("--dot", help="write GraphViz dumps into this directory")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check the verdict against bounded composer search")
    p.add_argument("--oracle-bound", type=int, default=2)
    p.set_defaults(func=cmd_synth_dpw)

    p = sub.add_parser("verify", help="verify a composer against a library (and monitor)")
    p.add_argument("composer")
    p.add_argument("file")
    p.add_argument("--monitor")
    p.add_argument("--oracle", action="store_true",
                   help="verify through both routes and require agreement")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rank", help="ranks of a choice function on a composer")
    p.add_argument("composer")
    p.add_argument("choices")
    p.add_argument("file")
    p.set_defaults(func=cmd_rank)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else INPUT_ERROR
    except RuntimeError as e:
        return _fail(str(e))


if __name__ == "__main__":
    sys.exit(main())
