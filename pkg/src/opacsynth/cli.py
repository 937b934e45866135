"""Command-line interface.

Exit codes: 0 success or opaque, 1 unsolvable or not opaque (or a failed
fixture check), 2 input error, 3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Callable, Sequence, TextIO

from .automaton import Automaton, load_automaton, parse_automaton, to_dot
from .costs import CostFunction
from .errors import FixtureConstraintError, OpacityError, ResourceLimitError, UnsolvableError
from .estimation import observable_reach, verify_infinite_step_opacity
from .game import DEFAULT_MAX_STATES
from .infostate import initial_info_state, update_info_state
from .oracle import FIXTURES, fixture_text, load_constraints, reconstruct_fixture
from .supervisor import load_supervisor
from .synth_qual import enumerate_supervisors, extract_supervisor, solve
from .synth_quant import synthesize

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

FIXTURE_ALIASES = {"fig1_G_disabled_b": "fig1_G1"}


def load_plant(path: str) -> Automaton:
    """Read a plant file; bare fixture names resolve to the bundled fixtures."""
    if os.path.exists(path):
        return load_automaton(path)
    stem = os.path.basename(path).removesuffix(".des").removesuffix(".json")
    stem = FIXTURE_ALIASES.get(stem, stem)
    if stem in FIXTURES:
        return parse_automaton(fixture_text(stem))
    raise FileNotFoundError(f"no such file: {path}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(args, text: str, out: TextIO) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def cmd_verify(args, out: TextIO) -> int:
    A = load_plant(args.plant)
    verdict = verify_infinite_step_opacity(A, simplify=args.simplify)
    if args.format == "text":
        if verdict.opaque:
            text = "opaque\n"
        else:
            w = verdict.witness
            text = (f"not opaque: estimate of ({' '.join(w.alpha_prime) or 'ε'}) given "
                    f"({' '.join(w.alpha_beta)}) is {{{', '.join(A.names(w.estimate))}}}\n")
    else:
        _require(args, ("json",))
        text = _dump(verdict.to_json(A))
    _emit(args, text, out)
    return EXIT_OK if verdict.opaque else EXIT_FAIL


def cmd_synth_qual(args, out: TextIO) -> int:
    A = load_plant(args.plant)
    T = solve(A, simplify=args.simplify, max_states=args.max_states, reduce=args.reduce)
    if T.is_empty():
        _emit(args, _dump({"solvable": False}) if args.format == "json" else "unsolvable\n", out)
        return EXIT_FAIL
    sups = enumerate_supervisors(T, A) if args.chooser == "all" else [extract_supervisor(T, A)]
    if args.format == "json":
        doc = {"solvable": True}
        if args.chooser == "all":
            doc["supervisors"] = [S.to_json() for S in sups]
        else:
            doc["supervisor"] = sups[0].to_json()
        text = _dump(doc)
    elif args.format == "dot":
        text = "".join(S.to_dot(A, name=f"S{i + 1}") for i, S in enumerate(sups))
    elif args.format == "text":
        text = "".join(_describe(S, A, f"supervisor {i + 1}") for i, S in enumerate(sups))
    else:
        _require(args, ("json", "dot", "text"))
    _emit(args, text, out)
    return EXIT_OK


def cmd_synth_quant(args, out: TextIO) -> int:
    if args.n_max is None or args.n_max < 1:
        raise ValueError("synth-quant needs --n-max of at least 1")
    A = load_plant(args.plant)
    T, V, S = synthesize(A, CostFunction.linear(args.n_max), args.simplify, args.max_states, reduce=args.reduce)
    if args.values:
        with open(args.values, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(V.to_csv())
    value = V.y(T.initial)
    finite = S is not None
    if args.format == "csv":
        text = V.to_csv()
    elif args.format == "json":
        doc = {"value": int(value) if finite else None, "stable_round": V.stable_round,
               "supervisor": S.to_json() if finite else None}
        text = _dump(doc)
    elif args.format == "dot":
        text = S.to_dot(A) if finite else ""
    elif args.format == "text":
        text = _describe(S, A, f"optimal supervisor, worst-case cost {int(value)}") if finite else "no finite cost\n"
    else:
        _require(args, ("json", "dot", "csv", "text"))
    _emit(args, text, out)
    return EXIT_OK if finite else EXIT_FAIL


def _describe(S, A: Automaton, title: str) -> str:
    lines = [f"{title}: {S.size} memory states"]
    for m, d in enumerate(S.decisions):
        extra = f" budget={S.budgets[m]}" if S.budgets is not None else ""
        moves = ", ".join(f"{e}->{t}" for (src, e), t in sorted(S.transitions.items()) if src == m)
        lines.append(f"  m{m}: enable {{{', '.join(sorted(d & A.controllable))}}}{extra}"
                     + (f"; {moves}" if moves else ""))
    return "\n".join(lines) + "\n"


def cmd_simulate(args, out: TextIO, inp: TextIO) -> int:
    A = load_plant(args.plant)
    S = load_supervisor(args.supervisor)
    memory = S.initial
    info = initial_info_state(A, S.decision(memory), simplify=args.simplify)

    def report(observed):
        rec = {"observed": observed, "decision": sorted(S.decision(memory)), "info": info.to_json(A)}
        if S.budgets is not None:
            rec["budget"] = S.budgets[memory]
        out.write(json.dumps(rec, sort_keys=True) + "\n")

    report(None)
    for raw in inp:
        sigma = raw.strip()
        if not sigma or sigma.startswith("#"):
            continue
        reason = None
        if sigma not in A.observable:
            reason = "not an observable event"
        elif sigma not in S.decision(memory):
            reason = "disabled by the current decision"
        elif not observable_reach(A, info.current, sigma):
            reason = "cannot occur in any current state"
        elif S.step(memory, sigma) is None:
            reason = "supervisor has no move for it"
        if reason:
            out.write(json.dumps({"rejected": sigma, "reason": reason}, sort_keys=True) + "\n")
            continue
        memory = S.step(memory, sigma)
        info = update_info_state(info, sigma, S.decision(memory), A, simplify=args.simplify)
        report(sigma)
    return EXIT_OK


def cmd_export_dot(args, out: TextIO) -> int:
    A = load_plant(args.plant)
    name = os.path.basename(args.plant).removesuffix(".des")
    _emit(args, to_dot(A, name), out)
    return EXIT_OK


def cmd_fixture_check(args, out: TextIO) -> int:
    names = args.names or [f for f in FIXTURES if load_constraints(f)]
    status = EXIT_OK
    lines = []
    for name in names:
        name = FIXTURE_ALIASES.get(name.removesuffix(".des"), name.removesuffix(".des"))
        records = load_constraints(name)
        free = sum(1 for r in records if r.get("unconstrained"))
        try:
            reconstruct_fixture(name)
            lines.append(f"{name}: ok ({len(records) - free} checked, {free} unconstrained)")
        except FixtureConstraintError as exc:
            status = EXIT_FAIL
            lines.append(f"{name}: FAILED")
            lines += [f"  {v}" for v in exc.violations]
    _emit(args, "\n".join(lines) + "\n", out)
    return status


def _require(args, allowed: Sequence[str]) -> None:
    if args.format not in allowed:
        raise ValueError(f"format {args.format!r} not supported here (use one of {', '.join(allowed)})")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="opacsynth", description="Opacity verification and supervisor synthesis.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats, default):
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--output", metavar="PATH")
        sp.add_argument("--simplify", type=_on_off, default=True, metavar="on|off")
        sp.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES, metavar="N")

    sp = sub.add_parser("verify", help="check infinite-step opacity of a plant")
    sp.add_argument("plant")
    common(sp, ["json", "text"], "json")

    sp = sub.add_parser("synth-qual", help="maximally permissive opacity-enforcing supervisor")
    sp.add_argument("plant")
    sp.add_argument("--reduce", type=_on_off, default=True, metavar="on|off",
                    help="merge information states with identical future revelations (default on)")
    sp.add_argument("--chooser", choices=["lex", "all"], default="lex")
    common(sp, ["json", "dot", "text"], "json")

    sp = sub.add_parser("synth-quant", help="supervisor minimizing worst-case revelation cost")
    sp.add_argument("plant")
    sp.add_argument("--n-max", type=int, required=True)
    sp.add_argument("--reduce", type=_on_off, default=True, metavar="on|off",
                    help="canonicalize delayed relations and drop those never charged (default on)")
    sp.add_argument("--chooser", choices=["lex"], default="lex")
    sp.add_argument("--values", metavar="PATH", help="also write the per-round value table as CSV")
    common(sp, ["json", "dot", "csv", "text"], "json")

    sp = sub.add_parser("simulate", help="drive a supervisor with observations read from stdin")
    sp.add_argument("plant")
    sp.add_argument("supervisor")
    sp.add_argument("--simplify", type=_on_off, default=False, metavar="on|off")

    sp = sub.add_parser("export-dot", help="render a plant as DOT")
    sp.add_argument("plant")
    sp.add_argument("--output", metavar="PATH")

    sp = sub.add_parser("fixture-check", help="check bundled fixtures against their constraint files")
    sp.add_argument("names", nargs="*")
    sp.add_argument("--output", metavar="PATH")
    return p


COMMANDS: dict[str, Callable] = {
    "verify": cmd_verify,
    "synth-qual": cmd_synth_qual,
    "synth-quant": cmd_synth_quant,
    "export-dot": cmd_export_dot,
    "fixture-check": cmd_fixture_check,
}


def main(argv: Sequence[str] | None = None, stdin: TextIO | None = None, stdout: TextIO | None = None) -> int:
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "simulate":
            return cmd_simulate(args, out, stdin or sys.stdin)
        return COMMANDS[args.command](args, out)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except UnsolvableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OpacityError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
