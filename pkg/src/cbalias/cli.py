"""Command-line front end.

Exit codes: 0 success, 1 runtime error or law failure, 2 usage or static error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from .effects import DEFAULT_FUEL, Config
from .evaluator import StageError, observe, run_program, with_arg
from .gen import GenSpec
from .laws import run_suites
from .parser import ParseError, parse_program
from .strategies import StrategyId
from .syntax import TM, pretty_target, pretty_type
from .translate import TRANSLATIONS, translate_program, translate_type_cba, translate_type_cbv
from .typecheck import TypeCheckError, check_program

EXIT_OK, EXIT_RUNTIME, EXIT_STATIC = 0, 1, 2

_CONFIG_LINE = re.compile(r'^\s*("?)([A-Za-z0-9_.-]+)\1\s*=\s*(-?[0-9]+)\s*$')


class UsageError(Exception):
    pass


def load_config(path: str | None) -> Config:
    """Read a flat ``key = integer`` file (a subset of TOML); ``#`` starts a comment."""
    if path is None:
        return Config({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read config {path}: {err.strerror}") from None
    entries: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _CONFIG_LINE.match(line)
        if m is None:
            raise UsageError(f"{path}:{lineno}: expected 'key = integer'")
        entries[m.group(2)] = int(m.group(3))
    return Config(entries)


def _read_program(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read program {path}: {err.strerror}") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _fail(args, stage: str, err: Exception, extra: dict | None = None) -> None:
    if args.output == "json":
        payload = {"error": {"stage": stage, "kind": getattr(err, "kind", type(err).__name__), "message": str(err)}}
        if isinstance(err, ParseError):
            payload["error"].update(line=err.line, column=err.col, expected=sorted(err.expected))
        if hasattr(err, "key"):
            payload["error"]["key"] = err.key
        payload.update(extra or {})
        print(_dump(payload))
    else:
        print(f"{stage} error: {err}", file=sys.stderr)


# ---------- commands ----------


def cmd_run(args) -> int:
    source = _read_program(args.program)
    cfg = load_config(args.config)
    try:
        result = run_program(source, args.strategy, cfg, fuel=args.fuel, arg=args.arg)
    except StageError as err:
        trace = getattr(err.error, "trace", None)
        extra = trace.to_json() if trace is not None else None
        _fail(args, err.stage, err.error, extra)
        return EXIT_STATIC if err.static else EXIT_RUNTIME
    if args.output == "json":
        print(_dump({"strategy": args.strategy.value, **result.to_json()}))
        return EXIT_OK
    print(f"value: {observe(result.value)}")
    print(f"trace: {len(result.trace)} event(s)")
    for ev in result.trace:
        print(f"  {ev}")
    if result.par is not None:
        print(f"work: {result.par.work}")
        print(f"span: {result.par.span}")
    return EXIT_OK


def cmd_translate(args) -> int:
    source = _read_program(args.program)
    try:
        program = parse_program(source)
        if args.arg is not None:
            program = with_arg(program, args.arg)
        program, main_type = check_program(program)
    except ParseError as err:
        _fail(args, "parse", err)
        return EXIT_STATIC
    except (TypeCheckError, StageError) as err:
        _fail(args, "typecheck", getattr(err, "error", err))
        return EXIT_STATIC
    target = translate_program(program, args.mode)
    type_tr = translate_type_cbv if args.mode == "cbv" else translate_type_cba
    target_type = TM(type_tr(main_type))
    defs = [
        {"name": d.name, "type": pretty_type(d.type), "term": pretty_target(d.body, args.show_types)}
        for d in target.defs
    ]
    main = pretty_target(target.main, args.show_types)
    if args.output == "json":
        print(_dump({"mode": args.mode, "defs": defs, "main": main, "type": pretty_type(target_type)}))
        return EXIT_OK
    for d in defs:
        print(f"def {d['name']} : {d['type']} = {d['term']}")
    print(f"main = {main}")
    print(f"type: {pretty_type(target_type)}")
    return EXIT_OK


def cmd_laws(args) -> int:
    spec = GenSpec(seed=args.seed, max_depth=args.max_depth, effect_keys=tuple(args.keys.split(",")))
    suites = ("malias", "equivalence", "transforms", "sharing") if args.suite == "all" else (args.suite,)
    reports = run_suites(args.strategy, spec, args.cases, suites)
    ok = all(r.passed for r in reports)
    if args.output == "json":
        print(_dump({"seed": args.seed, "cases": args.cases, "passed": ok, "reports": [r.to_json() for r in reports]}))
    else:
        for r in reports:
            print(r.summary())
            for f in r.failures[: args.show_failures]:
                print(f"    seed {f.seed}: {f.counterexample}")
    return EXIT_OK if ok else EXIT_RUNTIME


def _fib_source() -> str:
    return resources.files("cbalias").joinpath("programs/fib.src").read_text(encoding="utf-8")


def bench_rows(min_n: int, max_n: int, fuel: int = DEFAULT_FUEL, source: str | None = None) -> list[dict]:
    """Work, span and speedup of the fib program under the parallel strategy."""
    source = source or _fib_source()
    rows = []
    for n in range(min_n, max_n + 1):
        result = run_program(source, StrategyId.PAR, Config({}), fuel=fuel, arg=n)
        par = result.par
        assert par is not None
        speedup = par.work / par.span if par.span else None
        rows.append({"n": n, "value": result.value, "work": par.work, "span": par.span, "speedup": speedup})
    return rows


def cmd_bench_par(args) -> int:
    source = _read_program(args.program) if args.program else None
    try:
        rows = bench_rows(args.min_n, args.max_n, args.fuel, source)
    except StageError as err:
        _fail(args, err.stage, err.error)
        return EXIT_STATIC if err.static else EXIT_RUNTIME
    if args.output == "json":
        out = [{**r, "speedup": None if r["speedup"] is None else round(r["speedup"], 6)} for r in rows]
        print(_dump({"rows": out}))
        return EXIT_OK
    print(f"{'n':>4} {'value':>8} {'work':>8} {'span':>6} {'speedup':>9}")
    for r in rows:
        speedup = "-" if r["speedup"] is None else f"{r['speedup']:.3f}"
        print(f"{r['n']:>4} {r['value']:>8} {r['work']:>8} {r['span']:>6} {speedup:>9}")
    return EXIT_OK


# ---------- argument parsing ----------


def _strategy(text: str) -> StrategyId:
    try:
        return StrategyId.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown strategy {text!r} (choose cbn, cbv, need, par)") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbalias", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--output", choices=("text", "json"), default="text")
        p.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="step limit per run")

    run = sub.add_parser("run", help="run a program under an evaluation strategy")
    run.add_argument("program")
    run.add_argument("--config", help="flat 'key = integer' file")
    run.add_argument("--strategy", type=_strategy, default=StrategyId.NEED)
    run.add_argument("--arg", type=int, help="replace the body of the 'arg' definition")
    common(run)
    run.set_defaults(func=cmd_run)

    tr = sub.add_parser("translate", help="print the monadic translation of a program")
    tr.add_argument("program")
    tr.add_argument("--mode", "--translation", choices=TRANSLATIONS, default="cba")
    tr.add_argument("--arg", type=int)
    tr.add_argument("--show-types", action="store_true", help="print lambda annotations")
    common(tr)
    tr.set_defaults(func=cmd_translate)

    laws = sub.add_parser("laws", help="run randomized law suites")
    laws.add_argument("--strategy", type=_strategy, default=StrategyId.CBV)
    laws.add_argument("--seed", type=int, required=True)
    laws.add_argument("--cases", type=int, required=True)
    laws.add_argument("--max-depth", type=int, default=6)
    laws.add_argument("--keys", default="a,b,c", help="comma-separated effect keys")
    laws.add_argument("--suite", choices=("all", "malias", "equivalence", "transforms", "sharing"), default="all")
    laws.add_argument("--show-failures", type=int, default=3)
    common(laws)
    laws.set_defaults(func=cmd_laws)

    bench = sub.add_parser("bench-par", help="work/span table for fib under the parallel strategy")
    bench.add_argument("--min-n", type=int, default=1)
    bench.add_argument("--max-n", type=int, default=15)
    bench.add_argument("--program", help="program with an 'arg' definition (default: bundled fib)")
    common(bench)
    bench.set_defaults(func=cmd_bench_par)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit:
        return EXIT_STATIC if exit.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_STATIC


if __name__ == "__main__":
    sys.exit(main())
