"""Command line front end.

Exit status: 0 on success, 1 when a replay or batch recorded violations,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .codegraph import build_graph, to_dot
from .emit import emit_abstraction_manifest, emit_concrete_harness, emit_nondet_harness
from .errors import OsekEnvError
from .frontend.facts import dumps_facts, load_facts
from .frontend.minic import function_arities, parse_minic_files
from .osek import DEFAULT_TABLE, export_trace
from .project import Project, default_project, load_project
from .scenario import (
    GenParams,
    Level,
    batch,
    gen_end_level,
    gen_root_level,
    load_scenario,
    replay,
)
from .slicer import SliceMode, SliceResult, slice


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _project(args) -> Project:
    config = args.config or args.global_config
    proj = load_project(config) if config else default_project()
    if args.counter_bits is not None:
        proj.counter_bits = args.counter_bits
    return proj


def _slice_result(args, proj: Project) -> SliceResult:
    if getattr(args, "slice", None):
        return SliceResult.from_json(Path(args.slice).read_text(encoding="utf-8"))
    prop = getattr(args, "property", None) or proj.property
    mode = getattr(args, "mode", None) or proj.mode
    return slice(prop, proj.graph, mode, DEFAULT_TABLE, proj.through_functions)


# ---------------------------------------------------------------- subcommands


def cmd_ingest(args) -> int:
    facts = []
    minic = [p for p in args.sources if not p.endswith(".facts")]
    for p in args.sources:
        if p.endswith(".facts"):
            facts.extend(load_facts(p))
    if minic:
        facts.extend(parse_minic_files(minic))
    g = build_graph(facts)  # reject dangling references before writing anything
    _write(dumps_facts(facts), args.output)
    if args.dot:
        Path(args.dot).write_text(to_dot(g), encoding="utf-8")
    s = g.summary()
    print(" ".join(f"{k}={v}" for k, v in s.items()), file=sys.stderr)
    return 0


def cmd_slice(args) -> int:
    proj = _project(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sr = _slice_result(args, proj)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _write(sr.to_json(), args.output)
    return 0


def cmd_gen(args) -> int:
    proj = _project(args)
    level = Level(args.level.upper())
    if level is Level.ROOT:
        scn = gen_root_level(proj.cfg, DEFAULT_TABLE, args.seed, args.len, proj.counter_bits)
    else:
        sr = _slice_result(args, proj)
        domains = proj.load_bindings().arg_domains(proj.cfg)
        scn = gen_end_level(sr.elf, sr.internal_constraints, args.seed, args.len, domains)
    _write(scn.to_text(), args.output)
    if scn.stop_reason in ("stuck", "deadlock"):
        print(f"note: generation stopped early ({scn.stop_reason}) after {len(scn)} call(s)", file=sys.stderr)
    return 0


def cmd_replay(args) -> int:
    proj = _project(args)
    scn = load_scenario(args.scenario)
    bindings = proj.load_bindings() if scn.level is Level.END else None
    res = replay(scn, proj.cfg, proj.graph, DEFAULT_TABLE, bindings, proj.counter_bits, args.halt)
    if args.trace:
        _write(export_trace(res.final_state), args.trace)
    for v in res.violations:
        print(v)
    cov = res.coverage
    print(
        f"calls={len(scn)} violations={len(res.violations)} "
        f"functions={cov.function_ratio:.6f} edges={cov.edge_ratio:.6f} constraints={cov.row_ratio:.6f}",
        file=sys.stderr,
    )
    return 1 if res.violations else 0


def cmd_batch(args) -> int:
    proj = _project(args)
    level = Level(args.level.upper())
    params = GenParams(level, args.len, args.seed, proj.counter_bits)
    sr = _slice_result(args, proj) if level is Level.END else None
    bindings = proj.load_bindings() if level is Level.END else None
    res = batch(proj.cfg, params, args.n, proj.graph, DEFAULT_TABLE, bindings, sr, measure=args.runs is not None)
    _write(res.coverage.to_csv(), args.output)
    if args.summary:
        _write(res.summary(), args.summary)
    if args.runs:
        _write(res.runs_csv(), args.runs)
    return 1 if res.n_violations else 0


def cmd_emit(args) -> int:
    proj = _project(args)
    if args.style == "concrete":
        if not args.scenario:
            raise OsekEnvError("--style concrete needs --scenario")
        text = emit_concrete_harness(load_scenario(args.scenario))
    else:
        sr = _slice_result(args, proj)
        if args.style == "manifest":
            text = emit_abstraction_manifest(sr)
        else:
            minic = [p for p in proj.sources if p.suffix != ".facts"]
            arities = function_arities(minic) if minic else {}
            text = emit_nondet_harness(sr, args.unwind, arities)
    _write(text, args.output)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="project config file (key=value); defaults to the bundled fixture")
    common.add_argument("--counter-bits", type=int, help="activation counter width, overrides config and OIL")
    common.add_argument("-o", "--output", help="output file (default: stdout)")

    slicing = argparse.ArgumentParser(add_help=False)
    slicing.add_argument("--property", help="property expression (default: from config)")
    slicing.add_argument("--mode", choices=[m.value for m in SliceMode])
    slicing.add_argument("--slice", help="reuse a slice report instead of slicing again")

    p = argparse.ArgumentParser(prog="osekenv", description="Property-driven kernel slicing and OSEK scenario testing.")
    p.add_argument("--config", dest="global_config", help="project config file (also accepted after the subcommand)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="mini-C or facts files -> facts file")
    s.add_argument("sources", nargs="+")
    s.add_argument("--dot", help="also write the code graph in Graphviz format")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("slice", parents=[common, slicing], help="extract property-relevant functions")
    s.set_defaults(func=cmd_slice)

    s = sub.add_parser("gen", parents=[common, slicing], help="generate one scenario")
    s.add_argument("--level", choices=["root", "end"], default="root")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--len", type=int, default=200, help="max length (root) or exact length (end)")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("replay", parents=[common], help="replay a scenario file on the simulator")
    s.add_argument("scenario")
    s.add_argument("--trace", help="write the simulator trace here")
    s.add_argument("--halt", action="store_true", help="stop at the first violation")
    s.set_defaults(func=cmd_replay)

    s = sub.add_parser("batch", parents=[common, slicing], help="generate and replay many scenarios; writes the coverage CSV")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0, help="first seed")
    s.add_argument("--level", choices=["root", "end"], default="root")
    s.add_argument("--len", type=int, default=200)
    s.add_argument("--summary", help="write the violation and coverage summary here")
    s.add_argument("--runs", help="write per-run wall time and peak memory here")
    s.set_defaults(func=cmd_batch)

    s = sub.add_parser("emit", parents=[common, slicing], help="emit a harness or manifest")
    s.add_argument("--style", choices=["nondet", "concrete", "manifest"], required=True)
    s.add_argument("--unwind", type=int, default=2)
    s.add_argument("--scenario", help="scenario file for --style concrete")
    s.set_defaults(func=cmd_emit)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", 1) < 1 or getattr(args, "len", 1) < 0 or getattr(args, "unwind", 0) < 0:
        parser.error("--n must be >= 1; --len and --unwind must be >= 0")
    try:
        return args.func(args)
    except (OsekEnvError, SyntaxError, ValueError, KeyError, OSError) as e:
        print(f"osekenv: error: {e}", file=sys.stderr)
        return 2


run = main

if __name__ == "__main__":
    sys.exit(main())
