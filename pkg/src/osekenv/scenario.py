"""Constraint-guided random scenarios, replay against the simulator, coverage.

Two levels of scenario exist.  ROOT scenarios are API call sequences
checked call by call against the external constraint table of a live
simulator.  END scenarios are sequences of end-level (kernel-internal)
function calls kept consistent by the count constraints from the slicer
and replayed through a binding table that maps each end-level function to
a simulator primitive.
"""

from __future__ import annotations

import enum
import itertools
import random
import time
import tracemalloc
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .codegraph import CodeGraph, forward_call_closure
from .errors import BindingError, OsekEnvError, PreconditionViolation
from .frontend.oil import OilConfig
from .osek import sim
from .osek.constraints import DEFAULT_TABLE, ExternalConstraintTable, check_precondition
from .osek.state import ApiCall, MonitorViolation, SimState, TaskState, Violation
from .slicer import CountConstraint, SliceResult

MAX_REJECTIONS = 100


class Level(str, enum.Enum):
    ROOT = "ROOT"
    END = "END"


# ---------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class Scenario:
    level: Level
    seed: int
    calls: tuple[ApiCall, ...] = ()
    complete: bool = False
    stop_reason: str = ""  # complete | max_len | length | stuck | deadlock

    def __len__(self) -> int:
        return len(self.calls)

    def prefix(self, n: int) -> "Scenario":
        return Scenario(self.level, self.seed, self.calls[:n], False, "prefix")

    def to_text(self) -> str:
        head = (
            f"#scenario level={self.level.value} seed={self.seed} "
            f"complete={str(self.complete).lower()} stop={self.stop_reason or '-'}\n"
        )
        body = "".join(f"{i}\t{c.name}\t{','.join(c.args)}\n" for i, c in enumerate(self.calls))
        return head + body

    @classmethod
    def from_text(cls, text: str) -> "Scenario":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#scenario "):
            raise ValueError("missing '#scenario' header line")
        fields = dict(kv.split("=", 1) for kv in lines[0].split()[1:])
        try:
            level = Level(fields["level"])
            seed = int(fields["seed"])
        except (KeyError, ValueError) as e:
            raise ValueError(f"bad scenario header: {lines[0]!r}") from e
        calls = []
        for n, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"line {n}: expected idx<TAB>function<TAB>args")
            idx, name, args = parts
            if int(idx) != len(calls):
                raise ValueError(f"line {n}: index {idx} out of sequence")
            calls.append(ApiCall(name, tuple(args.split(",")) if args else ()))
        stop = fields.get("stop", "-")
        return cls(level, seed, tuple(calls), fields.get("complete") == "true", "" if stop == "-" else stop)


def save_scenario(scn: Scenario, path: str | Path) -> None:
    Path(path).write_text(scn.to_text(), encoding="utf-8")


def load_scenario(path: str | Path) -> Scenario:
    return Scenario.from_text(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------- bindings


@dataclass(frozen=True)
class Binding:
    function: str
    primitive: str
    arg_kinds: tuple[str, ...] = ()


class BindingTable(dict):
    """End-level function name -> :class:`Binding`."""

    def __missing__(self, key):
        raise BindingError(f"no binding for end-level function {key!r}")

    def arg_domains(self, cfg: OilConfig) -> dict[str, list[tuple[str, ...]]]:
        """All argument tuples each bound function can be called with."""
        objects = {"task": cfg.task_names, "resource": list(cfg.resources), "event": list(cfg.events)}
        return {
            f: [tuple(p) for p in itertools.product(*(objects[k] for k in b.arg_kinds))]
            for f, b in self.items()
        }


def loads_bindings(text: str) -> BindingTable:
    table = BindingTable()
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"bindings line {n}: expected function<TAB>primitive<TAB>kinds")
        fn, prim, kinds = (p.strip() for p in parts)
        if prim not in sim.PRIMITIVES:
            raise ValueError(f"bindings line {n}: unknown primitive {prim!r}")
        arg_kinds = () if kinds in ("", "-") else tuple(k.strip() for k in kinds.split(","))
        expected = sim.PRIMITIVES[prim][1]
        if len(arg_kinds) != len(expected):
            raise ValueError(f"bindings line {n}: {prim} takes {len(expected)} argument(s)")
        if fn in table:
            raise ValueError(f"bindings line {n}: {fn} bound twice")
        table[fn] = Binding(fn, prim, arg_kinds)
    return table


def load_bindings(path: str | Path) -> BindingTable:
    return loads_bindings(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------- generation


def _candidates(s: SimState, table: ExternalConstraintTable) -> list[ApiCall]:
    out = []
    for api in table.apis:
        kinds = table[api].arg_kinds
        for args in itertools.product(*(table.objects(s, k) for k in kinds)):
            out.append(ApiCall(api, tuple(args)))
    return out


def is_complete(s: SimState) -> bool:
    """Every task is back in SUSPENDED and nothing runs."""
    return s.running is None and all(t.state is TaskState.SUSPENDED for t in s.tasks.values())


def gen_root_level(
    cfg: OilConfig,
    table: ExternalConstraintTable = DEFAULT_TABLE,
    seed: int = 0,
    max_len: int = 200,
    counter_bits: int | None = None,
) -> Scenario:
    """Select-and-check loop over the live simulator.

    Each step draws uniformly from every API applied to every combination
    of declared objects, keeps the first draw whose precondition holds, and
    submits it to the running task's body.  Stops on completion, at
    ``max_len``, or after ``MAX_REJECTIONS`` consecutive rejected draws.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    rng = random.Random(seed)
    s = sim.init(cfg, counter_bits)
    candidates = _candidates(s, table)
    calls: list[ApiCall] = []
    reason = "max_len"
    while len(calls) < max_len:
        if is_complete(s):
            reason = "complete"
            break
        for _ in range(MAX_REJECTIONS):
            call = rng.choice(candidates)
            if check_precondition(s, call, table) is None:
                break
        else:
            reason = "stuck"
            break
        sim.submit(s, call)
        sim.run_to_quiescence(s, table, halt_on_violation=True)
        calls.append(call)
    else:
        if is_complete(s):
            reason = "complete"
    return Scenario(Level.ROOT, seed, tuple(calls), reason == "complete", reason)


def gen_end_level(
    elf: Iterable[str],
    constraints: Sequence[CountConstraint] = (),
    seed: int = 0,
    length: int = 0,
    arg_domains: Mapping[str, Sequence[tuple[str, ...]]] | None = None,
) -> Scenario:
    """Random end-level sequence honouring every count constraint.

    A drawn function is admissible when each constraint on it has
    ``count(function) < count(p)`` for all its predecessors ``p``.  Inadmissible
    draws are resampled; ``MAX_REJECTIONS`` in a row ends the scenario with
    ``stop_reason='deadlock'``.  Arguments come uniformly from
    ``arg_domains[function]`` (no arguments when absent).
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    fns = sorted(set(elf))
    by_successor: dict[str, list[CountConstraint]] = {}
    for c in constraints:
        for f in (c.successor, *c.predecessors):
            if f not in fns:
                raise ValueError(f"constraint {c} names {f!r}, which is not an end-level function")
        by_successor.setdefault(c.successor, []).append(c)
    domains = dict(arg_domains or {})
    rng = random.Random(seed)
    counts: Counter[str] = Counter()
    calls: list[ApiCall] = []
    reason = "length"
    if length and not fns:
        reason = "deadlock"
    while fns and len(calls) < length:
        for _ in range(MAX_REJECTIONS):
            f = rng.choice(fns)
            if all(c.admits(counts) for c in by_successor.get(f, ())):
                break
        else:
            reason = "deadlock"
            break
        dom = domains.get(f)
        args = rng.choice(dom) if dom else ()
        counts[f] += 1
        calls.append(ApiCall(f, tuple(args)))
    return Scenario(Level.END, seed, tuple(calls), reason == "length", reason)


# ---------------------------------------------------------------- coverage


class _CoverageIndex:
    """Per-function coverage contribution, cached per graph."""

    def __init__(self, g: CodeGraph):
        self.g = g
        self.n_functions = len(g.functions)
        self.n_edges = len(g.calls)
        self._memo: dict[str, tuple[frozenset[str], frozenset[tuple[str, str]]]] = {}

    def hits(self, f: str):
        if f not in self._memo:
            if f in self.g.functions:
                fns = forward_call_closure(self.g, f)
                edges = frozenset(e for e in self.g.calls if e[0] in fns)
            else:
                fns, edges = frozenset(), frozenset()
            self._memo[f] = (fns, edges)
        return self._memo[f]


_INDEX_CACHE: dict[int, _CoverageIndex] = {}


def _index(g: CodeGraph) -> _CoverageIndex:
    idx = _INDEX_CACHE.get(id(g))
    if idx is None or idx.g is not g:
        idx = _INDEX_CACHE[id(g)] = _CoverageIndex(g)
    return idx


@dataclass(frozen=True)
class CoverageReport:
    """Function, call-edge and constraint-row coverage with a length curve.

    Each covered item maps to the shortest scenario prefix that covered it,
    so the cumulative curve and the merge of several reports both follow
    directly (merging takes the minimum, which is order independent).
    """

    functions: Mapping[str, int] = field(default_factory=dict)
    edges: Mapping[tuple[str, str], int] = field(default_factory=dict)
    rows: Mapping[str, int] = field(default_factory=dict)
    n_functions: int = 0
    n_edges: int = 0
    n_rows: int = 0
    max_len: int = 0

    @property
    def functions_covered(self) -> frozenset[str]:
        return frozenset(self.functions)

    @property
    def call_edges_covered(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.edges)

    @property
    def constraint_rows_exercised(self) -> frozenset[str]:
        return frozenset(self.rows)

    @staticmethod
    def _ratio(k: int, n: int) -> float:
        return k / n if n else 0.0

    @property
    def function_ratio(self) -> float:
        return self._ratio(len(self.functions), self.n_functions)

    @property
    def edge_ratio(self) -> float:
        return self._ratio(len(self.edges), self.n_edges)

    @property
    def row_ratio(self) -> float:
        return self._ratio(len(self.rows), self.n_rows)

    def at(self, length: int) -> tuple[float, float, float]:
        """Cumulative ratios using only the first ``length`` calls of each scenario."""
        return (
            self._ratio(sum(1 for v in self.functions.values() if v <= length), self.n_functions),
            self._ratio(sum(1 for v in self.edges.values() if v <= length), self.n_edges),
            self._ratio(sum(1 for v in self.rows.values() if v <= length), self.n_rows),
        )

    def curve(self, max_len: int | None = None) -> list[tuple[int, float, float, float]]:
        top = self.max_len if max_len is None else max_len
        return [(n, *self.at(n)) for n in range(top + 1)]

    def merge(self, other: "CoverageReport") -> "CoverageReport":
        def mn(a, b):
            out = dict(a)
            for k, v in b.items():
                out[k] = min(v, out.get(k, v))
            return out

        return CoverageReport(
            mn(self.functions, other.functions),
            mn(self.edges, other.edges),
            mn(self.rows, other.rows),
            max(self.n_functions, other.n_functions),
            max(self.n_edges, other.n_edges),
            max(self.n_rows, other.n_rows),
            max(self.max_len, other.max_len),
        )

    def to_csv(self, max_len: int | None = None) -> str:
        lines = ["length,functions,edges,constraints"]
        for n, f, e, r in self.curve(max_len):
            lines.append(f"{n},{f:.6f},{e:.6f},{r:.6f}")
        return "\n".join(lines) + "\n"


def plateau_length(report: CoverageReport, max_len: int | None = None) -> int | None:
    """Smallest L >= 1 with coverage(L) == coverage(2L) and 2L within the curve."""
    top = report.max_len if max_len is None else max_len
    for n in range(1, top // 2 + 1):
        if report.at(n) == report.at(2 * n):
            return n
    return None


# ---------------------------------------------------------------- replay


@dataclass
class ReplayResult:
    violations: list[Violation | MonitorViolation]
    coverage: CoverageReport
    final_state: SimState

    @property
    def precondition_violations(self) -> list[Violation]:
        return [v for v in self.violations if isinstance(v, Violation)]

    @property
    def monitor_violations(self) -> list[MonitorViolation]:
        return [v for v in self.violations if isinstance(v, MonitorViolation)]


def _default_graph() -> CodeGraph:
    from .project import default_project

    global _DEFAULT_GRAPH
    if _DEFAULT_GRAPH is None:
        _DEFAULT_GRAPH = default_project().graph
    return _DEFAULT_GRAPH


_DEFAULT_GRAPH: CodeGraph | None = None


def _default_bindings() -> BindingTable:
    from .project import fixture_path

    return load_bindings(fixture_path("end_bindings.tsv"))


def replay(
    scn: Scenario,
    cfg: OilConfig,
    graph: CodeGraph | None = None,
    table: ExternalConstraintTable = DEFAULT_TABLE,
    bindings: BindingTable | None = None,
    counter_bits: int | None = None,
    halt_on_violation: bool = False,
    level: Level | str | None = None,
) -> ReplayResult:
    """Run ``scn`` from ``init(cfg)``, collecting violations and coverage.

    A ROOT call whose precondition fails is recorded and skipped (or stops
    the replay with ``halt_on_violation``).  END calls go through
    ``bindings``; an unbound name raises :class:`BindingError`.
    """
    if level is not None and Level(level) is not scn.level:
        raise ValueError(f"scenario level {scn.level.value} does not match replay mode {Level(level).value}")
    g = graph if graph is not None else _default_graph()
    idx = _index(g)
    s = sim.init(cfg, counter_bits)
    violations: list[Violation | MonitorViolation] = []
    fns: dict[str, int] = {}
    edges: dict[tuple[str, str], int] = {}
    rows: dict[str, int] = {}

    def cover(name: str, at: int) -> None:
        f_hit, e_hit = idx.hits(name)
        for f in f_hit:
            fns.setdefault(f, at)
        for e in e_hit:
            edges.setdefault(e, at)

    if scn.level is Level.END and scn.calls:
        bindings = bindings if bindings is not None else _default_bindings()
        for call in scn.calls:
            bindings[call.name]  # raise early for unbound names

    for i, call in enumerate(scn.calls, start=1):
        if scn.level is Level.ROOT:
            v = check_precondition(s, call, table)
            if v is not None:
                violations.append(v)
                sim.record_rejection(s, call, table)
                if halt_on_violation:
                    break
                continue
            sim.apply_api(s, call, table, in_place=True)
            rows.setdefault(call.name, i)
        else:
            b = bindings[call.name]
            sim.apply_primitive(s, b.primitive, call.args, label=call.name, in_place=True)
        cover(call.name, i)
        new = s.trace[-1].violations
        violations.extend(new)
        if new and halt_on_violation:
            break

    cov = CoverageReport(fns, edges, rows, idx.n_functions, idx.n_edges, len(table.rows), len(scn.calls))
    return ReplayResult(violations, cov, s)


# ---------------------------------------------------------------- batch


@dataclass(frozen=True)
class GenParams:
    level: Level = Level.ROOT
    length: int = 200  # max_len for ROOT, exact length for END
    seed0: int = 0
    counter_bits: int | None = None


@dataclass(frozen=True)
class RunRecord:
    seed: int
    length: int
    complete: bool
    stop_reason: str
    violations: tuple[str, ...]
    error: str | None
    wall_s: float
    peak_kib: float


@dataclass
class BatchResult:
    coverage: CoverageReport
    runs: list[RunRecord]
    params: GenParams

    @property
    def violations(self) -> dict[int, tuple[str, ...]]:
        return {r.seed: r.violations for r in self.runs if r.violations}

    @property
    def errors(self) -> dict[int, str]:
        return {r.seed: r.error for r in self.runs if r.error}

    @property
    def n_violations(self) -> int:
        return sum(len(r.violations) for r in self.runs)

    def summary(self) -> str:
        """Deterministic text summary (no timings)."""
        p = self.params
        cov = self.coverage
        monitors = Counter(v.split("@", 1)[0] if "@" in v else "precondition" for r in self.runs for v in r.violations)
        stops = Counter(r.stop_reason for r in self.runs)
        lines = [
            f"level={p.level.value} seeds={p.seed0}..{p.seed0 + len(self.runs) - 1} length={p.length}",
            f"scenarios={len(self.runs)} complete={sum(r.complete for r in self.runs)}",
            "stop_reasons=" + ",".join(f"{k}:{stops[k]}" for k in sorted(stops)),
            f"functions={len(cov.functions)}/{cov.n_functions} ({cov.function_ratio:.6f})",
            f"edges={len(cov.edges)}/{cov.n_edges} ({cov.edge_ratio:.6f})",
            f"constraints={len(cov.rows)}/{cov.n_rows} ({cov.row_ratio:.6f})",
            f"plateau={plateau_length(cov)}",
            f"violations={self.n_violations}" + "".join(f" {k}:{monitors[k]}" for k in sorted(monitors)),
        ]
        for r in self.runs:
            for v in r.violations:
                lines.append(f"  seed {r.seed}: {v}")
            if r.error:
                lines.append(f"  seed {r.seed}: error: {r.error}")
        return "\n".join(lines) + "\n"

    def runs_csv(self) -> str:
        lines = ["seed,length,complete,stop_reason,violations,wall_s,peak_kib"]
        for r in self.runs:
            lines.append(
                f"{r.seed},{r.length},{int(r.complete)},{r.stop_reason},{len(r.violations)},{r.wall_s:.6f},{r.peak_kib:.1f}"
            )
        return "\n".join(lines) + "\n"


def _one_run(seed, cfg, params, graph, table, bindings, slice_result, domains):
    if params.level is Level.ROOT:
        scn = gen_root_level(cfg, table, seed, params.length, params.counter_bits)
    else:
        scn = gen_end_level(slice_result.elf, slice_result.internal_constraints, seed, params.length, domains)
    return scn, replay(scn, cfg, graph, table, bindings, params.counter_bits)


def batch(
    cfg: OilConfig,
    params: GenParams,
    n: int,
    graph: CodeGraph | None = None,
    table: ExternalConstraintTable = DEFAULT_TABLE,
    bindings: BindingTable | None = None,
    slice_result: SliceResult | None = None,
    measure: bool = True,
) -> BatchResult:
    """Generate and replay ``n`` scenarios with seeds ``seed0 .. seed0+n-1``.

    Errors from individual scenarios are recorded per run rather than
    raised.  Wall time and peak traced memory go to the run records only,
    so the coverage report and :meth:`BatchResult.summary` are reproducible.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if params.level is Level.END:
        if slice_result is None:
            raise ValueError("END batches need a slice result")
        bindings = bindings if bindings is not None else _default_bindings()
        domains = bindings.arg_domains(cfg)
    else:
        domains = None
    g = graph if graph is not None else _default_graph()
    idx = _index(g)
    total = CoverageReport(n_functions=idx.n_functions, n_edges=idx.n_edges, n_rows=len(table.rows), max_len=params.length)
    runs: list[RunRecord] = []
    for seed in range(params.seed0, params.seed0 + n):
        if measure:
            tracemalloc.start()
        t0 = time.perf_counter()
        try:
            scn, res = _one_run(seed, cfg, params, g, table, bindings, slice_result, domains)
            error = None
        except (OsekEnvError, PreconditionViolation, ValueError) as e:
            scn, res, error = None, None, f"{type(e).__name__}: {e}"
        wall = time.perf_counter() - t0
        peak = 0.0
        if measure:
            peak = tracemalloc.get_traced_memory()[1] / 1024
            tracemalloc.stop()
        if res is not None:
            total = total.merge(res.coverage)
        runs.append(
            RunRecord(
                seed,
                len(scn) if scn else 0,
                scn.complete if scn else False,
                scn.stop_reason if scn else "error",
                tuple(str(v) for v in res.violations) if res else (),
                error,
                wall,
                peak,
            )
        )
    return BatchResult(total, runs, params)
