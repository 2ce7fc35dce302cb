"""External constraint table: API preconditions checked against a live SimState.

Each row pairs a predicate over the simulator state with the set of APIs
that must have been called before the API (used by the slicer to derive
internal constraints).  Rows marked ``reconstructed`` come from the
OSEK/VDX 2.2.3 service descriptions rather than from the published
constraint list; see ``docs/constraints.md``.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Mapping

from ..errors import UnknownApi, UnknownObject
from .state import ApiCall, SimState, TaskState, Violation

# argument kinds, drawn from the configuration
TASK, RESOURCE, EVENT = "task", "resource", "event"

Predicate = Callable[[SimState, ApiCall], "str | None"]


@dataclass(frozen=True)
class ConstraintRow:
    api: str
    arg_kinds: tuple[str, ...]
    precondition_apis: frozenset[str]
    description: str
    predicate: Predicate
    source: str  # "published" or "reconstructed"


def _caller(s: SimState):
    return s.tasks[s.running] if s.running is not None else None


def _pre_start_os(s, call):
    if s.started:
        return "StartOS may be called only once"
    return None


def _pre_activate(s, call):
    if _caller(s) is None:
        return "ActivateTask must be called from a running task"
    target = s.tasks[call.args[0]]
    if target.activation_count >= target.max_activations:
        return f"{target.name} already has {target.activation_count} of {target.max_activations} activations"
    return None


def _pre_terminate(s, call):
    t = _caller(s)
    if t is None:
        return "TerminateTask requires prior activation (ActivateTask or ChainTask)"
    if t.held_resources:
        return f"{t.name} still holds {', '.join(t.held_resources)}"
    return None


def _pre_chain(s, call):
    t = _caller(s)
    if t is None:
        return "ChainTask requires prior activation (ActivateTask or ChainTask)"
    if t.held_resources:
        return f"{t.name} still holds {', '.join(t.held_resources)}"
    target = s.tasks[call.args[0]]
    if target.name != t.name and target.activation_count >= target.max_activations:
        return f"{target.name} already has {target.activation_count} of {target.max_activations} activations"
    return None


def _pre_schedule(s, call):
    t = _caller(s)
    if t is None:
        return "Schedule must be called from a running task"
    if t.held_resources:
        return f"{t.name} holds {', '.join(t.held_resources)}"
    return None


def _pre_get_resource(s, call):
    t = _caller(s)
    if t is None:
        return "GetResource must be called from a running task"
    res = call.args[0]
    holder = s.resources[res]
    if holder is not None:
        return f"{res} is already held by {holder}"
    return None


def _pre_release_resource(s, call):
    t = _caller(s)
    if t is None:
        return "ReleaseResource must be called from a running task"
    res = call.args[0]
    if res not in t.held_resources:
        return f"{t.name} does not hold {res}"
    if t.held_resources[-1] != res:
        return f"{res} is not the most recently acquired resource of {t.name}"
    return None


def _pre_set_event(s, call):
    if _caller(s) is None:
        return "SetEvent must be called from a running task"
    target, ev = s.tasks[call.args[0]], call.args[1]
    if not target.extended:
        return f"{target.name} is a basic task"
    if target.state is TaskState.SUSPENDED:
        return f"{target.name} is suspended"
    if ev not in target.events:
        return f"{ev} is not an event of {target.name}"
    return None


def _pre_clear_event(s, call):
    t = _caller(s)
    if t is None:
        return "ClearEvent must be called from a running task"
    if not t.extended:
        return f"{t.name} is a basic task"
    if call.args[0] not in t.events:
        return f"{call.args[0]} is not an event of {t.name}"
    return None


def _pre_wait_event(s, call):
    t = _caller(s)
    if t is None:
        return "WaitEvent must be called from a running task"
    if not t.extended:
        return f"{t.name} is a basic task and cannot wait"
    if call.args[0] not in t.events:
        return f"{call.args[0]} is not an event of {t.name}"
    if t.held_resources:
        return f"{t.name} holds {', '.join(t.held_resources)}"
    return None


_ACTIVATED = frozenset({"ActivateTask", "ChainTask"})

_ROWS = (
    ConstraintRow("StartOS", (), frozenset(), "StartOS is the first call and happens once", _pre_start_os, "reconstructed"),
    ConstraintRow("ActivateTask", (TASK,), frozenset({"StartOS"}), "caller running; target below its activation limit", _pre_activate, "reconstructed"),
    ConstraintRow("TerminateTask", (), _ACTIVATED, "task was activated by ActivateTask or ChainTask; holds no resource", _pre_terminate, "published"),
    ConstraintRow("ChainTask", (TASK,), _ACTIVATED, "task was activated; holds no resource; target below its activation limit", _pre_chain, "reconstructed"),
    ConstraintRow("Schedule", (), _ACTIVATED, "caller running and holds no resource", _pre_schedule, "reconstructed"),
    ConstraintRow("GetResource", (RESOURCE,), _ACTIVATED, "caller running; resource free", _pre_get_resource, "reconstructed"),
    ConstraintRow("ReleaseResource", (RESOURCE,), frozenset({"GetResource"}), "resource held by caller and acquired last", _pre_release_resource, "published"),
    ConstraintRow("SetEvent", (TASK, EVENT), _ACTIVATED, "target extended, not suspended, owns the event", _pre_set_event, "reconstructed"),
    ConstraintRow("ClearEvent", (EVENT,), _ACTIVATED, "caller extended and owns the event", _pre_clear_event, "reconstructed"),
    ConstraintRow("WaitEvent", (EVENT,), frozenset({"SetEvent"}), "caller extended, owns the event, holds no resource", _pre_wait_event, "published"),
)


class ExternalConstraintTable:
    """Per-API precondition rows, indexed by API name."""

    def __init__(self, rows=_ROWS):
        self.rows: Mapping[str, ConstraintRow] = MappingProxyType({r.api: r for r in rows})
        for r in rows:
            missing = r.precondition_apis - set(self.rows)
            if missing:
                raise ValueError(f"row {r.api} names APIs without rows: {sorted(missing)}")

    @property
    def apis(self) -> tuple[str, ...]:
        return tuple(self.rows)

    @property
    def precondition_apis(self) -> Mapping[str, frozenset[str]]:
        return MappingProxyType({a: r.precondition_apis for a, r in self.rows.items()})

    def __getitem__(self, api: str) -> ConstraintRow:
        try:
            return self.rows[api]
        except KeyError:
            raise UnknownApi(api) from None

    def __contains__(self, api: str) -> bool:
        return api in self.rows

    def objects(self, s: SimState, kind: str) -> tuple[str, ...]:
        if kind == TASK:
            return tuple(s.tasks)
        if kind == RESOURCE:
            return tuple(s.resources)
        return tuple(s.events)

    def validate_call(self, s: SimState, call: ApiCall) -> ConstraintRow:
        row = self[call.name]
        if len(call.args) != len(row.arg_kinds):
            raise UnknownObject(f"{call.name} takes {len(row.arg_kinds)} argument(s), got {len(call.args)}")
        for kind, arg in zip(row.arg_kinds, call.args):
            if arg not in self.objects(s, kind):
                raise UnknownObject(f"{call.name}: unknown {kind} {arg!r}")
        return row

    def check(self, s: SimState, call: ApiCall) -> Violation | None:
        row = self.validate_call(s, call)
        reason = row.predicate(s, call)
        if reason is None:
            return None
        return Violation(call.name, row.description, reason)


DEFAULT_TABLE = ExternalConstraintTable()


def check_precondition(s: SimState, call: ApiCall, table: ExternalConstraintTable = DEFAULT_TABLE) -> Violation | None:
    """``None`` when ``call`` may run in ``s``; otherwise the violated row.

    Never modifies ``s``.
    """
    return table.check(s, call)
