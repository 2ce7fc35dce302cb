"""OSEK/VDX behavioural simulator and its external constraint table."""

from .constraints import DEFAULT_TABLE, ConstraintRow, ExternalConstraintTable, check_precondition
from .sim import (
    PRIMITIVES,
    apply_api,
    apply_primitive,
    check_monitors,
    export_trace,
    init,
    run_to_quiescence,
    scheduler,
    submit,
)
from .state import ApiCall, MonitorViolation, SimState, TaskState, Tcb, TraceEntry, Violation, new_state

__all__ = [
    "DEFAULT_TABLE",
    "PRIMITIVES",
    "ApiCall",
    "ConstraintRow",
    "ExternalConstraintTable",
    "MonitorViolation",
    "SimState",
    "TaskState",
    "Tcb",
    "TraceEntry",
    "Violation",
    "apply_api",
    "apply_primitive",
    "check_monitors",
    "check_precondition",
    "export_trace",
    "init",
    "new_state",
    "run_to_quiescence",
    "scheduler",
    "submit",
]
