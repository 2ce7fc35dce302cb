"""Behavioural OSEK/VDX simulator.

Full-preemptive fixed-priority scheduling with one FIFO per priority; a
preempted task goes back to the front of its FIFO.  Activation counters
are ``counter_bits`` wide and wrap silently, while a 64-bit shadow count
keeps the true number of outstanding activations so the monitors can see
an activation that the wrapped counter lost.

Every operation takes a state and returns the successor.  Pass
``in_place=True`` to mutate a state you own instead of copying it.
"""

from __future__ import annotations

from typing import Callable

from ..errors import PreconditionViolation
from ..frontend.oil import OilConfig
from .constraints import DEFAULT_TABLE, ExternalConstraintTable, check_precondition
from .state import ApiCall, MonitorViolation, SimState, TaskState, TraceEntry, new_state

SHADOW_MASK = (1 << 64) - 1


# ---------------------------------------------------------------- scheduling


def scheduler(s: SimState, in_place: bool = False) -> SimState:
    """Dispatch the head of the highest nonempty FIFO if it should run.

    Deterministic and idempotent; it never touches the trace.
    """
    if not in_place:
        s = s.copy()
    prio = s.highest_ready_priority()
    if prio < 0:
        return s
    if s.running is not None:
        current = s.tasks[s.running]
        if prio <= current.static_priority:
            return s
        current.state = TaskState.READY
        s.enqueue_front(current.name)
    head = s.ready_queue[prio].pop(0)
    s.tasks[head].state = TaskState.RUNNING
    s.running = head
    return s


def check_monitors(s: SimState) -> list[MonitorViolation]:
    """Evaluate the three scheduler monitors on ``s``.

    M1  an empty ready queue (highest ready priority -1) while some task
        still has outstanding activations by the shadow count but was
        dropped because its wrapped counter reads zero;
    M2  a task is READY but nothing is running;
    M3  the running task's state is not RUNNING.
    """
    out: list[MonitorViolation] = []
    step = s.step
    if s.highest_ready_priority() == -1:
        lost = [t for t in s.tasks.values() if t.state is TaskState.SUSPENDED and t.shadow_activations > 0]
        for t in lost:
            out.append(
                MonitorViolation(
                    "M1",
                    step,
                    f"highest ready priority is -1 but {t.name} has {t.shadow_activations} outstanding "
                    f"activation(s); its {s.counter_bits}-bit counter reads {t.activation_count}",
                )
            )
    if s.running is None:
        ready = [n for n in s.ready_names()]
        if ready:
            out.append(MonitorViolation("M2", step, f"no running task while {ready[0]} is READY"))
    elif s.tasks[s.running].state is not TaskState.RUNNING:
        out.append(MonitorViolation("M3", step, f"running task {s.running} is {s.tasks[s.running].state.value}"))
    return out


def _reschedule(s: SimState) -> list[MonitorViolation]:
    scheduler(s, in_place=True)
    return check_monitors(s)


# ---------------------------------------------------------------- task bookkeeping


def _add_activation(s: SimState, name: str) -> None:
    t = s.tasks[name]
    was = t.activation_count
    t.activation_count = (was + 1) & s.counter_mask
    t.shadow_activations = (t.shadow_activations + 1) & SHADOW_MASK
    if t.state is TaskState.SUSPENDED and was == 0:
        if t.activation_count == 0:
            return  # one-bit counters wrap straight back to zero
        t.state = TaskState.READY
        t.pending_events = frozenset()
        s.enqueue_back(name)
    elif t.activation_count == 0 and t.state is TaskState.READY:
        # the wrapped counter says "no activation": the kernel forgets the task
        s.dequeue(name)
        t.state = TaskState.SUSPENDED


def _end_running(s: SimState) -> str:
    """Terminate the running instance; re-queue it if activations remain."""
    name = s.running
    t = s.tasks[name]
    t.activation_count = (t.activation_count - 1) & s.counter_mask
    t.shadow_activations = max(t.shadow_activations - 1, 0)
    t.pending_events = frozenset()
    t.waiting_mask = frozenset()
    s.running = None
    if t.activation_count > 0:
        t.state = TaskState.READY
        s.enqueue_back(name)
    else:
        t.state = TaskState.SUSPENDED
    return name


# ---------------------------------------------------------------- API semantics


def _start_os(s: SimState, call: ApiCall):
    s.started = True
    for t in s.cfg.tasks:
        if t.autostart:
            _add_activation(s, t.name)
    return _reschedule(s)


def _activate_task(s: SimState, call: ApiCall):
    _add_activation(s, call.args[0])
    return _reschedule(s)


def _terminate_task(s: SimState, call: ApiCall):
    _end_running(s)
    return _reschedule(s)


def _chain_task(s: SimState, call: ApiCall):
    _end_running(s)
    _add_activation(s, call.args[0])
    return _reschedule(s)


def _schedule(s: SimState, call: ApiCall):
    return _reschedule(s)


def _get_resource(s: SimState, call: ApiCall):
    res = call.args[0]
    t = s.tasks[s.running]
    s.resources[res] = t.name
    t.held_resources = t.held_resources + (res,)
    return []


def _release_resource(s: SimState, call: ApiCall):
    res = call.args[0]
    t = s.tasks[s.running]
    t.held_resources = tuple(r for r in t.held_resources if r != res)
    s.resources[res] = None
    return _reschedule(s)


def _set_event(s: SimState, call: ApiCall):
    target, ev = s.tasks[call.args[0]], call.args[1]
    target.pending_events = target.pending_events | {ev}
    if target.state is TaskState.WAITING and ev in target.waiting_mask:
        target.waiting_mask = frozenset()
        target.state = TaskState.READY
        s.enqueue_back(target.name)
    return _reschedule(s)


def _clear_event(s: SimState, call: ApiCall):
    t = s.tasks[s.running]
    t.pending_events = t.pending_events - {call.args[0]}
    return []


def _wait_event(s: SimState, call: ApiCall):
    t = s.tasks[s.running]
    ev = call.args[0]
    if ev in t.pending_events:
        return []
    t.waiting_mask = frozenset({ev})
    t.state = TaskState.WAITING
    s.running = None
    return _reschedule(s)


_HANDLERS: dict[str, Callable[[SimState, ApiCall], list]] = {
    "StartOS": _start_os,
    "ActivateTask": _activate_task,
    "TerminateTask": _terminate_task,
    "ChainTask": _chain_task,
    "Schedule": _schedule,
    "GetResource": _get_resource,
    "ReleaseResource": _release_resource,
    "SetEvent": _set_event,
    "ClearEvent": _clear_event,
    "WaitEvent": _wait_event,
}


def _changes(before: dict[str, TaskState], s: SimState) -> tuple[str, ...]:
    return tuple(
        f"{n}:{before[n].value}->{t.state.value}" for n, t in s.tasks.items() if before[n] is not t.state
    )


def apply_api(
    s: SimState,
    call: ApiCall,
    table: ExternalConstraintTable = DEFAULT_TABLE,
    in_place: bool = False,
) -> SimState:
    """Execute one API call with OSEK semantics and append it to the trace.

    Raises :class:`PreconditionViolation` if the call's table row rejects it.
    """
    violation = check_precondition(s, call, table)
    if violation is not None:
        raise PreconditionViolation(violation)
    if not in_place:
        s = s.copy()
    before = {n: t.state for n, t in s.tasks.items()}
    step = s.step
    monitors = _HANDLERS[call.name](s, call)
    s.trace.append(TraceEntry(step, call, s.running, tuple(monitors), None, _changes(before, s)))
    return s


def record_rejection(s: SimState, call: ApiCall, table: ExternalConstraintTable = DEFAULT_TABLE) -> None:
    """Log a call that failed its precondition without executing it."""
    s.trace.append(TraceEntry(s.step, call, s.running, (), check_precondition(s, call, table)))


def init(cfg: OilConfig, counter_bits: int | None = None) -> SimState:
    """Started system: StartOS applied, autostart tasks activated and scheduled."""
    s = new_state(cfg, counter_bits)
    return apply_api(s, ApiCall("StartOS"), in_place=True)


# ---------------------------------------------------------------- task bodies


def submit(s: SimState, call: ApiCall) -> None:
    """Append ``call`` to the body of the running task (in place)."""
    if s.running is None:
        raise PreconditionViolation(f"no running task to execute {call}")
    s.tasks[s.running].body.append(call)


def run_to_quiescence(
    s: SimState,
    table: ExternalConstraintTable = DEFAULT_TABLE,
    halt_on_violation: bool = False,
) -> SimState:
    """Execute pending body calls of whichever task is running until none remain.

    A preempted task keeps the rest of its body and continues it when it is
    dispatched again.  Calls that fail their precondition at execution time
    are recorded and skipped, or raise when ``halt_on_violation`` is set.
    """
    while s.running is not None and s.tasks[s.running].body:
        call = s.tasks[s.running].body.pop(0)
        if check_precondition(s, call, table) is not None:
            if halt_on_violation:
                raise PreconditionViolation(check_precondition(s, call, table))
            record_rejection(s, call, table)
            continue
        apply_api(s, call, table, in_place=True)
    return s


# ---------------------------------------------------------------- end-level primitives
#
# Kernel-internal operations that end-level functions are bound to.  Unlike
# the APIs they have no preconditions and do not reschedule unless that is
# what they model.


def _enqueue_new(s: SimState, task: str):
    _add_activation(s, task)
    return []


def _enqueue_preempted(s: SimState):
    if s.running is not None:
        t = s.tasks[s.running]
        t.state = TaskState.READY
        s.enqueue_front(t.name)
        s.running = None
    return []


def _dispatch_head(s: SimState):
    prio = s.highest_ready_priority()
    if prio >= 0:
        if s.running is not None:
            old = s.tasks[s.running]
            old.state = TaskState.READY
            s.enqueue_front(old.name)
        head = s.ready_queue[prio].pop(0)
        s.tasks[head].state = TaskState.RUNNING
        s.running = head
    return check_monitors(s)


def _reschedule_primitive(s: SimState):
    return _reschedule(s)


def _terminate_running(s: SimState):
    if s.running is not None:
        _end_running(s)
    return []


PRIMITIVES: dict[str, tuple[Callable, tuple[str, ...]]] = {
    "enqueue_new": (_enqueue_new, ("task",)),
    "enqueue_preempted": (_enqueue_preempted, ()),
    "dispatch_head": (_dispatch_head, ()),
    "reschedule": (_reschedule_primitive, ()),
    "terminate_running": (_terminate_running, ()),
}


def apply_primitive(s: SimState, primitive: str, args: tuple[str, ...] = (), label: str | None = None, in_place: bool = False) -> SimState:
    """Run a kernel-internal primitive; the trace shows it as ``label(args)``."""
    fn, kinds = PRIMITIVES[primitive]
    if len(args) != len(kinds):
        raise TypeError(f"{primitive} takes {len(kinds)} argument(s), got {len(args)}")
    for kind, a in zip(kinds, args):
        if kind == "task" and a not in s.tasks:
            raise KeyError(f"unknown task {a!r}")
    if not in_place:
        s = s.copy()
    before = {n: t.state for n, t in s.tasks.items()}
    step = s.step
    monitors = fn(s, *args)
    call = ApiCall(label or primitive, tuple(args))
    s.trace.append(TraceEntry(step, call, s.running, tuple(monitors), None, _changes(before, s)))
    return s


def export_trace(s: SimState) -> str:
    return "".join(e.to_line() + "\n" for e in s.trace)
