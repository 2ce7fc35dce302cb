import pytest

from osekenv.errors import PreconditionViolation, UnknownApi, UnknownObject
from osekenv.frontend import parse_oil
from osekenv.osek import (
    DEFAULT_TABLE,
    ApiCall,
    TaskState,
    apply_api,
    apply_primitive,
    check_monitors,
    check_precondition,
    export_trace,
    init,
    new_state,
    run_to_quiescence,
    scheduler,
    submit,
)

from conftest import golden

C = ApiCall.parse


def run(s, *calls):
    for c in calls:
        s = apply_api(s, C(c))
    return s


def assert_coherent(s):
    running = [t for t in s.tasks.values() if t.state is TaskState.RUNNING]
    assert len(running) <= 1
    if s.running is not None:
        assert s.tasks[s.running].state is TaskState.RUNNING
    queued = [n for q in s.ready_queue.values() for n in q]
    assert sorted(queued) == sorted(n for n, t in s.tasks.items() if t.state is TaskState.READY)
    assert len(queued) == len(set(queued))
    for res, holder in s.resources.items():
        if holder is not None:
            assert res in s.tasks[holder].held_resources
            assert s.tasks[holder].state is not TaskState.SUSPENDED


# ---------------------------------------------------------------- init


def test_single_autostart_task_runs():
    s = init(parse_oil("TASK a { PRIORITY = 1; AUTOSTART = TRUE; };"))
    assert s.running == "a" and s.ready_names() == []
    assert s.tasks["a"].activation_count == 1


def test_no_autostart_nothing_runs():
    s = init(parse_oil("TASK a { PRIORITY = 1; }; TASK b { PRIORITY = 2; };"))
    assert s.running is None
    assert all(t.state is TaskState.SUSPENDED for t in s.tasks.values())


def test_fixture_initial_state_golden(cfg):
    s = init(cfg)
    lines = [f"running={s.running}", f"queue={s.ready_queue}"]
    for n, t in s.tasks.items():
        lines.append(f"{n} {t.state.value} count={t.activation_count} prio={t.static_priority} extended={t.extended}")
    assert "\n".join(lines) + "\n" == golden("fixture_init.txt")
    assert not check_monitors(s)


# ---------------------------------------------------------------- preconditions


def test_terminate_without_activation(cfg):
    s = new_state(cfg)
    v = check_precondition(s, C("TerminateTask()"))
    assert v is not None and "requires prior activation" in v.reason and v.api == "TerminateTask"


def test_release_held_resource_ok(cfg):
    s = run(init(cfg), "GetResource(res1)")
    assert check_precondition(s, C("ReleaseResource(res1)")) is None


def test_release_not_held(cfg):
    assert check_precondition(init(cfg), C("ReleaseResource(res1)")) is not None


def test_wait_event_by_basic_task(cfg):
    s = run(init(cfg), "ActivateTask(t2)")
    assert s.running == "t2"
    v = check_precondition(s, C("WaitEvent(ev1)"))
    assert v is not None and "basic" in v.reason


def test_unknown_api_and_object(cfg):
    s = init(cfg)
    with pytest.raises(UnknownApi):
        check_precondition(s, C("Nope()"))
    with pytest.raises(UnknownObject):
        check_precondition(s, C("ActivateTask(t9)"))
    with pytest.raises(UnknownObject):
        check_precondition(s, C("ActivateTask()"))


def test_check_is_pure(cfg):
    s = init(cfg)
    before = s.fingerprint()
    for c in ("ActivateTask(t2)", "TerminateTask()", "WaitEvent(ev1)", "StartOS()"):
        check_precondition(s, C(c))
    assert s.fingerprint() == before


def test_apply_without_check_raises(cfg):
    with pytest.raises(PreconditionViolation):
        apply_api(init(cfg), C("ReleaseResource(res2)"))


def test_every_precondition_api_has_a_row():
    for row in DEFAULT_TABLE.rows.values():
        assert row.precondition_apis <= set(DEFAULT_TABLE.apis)
    assert set(DEFAULT_TABLE.apis) == {
        "StartOS", "ActivateTask", "TerminateTask", "ChainTask", "Schedule",
        "GetResource", "ReleaseResource", "SetEvent", "ClearEvent", "WaitEvent",
    }


# ---------------------------------------------------------------- semantics


def test_activate_suspended_task():
    cfg = parse_oil("TASK a { PRIORITY = 2; AUTOSTART = TRUE; }; TASK b { PRIORITY = 1; ACTIVATION = 3; };")
    s = run(init(cfg), "ActivateTask(b)")
    assert s.tasks["b"].state is TaskState.READY and s.tasks["b"].activation_count == 1


def test_counter_wraps_at_width():
    cfg = parse_oil("OS o { COUNTER_BITS = 8; }; TASK a { PRIORITY = 2; AUTOSTART = TRUE; }; TASK b { PRIORITY = 1; ACTIVATION = 300; };")
    s = init(cfg)
    for _ in range(255):
        s = apply_api(s, C("ActivateTask(b)"), in_place=True)
    assert s.tasks["b"].activation_count == 255
    s = apply_api(s, C("ActivateTask(b)"))
    assert s.tasks["b"].activation_count == 0
    assert s.tasks["b"].shadow_activations == 256


def test_released_task_queues_behind_running_peer(cfg):
    # t2 and t3 share priority 2; t3 waits on ev2 and is released while t2 runs
    s = run(init(cfg), "ActivateTask(t3)")
    assert s.running == "t3" and s.tasks["t1"].state is TaskState.READY
    s = run(s, "ActivateTask(t2)", "WaitEvent(ev2)")
    assert s.running == "t2"
    s = run(s, "SetEvent(t3,ev2)")
    assert s.ready_queue[2] == ["t3"]


def test_preempted_task_goes_first_within_priority():
    cfg = parse_oil(
        "TASK lo { PRIORITY = 1; AUTOSTART = TRUE; }; TASK lo2 { PRIORITY = 1; }; TASK hi { PRIORITY = 5; };"
    )
    s = run(init(cfg), "ActivateTask(lo2)", "ActivateTask(hi)")
    assert s.running == "hi"
    assert s.ready_queue[1] == ["lo", "lo2"]


def test_scheduler_cases(cfg):
    empty = new_state(cfg)
    assert scheduler(empty).scheduling_key() == empty.scheduling_key()
    cfg2 = parse_oil("TASK a { PRIORITY = 3; }; TASK b { PRIORITY = 1; };")
    s = new_state(cfg2)
    for n in ("b", "a"):
        s.tasks[n].state = TaskState.READY
        s.tasks[n].activation_count = 1
        s.enqueue_back(n)
    assert scheduler(s).running == "a"


def test_equal_priority_fifo():
    cfg = parse_oil("TASK m { PRIORITY = 3; AUTOSTART = TRUE; }; TASK x { PRIORITY = 2; }; TASK y { PRIORITY = 2; };")
    s = run(init(cfg), "ActivateTask(y)", "ActivateTask(x)")
    assert s.ready_queue[2] == ["y", "x"]
    s = run(s, "TerminateTask()")
    assert s.running == "y"


def test_scheduler_idempotent_and_pure(cfg):
    s = run(init(cfg), "ActivateTask(t2)", "ActivateTask(t3)")
    once = scheduler(s)
    assert scheduler(once).scheduling_key() == once.scheduling_key()
    assert len(once.trace) == len(s.trace)


def test_terminate_and_chain(cfg):
    s = run(init(cfg), "ChainTask(t2)")
    assert s.running == "t2" and s.tasks["t1"].state is TaskState.SUSPENDED
    s = run(s, "TerminateTask()")
    assert s.running is None
    assert all(t.state is TaskState.SUSPENDED for t in s.tasks.values())


def test_wait_and_set_event(cfg):
    s = run(init(cfg), "ActivateTask(t3)", "WaitEvent(ev2)")
    assert s.tasks["t3"].state is TaskState.WAITING and s.running == "t1"
    s = run(s, "SetEvent(t3,ev2)")
    assert s.running == "t3"


def test_body_drains_through_preemption(cfg):
    s = init(cfg)
    submit(s, C("ActivateTask(t2)"))
    submit(s, C("GetResource(res1)"))
    run_to_quiescence(s)
    # t2 preempted t1 and runs; t1 keeps its remaining call
    assert s.running == "t2"
    assert s.tasks["t1"].body == [C("GetResource(res1)")]
    submit(s, C("TerminateTask()"))
    run_to_quiescence(s)
    assert s.running == "t1" and s.tasks["t1"].held_resources == ("res1",)


def test_apply_deterministic(cfg):
    a = run(init(cfg), "ActivateTask(t2)")
    b = run(init(cfg), "ActivateTask(t2)")
    assert a.fingerprint() == b.fingerprint()


# ---------------------------------------------------------------- monitors


def stress(counter_bits, n=256):
    from osekenv.project import default_project

    s = init(default_project().cfg, counter_bits)
    for _ in range(n):
        apply_primitive(s, "enqueue_new", ("t2",), "tpl_put_new_proc", in_place=True)
    apply_primitive(s, "reschedule", (), "tpl_schedule_from_running", in_place=True)
    return s


def test_overflow_trips_m1():
    s = stress(8)
    assert [v.monitor for v in s.violations] == ["M1"]


def test_wide_counter_no_violation():
    assert stress(16).violations == []


def test_m2_and_m3_detect_corruption(cfg):
    s = run(init(cfg), "ActivateTask(t2)")
    s.running = None
    assert [v.monitor for v in check_monitors(s)] == ["M2"]
    s = init(cfg)
    s.tasks["t1"].state = TaskState.READY
    assert [v.monitor for v in check_monitors(s)] == ["M3"]


def test_trace_export_golden(cfg):
    s = run(init(cfg), "ActivateTask(t2)", "ActivateTask(t3)", "TerminateTask()", "TerminateTask()", "WaitEvent(ev1)")
    assert export_trace(s) == golden("fixture_trace.txt")


def test_invariants_hold_along_trace(cfg):
    s = init(cfg)
    assert_coherent(s)
    for c in ("ActivateTask(t2)", "GetResource(res2)", "ActivateTask(t3)", "ReleaseResource(res2)",
              "TerminateTask()", "WaitEvent(ev2)", "SetEvent(t3,ev2)", "TerminateTask()"):
        s = apply_api(s, C(c))
        assert_coherent(s)
