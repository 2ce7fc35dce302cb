import pytest

from osekenv.errors import BindingError
from osekenv.frontend import parse_oil
from osekenv.osek import ApiCall, TaskState
from osekenv.scenario import (
    GenParams,
    Level,
    Scenario,
    batch,
    gen_end_level,
    gen_root_level,
    is_complete,
    loads_bindings,
    plateau_length,
    replay,
)
from osekenv.slicer import CountConstraint

import oracles


def test_root_same_seed_same_scenario(cfg):
    assert gen_root_level(cfg, seed=11, max_len=50) == gen_root_level(cfg, seed=11, max_len=50)


def test_root_only_api_members(cfg, graph):
    scn = gen_root_level(cfg, seed=5, max_len=100)
    assert {c.name for c in scn.calls} <= graph.api_set


@pytest.mark.parametrize("seed", range(25))
def test_root_replays_clean(cfg, graph, seed):
    scn = gen_root_level(cfg, seed=seed, max_len=120)
    res = replay(scn, cfg, graph)
    assert res.precondition_violations == []
    assert scn.complete == is_complete(res.final_state)


def test_root_never_terminating_task_truncates():
    # the only task may not terminate while it holds the resource forever;
    # a tiny max_len leaves the scenario incomplete
    cfg = parse_oil("TASK a { PRIORITY = 1; AUTOSTART = TRUE; RESOURCE = r; }; RESOURCE r {};")
    scn = gen_root_level(cfg, seed=0, max_len=1)
    if scn.calls[0].name not in ("TerminateTask", "ChainTask"):
        assert not scn.complete and scn.stop_reason == "max_len"


def test_root_max_len_must_be_positive(cfg):
    with pytest.raises(ValueError):
        gen_root_level(cfg, seed=0, max_len=0)


def test_end_length_zero():
    scn = gen_end_level(["a", "b"], [], seed=0, length=0)
    assert scn.calls == () and scn.complete


def test_end_fixture_constraints_hold(sr):
    scn = gen_end_level(sr.elf, sr.internal_constraints, seed=3, length=300)
    names = [c.name for c in scn.calls]
    assert len(names) == 300
    assert set(names) <= set(sr.elf)
    counts = {}
    for n in names:
        if n == "tpl_get_proc":
            assert counts.get(n, 0) < counts.get("tpl_put_new_proc", 0)
            assert counts.get(n, 0) < counts.get("tpl_schedule_from_running", 0)
        counts[n] = counts.get(n, 0) + 1


def test_end_cyclic_constraints_deadlock():
    cs = [CountConstraint("a", ("b",)), CountConstraint("b", ("a",))]
    scn = gen_end_level(["a", "b"], cs, seed=1, length=10)
    assert scn.calls == () and scn.stop_reason == "deadlock" and not scn.complete


def test_end_constraint_outside_elf_rejected():
    with pytest.raises(ValueError):
        gen_end_level(["a"], [CountConstraint("a", ("zz",))], seed=0, length=3)


def test_empty_scenario_replay(cfg, graph):
    res = replay(Scenario(Level.ROOT, 0), cfg, graph)
    assert res.violations == []
    assert (res.coverage.function_ratio, res.coverage.edge_ratio, res.coverage.row_ratio) == (0.0, 0.0, 0.0)


def test_root_stress_blocked_by_activation_limit(cfg, graph):
    calls = tuple(ApiCall("ActivateTask", ("t2",)) for _ in range(256))
    res = replay(Scenario(Level.ROOT, 0, calls), cfg, graph)
    assert res.monitor_violations == []
    assert len(res.precondition_violations) == 256 - cfg.task("t2").max_activations
    assert res.final_state.tasks["t2"].activation_count == cfg.task("t2").max_activations


def test_end_stress_trips_m1(cfg, graph, bindings):
    calls = [ApiCall("tpl_put_new_proc", ("t2",))] * 256 + [ApiCall("tpl_schedule_from_running")]
    res = replay(Scenario(Level.END, 0, tuple(calls)), cfg, graph, bindings=bindings)
    assert [v.monitor for v in res.monitor_violations] == ["M1"]


def test_unbound_end_function(cfg, graph, bindings):
    with pytest.raises(BindingError):
        replay(Scenario(Level.END, 0, (ApiCall("tpl_start_proc"),)), cfg, graph, bindings=bindings)


def test_replay_level_mismatch(cfg, graph):
    with pytest.raises(ValueError):
        replay(Scenario(Level.ROOT, 0), cfg, graph, level="END")


def test_halt_on_violation(cfg, graph):
    calls = (ApiCall("ReleaseResource", ("res1",)), ApiCall("TerminateTask"))
    res = replay(Scenario(Level.ROOT, 0, calls), cfg, graph, halt_on_violation=True)
    assert len(res.violations) == 1
    assert res.final_state.tasks["t1"].state is TaskState.RUNNING


def test_scenario_file_round_trip(cfg, sr, bindings):
    for scn in (
        gen_root_level(cfg, seed=2, max_len=30),
        gen_end_level(sr.elf, sr.internal_constraints, 4, 20, bindings.arg_domains(cfg)),
        Scenario(Level.ROOT, 9),
    ):
        assert Scenario.from_text(scn.to_text()) == scn


def test_scenario_header():
    text = Scenario(Level.END, 42, (ApiCall("f", ("a", "b")),), True, "length").to_text()
    assert text == "#scenario level=END seed=42 complete=true stop=length\n0\tf\ta,b\n"


@pytest.mark.parametrize(
    "text",
    ["", "0\tf\t\n", "#scenario level=X seed=1\n", "#scenario level=ROOT seed=1\n1\tf\t\n", "#scenario level=ROOT seed=1\n0\tf\n"],
)
def test_bad_scenario_files(text):
    with pytest.raises(ValueError):
        Scenario.from_text(text)


def test_bindings_parser():
    b = loads_bindings("# c\nf\tenqueue_new\ttask\ng\treschedule\t-\n")
    assert b["f"].arg_kinds == ("task",) and b["g"].arg_kinds == ()
    with pytest.raises(BindingError):
        b["h"]
    for bad in ("f\tnope\t-\n", "f\tenqueue_new\t-\n", "f\treschedule\n", "f\treschedule\t-\nf\treschedule\t-\n"):
        with pytest.raises(ValueError):
            loads_bindings(bad)


def test_batch_n1_equals_single_replay(cfg, graph):
    res = batch(cfg, GenParams(Level.ROOT, 60, seed0=7), 1, graph, measure=False)
    single = replay(gen_root_level(cfg, seed=7, max_len=60), cfg, graph)
    assert res.coverage.to_csv() == single.coverage.to_csv()


def test_batch_curve_nondecreasing_and_plateau(cfg, graph):
    res = batch(cfg, GenParams(Level.ROOT, 200), 30, graph, measure=False)
    curve = res.coverage.curve()
    for a, b in zip(curve, curve[1:]):
        assert all(x <= y for x, y in zip(a[1:], b[1:]))
    assert plateau_length(res.coverage) is not None


def test_batch_merge_order_independent(cfg, graph):
    runs = [replay(gen_root_level(cfg, seed=s, max_len=40), cfg, graph).coverage for s in range(6)]
    fwd = runs[0]
    for r in runs[1:]:
        fwd = fwd.merge(r)
    bwd = runs[-1]
    for r in reversed(runs[:-1]):
        bwd = bwd.merge(r)
    assert fwd.to_csv() == bwd.to_csv()


def test_batch_end_level(cfg, graph, sr, bindings):
    res = batch(cfg, GenParams(Level.END, 100), 5, graph, bindings=bindings, slice_result=sr)
    assert len(res.runs) == 5 and all(r.stop_reason == "length" for r in res.runs)
    assert res.runs_csv().startswith("seed,length,complete,stop_reason,violations,wall_s,peak_kib\n")


def test_batch_summary_deterministic(cfg, graph):
    a = batch(cfg, GenParams(Level.ROOT, 50, seed0=3), 4, graph).summary()
    b = batch(cfg, GenParams(Level.ROOT, 50, seed0=3), 4, graph).summary()
    assert a == b


def test_end_prefixes_recount(sr, bindings, cfg):
    cons = [(c.successor, c.predecessors) for c in sr.internal_constraints]
    for seed in range(20):
        scn = gen_end_level(sr.elf, sr.internal_constraints, seed, 200, bindings.arg_domains(cfg))
        assert oracles.prefix_counts_ok([c.name for c in scn.calls], cons)
