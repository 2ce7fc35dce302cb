"""Property-based checks of the invariants the package promises."""

import warnings

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from osekenv.codegraph import (
    backward_call_closure,
    build_graph,
    forward_call_closure,
    forward_closure_of,
    variable_dependency_closure,
)
from osekenv.frontend import loads_facts
from osekenv.frontend.facts import dumps_facts
from osekenv.osek import ApiCall, TaskState, apply_api, check_precondition, init, scheduler
from osekenv.project import default_project
from osekenv.scenario import Level, Scenario, gen_end_level
from osekenv.slicer import CountConstraint, SliceMode, abstract_kernel, end_level_functions, root_level_functions

import oracles

CFG = default_project().cfg
ARGS = {
    "StartOS": [()],
    "ActivateTask": [(t.name,) for t in CFG.tasks],
    "ChainTask": [(t.name,) for t in CFG.tasks],
    "TerminateTask": [()],
    "Schedule": [()],
    "GetResource": [(r,) for r in CFG.resources],
    "ReleaseResource": [(r,) for r in CFG.resources],
    "SetEvent": [(t.name, e) for t in CFG.tasks for e in CFG.events],
    "ClearEvent": [(e,) for e in CFG.events],
    "WaitEvent": [(e,) for e in CFG.events],
}
ALL_CALLS = [ApiCall(n, a) for n, argl in ARGS.items() for a in argl]

quick = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def programs(draw):
    return oracles.random_program(draw(st.integers(0, 10_000)), draw(st.integers(1, 25)), draw(st.integers(1, 15)))


def graph_of(prog):
    return build_graph(loads_facts(prog.fact_lines()))


def fn_subsets(prog):
    return st.lists(st.sampled_from(prog.functions), max_size=6, unique=True)


# ---------------------------------------------------------------- closures


@quick
@given(prog=programs(), data=st.data())
def test_closures_contain_seed_and_are_dual(prog, data):
    g = graph_of(prog)
    f = data.draw(st.sampled_from(prog.functions))
    fwd, bwd = forward_call_closure(g, f), backward_call_closure(g, f)
    assert f in fwd and f in bwd
    for h in prog.functions:
        assert (h in fwd) == (f in backward_call_closure(g, h))


@quick
@given(prog=programs(), data=st.data())
def test_forward_closure_idempotent_and_monotone(prog, data):
    g = graph_of(prog)
    a = set(data.draw(fn_subsets(prog)))
    b = a | set(data.draw(fn_subsets(prog)))
    ca = forward_closure_of(g, a)
    assert forward_closure_of(g, ca) == ca
    assert ca <= forward_closure_of(g, b)


@quick
@given(prog=programs(), data=st.data())
def test_forward_closure_agrees_with_matrix_oracle(prog, data):
    g = graph_of(prog)
    seeds = data.draw(fn_subsets(prog))
    reach = oracles.closure_by_squaring(prog.functions, prog.calls)
    assert forward_closure_of(g, seeds) == oracles.reachable_from(prog.functions, reach, seeds)


@quick
@given(prog=programs(), data=st.data())
def test_variable_closure_contains_seeds_and_is_idempotent(prog, data):
    g = graph_of(prog)
    vs = data.draw(st.lists(st.sampled_from(prog.variables), max_size=4, unique=True))
    c = variable_dependency_closure(g, vs)
    assert set(vs) <= c
    assert variable_dependency_closure(g, c) == c
    assert c <= variable_dependency_closure(g, vs, through_functions=True)


# ---------------------------------------------------------------- slicer


@quick
@given(prog=programs(), data=st.data())
def test_slice_sets_monotone_in_variables(prog, data):
    g = graph_of(prog)
    a = set(data.draw(st.lists(st.sampled_from(prog.variables), max_size=3, unique=True)))
    b = a | set(data.draw(st.lists(st.sampled_from(prog.variables), max_size=3, unique=True)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ea, eb = set(end_level_functions(g, a)), set(end_level_functions(g, b))
        assert ea <= eb
        assert set(end_level_functions(g, a, SliceMode.MODIFY_ONLY)) <= ea
        ra, rb = set(root_level_functions(g, ea)), set(root_level_functions(g, eb))
    assert ra <= rb <= prog.apis
    assert ea <= set(abstract_kernel(g, ra | ea))


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 4), st.sets(st.integers(0, 4), min_size=1, max_size=2)), max_size=3),
    st.integers(0, 1000),
    st.integers(0, 60),
)
def test_end_generation_respects_count_constraints(raw, seed, length):
    names = [f"f{i}" for i in range(5)]
    cons, seen = [], set()
    for succ, preds in raw:
        preds = preds - {succ}
        if preds and succ not in seen:
            seen.add(succ)
            cons.append(CountConstraint(names[succ], tuple(names[p] for p in preds)))
    scn = gen_end_level(names, cons, seed, length)
    calls = [c.name for c in scn.calls]
    assert oracles.prefix_counts_ok(calls, [(c.successor, c.predecessors) for c in cons])
    assert len(calls) == length or scn.stop_reason == "deadlock"


# ---------------------------------------------------------------- simulator


def coherent(s):
    running = [n for n, t in s.tasks.items() if t.state is TaskState.RUNNING]
    if running != ([s.running] if s.running else []):
        return False
    queued = [n for q in s.ready_queue.values() for n in q]
    ready = [n for n, t in s.tasks.items() if t.state is TaskState.READY]
    if sorted(queued) != sorted(ready) or len(set(queued)) != len(queued):
        return False
    for n, t in s.tasks.items():
        if t.activation_count != t.shadow_activations & s.counter_mask:
            return False
        if t.state is TaskState.SUSPENDED and t.held_resources:
            return False
    return all(h is None or r in s.tasks[h].held_resources for r, h in s.resources.items())


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, len(ALL_CALLS) - 1), max_size=60))
def test_valid_calls_preserve_invariants(picks):
    s = init(CFG)
    for i in picks:
        call = ALL_CALLS[i]
        if check_precondition(s, call) is not None:
            continue
        s = apply_api(s, call)
        assert coherent(s)
        assert s.violations == []
        # the running task always has the highest ready-or-running priority
        if s.running is not None:
            assert s.tasks[s.running].static_priority >= s.highest_ready_priority()
        assert scheduler(s).scheduling_key() == s.scheduling_key()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, len(ALL_CALLS) - 1), max_size=30))
def test_scheduler_idempotent_on_reachable_states(picks):
    s = init(CFG)
    for i in picks:
        if check_precondition(s, ALL_CALLS[i]) is None:
            s = apply_api(s, ALL_CALLS[i])
    once = scheduler(s)
    assert scheduler(once).scheduling_key() == once.scheduling_key()


# ---------------------------------------------------------------- file formats


@quick
@given(programs())
def test_facts_round_trip(prog):
    recs = loads_facts(prog.fact_lines())
    text = dumps_facts(recs)
    assert dumps_facts(loads_facts(text)) == text


ident = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True)


@quick
@given(
    st.sampled_from(list(Level)),
    st.integers(0, 2**32),
    st.lists(st.tuples(ident, st.lists(ident, max_size=3)), max_size=10),
    st.booleans(),
)
def test_scenario_text_round_trip(level, seed, calls, complete):
    scn = Scenario(level, seed, tuple(ApiCall(n, tuple(a)) for n, a in calls), complete, "length")
    assert Scenario.from_text(scn.to_text()) == scn

