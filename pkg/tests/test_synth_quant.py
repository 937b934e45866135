import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opacsynth.costs import CostFunction
from opacsynth.errors import SemanticError
from opacsynth.oracle import (
    DecisionTreeSupervisor,
    decisions_along,
    exhaustive_supervisor_search,
    max_observation_length,
    oracle_cost,
    oracle_observations,
)
from opacsynth.supervisor import Supervisor
from opacsynth.synth_qual import solve
from opacsynth.synth_quant import (
    AugInfoState,
    aug_apply_observation,
    aug_initial_info_state,
    aug_update,
    build_total_abts,
    drop_harmless,
    extract_optimal_supervisor,
    optimal_decisions,
    rev_entries,
    run_cost,
    state_cost,
    synthesize,
    value_iteration,
    worst_case_cost,
)
from randplants import plants, random_plant

A_ = frozenset({"a"})
N = frozenset()
LINEAR5 = CostFunction.linear(5)


def rel(A, *ps):
    return A.pair_ids((str(a), str(b)) for a, b in ps)


# -- cost functions -----------------------------------------------------------

def test_cost_function_tables():
    assert LINEAR5.table == (5, 4, 3, 2, 1)
    assert [LINEAR5(k) for k in range(7)] == [5, 4, 3, 2, 1, 0, 0]
    assert LINEAR5.window == 5 and LINEAR5.bound == 15
    assert CostFunction.k_step(2).table == (1, 1, 1)
    assert CostFunction((3, 1, 0, 0)).window == 2
    assert LINEAR5(-1) == 0


@pytest.mark.parametrize("table", [(), (0, 0), (1, 2), (2, -1)])
def test_cost_function_rejects(table):
    with pytest.raises(ValueError):
        CostFunction(table)


def test_cost_function_argument_checks():
    with pytest.raises(ValueError):
        CostFunction.linear(0)
    with pytest.raises(ValueError):
        CostFunction.k_step(-1)


# -- augmented information states ------------------------------------------------

def aug_trace(A, decisions, observations, cf=LINEAR5):
    info = aug_initial_info_state(A, decisions[0])
    for sigma, gamma in zip(observations, decisions[1:]):
        info = aug_update(info, sigma, gamma, A, cf)
    return info


def test_aug_trace_examples(fig5):
    info = aug_trace(fig5, [A_], [])
    assert info.current == fig5.ids(["0", "1"])
    assert info.history == {(rel(fig5, (0, 0), (0, 1), (1, 1)), 0)}
    info = aug_trace(fig5, [A_, N], ["o1"])
    assert info.history == {(rel(fig5, (0, 2), (0, 3), (1, 3)), 1), (rel(fig5, (2, 2), (3, 3)), 0)}
    assert state_cost(info, LINEAR5, fig5) == 0


def test_disabling_a_reveals_immediately(fig5):
    info = aug_trace(fig5, [N, A_], ["o1"])
    assert info.current == fig5.ids(["2"])
    assert rev_entries(info, fig5) == {(rel(fig5, (2, 2)), 0)}
    assert state_cost(info, LINEAR5, fig5) == 5
    # revealed entries are charged once and then forgotten
    after = aug_apply_observation(info, "o2", fig5, LINEAR5)
    assert all(k >= 1 for _, k in after.history)
    assert rev_entries(after, fig5) == frozenset()


def test_entries_expire_at_the_window(fig5):
    cf = CostFunction.linear(1)
    info = aug_trace(fig5, [A_, A_], ["o1"], cf)
    assert all(k == 0 for _, k in info.history)


def test_aug_update_rejects_unobservable(fig5):
    with pytest.raises(ValueError):
        aug_update(aug_initial_info_state(fig5, A_), "a", A_, fig5, LINEAR5)


def test_drop_harmless(fig5):
    info = aug_trace(fig5, [A_, N], ["o1"])
    kept = drop_harmless(info, fig5)
    assert kept.history == {(rel(fig5, (0, 3), (2, 2)), 0)}
    assert isinstance(kept.to_json(fig5)["history"][0]["age"], int)


# -- the augmented game and its values -----------------------------------------

def test_fig5_graph_and_values(fig5):
    T = build_total_abts(fig5, LINEAR5)
    assert (len(T.y_info), len(T.z_info)) == (13, 18)
    assert sorted(c for c in T.z_cost.values() if c) == [2, 3, 4, 4, 5]
    V = value_iteration(T)
    assert V.y(T.initial) == 2
    assert V.stable_round == 10
    assert V.cap == T.size * LINEAR5.bound


def test_fig5_optimal_supervisor(fig5):
    T, V, S = synthesize(fig5, LINEAR5)
    assert S.value == 2
    assert [sorted(S.decision_after(a) & fig5.controllable) for a in [(), ("o1",), ("o1", "o2")]] == [["a"], ["a"], []]
    assert S.budgets[S.memory_after(("o1", "o2"))] == 2
    assert worst_case_cost(fig5, S, LINEAR5, 5) == 2


def test_fig5_run_costs(fig5):
    everything = DecisionTreeSupervisor.enable_all(fig5)
    no_a_first = DecisionTreeSupervisor.build(fig5, {(): []})
    assert run_cost(fig5, everything, LINEAR5, ("o1", "o2", "o1", "o2")) == 2
    assert run_cost(fig5, everything, LINEAR5, ("o1", "o2", "o2", "o1")) == 3
    assert run_cost(fig5, no_a_first, LINEAR5, ("o1", "o2", "o2", "o1")) == 5
    assert worst_case_cost(fig5, everything, LINEAR5, 5) == 3
    assert worst_case_cost(fig5, no_a_first, LINEAR5, 5) == 5


def test_secret_free_plant_costs_nothing(fig1):
    from opacsynth.automaton import Automaton

    clean = Automaton(fig1.states, fig1.events, fig1.observable, fig1.controllable, fig1.delta, 0, frozenset())
    T, V, S = synthesize(clean, LINEAR5)
    assert all(c == 0 for c in T.z_cost.values())
    assert V.y(T.initial) == 0
    assert S.decision(S.initial) >= set(clean.enabled_at(0))


def test_fig1_solvable_within_window(fig1):
    for n in (1, 5):
        _, V, S = synthesize(fig1, CostFunction.linear(n))
        assert S.value == 0


def test_unbounded_cost_gives_no_supervisor():
    from opacsynth.automaton import Automaton

    loop = Automaton.build(["0", "1"], "0", [("0", "o", "1"), ("1", "o", "1")], observable=["o"], secret=["1"])
    T, V, S = synthesize(loop, CostFunction.linear(2))
    assert V.y(T.initial) == math.inf and S is None
    assert "inf" in V.to_csv()


def test_value_csv_layout(fig5):
    _, V, _ = synthesize(fig5, LINEAR5)
    lines = V.to_csv().splitlines()
    assert lines[0].split(",") == ["state"] + [f"V{r}" for r in range(len(V.history))] + ["V*"]
    assert lines[1].startswith("Y0,") and lines[1].endswith(",2")
    assert len(lines) == 1 + 13 + 18


def test_bad_chooser_rejected(fig5):
    T = build_total_abts(fig5, LINEAR5)
    with pytest.raises(SemanticError):
        extract_optimal_supervisor(T, value_iteration(T), fig5, chooser=lambda opts, A: frozenset({"x"}))


def test_unknown_observation_cost(fig5):
    with pytest.raises(SemanticError):
        oracle_cost(fig5, DecisionTreeSupervisor.enable_all(fig5), LINEAR5, ("o2",))


# -- properties --------------------------------------------------------------------

def _aug_along(A, S, alpha, cf):
    decs = decisions_along(S, alpha)
    info = aug_initial_info_state(A, decs[0])
    costs = [state_cost(info, cf, A)]
    for sigma, gamma in zip(alpha, decs[1:]):
        info = aug_update(info, sigma, gamma, A, cf)
        costs.append(state_cost(info, cf, A))
    return costs


@settings(max_examples=80, deadline=None)
@given(plants(), st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 5]))
def test_run_cost_is_sum_of_state_costs(A, seed, n_max):
    cf = CostFunction.linear(n_max)
    S = DecisionTreeSupervisor.random(A, 3, random.Random(seed))
    for alpha in oracle_observations(A, S, 3):
        assert oracle_cost(A, S, cf, alpha) == sum(_aug_along(A, S, alpha, cf))


@settings(max_examples=80, deadline=None)
@given(plants(), st.sampled_from([1, 2, 3]))
def test_value_rounds_are_monotone_and_bellman(A, n_max):
    cf = CostFunction.linear(n_max)
    T = build_total_abts(A, cf, reduce=True)
    V = value_iteration(T)
    for prev, nxt in zip(V.history, V.history[1:]):
        assert all(prev[k] <= nxt[k] for k in prev)
    for y, edges in T.yz.items():
        assert V.y(y) == min(V.z(z) for z in edges.values())
    for z, edges in T.zy.items():
        worst = max((V.y(y) for y in edges.values()), default=0)
        assert V.z(z) == min(worst + T.z_cost[z], math.inf)


@settings(max_examples=80, deadline=None)
@given(plants(), st.sampled_from([1, 2, 3]))
def test_reduction_keeps_values(A, n_max):
    cf = CostFunction.linear(n_max)
    full = build_total_abts(A, cf, max_states=50_000) if A.n <= 4 else None
    red = build_total_abts(A, cf, reduce=True)
    v_red = value_iteration(red).y(red.initial)
    if full is not None:
        assert value_iteration(full).y(full.initial) == v_red
    simple = build_total_abts(A, cf, simplify=False, reduce=True)
    assert value_iteration(simple).y(simple.initial) == v_red


@pytest.mark.parametrize("seed", range(60))
def test_value_equals_exhaustive_minimax(seed):
    rng = random.Random(seed)
    A = random_plant(rng, acyclic=True)
    cf = CostFunction.linear(rng.choice([2, 3, 5]))
    depth = max_observation_length(A)
    T, V, S = synthesize(A, cf, reduce=True)
    best = exhaustive_supervisor_search(A, depth, "cost", cf)
    assert V.y(T.initial) == best.cost
    assert worst_case_cost(A, S, cf, depth) == best.cost


@pytest.mark.parametrize("seed", range(40))
def test_chooser_does_not_change_the_guarantee(seed):
    A = random_plant(random.Random(seed), acyclic=True)
    cf = CostFunction.linear(3)
    T, V, S = synthesize(A, cf, reduce=True)
    last = extract_optimal_supervisor(T, V, A, chooser=lambda opts, _A: opts[-1])
    depth = max_observation_length(A)
    assert worst_case_cost(A, last, cf, depth) == worst_case_cost(A, S, cf, depth) == V.y(T.initial)


@pytest.mark.parametrize("seed", range(60))
def test_zero_cost_iff_qualitatively_solvable(seed):
    A = random_plant(random.Random(seed), acyclic=True)
    n_max = max_observation_length(A) + 1
    T, V, _ = synthesize(A, CostFunction.linear(n_max), reduce=True)
    assert (V.y(T.initial) == 0) == (not solve(A, reduce=True).is_empty())


@pytest.mark.parametrize("seed", range(40))
def test_k_step_costs_against_search(seed):
    rng = random.Random(seed)
    A = random_plant(rng, acyclic=True)
    cf = CostFunction.k_step(rng.randint(0, 2))
    T, V, _ = synthesize(A, cf, reduce=True)
    assert V.y(T.initial) == exhaustive_supervisor_search(A, max_observation_length(A), "cost", cf).cost


def test_optimal_decisions_respect_budget(fig5):
    T = build_total_abts(fig5, LINEAR5)
    V = value_iteration(T)
    assert optimal_decisions(T, V, T.initial, 1, fig5) == []
    assert [sorted(g & fig5.controllable) for g in optimal_decisions(T, V, T.initial, 2, fig5)] == [["a"]]
    assert len(optimal_decisions(T, V, T.initial, 5, fig5)) == 1
    assert isinstance(AugInfoState(frozenset(), frozenset()), AugInfoState)
    assert isinstance(extract_optimal_supervisor(T, V, fig5), Supervisor)


@pytest.mark.parametrize("seed", range(40))
def test_cyclic_values_are_sound(seed):
    rng = random.Random(5000 + seed)
    A = random_plant(rng, acyclic=False)
    cf = CostFunction.linear(rng.choice([2, 3]))
    T, V, S = synthesize(A, cf, reduce=True)
    value = V.y(T.initial)
    if value == math.inf:
        # unbounded total cost leaves no opacity-enforcing supervisor either
        assert solve(A, reduce=True).is_empty()
        assert S is None
    else:
        assert worst_case_cost(A, S, cf, 5) <= value
