"""Brute-force reference computations.

Nothing here uses information states or game graphs. Estimates come either
from explicit string enumeration or from reachability in the unrolled graph
of (plant state, number of observations consumed) pairs, and supervisors are
searched by plain minimax over observation histories.
"""
from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from importlib import resources
from itertools import product
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .automaton import Automaton, Decision, Event, parse_automaton, project, run
from .costs import CostFunction
from .errors import FixtureConstraintError, ResourceLimitError, SemanticError

DEFAULT_STRING_CAP = 10**6
DEFAULT_NODE_CAP = 2_000_000
_BEYOND = "*"

Observation = tuple  # tuple[Event, ...]


@dataclass(frozen=True)
class DecisionTreeSupervisor:
    """Decisions tabulated per observation sequence up to ``depth``; ``default`` elsewhere."""

    table: Mapping[Observation, Decision]
    default: Decision
    depth: int

    @classmethod
    def build(cls, A: Automaton, table: Mapping[Sequence[Event], Iterable[Event]],
              default: Iterable[Event] | None = None, depth: int | None = None) -> "DecisionTreeSupervisor":
        tab = {tuple(k): A.admissible(v) for k, v in table.items()}
        if depth is None:
            depth = max((len(k) for k in tab), default=0)
        dflt = A.admissible(A.events if default is None else default)
        return cls(tab, dflt, depth)

    @classmethod
    def enable_all(cls, A: Automaton) -> "DecisionTreeSupervisor":
        return cls({}, frozenset(A.events), 0)

    @classmethod
    def random(cls, A: Automaton, depth: int, rng: random.Random) -> "DecisionTreeSupervisor":
        ctrl = sorted(A.controllable)
        obs = sorted(A.observable)
        table = {}
        for n in range(depth + 1):
            for alpha in product(obs, repeat=n):
                table[alpha] = frozenset(c for c in ctrl if rng.random() < 0.6) | A.uncontrollable
        dflt = frozenset(c for c in ctrl if rng.random() < 0.6) | A.uncontrollable
        return cls(table, dflt, depth)

    @classmethod
    def tabulate(cls, A: Automaton, S, depth: int) -> "DecisionTreeSupervisor":
        """Depth-truncated table of any memory-based supervisor."""
        table = {}
        frontier = [((), S.initial_memory)]
        for _ in range(depth + 1):
            nxt = []
            for alpha, m in frontier:
                table[alpha] = S.decision(m)
                if len(alpha) < depth:
                    for sigma in sorted(A.observable):
                        m2 = S.step(m, sigma)
                        if m2 is not None:
                            nxt.append((alpha + (sigma,), m2))
            frontier = nxt
        return cls(table, A.uncontrollable, depth)

    @property
    def initial_memory(self) -> Hashable:
        return ()

    def decision(self, memory) -> Decision:
        if memory == _BEYOND:
            return self.default
        return self.table.get(memory, self.default)

    def step(self, memory, event: Event):
        if memory == _BEYOND:
            return _BEYOND
        nxt = memory + (event,)
        return _BEYOND if len(nxt) > self.depth else nxt

    def decisions_along(self, alpha: Sequence[Event]) -> list[Decision]:
        return decisions_along(self, alpha)


def decisions_along(S, alpha: Sequence[Event]) -> list[Decision | None]:
    """Decision in force after each prefix of ``alpha`` (``None`` once memory is undefined)."""
    out = []
    m = S.initial_memory
    for i in range(len(alpha) + 1):
        out.append(None if m is None else S.decision(m))
        if i < len(alpha) and m is not None:
            m = S.step(m, alpha[i])
    return out


# -- the unrolled (state, position) graph -------------------------------------

def _layer_moves(A: Automaton, x: int, i: int, alpha: Sequence[Event], decs: Sequence[Decision | None]):
    d = decs[i]
    if d is None:
        return
    for e, y in A.enabled_at(x).items():
        if e not in d:
            continue
        if e not in A.observable:
            yield y, i
        elif i < len(alpha) and e == alpha[i]:
            yield y, i + 1


def _forward(A: Automaton, sources: Iterable[tuple[int, int]], alpha, decs) -> set[tuple[int, int]]:
    seen = set(sources)
    todo = deque(seen)
    while todo:
        x, i = todo.popleft()
        for nxt in _layer_moves(A, x, i, alpha, decs):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def _pairs(A: Automaton, j: int, alpha: Sequence[Event], decs) -> set[tuple[int, int]]:
    """Pairs (state at instant ``j``, state at the end) over runs observing ``alpha``."""
    reach = _forward(A, [(A.initial, 0)], alpha, decs)
    n = len(alpha)
    out = set()
    for x in sorted(s for s, i in reach if i == j):
        for y, i in _forward(A, [(x, j)], alpha, decs):
            if i == n:
                out.add((x, y))
    return out


def _estimate_from_decisions(A: Automaton, prefix_len: int, alpha, decs) -> frozenset[int]:
    return frozenset(x for x, _ in _pairs(A, prefix_len, alpha, decs))


def _check_prefix(alpha_prime: Sequence[Event], alpha: Sequence[Event]) -> None:
    if tuple(alpha[:len(alpha_prime)]) != tuple(alpha_prime):
        raise ValueError("alpha_prime must be a prefix of alpha")


def oracle_current_estimate(A: Automaton, S, alpha: Sequence[Event]) -> frozenset[int]:
    alpha = tuple(alpha)
    decs = decisions_along(S, alpha)
    reach = _forward(A, [(A.initial, 0)], alpha, decs)
    return frozenset(x for x, i in reach if i == len(alpha))


def oracle_pair_relation(A: Automaton, S, alpha_prime: Sequence[Event], alpha: Sequence[Event]) -> frozenset:
    alpha = tuple(alpha)
    _check_prefix(alpha_prime, alpha)
    return frozenset(_pairs(A, len(alpha_prime), alpha, decisions_along(S, alpha)))


def oracle_delayed_estimate(A: Automaton, S, alpha_prime: Sequence[Event], alpha: Sequence[Event],
                            method: str = "closure", cap: int = DEFAULT_STRING_CAP) -> frozenset[int]:
    """States the plant may have been in when ``alpha_prime`` was seen, given ``alpha``.

    ``method="enumerate"`` lists controlled strings explicitly up to
    ``(len(alpha) + 2) * |X|`` events, enough for every unobservable detour
    between consecutive observations and around the instant of interest.
    Falls back to the closure computation when the cap is hit.
    """
    alpha = tuple(alpha)
    _check_prefix(alpha_prime, alpha)
    if method == "closure":
        return _estimate_from_decisions(A, len(alpha_prime), alpha, decisions_along(S, alpha))
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    try:
        return _enumerate_estimate(A, S, len(alpha_prime), alpha, cap)
    except ResourceLimitError:
        return _estimate_from_decisions(A, len(alpha_prime), alpha, decisions_along(S, alpha))


def _enumerate_estimate(A: Automaton, S, j: int, alpha: tuple, cap: int) -> frozenset[int]:
    bound = (len(alpha) + 2) * A.n
    out: set[int] = set()
    count = 0
    # (string, plant state, memory, observations consumed, states seen at instant j)
    stack = [((), A.initial, S.initial_memory, 0, frozenset({A.initial}) if j == 0 else frozenset())]
    while stack:
        s, x, m, i, marks = stack.pop()
        if i == len(alpha):
            out |= marks
        if len(s) == bound:
            continue
        d = S.decision(m)
        for e, y in A.enabled_at(x).items():
            if e not in d:
                continue
            if e in A.observable:
                if i >= len(alpha) or alpha[i] != e:
                    continue
                m2, i2 = S.step(m, e), i + 1
                if m2 is None:
                    continue
            else:
                m2, i2 = m, i
            count += 1
            if count > cap:
                raise ResourceLimitError("string enumeration cap exceeded")
            marks2 = marks | {y} if i2 == j else marks
            stack.append((s + (e,), y, m2, i2, marks2))
    return frozenset(out)


def oracle_observations(A: Automaton, S, depth: int) -> list[Observation]:
    """Observation sequences of the closed loop up to ``depth``, sorted."""
    out = []
    todo = deque([()])
    while todo:
        alpha = todo.popleft()
        out.append(alpha)
        if len(alpha) == depth:
            continue
        current = oracle_current_estimate(A, S, alpha)
        d = decisions_along(S, alpha)[-1]
        if d is None:
            continue
        for sigma in sorted(A.observable & d):
            if any(A.step(x, sigma) is not None for x in current):
                nxt = alpha + (sigma,)
                if decisions_along(S, nxt)[-1] is not None:
                    todo.append(nxt)
    return sorted(out, key=lambda a: (len(a), a))


def oracle_rev_set(A: Automaton, S, alpha_prime: Sequence[Event], alpha: Sequence[Event]) -> set[Observation]:
    alpha = tuple(alpha)
    _check_prefix(alpha_prime, alpha)
    out = set()
    for n in range(len(alpha_prime), len(alpha) + 1):
        beta = alpha[:n]
        est = oracle_delayed_estimate(A, S, alpha_prime, beta)
        if est and est <= A.secret:
            out.add(beta)
    return out


def _cost_from_estimates(A: Automaton, cf: CostFunction, alpha: tuple, estimate) -> int:
    total = 0
    for j in range(len(alpha) + 1):
        for n in range(j, len(alpha) + 1):
            est = estimate(j, alpha[:n])
            if est and est <= A.secret:
                total += cf(n - j)
                break
    return total


def oracle_cost(A: Automaton, S, cf: CostFunction, alpha: Sequence[Event]) -> int:
    """Sum, over instants, of the cost of the first revelation of that instant."""
    alpha = tuple(alpha)
    if alpha and not oracle_current_estimate(A, S, alpha):
        raise SemanticError(f"observation {' '.join(alpha)!r} is not generated")
    return _cost_from_estimates(A, cf, alpha, lambda j, beta: oracle_delayed_estimate(A, S, alpha[:j], beta))


# -- exhaustive supervisor search ----------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    solvable: bool
    cost: int | None
    supervisor: DecisionTreeSupervisor | None
    nodes: int


def exhaustive_supervisor_search(A: Automaton, depth: int, objective: str = "qualitative",
                                 cf: CostFunction | None = None, max_controllable: int = 4,
                                 max_depth: int = 4, node_cap: int = DEFAULT_NODE_CAP,
                                 first: Iterable[Iterable[Event]] | None = None) -> SearchResult:
    """Minimax over every decision table on observation sequences up to ``depth``.

    Qualitative: is there a table under which no delayed estimate of any
    observation up to ``depth`` falls inside the secret? Cost: the least
    worst-case revelation cost over those observations. Both are exact for
    plants whose observation sequences never exceed ``depth``. ``first``
    restricts the decisions tried before any observation.
    """
    if len(A.controllable) > max_controllable or depth > max_depth:
        raise ResourceLimitError("instance exceeds the exhaustive-search caps")
    if objective not in ("qualitative", "cost"):
        raise ValueError(f"unknown objective {objective!r}")
    if objective == "cost" and cf is None:
        raise ValueError("cost objective needs a cost function")
    decisions = A.all_decisions()
    roots = decisions if first is None else sorted({A.admissible(g) for g in first}, key=sorted)
    nodes = 0
    inf = float("inf")

    def estimates(alpha: tuple, decs: list) -> list[frozenset[int]]:
        return [_estimate_from_decisions(A, j, alpha, decs) for j in range(len(alpha) + 1)]

    def revealed(est: frozenset[int]) -> bool:
        return bool(est) and est <= A.secret

    # done[j]: instant j was already revealed at an earlier observation
    def solve(alpha: tuple, decs: list, done: tuple[bool, ...]):
        nonlocal nodes
        best_val, best_table = inf, None
        for gamma in (roots if not alpha else decisions):
            nodes += 1
            if nodes > node_cap:
                raise ResourceLimitError("exhaustive search node cap exceeded")
            decs2 = decs + [gamma]
            est = estimates(alpha, decs2)
            step_cost = 0
            done2 = list(done) + [False]
            failed = False
            for j, q in enumerate(est):
                if revealed(q):
                    if objective == "qualitative":
                        failed = True
                        break
                    if not done2[j]:
                        step_cost += cf(len(alpha) - j)
                        done2[j] = True
            if failed or step_cost >= best_val:
                continue
            worst, tables = step_cost, {alpha: gamma}
            if len(alpha) < depth:
                current = _estimate_current(A, alpha, decs2)
                for sigma in sorted(A.observable & gamma):
                    if not any(A.step(x, sigma) is not None for x in current):
                        continue
                    val, tab = solve(alpha + (sigma,), decs2, tuple(done2))
                    if val == inf:
                        worst = inf
                        break
                    worst = max(worst, step_cost + val)
                    tables.update(tab)
                    if worst >= best_val:
                        break
            if worst < best_val:
                best_val, best_table = worst, tables
                if best_val == 0:
                    break
        return best_val, best_table

    val, table = solve((), [], ())
    if val == inf:
        return SearchResult(False, None, None, nodes)
    S = DecisionTreeSupervisor(table, frozenset(A.events), depth)
    return SearchResult(True, int(val) if objective == "cost" else 0, S, nodes)


def _estimate_current(A: Automaton, alpha: tuple, decs: list) -> frozenset[int]:
    reach = _forward(A, [(A.initial, 0)], alpha, decs)
    return frozenset(x for x, i in reach if i == len(alpha))


def max_observation_length(A: Automaton, cap: int = 64) -> int | None:
    """Longest observation sequence of the open-loop plant, ``None`` if unbounded."""
    # longest path in the reachable graph weighted by observability; cycles make it unbounded
    reach = set()
    todo = [A.initial]
    while todo:
        x = todo.pop()
        if x in reach:
            continue
        reach.add(x)
        todo.extend(A.enabled_at(x).values())
    memo: dict[int, int] = {}
    onstack: set[int] = set()

    def longest(x: int) -> int | None:
        if x in memo:
            return memo[x]
        if x in onstack:
            return None
        onstack.add(x)
        best = 0
        for e, y in A.enabled_at(x).items():
            sub = longest(y)
            if sub is None:
                return None
            best = max(best, sub + (e in A.observable))
        onstack.discard(x)
        memo[x] = best
        return best

    return longest(A.initial)


# -- fixtures and their constraint files ----------------------------------------

FIXTURES = ("fig1_G", "fig1_G1", "fig5_G")


def fixture_text(name: str) -> str:
    name = name.removesuffix(".des")
    if name not in FIXTURES:
        raise SemanticError(f"unknown fixture {name!r}")
    return resources.files("opacsynth.fixtures").joinpath(f"{name}.des").read_text(encoding="utf-8")


def load_fixture(name: str) -> Automaton:
    return parse_automaton(fixture_text(name))


def load_constraints(name: str) -> list[dict]:
    name = name.removesuffix(".des")
    path = resources.files("opacsynth.fixtures").joinpath(f"{name}.constraints.json")
    if not path.is_file():
        return []
    return json.loads(path.read_text(encoding="utf-8"))


def reconstruct_fixture(name: str, candidate: Automaton | None = None) -> Automaton:
    """Load a shipped fixture (or check ``candidate``) against its constraint file."""
    A = candidate if candidate is not None else load_fixture(name)
    violations = check_constraints(A, load_constraints(name))
    if violations:
        raise FixtureConstraintError(name, violations)
    return A


def check_constraints(A: Automaton, constraints: Sequence[Mapping]) -> list[str]:
    """Names (with details) of every checked constraint that ``A`` violates."""
    out = []
    for c in constraints:
        if c.get("unconstrained"):
            continue
        try:
            got = evaluate_constraint(A, c["op"], c.get("args", {}))
        except Exception as exc:  # a broken candidate may fail in any operator
            out.append(f"{c['name']}: {type(exc).__name__}: {exc}")
            continue
        if got != c["expected"]:
            out.append(f"{c['name']}: expected {c['expected']!r}, got {got!r}")
    return out


def _state_list(A: Automaton, q) -> list:
    return sorted(A.names(q), key=A.index)


def _pair_list(A: Automaton, rho) -> list:
    return sorted(([A.states[a], A.states[b]] for a, b in rho), key=lambda p: (A.index(p[0]), A.index(p[1])))


def _relation_family(A: Automaton, rels) -> list:
    return sorted(_pair_list(A, r) for r in rels)


def supervisor_from_spec(A: Automaton, spec) -> DecisionTreeSupervisor:
    """``"enable_all"`` or ``{"table": {"o1 o2": [...], ...}, "default": [...]}``."""
    if spec == "enable_all":
        return DecisionTreeSupervisor.enable_all(A)
    table = {tuple(k.split()): v for k, v in spec.get("table", {}).items()}
    return DecisionTreeSupervisor.build(A, table, spec.get("default"))


def _path(raw: Sequence) -> list:
    return [frozenset(s) if isinstance(s, list) else s for s in raw]


def evaluate_constraint(A: Automaton, op: str, args: Mapping[str, Any]):
    """Evaluate one recorded computation, returning plain JSON-comparable data."""
    from . import estimation as est
    from .infostate import d1, initial_info_state, update_info_state

    handler = _OPS.get(op)
    if handler is not None:
        return handler(A, args)
    if op in ("unobservable_reach", "stationary_pairs"):
        q = A.ids(args["states"])
        gamma = A.admissible(args["decision"])
        if op == "unobservable_reach":
            return _state_list(A, est.unobservable_reach(A, q, gamma))
        return _pair_list(A, est.stationary_pairs(A, q, gamma))
    if op == "observable_reach":
        return _state_list(A, est.observable_reach(A, A.ids(args["states"]), args["event"]))
    if op == "pair_unobservable_reach":
        return _pair_list(A, est.pair_unobservable_reach(A, A.pair_ids(args["pairs"]), A.admissible(args["decision"])))
    if op == "pair_observable_reach":
        return _pair_list(A, est.pair_observable_reach(A, A.pair_ids(args["pairs"]), args["event"]))
    if op == "info_trace":
        decs = [A.admissible(g) for g in args["decisions"]]
        info = initial_info_state(A, decs[0], simplify=False)
        for sigma, gamma in zip(args["observations"], decs[1:]):
            info = update_info_state(info, sigma, gamma, A, simplify=False)
        return {"current": _state_list(A, info.current), "history": _relation_family(A, info.history),
                "d1": sorted(_state_list(A, q) for q in d1(info))}
    raise SemanticError(f"unknown constraint op {op!r}")


def _op_project(A, args):
    return list(project(args["string"], A))


def _op_run(A, args):
    x = run(A, args["string"])
    return None if x is None else A.states[x]


def _op_delayed_estimate(A, args):
    S = supervisor_from_spec(A, args.get("supervisor", "enable_all"))
    return _state_list(A, oracle_delayed_estimate(A, S, args["prefix"], args["observation"]))


def _op_rev_set(A, args):
    S = supervisor_from_spec(A, args.get("supervisor", "enable_all"))
    return sorted(" ".join(b) for b in oracle_rev_set(A, S, args["prefix"], args["observation"]))


def _op_run_cost(A, args):
    S = supervisor_from_spec(A, args.get("supervisor", "enable_all"))
    return oracle_cost(A, S, CostFunction.linear(args["n_max"]), args["observation"])


def _op_verify(A, args):
    from .estimation import verify_infinite_step_opacity

    return verify_infinite_step_opacity(A).to_json(A)


def _op_bts(A, args):
    from .infostate import d1
    from .synth_qual import build_total_bts, consistency_fixpoint, max_decisions, prune_revealing, revealing_z_states

    T = build_total_bts(A)
    what = args["query"]
    if what == "revealing_d1":
        return sorted(sorted(_state_list(A, q) for q in d1(T.z_info[z][0])) for z in revealing_z_states(T, A))
    Ts = consistency_fixpoint(prune_revealing(T, A))
    if what == "removal_rounds":
        rounds = []
        for r in Ts.removed_rounds:
            rounds.append(sorted(
                [kind, _state_list(A, (T.y_info[i] if kind == "Y" else T.z_info[i][0]).current)]
                for kind, i in r))
        return rounds
    if what == "max_decisions_initial":
        return sorted(sorted(g & A.controllable) for g in max_decisions(Ts, Ts.initial, A))
    if what == "solvable":
        return not Ts.is_empty()
    if what == "node":
        kind, i = T.follow(_path(args["path"]), A)
        info = T.y_info[i] if kind == "Y" else T.z_info[i][0]
        return {"kind": kind, "current": _state_list(A, info.current), "history": _relation_family(A, info.history)}
    raise SemanticError(f"unknown game-graph query {what!r}")


def _op_closed_loop(A, args):
    from .automaton import enumerate_language
    from .supervisor import closed_loop
    from .synth_qual import extract_supervisor, solve

    Ts = solve(A)
    want = frozenset(args["initial_decision"])
    S = extract_supervisor(Ts, A, chooser=lambda opts, _A: next(
        (g for g in opts if g & A.controllable == want), opts[0]))
    lang = closed_loop(A, S, args["max_len"])
    if args["query"] == "first_events":
        return sorted({s[0] for s in lang if s})
    if args["query"] == "matches_plant_without":
        return lang == enumerate_language(A.without_events(args["events"]), args["max_len"])
    raise SemanticError(f"unknown closed-loop query {args['query']!r}")


def _op_abts(A, args):
    from .synth_quant import build_total_abts, value_iteration

    cf = CostFunction.linear(args["n_max"])
    T = build_total_abts(A, cf)
    node = T.follow(_path(args["path"]), A)
    what = args["query"]
    if what == "node":
        info = T.y_info[node[1]] if node[0] == "Y" else T.z_info[node[1]][0]
        return {"kind": node[0], "current": _state_list(A, info.current),
                "history": sorted([_pair_list(A, m), k] for m, k in info.history)}
    if what == "cost":
        if node[0] != "Z":
            raise SemanticError("cost query needs a Z-state path")
        return T.z_cost[node[1]]
    V = value_iteration(T)
    if what == "value":
        v = V[node]
        return None if v == float("inf") else int(v)
    if what == "rounds":
        return [V.history[r][node] for r in args["rounds"]]
    if what == "stable_round":
        return V.stable_round
    raise SemanticError(f"unknown augmented-graph query {what!r}")


def _op_aug_trace(A, args):
    from .synth_quant import aug_initial_info_state, aug_update, rev_entries, state_cost

    cf = CostFunction.linear(args["n_max"])
    decs = [A.admissible(g) for g in args["decisions"]]
    info = aug_initial_info_state(A, decs[0], simplify=False)
    for sigma, gamma in zip(args["observations"], decs[1:]):
        info = aug_update(info, sigma, gamma, A, cf, simplify=False)

    def entries(es):
        return sorted([_pair_list(A, m), k] for m, k in es)

    return {"current": _state_list(A, info.current), "history": entries(info.history),
            "rev": entries(rev_entries(info, A)), "cost": state_cost(info, cf, A)}


def _op_optimal_supervisor(A, args):
    from .synth_quant import synthesize

    _, _, S = synthesize(A, CostFunction.linear(args["n_max"]))
    return [sorted(S.decision_after(tuple(a)) & A.controllable) for a in args["observations"]]


_OPS: dict[str, Callable] = {
    "project": _op_project,
    "run": _op_run,
    "delayed_estimate": _op_delayed_estimate,
    "rev_set": _op_rev_set,
    "run_cost": _op_run_cost,
    "verify": _op_verify,
    "bts": _op_bts,
    "closed_loop": _op_closed_loop,
    "abts": _op_abts,
    "aug_trace": _op_aug_trace,
    "optimal_supervisor": _op_optimal_supervisor,
}
