"""Quantitative synthesis: minimize the worst-case total revelation cost.

Information states are augmented with the age (observations elapsed) of
every delayed relation. A relation whose origins fall inside the secret is
charged once, at the cost of its age, and then forgotten; relations older
than the cost window are forgotten too. The min-max game over these states
is solved by value iteration.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable

from .automaton import Automaton, Decision, Event
from .costs import CostFunction
from .errors import SemanticError, UnsolvableError
from .estimation import (
    observable_reach,
    origins,
    pair_observable_reach,
    pair_unobservable_reach,
    stationary_pairs,
    unobservable_reach,
)
from .game import DEFAULT_MAX_STATES, GameGraph, effective_part, explore
from .infostate import canonical_relation
from .supervisor import Supervisor, supervisor_from_choices
from .synth_qual import Chooser, lex_chooser

INF = math.inf

AgedRelation = tuple  # (frozenset[tuple[int, int]], int)


@dataclass(frozen=True)
class AugInfoState:
    current: frozenset[int]
    history: frozenset[AgedRelation]

    def to_json(self, A: Automaton) -> dict:
        entries = sorted((sorted(m), k) for m, k in self.history)
        return {
            "current": A.names(self.current),
            "history": [{"pairs": [[A.states[a], A.states[b]] for a, b in m], "age": k} for m, k in entries],
        }


def aug_initial_y(A: Automaton) -> AugInfoState:
    return AugInfoState(frozenset({A.initial}), frozenset())


def rev_entries(info: AugInfoState, A: Automaton) -> frozenset[AgedRelation]:
    """Entries whose origin set is a nonempty subset of the secret."""
    out = []
    for m, k in info.history:
        first = origins(m)
        if first and first <= A.secret:
            out.append((m, k))
    return frozenset(out)


def state_cost(info: AugInfoState, cf: CostFunction, A: Automaton) -> int:
    return sum(cf(k) for _, k in rev_entries(info, A))


def aug_apply_decision(info: AugInfoState, gamma: Iterable[Event], A: Automaton, simplify: bool = False) -> AugInfoState:
    gamma = frozenset(gamma)
    current = unobservable_reach(A, info.current, gamma)
    history = {(pair_unobservable_reach(A, m, gamma), k) for m, k in info.history}
    if current and (not simplify or current & A.secret):
        history.add((stationary_pairs(A, current, gamma), 0))
    return AugInfoState(current, frozenset(history))


def aug_apply_observation(info: AugInfoState, sigma: Event, A: Automaton, cf: CostFunction) -> AugInfoState:
    revealed = rev_entries(info, A)
    history = set()
    for m, k in info.history:
        if (m, k) in revealed or k + 1 >= cf.window:
            continue
        m2 = pair_observable_reach(A, m, sigma)
        if m2:
            history.add((m2, k + 1))
    return AugInfoState(observable_reach(A, info.current, sigma), frozenset(history))


def aug_initial_info_state(A: Automaton, gamma0: Iterable[Event], simplify: bool = False) -> AugInfoState:
    return aug_apply_decision(aug_initial_y(A), gamma0, A, simplify)


def aug_update(info: AugInfoState, sigma: Event, gamma: Iterable[Event], A: Automaton,
               cf: CostFunction, simplify: bool = False) -> AugInfoState:
    if sigma not in A.observable:
        raise ValueError(f"event {sigma!r} is not observable")
    return aug_apply_decision(aug_apply_observation(info, sigma, A, cf), gamma, A, simplify)


def drop_harmless(info: AugInfoState, A: Automaton) -> AugInfoState:
    """Canonicalize every entry and forget those that can never be charged.

    Ages are distinct, so canonical entries never collide and each instant is
    still charged separately.
    """
    kept = ((canonical_relation(m, A), k) for m, k in info.history)
    return AugInfoState(info.current, frozenset((m, k) for m, k in kept if m is not None))


def build_total_abts(A: Automaton, cf: CostFunction, simplify: bool = True,
                     max_states: int = DEFAULT_MAX_STATES, reduce: bool = False) -> GameGraph:
    if reduce:
        decide = lambda info, gamma: drop_harmless(aug_apply_decision(info, gamma, A, simplify), A)
        observe = lambda info, sigma: drop_harmless(aug_apply_observation(info, sigma, A, cf), A)
    else:
        decide = lambda info, gamma: aug_apply_decision(info, gamma, A, simplify)
        observe = lambda info, sigma: aug_apply_observation(info, sigma, A, cf)
    T = explore(A, aug_initial_y(A), decide, observe, max_states=max_states,
                cost=lambda info: state_cost(info, cf, A))
    T.simplify = simplify
    T.cost_function = cf
    return T


@dataclass
class ValueTable:
    """Optimal values plus the per-round history of the iteration.

    ``history[r]`` maps every node to its round-``r`` value, capped at
    ``cap``; ``stable_round`` is the first ``r`` with equal rounds ``r`` and
    ``r + 1`` (or the cutoff when no such round occurs).
    """

    values: dict[tuple[str, int], float]
    history: list[dict[tuple[str, int], int]] = field(repr=False)
    stable_round: int
    cutoff: int
    cap: int

    def __getitem__(self, node: tuple[str, int]) -> float:
        return self.values[node]

    def y(self, i: int) -> float:
        return self.values[("Y", i)]

    def z(self, i: int) -> float:
        return self.values[("Z", i)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["state"] + [f"V{r}" for r in range(len(self.history))] + ["V*"])
        for node in sorted(self.values, key=lambda n: (n[0] != "Y", n[1])):
            row = [f"{node[0]}{node[1]}"]
            row += [_fmt(h[node], self.cap) for h in self.history]
            row.append(_fmt(self.values[node], self.cap))
            w.writerow(row)
        return buf.getvalue()


def _fmt(v, cap) -> str:
    return "inf" if v == INF or v >= cap else str(int(v))


def value_iteration(T: GameGraph, bound: int | None = None) -> ValueTable:
    """Jacobi value iteration: Y takes the min, Z the max plus its own cost.

    A Z-state without successors contributes only its own cost. Values are
    capped at ``n * bound``: capping commutes with the update, so the capped
    sequence equals the true one wherever the latter is below the cap and
    stabilizes exactly when the classification into finite and infinite
    values has settled.
    """
    if bound is None:
        bound = T.cost_function.bound if T.cost_function is not None else max(T.z_cost.values(), default=0)
    nodes = T.nodes()
    n = len(nodes)
    cap = max(n * bound, 1)
    cutoff = n * n * bound
    ys = sorted(T.y_info)
    zs = sorted(T.z_info)
    y_succ = {y: list(T.yz[y].values()) for y in ys}
    z_succ = {z: list(T.zy[z].values()) for z in zs}
    for y in ys:
        assert y_succ[y], "Y-state without decisions"
    vy = {y: 0 for y in ys}
    vz = {z: 0 for z in zs}
    history = [_snapshot(vy, vz)]
    stable = None
    for r in range(cutoff):
        ny = {y: min(vz[z] for z in y_succ[y]) for y in ys}
        nz = {z: min(max((vy[y] for y in z_succ[z]), default=0) + T.z_cost.get(z, 0), cap) for z in zs}
        history.append(_snapshot(ny, nz))
        if ny == vy and nz == vz:
            stable = r
            break
        vy, vz = ny, nz
    if stable is None:
        stable = cutoff
    values: dict[tuple[str, int], float] = {}
    for y in ys:
        values[("Y", y)] = vy[y] if vy[y] < cap else INF
    for z in zs:
        values[("Z", z)] = vz[z] if vz[z] < cap else INF
    return ValueTable(values, history, stable, cutoff, cap)


def _snapshot(vy, vz) -> dict:
    out = {("Y", y): v for y, v in vy.items()}
    out.update({("Z", z): v for z, v in vz.items()})
    return out


def optimal_decisions(T: GameGraph, V: ValueTable, y: int, budget: float, A: Automaton) -> list[Decision]:
    """Maximal decisions at ``y`` whose successor value fits in ``budget``."""
    current = T.y_info[y].current
    ok = {g: effective_part(A, current, g) for g, z in T.yz[y].items() if V.z(z) <= budget}
    out = [g for g, e in ok.items() if not any(e < other for other in ok.values())]
    return sorted(out, key=lambda g: (sorted(g & A.controllable), sorted(g)))


def extract_optimal_supervisor(T: GameGraph, V: ValueTable, A: Automaton,
                               chooser: Chooser = lex_chooser) -> Supervisor:
    """Budget-tracking supervisor: memory is (Z-state, remaining budget)."""
    if T.is_empty():
        raise UnsolvableError("empty game graph")
    value = V.y(T.initial)
    if value == INF:
        raise UnsolvableError("no supervisor achieves a finite revelation cost")

    def choose(point):
        y, budget = point
        options = optimal_decisions(T, V, y, budget, A)
        if not options:
            raise AssertionError("budget invariant violated")
        gamma = chooser(options, A)
        if gamma not in options:
            raise SemanticError("chooser returned a decision outside the optimal set")
        z = T.yz[y][gamma]
        left = budget - T.z_cost.get(z, 0)
        assert left >= 0
        return (z, left), gamma

    keys, trans, decisions = supervisor_from_choices(
        (T.initial, value), choose,
        advance=lambda key, sigma: (T.zy[key[0]][sigma], key[1]),
        observations=lambda key: T.feasible[key[0]],
    )
    return Supervisor(tuple(decisions), trans, 0, budgets=tuple(k[1] for k in keys), value=int(value),
                      labels=tuple(f"Z{k[0]}" for k in keys))


def synthesize(A: Automaton, cf: CostFunction, simplify: bool = True, max_states: int = DEFAULT_MAX_STATES,
               chooser: Chooser = lex_chooser, reduce: bool = False) -> tuple[GameGraph, ValueTable, Supervisor | None]:
    T = build_total_abts(A, cf, simplify, max_states, reduce)
    V = value_iteration(T)
    S = None if V.y(T.initial) == INF else extract_optimal_supervisor(T, V, A, chooser)
    return T, V, S


def run_cost(A: Automaton, S, cf: CostFunction, alpha: tuple[Event, ...]) -> int:
    """Revelation cost of one observation sequence, from delayed estimates directly."""
    from .oracle import oracle_cost

    return oracle_cost(A, S, cf, alpha)


def worst_case_cost(A: Automaton, S, cf: CostFunction, depth: int) -> int:
    """Largest ``run_cost`` over closed-loop observation sequences up to ``depth``."""
    from .oracle import oracle_observations

    return max(run_cost(A, S, cf, alpha) for alpha in oracle_observations(A, S, depth))
