"""Qualitative synthesis: the safety game over information states.

Pipeline: build the total game graph, drop Z-states whose delayed estimates
reveal the secret, then remove inconsistent states until nothing changes.
Any supervisor that stays inside the surviving graph enforces infinite-step
opacity; picking a maximal decision everywhere makes it maximally permissive.
"""
from __future__ import annotations

from typing import Callable, Sequence

from .automaton import Automaton, Decision
from .errors import ResourceLimitError, SemanticError, UnsolvableError
from .game import DEFAULT_MAX_STATES, GameGraph, effective_part, explore
from .infostate import apply_decision, apply_observation, initial_y, is_revealing, reduce_history
from .supervisor import Supervisor, closed_loop, supervisor_from_choices

__all__ = [
    "build_total_bts", "revealing_z_states", "prune_revealing", "consistency_fixpoint", "solve",
    "max_decisions", "lex_chooser", "extract_supervisor", "enumerate_supervisors",
    "closed_loop",
]

Chooser = Callable[[Sequence[Decision], Automaton], Decision]


def build_total_bts(A: Automaton, simplify: bool = True, max_states: int = DEFAULT_MAX_STATES,
                    reduce: bool = False) -> GameGraph:
    """All-feasible game graph from ``({x0}, {})``.

    ``reduce`` quotients information states by :func:`reduce_history`; the
    resulting graph is smaller but solves the same game.
    """
    if reduce:
        decide = lambda info, gamma: reduce_history(apply_decision(info, gamma, A, simplify), A)
        observe = lambda info, sigma: reduce_history(apply_observation(info, sigma, A), A)
    else:
        decide = lambda info, gamma: apply_decision(info, gamma, A, simplify)
        observe = lambda info, sigma: apply_observation(info, sigma, A)
    T = explore(A, initial_y(A), decide, observe, max_states=max_states)
    T.simplify = simplify
    return T


def revealing_z_states(T: GameGraph, A: Automaton) -> set[int]:
    return {z for z, (info, _) in T.z_info.items() if is_revealing(info, A)}


def prune_revealing(T: GameGraph, A: Automaton) -> GameGraph:
    bad = revealing_z_states(T, A)
    if not bad:
        return T
    return T.restrict(T.y_info, set(T.z_info) - bad)


def consistency_fixpoint(T: GameGraph) -> GameGraph:
    """Largest consistent subgraph, restricted to what the initial Y-state reaches.

    A Y-state needs one surviving decision; a Z-state needs every feasible
    observation to land on a surviving Y-state. The nodes removed in each
    round are kept in ``removed_rounds`` of the result.
    """
    alive_y, alive_z = set(T.y_info), set(T.z_info)
    pred_z: dict[int, set[int]] = {z: set() for z in alive_z}
    pred_y: dict[int, set[int]] = {y: set() for y in alive_y}
    for y, edges in T.yz.items():
        for z in edges.values():
            pred_z[z].add(y)
    for z, edges in T.zy.items():
        for y in edges.values():
            pred_y[y].add(z)

    def bad_y(y: int) -> bool:
        return not any(z in alive_z for z in T.yz[y].values())

    def bad_z(z: int) -> bool:
        edges = T.zy[z]
        return any(edges.get(s) not in alive_y for s in T.feasible[z])

    rounds = []
    cand_y, cand_z = set(alive_y), set(alive_z)
    while True:
        dead_y = {y for y in cand_y if y in alive_y and bad_y(y)}
        dead_z = {z for z in cand_z if z in alive_z and bad_z(z)}
        if not dead_y and not dead_z:
            break
        rounds.append(frozenset({("Y", y) for y in dead_y} | {("Z", z) for z in dead_z}))
        alive_y -= dead_y
        alive_z -= dead_z
        cand_y = {y for z in dead_z for y in pred_z[z]}
        cand_z = {z for y in dead_y for z in pred_y[y]}
    out = T.restrict(alive_y, alive_z).reachable()
    out.removed_rounds = tuple(rounds)
    return out


def solve(A: Automaton, simplify: bool = True, max_states: int = DEFAULT_MAX_STATES,
          reduce: bool = False) -> GameGraph:
    """The supervisor-safe game graph (empty when no supervisor exists)."""
    return consistency_fixpoint(prune_revealing(build_total_bts(A, simplify, max_states, reduce), A))


def max_decisions(T: GameGraph, y: int, A: Automaton) -> list[Decision]:
    """Decisions defined at ``y`` whose effective part is maximal under inclusion.

    Each class is reported by its representative, which also lists the
    uncontrollable events and any controllable event that cannot fire.
    """
    if y not in T.y_info:
        raise SemanticError(f"unknown Y-state {y}")
    current = T.y_info[y].current
    effs = {gamma: effective_part(A, current, gamma) for gamma in T.yz[y]}
    out = [g for g, e in effs.items() if not any(e < other for other in effs.values())]
    return sorted(out, key=lambda g: (sorted(g & A.controllable), sorted(g)))


def lex_chooser(options: Sequence[Decision], A: Automaton) -> Decision:
    """Lexicographically least controllable part; deterministic tie-break."""
    return min(options, key=lambda g: (sorted(g & A.controllable), sorted(g)))


def _extract(T: GameGraph, A: Automaton, pick: Callable[[int], Decision]) -> Supervisor:
    if T.is_empty():
        raise UnsolvableError("no supervisor enforces infinite-step opacity")

    def choose(y: int):
        gamma = pick(y)
        return T.yz[y][gamma], gamma

    keys, trans, decisions = supervisor_from_choices(
        T.initial, choose,
        advance=lambda z, sigma: T.zy[z][sigma],
        observations=lambda z: T.feasible[z],
    )
    return Supervisor(tuple(decisions), trans, 0, labels=tuple(f"Z{z}" for z in keys))


def extract_supervisor(T: GameGraph, A: Automaton, chooser: Chooser = lex_chooser) -> Supervisor:
    """Run the maximal-decision policy over the graph and record it as a transducer."""
    def pick(y: int) -> Decision:
        options = max_decisions(T, y, A)
        gamma = chooser(options, A)
        if gamma not in options:
            raise SemanticError("chooser returned a decision that is not maximal")
        return gamma

    return _extract(T, A, pick)


def enumerate_supervisors(T: GameGraph, A: Automaton, limit: int = 64) -> list[Supervisor]:
    """Every supervisor obtained by some choice of maximal decision at each Y-state.

    Raises when more than ``limit`` distinct supervisors exist.
    """
    if T.is_empty():
        raise UnsolvableError("no supervisor enforces infinite-step opacity")
    results: list[Supervisor] = []

    def first_open(assign: dict[int, Decision]) -> int | None:
        seen = {T.initial}
        order = [T.initial]
        for y in order:
            if y not in assign:
                return y
            z = T.yz[y][assign[y]]
            for sigma in T.feasible[z]:
                y2 = T.zy[z][sigma]
                if y2 not in seen:
                    seen.add(y2)
                    order.append(y2)
        return None

    def extend(assign: dict[int, Decision]) -> None:
        y = first_open(assign)
        if y is None:
            if len(results) >= limit:
                raise ResourceLimitError(f"more than {limit} maximal supervisors")
            results.append(_extract(T, A, assign.__getitem__))
            return
        for gamma in max_decisions(T, y, A):
            extend({**assign, y: gamma})

    extend({})
    return results
