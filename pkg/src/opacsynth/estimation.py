"""Reach operators over state sets and origin/current pair relations.

A pair relation is a ``frozenset`` of ``(origin, current)`` tuples: the origin
is where the system was at some earlier instant, the current component where
it may be now.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .automaton import Automaton, Event

PairRelation = frozenset  # frozenset[tuple[int, int]]


def unobservable_reach(A: Automaton, q: Iterable[int], gamma: Iterable[Event]) -> frozenset[int]:
    clo = A.closures(gamma)
    out: set[int] = set()
    for x in q:
        out |= clo[x]
    return frozenset(out)


def observable_reach(A: Automaton, q: Iterable[int], sigma: Event) -> frozenset[int]:
    out = set()
    for x in q:
        y = A.step(x, sigma)
        if y is not None:
            out.add(y)
    return frozenset(out)


def pair_unobservable_reach(A: Automaton, rho: Iterable[tuple[int, int]], gamma: Iterable[Event]) -> PairRelation:
    clo = A.closures(gamma)
    return frozenset((x, y) for x, x2 in rho for y in clo[x2])


def pair_observable_reach(A: Automaton, rho: Iterable[tuple[int, int]], sigma: Event) -> PairRelation:
    out = set()
    for x, x2 in rho:
        y = A.step(x2, sigma)
        if y is not None:
            out.add((x, y))
    return frozenset(out)


def stationary_pairs(A: Automaton, q: Iterable[int], gamma: Iterable[Event]) -> PairRelation:
    clo = A.closures(gamma)
    return frozenset((x, y) for x in q for y in clo[x])


def origins(rho: Iterable[tuple[int, int]]) -> frozenset[int]:
    return frozenset(x for x, _ in rho)


def currents(rho: Iterable[tuple[int, int]]) -> frozenset[int]:
    return frozenset(y for _, y in rho)


def delayed_estimates(A: Automaton, alpha: Sequence[Event],
                      decisions: Sequence[Iterable[Event]] | None = None) -> list[frozenset[int]]:
    """Delayed estimates of every prefix of ``alpha`` given all of ``alpha``.

    ``decisions[i]`` is the decision in force after the i-th observation
    (``len(alpha) + 1`` entries); ``None`` means everything enabled. Entry
    ``j`` of the result is the estimate for the instant ``alpha[:j]``.
    """
    if decisions is None:
        decisions = [A.events] * (len(alpha) + 1)
    if len(decisions) != len(alpha) + 1:
        raise ValueError("need one decision per prefix of alpha")
    current = unobservable_reach(A, {A.initial}, decisions[0])
    relations = [stationary_pairs(A, current, decisions[0])]
    for i, sigma in enumerate(alpha, 1):
        gamma = decisions[i]
        current = unobservable_reach(A, observable_reach(A, current, sigma), gamma)
        relations = [pair_unobservable_reach(A, pair_observable_reach(A, r, sigma), gamma) for r in relations]
        relations.append(stationary_pairs(A, current, gamma))
    return [origins(r) for r in relations]


@dataclass(frozen=True)
class Witness:
    alpha_prime: tuple[Event, ...]
    alpha_beta: tuple[Event, ...]
    estimate: frozenset[int]


@dataclass(frozen=True)
class OpacityVerdict:
    opaque: bool
    witness: Witness | None = None
    explored: int = 0

    def to_json(self, A: Automaton) -> dict:
        if self.witness is None:
            return {"opaque": self.opaque, "witness": None}
        w = self.witness
        return {
            "opaque": self.opaque,
            "witness": {
                "alpha_prime": list(w.alpha_prime),
                "alpha_beta": list(w.alpha_beta),
                "estimate": A.names(w.estimate),
            },
        }


def verify_infinite_step_opacity(A: Automaton, simplify: bool = True) -> OpacityVerdict:
    """Decide infinite-step opacity of the open-loop plant.

    Explores the information states reachable with every event enabled, in
    breadth-first order over observations, and stops at the first one holding
    a delayed estimate inside the secret set.
    """
    from .infostate import initial_info_state, is_revealing, update_info_state

    gamma = frozenset(A.events)
    observable = sorted(A.observable)
    start = initial_info_state(A, gamma, simplify=simplify)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        info = queue.popleft()
        if is_revealing(info, A):
            alpha = _trace(parent, info)
            return OpacityVerdict(False, _witness(A, alpha), len(parent))
        for sigma in observable:
            if not observable_reach(A, info.current, sigma):
                continue
            nxt = update_info_state(info, sigma, gamma, A, simplify=simplify)
            if nxt not in parent:
                parent[nxt] = (info, sigma)
                queue.append(nxt)
    return OpacityVerdict(True, None, len(parent))


def _trace(parent, info) -> tuple[Event, ...]:
    out = []
    while parent[info] is not None:
        info, sigma = parent[info]
        out.append(sigma)
    return tuple(reversed(out))


def _witness(A: Automaton, alpha: tuple[Event, ...]) -> Witness:
    for j, est in enumerate(delayed_estimates(A, alpha)):
        if est and est <= A.secret:
            return Witness(alpha[:j], alpha, est)
    raise AssertionError("revealing information state without a revealing prefix")
