"""Information states: a current estimate plus the delayed pair relations of
every earlier instant.

Empty relations are never stored. An observation can leave a relation empty
only when no run is consistent with it, and keeping it would make the
revelation test vacuously true.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .automaton import Automaton, Event
from .estimation import (
    currents,
    observable_reach,
    origins,
    pair_observable_reach,
    pair_unobservable_reach,
    stationary_pairs,
    unobservable_reach,
)


@dataclass(frozen=True)
class InfoState:
    current: frozenset[int]
    history: frozenset[frozenset[tuple[int, int]]]

    def to_json(self, A: Automaton) -> dict:
        rels = sorted(sorted(r) for r in self.history)
        return {
            "current": A.names(self.current),
            "history": [[[A.states[a], A.states[b]] for a, b in r] for r in rels],
        }


def initial_y(A: Automaton) -> InfoState:
    """The information state before any decision: only the initial state, no history."""
    return InfoState(frozenset({A.initial}), frozenset())


def apply_decision(info: InfoState, gamma: Iterable[Event], A: Automaton, simplify: bool = False) -> InfoState:
    """Unobservable half of the update: issue ``gamma`` and close under it."""
    gamma = frozenset(gamma)
    current = unobservable_reach(A, info.current, gamma)
    history = {pair_unobservable_reach(A, r, gamma) for r in info.history}
    if current and (not simplify or current & A.secret):
        history.add(stationary_pairs(A, current, gamma))
    return InfoState(current, frozenset(history))


def apply_observation(info: InfoState, sigma: Event, A: Automaton) -> InfoState:
    """Observable half of the update: move every estimate along ``sigma``."""
    history = (pair_observable_reach(A, r, sigma) for r in info.history)
    return InfoState(observable_reach(A, info.current, sigma), frozenset(r for r in history if r))


def initial_info_state(A: Automaton, gamma0: Iterable[Event], simplify: bool = False) -> InfoState:
    return apply_decision(initial_y(A), gamma0, A, simplify)


def update_info_state(info: InfoState, sigma: Event, gamma: Iterable[Event], A: Automaton,
                      simplify: bool = False) -> InfoState:
    if sigma not in A.observable:
        raise ValueError(f"event {sigma!r} is not observable")
    return apply_decision(apply_observation(info, sigma, A), gamma, A, simplify)


def canonical_relation(rel: frozenset[tuple[int, int]], A: Automaton) -> frozenset[tuple[int, int]] | None:
    """Smallest stand-in for ``rel`` with the same future revelations.

    All relations share the current estimate as their current components, so
    whether ``rel`` ever reveals depends only on which currents are reached
    from non-secret origins. The stand-in pairs those currents with the least
    non-secret state and the rest with the least secret state. ``None`` means
    the relation can never reveal.
    """
    cur = currents(rel)
    clear = frozenset(c for x, c in rel if x not in A.secret)
    if clear == cur:
        return None
    public = min(set(range(A.n)) - A.secret, default=None)
    hidden = min(A.secret)
    return frozenset({(public, c) for c in clear} | {(hidden, c) for c in cur - clear})


def reduce_history(info: InfoState, A: Automaton) -> InfoState:
    """Quotient an information state by future revelation behavior.

    Relations are replaced by :func:`canonical_relation`; those that can never
    reveal are dropped, as is any relation whose non-secret currents strictly
    contain another's (it can only reveal after the smaller one has). Used
    only to shrink game graphs; origins of the stand-ins are not meaningful.
    """
    keep = {c for c in (canonical_relation(r, A) for r in info.history) if c is not None}
    clear = {r: frozenset(c for x, c in r if x not in A.secret) for r in keep}
    keep = [r for r in keep if not any(clear[o] < clear[r] for o in keep)]
    return InfoState(info.current, frozenset(keep))


def d1(info: InfoState) -> frozenset[frozenset[int]]:
    """Origin projections of the stored relations: the delayed estimates."""
    return frozenset(origins(r) for r in info.history)


def is_revealing(info: InfoState, A: Automaton) -> bool:
    return any(q and q <= A.secret for q in d1(info))
