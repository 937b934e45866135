"""Finite-memory supervisors and their closed loops with a plant.

Anything exposing ``initial_memory``, ``decision(memory)`` and
``step(memory, event)`` can drive a closed loop; :class:`Supervisor` is the
transducer produced by synthesis, the oracle module provides a tabulated one.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Protocol, Sequence

from .automaton import Automaton, Decision, Event, _quote
from .errors import ResourceLimitError, SemanticError


class Controller(Protocol):
    @property
    def initial_memory(self) -> Hashable: ...

    def decision(self, memory: Hashable) -> Decision: ...

    def step(self, memory: Hashable, event: Event) -> Hashable | None: ...


@dataclass(frozen=True)
class Supervisor:
    """Transducer: memory ``m`` issues ``decisions[m]``; observations move memory."""

    decisions: tuple[Decision, ...]
    transitions: Mapping[tuple[int, Event], int]
    initial: int = 0
    budgets: tuple[int, ...] | None = None
    value: int | None = None
    labels: tuple[str, ...] = field(default=(), compare=False)

    @property
    def initial_memory(self) -> int:
        return self.initial

    @property
    def size(self) -> int:
        return len(self.decisions)

    def decision(self, memory: int) -> Decision:
        return self.decisions[memory]

    def step(self, memory: int, event: Event) -> int | None:
        return self.transitions.get((memory, event))

    def memory_after(self, alpha: Sequence[Event]) -> int | None:
        m = self.initial
        for sigma in alpha:
            m = self.step(m, sigma)
            if m is None:
                return None
        return m

    def decision_after(self, alpha: Sequence[Event]) -> Decision | None:
        m = self.memory_after(alpha)
        return None if m is None else self.decisions[m]

    def to_json(self) -> dict:
        states = []
        for i, d in enumerate(self.decisions):
            rec = {"id": i, "decision": sorted(d)}
            if self.budgets is not None:
                rec["budget"] = self.budgets[i]
            states.append(rec)
        out = {
            "memory_states": states,
            "initial": self.initial,
            "transitions": [{"from": m, "event": e, "to": t}
                            for (m, e), t in sorted(self.transitions.items())],
        }
        if self.value is not None:
            out["value"] = self.value
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: Mapping) -> "Supervisor":
        try:
            states = sorted(data["memory_states"], key=lambda r: r["id"])
            if [r["id"] for r in states] != list(range(len(states))):
                raise SemanticError("memory state ids must be 0..n-1")
            decisions = tuple(frozenset(r["decision"]) for r in states)
            budgets = tuple(r["budget"] for r in states) if states and all("budget" in r for r in states) else None
            trans = {(t["from"], t["event"]): t["to"] for t in data["transitions"]}
            initial = data["initial"]
        except (KeyError, TypeError) as exc:
            raise SemanticError(f"malformed supervisor document: {exc}") from None
        n = len(decisions)
        if not 0 <= initial < n or any(not (0 <= a < n and 0 <= b < n) for (a, _), b in trans.items()):
            raise SemanticError("supervisor references an unknown memory state")
        return cls(decisions, trans, initial, budgets, data.get("value"))

    def to_dot(self, A: Automaton | None = None, name: str = "S") -> str:
        """Two-row picture: decision boxes joined by observation edges."""
        ctrl = A.controllable if A is not None else None
        lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;", "  node [shape=box];",
                 '  __start [shape=point, label=""];']
        for i, d in enumerate(self.decisions):
            shown = sorted(d & ctrl) if ctrl is not None else sorted(d)
            label = "{" + ",".join(shown) + "}"
            if self.budgets is not None:
                label += f"\\nbudget={self.budgets[i]}"
            lines.append(f"  m{i} [label={_quote(label)}];")
        lines.append(f"  __start -> m{self.initial};")
        for (m, e), t in sorted(self.transitions.items()):
            lines.append(f"  m{m} -> m{t} [label={_quote(e)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _move(S: Controller, A: Automaton, memory, event: Event):
    if event not in A.observable:
        return memory
    nxt = S.step(memory, event)
    if nxt is None:
        raise SemanticError(f"supervisor has no move on observed event {event!r}")
    return nxt


def closed_loop(A: Automaton, S: Controller, max_len: int, cap: int = 10**6) -> set[tuple[Event, ...]]:
    """Strings of the controlled plant up to ``max_len`` events."""
    out = {()}
    frontier = deque([((), A.initial, S.initial_memory)])
    while frontier:
        s, x, m = frontier.popleft()
        if len(s) == max_len:
            continue
        allowed = S.decision(m)
        for e, y in sorted(A.enabled_at(x).items()):
            if e not in allowed:
                continue
            t = s + (e,)
            out.add(t)
            if len(out) > cap:
                raise ResourceLimitError(f"closed-loop enumeration exceeded {cap} strings")
            frontier.append((t, y, _move(S, A, m, e)))
    return out


def closed_loop_automaton(A: Automaton, S: Controller, max_states: int = 200_000) -> Automaton:
    """Product of plant and supervisor memory; secret where the plant state is.

    Observations determine the memory, so estimates of the product projected
    to plant states are exactly the closed-loop estimates.
    """
    start = (A.initial, S.initial_memory)
    index = {start: 0}
    order = [start]
    delta: dict[tuple[int, Event], int] = {}
    todo = deque([start])
    while todo:
        node = todo.popleft()
        x, m = node
        allowed = S.decision(m)
        for e, y in sorted(A.enabled_at(x).items()):
            if e not in allowed:
                continue
            nxt = (y, _move(S, A, m, e))
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(order)
                order.append(nxt)
                if len(order) > max_states:
                    raise ResourceLimitError(f"closed loop exceeded {max_states} states")
                todo.append(nxt)
            delta[(index[node], e)] = j
    names = tuple(f"{A.states[x]}|{i}" for i, (x, _) in enumerate(order))
    secret = frozenset(i for i, (x, _) in enumerate(order) if x in A.secret)
    return Automaton(names, A.events, A.observable, A.controllable, delta, 0, secret)


def is_opacity_enforcing(A: Automaton, S: Controller) -> bool:
    from .estimation import verify_infinite_step_opacity

    return verify_infinite_step_opacity(closed_loop_automaton(A, S)).opaque


def supervisor_from_choices(start: Hashable, choose, advance, observations) -> tuple[list, dict, list]:
    """Generic transducer construction shared by both synthesis engines.

    ``choose(node)`` maps a decision point to ``(memory_key, decision)``;
    ``observations(memory_key)`` lists the observations to follow and
    ``advance(memory_key, sigma)`` the next decision point. Returns the
    memory keys, the transition map and the decisions, in discovery order.
    """
    key, gamma = choose(start)
    keys = [key]
    decisions = [gamma]
    index = {key: 0}
    trans: dict[tuple[int, Event], int] = {}
    todo = deque([key])
    while todo:
        k = todo.popleft()
        for sigma in observations(k):
            k2, g2 = choose(advance(k, sigma))
            j = index.get(k2)
            if j is None:
                j = index[k2] = len(keys)
                keys.append(k2)
                decisions.append(g2)
                todo.append(k2)
            trans[(index[k], sigma)] = j
    return keys, trans, decisions


def load_supervisor(path) -> Supervisor:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SemanticError(f"supervisor file is not JSON: {exc}") from None
    # accept the documents written by the synthesis commands as well as bare supervisors
    if isinstance(data, dict) and isinstance(data.get("supervisor"), dict):
        data = data["supervisor"]
    return Supervisor.from_json(data)


def normalize_decisions(A: Automaton, decisions: Iterable[Iterable[Event]]) -> list[Decision]:
    return [A.admissible(g) for g in decisions]
