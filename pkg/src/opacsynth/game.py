"""Bipartite game graphs shared by the qualitative and quantitative engines.

Y-states are where the supervisor picks a decision; Z-states remember the
decision and let the environment pick an observation. Node ids are dense
integers in breadth-first discovery order, Y and Z ids being separate
namespaces.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Hashable, Iterable, Sequence

from .automaton import Automaton, Decision, Event
from .errors import ResourceLimitError, SemanticError
from .estimation import observable_reach, unobservable_reach

DEFAULT_MAX_STATES = 200_000


def effective_part(A: Automaton, current: Iterable[int], gamma: Decision) -> Decision:
    """Events of ``gamma`` that can actually fire somewhere in its unobservable closure."""
    reach = unobservable_reach(A, current, gamma)
    feasible = set()
    for x in reach:
        feasible.update(A.enabled_at(x))
    return frozenset(gamma) & feasible


def decision_classes(A: Automaton, current: frozenset[int]) -> list[tuple[Decision, Decision]]:
    """Admissible decisions at ``current`` up to equivalence.

    Returns ``(representative, effective_part)`` pairs. The representative of
    a class is its largest member: the effective part, the uncontrollable
    events, and every controllable event that cannot fire anyway.
    """
    out: dict[Decision, Decision] = {}
    for gamma in A.all_decisions():
        eff = effective_part(A, current, gamma)
        if eff in out:
            continue
        reach = unobservable_reach(A, current, gamma)
        fireable = set()
        for x in reach:
            fireable.update(A.enabled_at(x))
        idle = frozenset(e for e in A.controllable if e not in fireable)
        out[eff] = eff | A.uncontrollable | idle
    return sorted(((rep, eff) for eff, rep in out.items()), key=lambda p: decision_key(p[0]))


def decision_key(gamma: Decision) -> tuple:
    return (len(gamma), tuple(sorted(gamma)))


@dataclass
class GameGraph:
    y_info: dict[int, Any]
    z_info: dict[int, tuple[Any, Decision]]
    yz: dict[int, dict[Decision, int]]
    zy: dict[int, dict[Event, int]]
    feasible: dict[int, tuple[Event, ...]]
    initial: int = 0
    z_cost: dict[int, int] = field(default_factory=dict)
    cost_function: Any = None
    simplify: bool = True
    removed_rounds: tuple = ()

    @property
    def size(self) -> int:
        return len(self.y_info) + len(self.z_info)

    def is_empty(self) -> bool:
        return self.initial not in self.y_info

    def nodes(self) -> list[tuple[str, int]]:
        return [("Y", y) for y in sorted(self.y_info)] + [("Z", z) for z in sorted(self.z_info)]

    def successors(self, node: tuple[str, int]) -> list[tuple[str, int]]:
        kind, i = node
        if kind == "Y":
            return [("Z", z) for z in self.yz.get(i, {}).values()]
        return [("Y", y) for y in self.zy.get(i, {}).values()]

    def restrict(self, ys: Iterable[int], zs: Iterable[int]) -> "GameGraph":
        ys, zs = set(ys), set(zs)
        yz = {y: {g: z for g, z in self.yz[y].items() if z in zs} for y in ys}
        zy = {z: {s: y for s, y in self.zy[z].items() if y in ys} for z in zs}
        return replace(
            self,
            y_info={y: self.y_info[y] for y in ys},
            z_info={z: self.z_info[z] for z in zs},
            yz=yz, zy=zy,
            feasible={z: self.feasible[z] for z in zs},
            z_cost={z: c for z, c in self.z_cost.items() if z in zs},
        )

    def reachable(self) -> "GameGraph":
        if self.is_empty():
            return self.restrict((), ())
        ys, zs = {self.initial}, set()
        todo = deque([self.initial])
        while todo:
            y = todo.popleft()
            for z in self.yz[y].values():
                if z in zs:
                    continue
                zs.add(z)
                for y2 in self.zy[z].values():
                    if y2 not in ys:
                        ys.add(y2)
                        todo.append(y2)
        return self.restrict(ys, zs)

    def follow(self, path: Sequence, A: Automaton) -> tuple[str, int]:
        """Walk ``[decision, observation, decision, ...]`` from the initial Y-state.

        Decisions are given by their controllable part and matched against the
        class representatives (or effective parts) on the graph's edges.
        """
        node = ("Y", self.initial)
        if self.is_empty():
            raise SemanticError("empty game graph")
        for step in path:
            kind, i = node
            if kind == "Y":
                want = frozenset(step) & A.controllable
                current = _current(self.y_info[i])
                match = None
                for gamma, z in self.yz[i].items():
                    eff = effective_part(A, current, gamma)
                    if gamma & A.controllable == want or eff & A.controllable == want:
                        match = z
                        break
                if match is None:
                    raise SemanticError(f"no decision {sorted(want)} at Y{i}")
                node = ("Z", match)
            else:
                if step not in self.zy[i]:
                    raise SemanticError(f"no observation {step!r} at Z{i}")
                node = ("Y", self.zy[i][step])
        return node


def _current(info) -> frozenset[int]:
    return info.current


def explore(A: Automaton, start: Hashable, decide: Callable, observe: Callable,
            max_states: int = DEFAULT_MAX_STATES, cost: Callable | None = None) -> GameGraph:
    """Breadth-first construction of the all-feasible game graph.

    ``decide(info, gamma)`` gives the Z payload, ``observe(info, sigma)`` the
    next Y payload. Every decision class is expanded at every Y-state and
    every observation that some current state can fire at every Z-state.
    """
    y_ids: dict = {start: 0}
    z_ids: dict = {}
    y_info, z_info = {0: start}, {}
    yz: dict[int, dict] = {}
    zy: dict[int, dict] = {}
    feasible: dict[int, tuple] = {}
    z_cost: dict[int, int] = {}
    classes_cache: dict = {}
    observable = sorted(A.observable)
    todo = deque([0])

    def check_cap():
        if len(y_ids) + len(z_ids) > max_states:
            raise ResourceLimitError(f"game graph exceeded {max_states} states")

    while todo:
        y = todo.popleft()
        info = y_info[y]
        classes = classes_cache.get(info.current)
        if classes is None:
            classes = classes_cache[info.current] = decision_classes(A, info.current)
        yz[y] = {}
        for rep, _eff in classes:
            zinfo = decide(info, rep)
            key = (zinfo, rep)
            z = z_ids.get(key)
            if z is None:
                z = z_ids[key] = len(z_ids)
                z_info[z] = key
                check_cap()
                if cost is not None:
                    z_cost[z] = cost(zinfo)
                zy[z] = {}
                obs = tuple(s for s in observable if s in rep and observable_reach(A, zinfo.current, s))
                feasible[z] = obs
                for sigma in obs:
                    yinfo = observe(zinfo, sigma)
                    y2 = y_ids.get(yinfo)
                    if y2 is None:
                        y2 = y_ids[yinfo] = len(y_ids)
                        y_info[y2] = yinfo
                        check_cap()
                        todo.append(y2)
                    zy[z][sigma] = y2
            yz[y][rep] = z
    return GameGraph(y_info, z_info, yz, zy, feasible, 0, z_cost)
