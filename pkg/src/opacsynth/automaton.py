"""Deterministic finite automata with observation/control partitions.

States carry arbitrary string names but are interned to dense integers
(their declaration order); every set-valued operation in the package works
on ``frozenset[int]``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, ResourceLimitError, SemanticError

Event = str
StateSet = frozenset  # frozenset[int]
Decision = frozenset  # frozenset[str]

DEFAULT_LANGUAGE_CAP = 10**6

_KEYS = ("states", "initial", "secret", "observable", "controllable", "transitions")


@dataclass(frozen=True, eq=False)
class Automaton:
    states: tuple[str, ...]
    events: tuple[Event, ...]
    observable: frozenset[Event]
    controllable: frozenset[Event]
    delta: Mapping[tuple[int, Event], int]
    initial: int
    secret: frozenset[int]
    _index: dict = field(init=False, repr=False)
    _succ: tuple = field(init=False, repr=False)
    _closures: dict = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.states)
        if len(set(self.states)) != n:
            raise SemanticError("duplicate state name")
        ev = set(self.events)
        if not self.observable <= ev:
            raise SemanticError(f"unknown observable event {sorted(self.observable - ev)[0]!r}")
        if not self.controllable <= ev:
            raise SemanticError(f"unknown controllable event {sorted(self.controllable - ev)[0]!r}")
        if not 0 <= self.initial < n:
            raise SemanticError("initial state out of range")
        if any(not 0 <= x < n for x in self.secret):
            raise SemanticError("secret state out of range")
        succ = [dict() for _ in range(n)]
        for (x, e), y in self.delta.items():
            if not (0 <= x < n and 0 <= y < n):
                raise SemanticError(f"transition endpoint out of range: {(x, e, y)}")
            if e not in ev:
                raise SemanticError(f"unknown event {e!r}")
            succ[x][e] = y
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})
        object.__setattr__(self, "_succ", tuple(succ))
        object.__setattr__(self, "_closures", {})

    @classmethod
    def build(cls, states: Sequence[str], initial: str, transitions: Iterable[tuple[str, str, str]],
              observable: Iterable[str] = (), controllable: Iterable[str] = (),
              secret: Iterable[str] = (), events: Iterable[str] = ()) -> "Automaton":
        """Build from state names; rejects nondeterminism and unknown names."""
        states = tuple(str(s) for s in states)
        index = {}
        for i, s in enumerate(states):
            if s in index:
                raise SemanticError(f"duplicate state {s!r}")
            index[s] = i

        def lookup(name):
            try:
                return index[str(name)]
            except KeyError:
                raise SemanticError(f"unknown state {name!r}") from None

        observable = frozenset(observable)
        controllable = frozenset(controllable)
        evs = set(events) | observable | controllable
        delta: dict[tuple[int, str], int] = {}
        for src, e, dst in transitions:
            key = (lookup(src), str(e))
            target = lookup(dst)
            if key in delta and delta[key] != target:
                raise SemanticError(f"nondeterministic transitions on event {e!r} from state {src!r}")
            delta[key] = target
            evs.add(str(e))
        if str(initial) not in index:
            raise SemanticError(f"unknown state {initial!r}")
        return cls(states=states, events=tuple(sorted(evs)), observable=observable,
                   controllable=controllable, delta=delta, initial=index[str(initial)],
                   secret=frozenset(lookup(s) for s in secret))

    # -- naming helpers ----------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def unobservable(self) -> frozenset[Event]:
        return frozenset(self.events) - self.observable

    @property
    def uncontrollable(self) -> frozenset[Event]:
        return frozenset(self.events) - self.controllable

    def index(self, name) -> int:
        try:
            return self._index[str(name)]
        except KeyError:
            raise SemanticError(f"unknown state {name!r}") from None

    def ids(self, names: Iterable) -> frozenset[int]:
        """State names to an interned state set."""
        return frozenset(self.index(s) for s in names)

    def pair_ids(self, pairs: Iterable[tuple]) -> frozenset[tuple[int, int]]:
        return frozenset((self.index(a), self.index(b)) for a, b in pairs)

    def names(self, q: Iterable[int]) -> list[str]:
        return [self.states[x] for x in sorted(q)]

    def pair_names(self, rho: Iterable[tuple[int, int]]) -> list[list[str]]:
        return [[self.states[a], self.states[b]] for a, b in sorted(rho)]

    # -- dynamics ----------------------------------------------------------
    def step(self, x: int, e: Event) -> int | None:
        return self._succ[x].get(e)

    def enabled_at(self, x: int) -> dict[Event, int]:
        return self._succ[x]

    def admissible(self, gamma: Iterable[Event]) -> Decision:
        """Normalize a set of enabled events into an admissible decision."""
        gamma = frozenset(gamma)
        unknown = gamma - set(self.events)
        if unknown:
            raise SemanticError(f"unknown event {sorted(unknown)[0]!r}")
        return gamma | self.uncontrollable

    def all_decisions(self) -> list[Decision]:
        """Every admissible decision, in a fixed order (by controllable subset)."""
        ctrl = sorted(self.controllable)
        out = []
        for mask in range(1 << len(ctrl)):
            chosen = {c for i, c in enumerate(ctrl) if mask >> i & 1}
            out.append(frozenset(chosen) | self.uncontrollable)
        return sorted(out, key=lambda g: (len(g), sorted(g)))

    def closures(self, gamma: Iterable[Event]) -> tuple[frozenset[int], ...]:
        """Per-state reach sets under the unobservable events enabled by ``gamma``."""
        key = frozenset(gamma) & self.unobservable
        cached = self._closures.get(key)
        if cached is not None:
            return cached
        enabled = sorted(key)
        out = []
        for x in range(self.n):
            seen = {x}
            todo = [x]
            while todo:
                u = todo.pop()
                for e in enabled:
                    v = self._succ[u].get(e)
                    if v is not None and v not in seen:
                        seen.add(v)
                        todo.append(v)
            out.append(frozenset(seen))
        result = tuple(out)
        self._closures[key] = result
        return result

    # -- serialization -----------------------------------------------------
    def transitions(self) -> list[tuple[str, str, str]]:
        rows = [(self.states[x], e, self.states[y]) for (x, e), y in self.delta.items()]
        return sorted(rows, key=lambda r: (self.index(r[0]), r[1]))

    def to_dict(self) -> dict:
        return {
            "states": list(self.states),
            "initial": self.states[self.initial],
            "secret": self.names(self.secret),
            "observable": sorted(self.observable),
            "controllable": sorted(self.controllable),
            "transitions": [list(t) for t in self.transitions()],
        }

    def to_text(self) -> str:
        d = self.to_dict()
        lines = [f"{k}: {' '.join(d[k]) if isinstance(d[k], list) else d[k]}" for k in _KEYS[:-1]]
        lines.append("transitions:")
        lines += [" ".join(t) for t in d["transitions"]]
        return "\n".join(lines) + "\n"

    def without_events(self, events: Iterable[Event]) -> "Automaton":
        """Copy with every transition labeled by ``events`` deleted."""
        drop = set(events)
        delta = {k: v for k, v in self.delta.items() if k[1] not in drop}
        return Automaton(self.states, self.events, self.observable, self.controllable,
                         delta, self.initial, self.secret)

    def without_transition(self, src: str, event: Event) -> "Automaton":
        delta = dict(self.delta)
        del delta[(self.index(src), event)]
        return Automaton(self.states, self.events, self.observable, self.controllable,
                         delta, self.initial, self.secret)


# -- text / JSON format ------------------------------------------------------

def parse_automaton(text: str) -> Automaton:
    """Parse the line-based format (or its JSON mirror)."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc.msg), exc.lineno) from None
        return automaton_from_dict(data)

    fields: dict[str, list[str]] = {}
    transitions: list[tuple[str, str, str]] = []
    lines_of: list[int] = []
    in_transitions = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        key = head.strip()
        if sep and key in _KEYS + ("events",) and " " not in key:
            if key in fields or (key == "transitions" and in_transitions):
                raise ParseError(f"duplicate declaration {key!r}", lineno)
            if key == "transitions":
                in_transitions = True
                fields[key] = []
                if rest.strip():
                    raise ParseError("transitions must start on the following line", lineno)
            else:
                in_transitions = False
                fields[key] = rest.split()
            continue
        if not in_transitions:
            raise ParseError(f"unexpected line {line!r}", lineno)
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"transition needs 'source event target', got {line!r}", lineno)
        transitions.append((parts[0], parts[1], parts[2]))
        lines_of.append(lineno)

    for key in ("states", "initial"):
        if key not in fields:
            raise ParseError(f"missing {key!r} declaration", 0)
    if len(fields["initial"]) != 1:
        raise ParseError("exactly one initial state is required", 0)
    _check_duplicates(fields)
    known = set(fields["states"])
    targets: dict[tuple[str, str], str] = {}
    for (src, e, dst), lineno in zip(transitions, lines_of):
        for name in (src, dst):
            if name not in known:
                raise SemanticError(f"unknown state {name!r}", lineno)
        if targets.setdefault((src, e), dst) != dst:
            raise SemanticError(f"nondeterministic transitions on event {e!r} from state {src!r}", lineno)
    return Automaton.build(
        states=fields["states"], initial=fields["initial"][0], transitions=transitions,
        observable=fields.get("observable", ()), controllable=fields.get("controllable", ()),
        secret=fields.get("secret", ()), events=fields.get("events", ()),
    )


def _check_duplicates(fields: Mapping[str, list[str]]) -> None:
    for key, values in fields.items():
        seen = set()
        for v in values:
            if v in seen:
                raise SemanticError(f"duplicate {key} entry {v!r}")
            seen.add(v)


def automaton_from_dict(data: Mapping) -> Automaton:
    if not isinstance(data, Mapping):
        raise ParseError("top-level JSON value must be an object", 1)
    missing = [k for k in ("states", "initial") if k not in data]
    if missing:
        raise ParseError(f"missing key {missing[0]!r}", 1)
    lists = {k: [str(v) for v in data.get(k, [])] for k in ("states", "secret", "observable", "controllable")}
    _check_duplicates(lists)
    transitions = []
    for t in data.get("transitions", []):
        if len(t) != 3:
            raise SemanticError(f"malformed transition {t!r}")
        transitions.append(tuple(str(v) for v in t))
    return Automaton.build(
        states=lists["states"], initial=str(data["initial"]), transitions=transitions,
        observable=lists["observable"], controllable=lists["controllable"],
        secret=lists["secret"], events=[str(e) for e in data.get("events", [])],
    )


def load_automaton(path) -> Automaton:
    with open(path, encoding="utf-8") as fh:
        return parse_automaton(fh.read())


# -- language --------------------------------------------------------------

def project(s: Sequence[Event], A: Automaton) -> tuple[Event, ...]:
    """Erase unobservable events."""
    known = set(A.events)
    for e in s:
        if e not in known:
            raise SemanticError(f"unknown event {e!r}")
    return tuple(e for e in s if e in A.observable)


def run(A: Automaton, s: Sequence[Event]) -> int | None:
    """Target of ``s`` from the initial state, or ``None`` when undefined."""
    x = A.initial
    for e in s:
        x = A.step(x, e)
        if x is None:
            return None
    return x


def enumerate_language(A: Automaton, max_len: int, cap: int = DEFAULT_LANGUAGE_CAP) -> set[tuple[Event, ...]]:
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    out = {()}
    frontier = deque([((), A.initial)])
    while frontier:
        s, x = frontier.popleft()
        if len(s) == max_len:
            continue
        for e, y in sorted(A.enabled_at(x).items()):
            t = s + (e,)
            out.add(t)
            if len(out) > cap:
                raise ResourceLimitError(f"language enumeration exceeded {cap} strings")
            frontier.append((t, y))
    return out


def to_dot(A: Automaton, name: str = "G") -> str:
    """DOT rendering: secret states double-circled, unobservable edges dashed."""
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
    for i, s in enumerate(A.states):
        shape = "doublecircle" if i in A.secret else "circle"
        lines.append(f"  {_quote(s)} [shape={shape}];")
    lines.append(f"  __start -> {_quote(A.states[A.initial])};")
    for src, e, dst in A.transitions():
        style = "" if e in A.observable else ", style=dashed"
        lines.append(f"  {_quote(src)} -> {_quote(dst)} [label={_quote(e)}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _quote(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'
