"""Seeded random plants for property and acceptance tests."""
from __future__ import annotations

import random

from hypothesis import strategies as st

from opacsynth.automaton import Automaton


def random_plant(rng: random.Random, max_states: int = 6, max_events: int = 4, max_secret: int = 2,
                 acyclic: bool = False, density: float = 0.45) -> Automaton:
    n = rng.randint(1, max_states)
    k = rng.randint(1, max_events)
    events = tuple(f"e{i}" for i in range(k))
    observable = frozenset(e for e in events if rng.random() < 0.55)
    controllable = frozenset(e for e in events if rng.random() < 0.5)
    delta = {}
    for x in range(n):
        for e in events:
            targets = range(x + 1, n) if acyclic else range(n)
            if targets and rng.random() < density:
                delta[(x, e)] = rng.choice(list(targets))
    secret = frozenset(rng.sample(range(n), rng.randint(0, min(max_secret, n))))
    return Automaton(tuple(str(i) for i in range(n)), events, observable, controllable, delta, 0, secret)


@st.composite
def plants(draw, max_states: int = 6, max_events: int = 4, acyclic: bool | None = None) -> Automaton:
    seed = draw(st.integers(0, 2**32 - 1))
    cyc = draw(st.booleans()) if acyclic is None else acyclic
    return random_plant(random.Random(seed), max_states, max_events, acyclic=cyc)
