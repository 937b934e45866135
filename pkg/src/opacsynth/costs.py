from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CostFunction:
    """Cost of a secret revealed ``k`` observations after it was visited.

    ``table[k]`` for ``k < window``; zero afterwards. Trailing zeros are
    stripped, so ``window`` is the least delay whose cost is zero.
    """

    table: tuple[int, ...]

    def __post_init__(self):
        t = tuple(int(c) for c in self.table)
        while t and t[-1] == 0:
            t = t[:-1]
        if not t:
            raise ValueError("cost table must have at least one positive entry")
        if any(c < 0 for c in t):
            raise ValueError("costs must be non-negative")
        if any(a < b for a, b in zip(t, t[1:])):
            raise ValueError("cost table must be non-increasing")
        object.__setattr__(self, "table", t)

    @classmethod
    def linear(cls, n_max: int) -> "CostFunction":
        """``max(n_max - k, 0)``."""
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        return cls(tuple(n_max - k for k in range(n_max)))

    @classmethod
    def k_step(cls, K: int) -> "CostFunction":
        """Unit cost for revelations within ``K`` observations; ``K=0`` is the current-state case."""
        if K < 0:
            raise ValueError("K must be non-negative")
        return cls((1,) * (K + 1))

    def __call__(self, k: int) -> int:
        return self.table[k] if 0 <= k < len(self.table) else 0

    @property
    def window(self) -> int:
        return len(self.table)

    @property
    def bound(self) -> int:
        """Largest cost a single information state can carry."""
        return sum(self.table)
