"""
Action space descriptors

Discrete spaces are indexed 0..n-1; continuous spaces are boxes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from policy_capacity.errors import SpecMismatchError

DISCRETE = "discrete"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class ActionSpace:
    """Discrete(n) or continuous(dim, low, high) action space"""

    kind: str
    n: int = 0
    low: tuple[float, ...] = ()
    high: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == DISCRETE:
            if self.n < 2:
                raise SpecMismatchError(f"discrete action space needs n >= 2, got {self.n}")
        elif self.kind == CONTINUOUS:
            if not self.low or len(self.low) != len(self.high):
                raise SpecMismatchError("continuous bounds must be non-empty and of equal length")
            if any(lo >= hi for lo, hi in zip(self.low, self.high)):
                raise SpecMismatchError(f"continuous bounds need low < high: {self.low} / {self.high}")
        else:
            raise SpecMismatchError(f"Unknown action space kind: {self.kind}")

    @classmethod
    def discrete(cls, n: int) -> ActionSpace:
        return cls(kind=DISCRETE, n=int(n))

    @classmethod
    def continuous(cls, low: Any, high: Any) -> ActionSpace:
        low_t = tuple(float(v) for v in np.atleast_1d(low))
        high_t = tuple(float(v) for v in np.atleast_1d(high))
        return cls(kind=CONTINUOUS, low=low_t, high=high_t)

    @property
    def is_discrete(self) -> bool:
        return self.kind == DISCRETE

    @property
    def dim(self) -> int:
        """Width of the policy output layer"""
        return self.n if self.is_discrete else len(self.low)

    def contains(self, action: Any) -> bool:
        if self.is_discrete:
            return isinstance(action, (int, np.integer)) and 0 <= int(action) < self.n
        a = np.asarray(action, dtype=np.float64)
        return a.shape == (self.dim,) and bool(
            np.all(a >= np.asarray(self.low)) and np.all(a <= np.asarray(self.high))
        )

    def to_dict(self) -> dict[str, Any]:
        if self.is_discrete:
            return {"kind": DISCRETE, "n": self.n}
        return {"kind": CONTINUOUS, "low": list(self.low), "high": list(self.high)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ActionSpace:
        if data.get("kind") == DISCRETE:
            return cls.discrete(data["n"])
        return cls.continuous(data["low"], data["high"])
