"""
Goal-oriented reward families

L1:       -alpha * ||s - g||_1
L2:       -alpha * ||s - g||_2
Fraction:  beta / (gamma + ||s - g||_2)
Sparse:   -1[||s - g||_2 >= eps]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from policy_capacity.errors import ConfigError, SpecMismatchError

L1 = "l1"
L2 = "l2"
FRACTION = "fraction"
SPARSE = "sparse"

FAMILIES = (L1, L2, FRACTION, SPARSE)


@dataclass(frozen=True)
class RewardFamily:
    family: str
    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = 0.1
    eps: float = 0.5
    goal: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"Unknown reward family: {self.family}")
        if self.family in (L1, L2) and self.alpha <= 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if self.family == FRACTION and (self.beta <= 0 or self.gamma <= 0):
            raise ConfigError(f"beta and gamma must be > 0, got {self.beta}, {self.gamma}")
        if self.family == SPARSE and self.eps <= 0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")

    @property
    def params(self) -> dict[str, float]:
        """The hyper-parameters that matter for this family"""
        if self.family in (L1, L2):
            return {"alpha": self.alpha}
        if self.family == FRACTION:
            return {"beta": self.beta, "gamma": self.gamma}
        return {"eps": self.eps}

    def label(self) -> str:
        inner = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}({inner})"

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family, **self.params}
        if self.goal:
            out["goal"] = list(self.goal)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RewardFamily:
        kwargs = {k: float(v) for k, v in data.items() if k in ("alpha", "beta", "gamma", "eps")}
        goal = tuple(float(v) for v in data.get("goal", ()))
        return cls(family=str(data["family"]).lower(), goal=goal, **kwargs)

    @classmethod
    def parse(cls, text: str) -> RewardFamily:
        """Parse `family` or `family:key=value,...`, e.g. `sparse:eps=0.1`"""
        family, _, rest = text.partition(":")
        data: dict[str, Any] = {"family": family.strip()}
        for item in filter(None, (part.strip() for part in rest.split(","))):
            key, sep, value = item.partition("=")
            if not sep or key.strip() not in ("alpha", "beta", "gamma", "eps"):
                raise ConfigError(f"bad reward parameter {item!r} in {text!r}")
            try:
                data[key.strip()] = float(value)
            except ValueError:
                raise ConfigError(f"{key.strip()} must be a number in {text!r}") from None
        return cls.from_dict(data)


def shaped_reward(family: RewardFamily, s: Any, s_g: Any) -> float:
    """Evaluate the family's reward for position s against goal s_g"""
    s = np.asarray(s, dtype=np.float64)
    s_g = np.asarray(s_g, dtype=np.float64)
    if s.shape != s_g.shape:
        raise SpecMismatchError(f"state {s.shape} and goal {s_g.shape} differ in dimension")

    diff = s - s_g
    if family.family == L1:
        return float(-family.alpha * np.sum(np.abs(diff)))
    dist = float(np.sqrt(np.dot(diff, diff)))
    if family.family == L2:
        return -family.alpha * dist
    if family.family == FRACTION:
        return family.beta / (family.gamma + dist)
    return -1.0 if dist >= family.eps else 0.0


def standard_sweep() -> list[RewardFamily]:
    """The 16 reward variants of the pointmaze shaping sweep, 4 per family"""
    variants = [RewardFamily(L1, alpha=a) for a in (1.0, 0.5, 2.0, 5.0)]
    variants += [RewardFamily(L2, alpha=a) for a in (1.0, 0.5, 2.0, 5.0)]
    variants += [
        RewardFamily(FRACTION, beta=b, gamma=g)
        for b, g in ((0.01, 0.01), (0.1, 0.1), (0.01, 0.1), (0.05, 0.1))
    ]
    variants += [RewardFamily(SPARSE, eps=e) for e in (0.5, 0.1, 0.2, 1.0)]
    return variants
