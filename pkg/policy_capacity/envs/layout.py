"""
Pointmaze geometry

Rows are written top to bottom; '#' is a wall cell, 'S' the start cell,
'G' the goal cell, anything else free floor. Cells are unit squares and
the y axis points up, so cell (row, col) spans x in [col, col+1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from policy_capacity.errors import ConfigError

U_MAZE = (
    "#####",
    "#G..#",
    "###.#",
    "#S..#",
    "#####",
)


@dataclass(frozen=True)
class MazeLayout:
    rows: tuple[str, ...] = U_MAZE
    damping: float = 0.9
    dt: float = 0.1
    gain: float = 1.0
    start_jitter: float = 0.1

    def __post_init__(self) -> None:
        if not self.rows or len({len(r) for r in self.rows}) != 1:
            raise ConfigError("maze rows must be non-empty and of equal width")
        text = "".join(self.rows)
        if text.count("S") != 1 or text.count("G") != 1:
            raise ConfigError("maze needs exactly one 'S' and one 'G' cell")
        if not 0 <= self.damping <= 1:
            raise ConfigError(f"damping must lie in [0, 1], got {self.damping}")
        if self.dt <= 0 or self.gain <= 0 or self.start_jitter < 0:
            raise ConfigError("dt and gain must be > 0 and start_jitter >= 0")
        if not 0 <= self.start_jitter < 0.5:
            raise ConfigError("start_jitter must keep the start inside its cell")

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0])

    def _center(self, marker: str) -> tuple[float, float]:
        for r, row in enumerate(self.rows):
            c = row.find(marker)
            if c >= 0:
                return (c + 0.5, self.height - 1 - r + 0.5)
        raise ConfigError(f"marker {marker!r} not found")

    @property
    def start(self) -> tuple[float, float]:
        return self._center("S")

    @property
    def goal(self) -> tuple[float, float]:
        return self._center("G")

    def is_wall(self, x: float, y: float) -> bool:
        """Points outside the grid count as walls"""
        if x < 0 or y < 0 or x >= self.width or y >= self.height:
            return True
        return self.rows[self.height - 1 - int(y)][int(x)] == "#"

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows": list(self.rows),
            "damping": self.damping,
            "dt": self.dt,
            "gain": self.gain,
            "start_jitter": self.start_jitter,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MazeLayout:
        kwargs: dict[str, Any] = {
            k: float(v) for k, v in data.items() if k in ("damping", "dt", "gain", "start_jitter")
        }
        if "rows" in data:
            kwargs["rows"] = tuple(str(r) for r in data["rows"])
        return cls(**kwargs)
