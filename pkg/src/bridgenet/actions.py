"""Grid moves shared by agents and targets.

A move is a per-axis choice among backward, hold, forward, encoded as a
flat code ``3 * (dx + 1) + (dy + 1)`` in 0..8. Code 4 is hold. Diagonal
moves displace the full step size along each axis (no normalization).
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Position, clamp01, round9


@dataclass(frozen=True)
class Action:
    dx: int
    dy: int

    def __post_init__(self):
        if self.dx not in (-1, 0, 1) or self.dy not in (-1, 0, 1):
            raise ValueError(f"action deltas must be in {{-1, 0, 1}}, got ({self.dx}, {self.dy})")

    @property
    def flat(self) -> int:
        return 3 * (self.dx + 1) + (self.dy + 1)

    @classmethod
    def from_flat(cls, code: int) -> "Action":
        if not 0 <= code <= 8:
            raise ValueError(f"flat action code must be in 0..8, got {code}")
        return cls(code // 3 - 1, code % 3 - 1)


HOLD = Action(0, 0)
ALL_ACTIONS = tuple(Action.from_flat(code) for code in range(9))


def apply_action(p: Position, a: Action, step_size: float) -> Position:
    """Displace a position by one move, clamped to the unit square.

    The result is snapped to the 9-significant-digit grid so that state
    coordinates survive trace export and re-parse bit-exactly.
    """
    if step_size <= 0:
        raise ValueError(f"step_size must be positive, got {step_size}")
    return (
        round9(clamp01(p[0] + step_size * a.dx)),
        round9(clamp01(p[1] + step_size * a.dy)),
    )
