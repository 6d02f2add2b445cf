"""Centralized baseline controller.

Places one relay endpoint per agent at evenly spaced interior points on
the segment between the two targets, greedily assigns each agent (in id
order) to its nearest remaining endpoint, and steers with the grid move
closest in direction to the endpoint, holding once within 0.1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .actions import ALL_ACTIONS, HOLD, Action
from .env import WorldState
from .graph import Position

HOLD_RADIUS = 0.1


@dataclass(frozen=True)
class EndpointAssignment:
    pairs: tuple[tuple[int, Position], ...]  # (agent id, endpoint), in agent order


def compute_endpoints(t1: Position, t2: Position, n: int) -> list[Position]:
    """n interior points splitting the T1-T2 segment into n+1 equal parts.

    Interpolating parametrically keeps every endpoint on the segment for
    any target geometry, including vertical and coincident targets.
    """
    if n < 1:
        raise ValueError(f"endpoint count must be positive, got {n}")
    dx, dy = t2[0] - t1[0], t2[1] - t1[1]
    return [
        (t1[0] + (k / (n + 1)) * dx, t1[1] + (k / (n + 1)) * dy)
        for k in range(1, n + 1)
    ]


def assign_endpoints(
    agents: list[tuple[int, Position]], endpoints: list[Position]
) -> EndpointAssignment:
    """Greedy matching in agent order; ties go to the lowest endpoint index."""
    if len(agents) != len(endpoints):
        raise ValueError(
            f"{len(agents)} agents cannot be matched to {len(endpoints)} endpoints"
        )
    remaining = list(enumerate(endpoints))
    pairs = []
    for agent_id, pos in agents:
        j, endpoint = min(remaining, key=lambda item: (math.dist(pos, item[1]), item[0]))
        pairs.append((agent_id, endpoint))
        remaining.remove((j, endpoint))
    return EndpointAssignment(pairs=tuple(pairs))


def select_action(agent_pos: Position, endpoint: Position) -> Action:
    """Best of the 8 compass moves toward the endpoint; hold when close.

    The move maximizing the dot product of its unit direction with the
    unit vector toward the endpoint is a 45-degree sector quantization
    of the approach angle. Ties resolve to the lowest flat code.
    """
    distance = math.dist(agent_pos, endpoint)
    if distance <= HOLD_RADIUS:
        return HOLD
    ux = (endpoint[0] - agent_pos[0]) / distance
    uy = (endpoint[1] - agent_pos[1]) / distance
    best, best_score = None, -math.inf
    for move in ALL_ACTIONS:
        if move == HOLD:
            continue
        norm = math.hypot(move.dx, move.dy)
        score = (move.dx * ux + move.dy * uy) / norm
        if score > best_score:
            best, best_score = move, score
    return best


def act(s: WorldState) -> list[Action]:
    """Joint action for the whole swarm on the current state."""
    endpoints = compute_endpoints(
        s.targets[0].position, s.targets[1].position, len(s.agents)
    )
    assignment = assign_endpoints([(a.id, a.position) for a in s.agents], endpoints)
    positions = {a.id: a.position for a in s.agents}
    return [select_action(positions[agent_id], endpoint) for agent_id, endpoint in assignment.pairs]
