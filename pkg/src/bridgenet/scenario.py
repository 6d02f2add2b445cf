"""Reproducible scenario definitions: seeds, target placement, target motion.

A scenario is fully described by a seed plus geometry and horizon
parameters. Targets are placed uniformly on the unit square under a
pairwise distance constraint and then move each step on the same
9-move grid as the agents, rejection-sampled so the constraint holds
for the entire episode.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .actions import ALL_ACTIONS, apply_action
from .graph import Position, round9
from .rng import MASK64, SplitMix64, derive_seed

DEFAULT_AGENT_STARTS: tuple[Position, ...] = ((0.1, 0.42), (0.1, 0.52), (0.1, 0.62))

# Contract field names and order for scenario batch files (JSON lines).
SCENARIO_FIELDS = (
    "seed",
    "n_agents",
    "comm_range",
    "step_size",
    "horizon",
    "target_dist_min",
    "target_dist_max",
    "agent_starts",
    "obs_stack_depth",
    "discount",
)

_MAX_PLACEMENT_ATTEMPTS = 1_000_000


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    n_agents: int = 3
    comm_range: float = 0.25
    step_size: float = 0.05
    horizon: int = 100
    target_dist_min: float = 0.5
    target_dist_max: float = 0.7
    agent_starts: tuple[Position, ...] = DEFAULT_AGENT_STARTS
    obs_stack_depth: int = 3
    discount: float = 1.0

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.n_agents < 1:
            raise ValueError(f"n_agents must be positive, got {self.n_agents}")
        if self.comm_range <= 0:
            raise ValueError(f"comm_range must be positive, got {self.comm_range}")
        if self.step_size <= 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        # min <= max and min > 0; a max beyond the map diagonal is left to the
        # placement sampler, which reports it as an unsatisfiable constraint.
        if self.target_dist_min <= 0:
            raise ValueError(f"target_dist_min must be positive, got {self.target_dist_min}")
        if self.target_dist_min > self.target_dist_max:
            raise ValueError(
                f"target_dist_min {self.target_dist_min} exceeds target_dist_max "
                f"{self.target_dist_max}"
            )
        object.__setattr__(self, "agent_starts", tuple((float(x), float(y)) for x, y in self.agent_starts))
        if len(self.agent_starts) != self.n_agents:
            raise ValueError(
                f"agent_starts has {len(self.agent_starts)} entries for {self.n_agents} agents"
            )
        for x, y in self.agent_starts:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError(f"agent start ({x}, {y}) outside the unit square")
        if self.obs_stack_depth < 1:
            raise ValueError(f"obs_stack_depth must be positive, got {self.obs_stack_depth}")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError(f"discount must lie in [0, 1], got {self.discount}")


def place_targets(rng: SplitMix64, config: ScenarioConfig) -> tuple[Position, Position]:
    """Draw both target positions uniformly under the distance constraint.

    Draw order per attempt is x1, y1, x2, y2. Coordinates are snapped to
    the trace grid before the constraint check so the accepted pair still
    satisfies it after export and re-parse.
    """
    for _ in range(_MAX_PLACEMENT_ATTEMPTS):
        t1 = (round9(rng.next_float()), round9(rng.next_float()))
        t2 = (round9(rng.next_float()), round9(rng.next_float()))
        if config.target_dist_min <= math.dist(t1, t2) <= config.target_dist_max:
            return t1, t2
    raise ValueError(
        "unsatisfiable target distance constraint "
        f"[{config.target_dist_min}, {config.target_dist_max}]"
    )


def sample_target_move(
    rng: SplitMix64, t1: Position, t2: Position, config: ScenarioConfig
) -> tuple[Position, Position]:
    """One joint move of both targets, keeping their distance in range.

    Each attempt draws a 9-way move index for T1 then one for T2
    (``next_below(9)``, flat-code order), applies them with the scenario
    step size and boundary clamp, and accepts the pair only if the moved
    targets still satisfy the distance constraint. The hold-hold pair is
    always acceptable, so the loop terminates.
    """
    while True:
        m1 = ALL_ACTIONS[rng.next_below(9)]
        m2 = ALL_ACTIONS[rng.next_below(9)]
        c1 = apply_action(t1, m1, config.step_size)
        c2 = apply_action(t2, m2, config.step_size)
        if config.target_dist_min <= math.dist(c1, c2) <= config.target_dist_max:
            return c1, c2


def generate(seed: int, count: int, template: ScenarioConfig | None = None) -> list[ScenarioConfig]:
    """Derive a reproducible batch of scenarios from one base seed."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if template is None:
        template = ScenarioConfig(seed=0)
    return [replace(template, seed=derive_seed(seed, i)) for i in range(count)]


def config_to_record(config: ScenarioConfig) -> dict:
    return {
        "seed": config.seed,
        "n_agents": config.n_agents,
        "comm_range": config.comm_range,
        "step_size": config.step_size,
        "horizon": config.horizon,
        "target_dist_min": config.target_dist_min,
        "target_dist_max": config.target_dist_max,
        "agent_starts": [[x, y] for x, y in config.agent_starts],
        "obs_stack_depth": config.obs_stack_depth,
        "discount": config.discount,
    }


def config_from_record(record: dict) -> ScenarioConfig:
    keys = tuple(record)
    if set(keys) != set(SCENARIO_FIELDS):
        unknown = sorted(set(keys) - set(SCENARIO_FIELDS))
        missing = sorted(set(SCENARIO_FIELDS) - set(keys))
        parts = []
        if unknown:
            parts.append(f"unknown fields {unknown}")
        if missing:
            parts.append(f"missing fields {missing}")
        raise ValueError("scenario record: " + "; ".join(parts))
    return ScenarioConfig(
        seed=record["seed"],
        n_agents=record["n_agents"],
        comm_range=record["comm_range"],
        step_size=record["step_size"],
        horizon=record["horizon"],
        target_dist_min=record["target_dist_min"],
        target_dist_max=record["target_dist_max"],
        agent_starts=tuple((x, y) for x, y in record["agent_starts"]),
        obs_stack_depth=record["obs_stack_depth"],
        discount=record["discount"],
    )


def write_scenarios(path, configs: Sequence[ScenarioConfig]) -> None:
    """Write a scenario batch file: one JSON record per line, fixed key order."""
    lines = [json.dumps(config_to_record(c)) for c in configs]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_scenarios(path) -> list[ScenarioConfig]:
    configs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid scenario record: {exc}") from exc
            try:
                configs.append(config_from_record(record))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    if not configs:
        raise ValueError(f"{path}: no scenario records found")
    return configs
