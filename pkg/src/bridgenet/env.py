"""The bridging world: shared-reward multi-agent simulation.

Node ids are assigned 0..n_agents-1 to agents and the next two ids to
the targets. Each step runs in a fixed order: all agents move
simultaneously and the shared reward is scored on that configuration
(moved agents against the target positions the decision was based on);
then both targets move and per-agent observations are built on the
resulting state, so the next decision always sees the targets' current
positions. Step records for traces use the scored configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .actions import HOLD, Action, apply_action
from .graph import Position, RangeGraph, build_edges, round9
from .rng import SplitMix64
from .scenario import ScenarioConfig, place_targets, sample_target_move

TARGET_ACTION_CODE = 0  # feature-table convention: target rows always carry action 0


@dataclass(frozen=True)
class AgentState:
    id: int
    position: Position
    last_action: int = HOLD.flat


@dataclass(frozen=True)
class TargetState:
    id: int
    position: Position


@dataclass(frozen=True)
class WorldState:
    agents: tuple[AgentState, ...]
    targets: tuple[TargetState, TargetState]
    step_index: int
    graph: RangeGraph
    rng_state: int

    @property
    def n_nodes(self) -> int:
        return len(self.agents) + len(self.targets)


@dataclass(frozen=True)
class RewardBreakdown:
    """Shared reward: 100 when the targets are linked, otherwise the
    largest-component fraction minus the agent/target centroid distance."""

    base: float
    centroid_penalty: float
    path_bonus: float
    total: float


@dataclass(frozen=True)
class ObservationRow:
    node_type: str  # "A" or "T"
    node_id: int
    coord: Position
    action: int  # last move flat code; always 0 for targets
    t1_coord: Position
    t2_coord: Position


@dataclass(frozen=True)
class Observation:
    ego: int
    rows: tuple[ObservationRow, ...]
    local_edges: tuple[tuple[int, int], ...]
    step_index: int


class ObservationStack:
    """Sliding window of the most recent observations for one agent."""

    def __init__(self, depth: int):
        if depth < 1:
            raise ValueError(f"stack depth must be positive, got {depth}")
        self.depth = depth
        self.frames: list[Observation] = []

    def push(self, o: Observation) -> "ObservationStack":
        if self.frames and o.step_index <= self.frames[-1].step_index:
            raise ValueError(
                f"out-of-order observation: step {o.step_index} after {self.frames[-1].step_index}"
            )
        self.frames.append(o)
        if len(self.frames) > self.depth:
            del self.frames[0]
        return self

    def __len__(self) -> int:
        return len(self.frames)


def compute_reward(s: WorldState) -> RewardBreakdown:
    """Reward of a state; identical for every agent."""
    base = s.graph.largest_component_size() / s.n_nodes
    ax = math.fsum(a.position[0] for a in s.agents) / len(s.agents)
    ay = math.fsum(a.position[1] for a in s.agents) / len(s.agents)
    tx = math.fsum(t.position[0] for t in s.targets) / len(s.targets)
    ty = math.fsum(t.position[1] for t in s.targets) / len(s.targets)
    penalty = math.dist((ax, ay), (tx, ty))
    bridged = s.graph.path_exists(s.targets[0].id, s.targets[1].id)
    if bridged:
        return RewardBreakdown(base, penalty, 100.0, 100.0)
    return RewardBreakdown(base, penalty, 0.0, base - penalty)


def build_observation(s: WorldState, agent: int) -> Observation:
    """One-hop ego view: the agent, its neighbors, and the edges among them.

    Every row carries both targets' current coordinates (globally known),
    so locality applies to the row set and edge list only.
    """
    agent_actions = {a.id: a.last_action for a in s.agents}
    if agent not in agent_actions:
        raise ValueError(f"unknown agent id {agent}")
    t1, t2 = s.targets
    target_ids = {t1.id, t2.id}
    nodes, edges = s.graph.one_hop_subgraph(agent)
    rows = tuple(
        ObservationRow(
            node_type="T" if i in target_ids else "A",
            node_id=i,
            coord=pos,
            action=TARGET_ACTION_CODE if i in target_ids else agent_actions[i],
            t1_coord=t1.position,
            t2_coord=t2.position,
        )
        for i, pos in nodes
    )
    return Observation(ego=agent, rows=rows, local_edges=tuple(edges), step_index=s.step_index)


class World:
    """Owns the episode loop: state, scenario PRNG, and observation stacks.

    A world instance is single-threaded; run independent instances for
    parallel episodes.
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.agent_ids = tuple(range(config.n_agents))
        self.t1_id = config.n_agents
        self.t2_id = config.n_agents + 1
        self._rng: SplitMix64 | None = None
        self._state: WorldState | None = None
        self._scored: WorldState | None = None
        self.stacks: dict[int, ObservationStack] = {}

    @property
    def state(self) -> WorldState:
        if self._state is None:
            raise RuntimeError("world not reset")
        return self._state

    @property
    def scored_state(self) -> WorldState:
        """The configuration the last reward was computed on."""
        if self._scored is None:
            raise RuntimeError("no step taken yet")
        return self._scored

    def reset(self) -> tuple[WorldState, dict[int, ObservationStack]]:
        self._rng = SplitMix64(self.config.seed)
        p1, p2 = place_targets(self._rng, self.config)
        agents = tuple(
            AgentState(id=i, position=(round9(x), round9(y)))
            for i, (x, y) in zip(self.agent_ids, self.config.agent_starts)
        )
        targets = (TargetState(self.t1_id, p1), TargetState(self.t2_id, p2))
        self._scored = None
        self._state = self._assemble(agents, targets, step_index=0)
        self.stacks = {
            i: ObservationStack(self.config.obs_stack_depth).push(
                build_observation(self._state, i)
            )
            for i in self.agent_ids
        }
        return self._state, self.stacks

    def step(
        self, joint_action: list[Action]
    ) -> tuple[WorldState, RewardBreakdown, dict[int, Observation]]:
        s = self.state
        if len(joint_action) != len(s.agents):
            raise ValueError(
                f"joint action has {len(joint_action)} entries for {len(s.agents)} agents"
            )
        if s.step_index >= self.config.horizon:
            raise ValueError(f"episode horizon {self.config.horizon} already reached")

        agents = tuple(
            AgentState(
                id=a.id,
                position=apply_action(a.position, act, self.config.step_size),
                last_action=act.flat,
            )
            for a, act in zip(s.agents, joint_action)
        )
        self._scored = self._assemble(agents, s.targets, step_index=s.step_index + 1)
        reward = compute_reward(self._scored)
        p1, p2 = sample_target_move(
            self._rng, s.targets[0].position, s.targets[1].position, self.config
        )
        targets = (TargetState(self.t1_id, p1), TargetState(self.t2_id, p2))
        self._state = self._assemble(agents, targets, step_index=s.step_index + 1)
        observations = {i: build_observation(self._state, i) for i in self.agent_ids}
        for i, o in observations.items():
            self.stacks[i].push(o)
        return self._state, reward, observations

    def _assemble(
        self, agents: tuple[AgentState, ...], targets: tuple[TargetState, TargetState], step_index: int
    ) -> WorldState:
        positions = [(a.id, a.position) for a in agents] + [(t.id, t.position) for t in targets]
        return WorldState(
            agents=agents,
            targets=targets,
            step_index=step_index,
            graph=build_edges(positions, self.config.comm_range),
            rng_state=self._rng.state,
        )
