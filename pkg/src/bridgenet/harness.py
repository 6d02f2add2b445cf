"""Episode execution, metrics, and trace files.

Every reported number is reproducible from the trace artifacts: step
records hold positions on the lossless 9-significant-digit grid and the
per-step reward snapped to the same grid, and the episode metrics are
computed from those logged values, so recomputing from an exported file
gives back exactly the runtime report.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import fmean, pstdev
from typing import Callable, Sequence

from . import heuristic
from .env import Observation, ObservationStack, RewardBreakdown, World, WorldState
from .graph import build_edges, round9
from .scenario import ScenarioConfig

TRACE_HEADER = "step,node_id,node_type,x,y,action,path_exists,reward_total"


class TraceFormatError(ValueError):
    """A trace file that does not parse against the column contract."""


@dataclass(frozen=True)
class PolicyEndpoint:
    kind: str  # "heuristic" or "remote"
    address: str | None = None
    timeout: float = 5.0

    def __post_init__(self):
        if self.kind not in ("heuristic", "remote"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "remote" and not self.address:
            raise ValueError("remote policy endpoint requires an address")


@dataclass(frozen=True)
class NodeRow:
    node_id: int
    node_type: str
    x: float
    y: float
    action: int


@dataclass(frozen=True)
class StepRecord:
    step: int
    nodes: tuple[NodeRow, ...]
    reward: RewardBreakdown
    reward_total: float  # reward.total on the trace grid; source for metrics
    path_exists: bool


@dataclass
class EpisodeTrace:
    scenario: ScenarioConfig
    records: list[StepRecord] = field(default_factory=list)


@dataclass(frozen=True)
class EpisodeMetrics:
    coverage: float
    total_return: float
    bridged_steps: int


@dataclass(frozen=True)
class ScenarioResult:
    index: int
    seed: int
    metrics: EpisodeMetrics | None
    error: str | None = None


@dataclass(frozen=True)
class BatchReport:
    mean_coverage: float
    std_coverage: float
    mean_return: float
    std_return: float
    n_scenarios: int
    n_failures: int
    results: tuple[ScenarioResult, ...]


class HeuristicPolicy:
    """In-process centralized baseline."""

    def begin(self, scenario: ScenarioConfig) -> None:
        pass

    def decide(self, state: WorldState, stacks: dict[int, ObservationStack]):
        return heuristic.act(state)

    def finish(self) -> None:
        pass


def make_policy(endpoint: PolicyEndpoint):
    if endpoint.kind == "heuristic":
        return HeuristicPolicy()
    from .protocol import remote_policy_session

    return remote_policy_session(endpoint.address, timeout=endpoint.timeout)


def run_episode(
    policy: PolicyEndpoint, scenario: ScenarioConfig
) -> tuple[EpisodeTrace, EpisodeMetrics]:
    """Run one full-horizon episode and collect its trace and metrics."""
    session = make_policy(policy)
    world = World(scenario)
    state, stacks = world.reset()
    trace = EpisodeTrace(scenario=scenario)
    try:
        session.begin(scenario)
        for _ in range(scenario.horizon):
            actions = session.decide(state, stacks)
            state, reward, _ = world.step(actions)
            trace.records.append(_record_step(world, reward))
    finally:
        session.finish()
    return trace, compute_metrics(trace)


def _record_step(world: World, reward: RewardBreakdown) -> StepRecord:
    scored = world.scored_state
    rows = [
        NodeRow(a.id, "A", a.position[0], a.position[1], a.last_action)
        for a in scored.agents
    ]
    rows += [NodeRow(t.id, "T", t.position[0], t.position[1], 0) for t in scored.targets]
    return StepRecord(
        step=scored.step_index,
        nodes=tuple(rows),
        reward=reward,
        reward_total=round9(reward.total),
        path_exists=scored.graph.path_exists(world.t1_id, world.t2_id),
    )


def compute_metrics(trace: EpisodeTrace) -> EpisodeMetrics:
    bridged = sum(1 for r in trace.records if r.path_exists)
    return EpisodeMetrics(
        coverage=bridged / len(trace.records),
        total_return=math.fsum(r.reward_total for r in trace.records),
        bridged_steps=bridged,
    )


def run_batch(
    policy: PolicyEndpoint,
    scenarios: Sequence[ScenarioConfig],
    parallelism: int = 1,
    on_trace: Callable[[int, EpisodeTrace], None] | None = None,
) -> BatchReport:
    """Run every scenario, aggregating over the episodes that completed.

    Episodes are independent (own world, own generator, own remote
    session), so results are identical whatever the parallelism degree.
    ``on_trace`` receives (scenario index, trace) for completed episodes.
    """
    if not scenarios:
        raise ValueError("at least one scenario is required")
    if parallelism < 1:
        raise ValueError(f"parallelism must be positive, got {parallelism}")

    def one(index: int) -> tuple[ScenarioResult, EpisodeTrace | None]:
        config = scenarios[index]
        try:
            trace, metrics = run_episode(policy, config)
        except Exception as exc:
            return ScenarioResult(index, config.seed, None, f"{type(exc).__name__}: {exc}"), None
        return ScenarioResult(index, config.seed, metrics), trace

    if parallelism == 1:
        outcomes = [one(i) for i in range(len(scenarios))]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(one, range(len(scenarios))))

    results = []
    for index, (result, trace) in enumerate(outcomes):
        results.append(result)
        if trace is not None and on_trace is not None:
            on_trace(index, trace)
    return aggregate(results)


def aggregate(results: Sequence[ScenarioResult]) -> BatchReport:
    ok = [r.metrics for r in results if r.metrics is not None]
    coverages = [m.coverage for m in ok]
    returns = [m.total_return for m in ok]
    return BatchReport(
        mean_coverage=fmean(coverages) if ok else math.nan,
        std_coverage=pstdev(coverages) if ok else math.nan,
        mean_return=fmean(returns) if ok else math.nan,
        std_return=pstdev(returns) if ok else math.nan,
        n_scenarios=len(results),
        n_failures=len(results) - len(ok),
        results=tuple(results),
    )


def _fmt(x: float) -> str:
    return format(x, ".9g")


def export_trace(trace: EpisodeTrace, path) -> None:
    """Write one row per (step, node); floats at 9 significant digits."""
    lines = [TRACE_HEADER]
    for rec in trace.records:
        flag = "1" if rec.path_exists else "0"
        for n in rec.nodes:
            lines.append(
                f"{rec.step},{n.node_id},{n.node_type},{_fmt(n.x)},{_fmt(n.y)},"
                f"{n.action},{flag},{_fmt(rec.reward_total)}"
            )
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trace file {path}: {exc}") from exc


@dataclass(frozen=True)
class ParsedStep:
    step: int
    nodes: tuple[NodeRow, ...]
    path_exists: bool
    reward_total: float


@dataclass(frozen=True)
class ParsedTrace:
    steps: tuple[ParsedStep, ...]


def load_trace(path) -> ParsedTrace:
    """Parse an exported trace, enforcing the column contract per row."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise TraceFormatError(f"{path}: missing or wrong header row")

    by_step: dict[int, list[tuple[NodeRow, bool, float]]] = {}
    order: list[int] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 8:
            raise TraceFormatError(f"{path}:{lineno}: expected 8 columns, got {len(parts)}")
        try:
            step = int(parts[0])
            node = NodeRow(
                node_id=int(parts[1]),
                node_type=parts[2],
                x=float(parts[3]),
                y=float(parts[4]),
                action=int(parts[5]),
            )
            flag_raw = parts[6]
            reward = float(parts[7])
        except ValueError as exc:
            raise TraceFormatError(f"{path}:{lineno}: {exc}") from exc
        if node.node_type not in ("A", "T"):
            raise TraceFormatError(f"{path}:{lineno}: node_type must be A or T, got {parts[2]!r}")
        if flag_raw not in ("0", "1"):
            raise TraceFormatError(f"{path}:{lineno}: path_exists must be 0 or 1, got {flag_raw!r}")
        if not 0 <= node.action <= 8:
            raise TraceFormatError(f"{path}:{lineno}: action {node.action} outside 0..8")
        flag = flag_raw == "1"
        if step not in by_step:
            by_step[step] = []
            order.append(step)
        else:
            prev_flag, prev_reward = by_step[step][0][1], by_step[step][0][2]
            if (flag, reward) != (prev_flag, prev_reward):
                raise TraceFormatError(
                    f"{path}:{lineno}: inconsistent path_exists/reward_total within step {step}"
                )
        by_step[step].append((node, flag, reward))

    if not order:
        raise TraceFormatError(f"{path}: no data rows")
    steps = tuple(
        ParsedStep(
            step=s,
            nodes=tuple(n for n, _, _ in by_step[s]),
            path_exists=by_step[s][0][1],
            reward_total=by_step[s][0][2],
        )
        for s in order
    )
    return ParsedTrace(steps=steps)


def metrics_from_parsed(parsed: ParsedTrace) -> EpisodeMetrics:
    bridged = sum(1 for s in parsed.steps if s.path_exists)
    return EpisodeMetrics(
        coverage=bridged / len(parsed.steps),
        total_return=math.fsum(s.reward_total for s in parsed.steps),
        bridged_steps=bridged,
    )


def verify_parsed_trace(parsed: ParsedTrace, comm_range: float) -> list[int]:
    """Recompute target connectivity from logged positions.

    Returns the steps whose logged path flag disagrees with a fresh
    range-graph check, e.g. after the file was edited by hand.
    """
    mismatched = []
    for s in parsed.steps:
        graph = build_edges([(n.node_id, (n.x, n.y)) for n in s.nodes], comm_range)
        target_ids = [n.node_id for n in s.nodes if n.node_type == "T"]
        if len(target_ids) != 2:
            raise TraceFormatError(f"step {s.step}: expected 2 target rows, got {len(target_ids)}")
        if graph.path_exists(target_ids[0], target_ids[1]) != s.path_exists:
            mismatched.append(s.step)
    return mismatched
