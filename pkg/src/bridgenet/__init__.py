"""Deterministic swarm simulator for dynamic network bridging.

A small team of range-limited agents repositions itself so that a
multi-hop communication path links two moving targets. The package
provides the simulation world, a centralized baseline controller, a
seed-reproducible scenario generator, an evaluation harness with trace
export, and a wire protocol for plugging in external policies.
"""

from .actions import ALL_ACTIONS, HOLD, Action, apply_action
from .env import (
    AgentState,
    Observation,
    ObservationRow,
    ObservationStack,
    RewardBreakdown,
    TargetState,
    World,
    WorldState,
    build_observation,
    compute_reward,
)
from .graph import Position, RangeGraph, build_edges, clamp01, round9
from .harness import (
    BatchReport,
    EpisodeMetrics,
    EpisodeTrace,
    PolicyEndpoint,
    ScenarioResult,
    TraceFormatError,
    compute_metrics,
    export_trace,
    load_trace,
    metrics_from_parsed,
    run_batch,
    run_episode,
    verify_parsed_trace,
)
from .heuristic import EndpointAssignment, assign_endpoints, compute_endpoints, select_action
from .protocol import (
    PROTOCOL_VERSION,
    PolicyServer,
    PolicySessionError,
    ProtocolError,
    RemotePolicy,
    VersionMismatchError,
    remote_policy_session,
)
from .rng import SplitMix64, derive_seed
from .scenario import (
    DEFAULT_AGENT_STARTS,
    SCENARIO_FIELDS,
    ScenarioConfig,
    generate,
    place_targets,
    read_scenarios,
    sample_target_move,
    write_scenarios,
)

__version__ = "0.1.0"
