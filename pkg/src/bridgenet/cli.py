"""Command-line front end: scenario generation, batch runs, trace evaluation.

Numbers are trace-first: ``run`` writes one trace file per scenario and
its report is computed from the logged values, so ``eval`` over the same
directory reproduces the report exactly from the artifacts alone.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O or
data error, 4 policy-protocol error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .actions import Action
from .env import World
from .graph import round9
from .harness import (
    BatchReport,
    PolicyEndpoint,
    ScenarioResult,
    TraceFormatError,
    aggregate,
    export_trace,
    load_trace,
    metrics_from_parsed,
    run_batch,
    verify_parsed_trace,
)
from .protocol import ProtocolError, actions_from_records
from .scenario import ScenarioConfig, generate, read_scenarios, write_scenarios

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PROTOCOL = 4

ENV_PREFIX = "BRIDGENET_"


def _env_default(name: str, cast, fallback):
    raw = os.environ.get(ENV_PREFIX + name)
    return cast(raw) if raw is not None else fallback


def _add_config_overrides(parser: argparse.ArgumentParser) -> None:
    defaults = ScenarioConfig(seed=0)
    parser.add_argument("--n-agents", type=int,
                        default=_env_default("N_AGENTS", int, defaults.n_agents))
    parser.add_argument("--comm-range", type=float,
                        default=_env_default("COMM_RANGE", float, defaults.comm_range))
    parser.add_argument("--step-size", type=float,
                        default=_env_default("STEP_SIZE", float, defaults.step_size))
    parser.add_argument("--horizon", type=int,
                        default=_env_default("HORIZON", int, defaults.horizon))
    parser.add_argument("--target-dist-min", type=float,
                        default=_env_default("TARGET_DIST_MIN", float, defaults.target_dist_min))
    parser.add_argument("--target-dist-max", type=float,
                        default=_env_default("TARGET_DIST_MAX", float, defaults.target_dist_max))
    parser.add_argument("--obs-stack-depth", type=int,
                        default=_env_default("OBS_STACK_DEPTH", int, defaults.obs_stack_depth))
    parser.add_argument("--discount", type=float,
                        default=_env_default("DISCOUNT", float, defaults.discount))
    parser.add_argument("--agent-start", action="append", metavar="X,Y",
                        help="repeat once per agent to override start positions")


def _config_from_args(args) -> ScenarioConfig:
    kwargs = dict(
        n_agents=args.n_agents,
        comm_range=args.comm_range,
        step_size=args.step_size,
        horizon=args.horizon,
        target_dist_min=args.target_dist_min,
        target_dist_max=args.target_dist_max,
        obs_stack_depth=args.obs_stack_depth,
        discount=args.discount,
    )
    if args.agent_start:
        starts = []
        for raw in args.agent_start:
            try:
                x, y = (float(v) for v in raw.split(","))
            except ValueError:
                raise _Usage(f"--agent-start expects X,Y, got {raw!r}")
            starts.append((x, y))
        kwargs["agent_starts"] = tuple(starts)
    elif args.n_agents != 3:
        raise _Usage("--n-agents other than 3 needs one --agent-start per agent")
    return ScenarioConfig(seed=0, **kwargs)


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridgenet",
        description="Deterministic swarm simulator for bridging two moving targets.",
        epilog="Defaults for value flags can be overridden with environment "
               "variables named BRIDGENET_<FLAG> (e.g. BRIDGENET_COMM_RANGE=0.3, "
               "BRIDGENET_PARALLEL=8).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a reproducible scenario batch file")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--count", type=int, required=True)
    p_gen.add_argument("--out", required=True)
    _add_config_overrides(p_gen)

    p_run = sub.add_parser("run", help="run a policy over a scenario batch, exporting traces")
    p_run.add_argument("--policy", choices=("heuristic", "remote"), required=True)
    p_run.add_argument("--policy-addr", metavar="HOST:PORT")
    p_run.add_argument("--scenarios", required=True)
    p_run.add_argument("--traces", required=True, help="directory for per-scenario trace files")
    p_run.add_argument("--report", help="write the aggregate report as JSON")
    p_run.add_argument("--parallel", type=int, default=_env_default("PARALLEL", int, 1))
    p_run.add_argument("--timeout", type=float, default=_env_default("TIMEOUT", float, 5.0))

    p_eval = sub.add_parser("eval", help="recompute metrics from exported trace files")
    p_eval.add_argument("--traces", required=True)
    p_eval.add_argument("--comm-range", type=float,
                        default=_env_default("COMM_RANGE", float, 0.25),
                        help="range used to re-check logged path flags")
    p_eval.add_argument("--report", help="write the aggregate report as JSON")

    p_replay = sub.add_parser(
        "replay", help="re-simulate traces from their scenarios and verify them bit-exactly"
    )
    p_replay.add_argument("--scenarios", required=True)
    p_replay.add_argument("--traces", required=True)

    return parser


def _trace_path(directory: str, index: int) -> str:
    return os.path.join(directory, f"trace_{index:04d}.csv")


def _print_report(report: BatchReport, out) -> None:
    print(f"{'scenario':>8}  {'seed':>20}  {'bridged':>7}  {'coverage':>8}  {'return':>14}", file=out)
    for r in report.results:
        if r.metrics is None:
            print(f"{r.index:>8}  {r.seed:>20}  {'-':>7}  {'failed':>8}  {r.error}", file=out)
        else:
            m = r.metrics
            print(
                f"{r.index:>8}  {r.seed:>20}  {m.bridged_steps:>7}  "
                f"{m.coverage:>8.4f}  {m.total_return:>14.6f}",
                file=out,
            )
    print(
        f"mean coverage {report.mean_coverage:.6f}  std {report.std_coverage:.6f}\n"
        f"mean return   {report.mean_return:.6f}  std {report.std_return:.6f}\n"
        f"scenarios {report.n_scenarios}  failures {report.n_failures}",
        file=out,
    )


def _write_report_json(report: BatchReport, path: str) -> None:
    payload = {
        "mean_coverage": report.mean_coverage,
        "std_coverage": report.std_coverage,
        "mean_return": report.mean_return,
        "std_return": report.std_return,
        "n_scenarios": report.n_scenarios,
        "n_failures": report.n_failures,
        "per_scenario": [
            {
                "index": r.index,
                "seed": r.seed,
                "coverage": r.metrics.coverage if r.metrics else None,
                "return": r.metrics.total_return if r.metrics else None,
                "bridged_steps": r.metrics.bridged_steps if r.metrics else None,
                "error": r.error,
            }
            for r in report.results
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def cmd_gen(args) -> int:
    if args.count < 1:
        raise _Usage(f"--count must be positive, got {args.count}")
    if not 0 <= args.seed < 2**64:
        raise _Usage(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
    template = _config_from_args(args)
    configs = generate(args.seed, args.count, template)
    write_scenarios(args.out, configs)
    print(f"wrote {len(configs)} scenarios to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    if args.policy == "remote" and not args.policy_addr:
        raise _Usage("--policy remote requires --policy-addr")
    if args.parallel < 1:
        raise _Usage(f"--parallel must be positive, got {args.parallel}")
    scenarios = read_scenarios(args.scenarios)
    endpoint = PolicyEndpoint(kind=args.policy, address=args.policy_addr, timeout=args.timeout)
    os.makedirs(args.traces, exist_ok=True)
    report = run_batch(
        endpoint,
        scenarios,
        parallelism=args.parallel,
        on_trace=lambda i, trace: export_trace(trace, _trace_path(args.traces, i)),
    )
    _print_report(report, sys.stdout)
    if args.report:
        _write_report_json(report, args.report)
    return EXIT_PROTOCOL if report.n_failures else EXIT_OK


def cmd_eval(args) -> int:
    names = sorted(n for n in os.listdir(args.traces) if n.endswith(".csv"))
    if not names:
        raise TraceFormatError(f"no trace files in {args.traces}")
    results = []
    flagged: list[tuple[str, list[int]]] = []
    for index, name in enumerate(names):
        path = os.path.join(args.traces, name)
        parsed = load_trace(path)
        metrics = metrics_from_parsed(parsed)
        mismatched = verify_parsed_trace(parsed, args.comm_range)
        if mismatched:
            flagged.append((name, mismatched))
        results.append(ScenarioResult(index=index, seed=-1, metrics=metrics))
    report = aggregate(results)
    _print_report(report, sys.stdout)
    if args.report:
        _write_report_json(report, args.report)
    for name, steps in flagged:
        print(
            f"VERIFY FAIL {name}: logged path_exists disagrees with positions "
            f"at steps {steps}",
            file=sys.stderr,
        )
    return EXIT_VERIFICATION if flagged else EXIT_OK


def cmd_replay(args) -> int:
    scenarios = read_scenarios(args.scenarios)
    failures = []
    for index, config in enumerate(scenarios):
        path = _trace_path(args.traces, index)
        parsed = load_trace(path)
        mismatch = _replay_mismatch(config, parsed)
        status = mismatch or "ok"
        print(f"scenario {index}: {status}")
        if mismatch:
            failures.append(index)
    return EXIT_VERIFICATION if failures else EXIT_OK


def _replay_mismatch(config: ScenarioConfig, parsed) -> str | None:
    """Re-simulate with the logged actions; any divergence is reported."""
    if len(parsed.steps) != config.horizon:
        return f"{len(parsed.steps)} steps logged, horizon is {config.horizon}"
    actions = actions_from_records(parsed.steps)
    world = World(config)
    world.reset()
    for decision, logged in enumerate(parsed.steps):
        joint = [Action.from_flat(actions[(decision, i)]) for i in world.agent_ids]
        _, reward, _ = world.step(joint)
        scored = world.scored_state
        produced = {a.id: a.position for a in scored.agents}
        produced.update({t.id: t.position for t in scored.targets})
        for node in logged.nodes:
            if produced[node.node_id] != (node.x, node.y):
                return (
                    f"step {logged.step} node {node.node_id}: logged ({node.x}, {node.y}), "
                    f"replayed {produced[node.node_id]}"
                )
        if logged.reward_total != round9(reward.total):
            return (
                f"step {logged.step}: logged reward {logged.reward_total}, "
                f"replayed {round9(reward.total)}"
            )
        if logged.path_exists != scored.graph.path_exists(world.t1_id, world.t2_id):
            return f"step {logged.step}: path flag mismatch"
    return None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handlers = {"gen": cmd_gen, "run": cmd_run, "eval": cmd_eval, "replay": cmd_replay}
    try:
        return handlers[args.command](args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (TraceFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
