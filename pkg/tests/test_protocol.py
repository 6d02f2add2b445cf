import json
import socket
import threading

import pytest

from bridgenet.env import World
from bridgenet.harness import PolicyEndpoint, run_batch, run_episode
from bridgenet.protocol import (
    PROTOCOL_VERSION,
    PolicyServer,
    PolicySessionError,
    ProtocolError,
    RemotePolicy,
    VersionMismatchError,
    actions_from_records,
    encode_observation,
    hold_policy,
    replay_policy,
)
from bridgenet.scenario import ScenarioConfig, generate


def test_observation_encoding_follows_feature_table_order():
    world = World(ScenarioConfig(seed=9))
    _, stacks = world.reset()
    frame = encode_observation(stacks[0].frames[0])
    assert set(frame) == {"ego", "step", "rows", "edges"}
    assert frame["ego"] == 0
    assert frame["step"] == 0
    for row in frame["rows"]:
        node_type, node_id, x, y, action, t1x, t1y, t2x, t2y = row
        assert node_type in ("A", "T")
        assert isinstance(node_id, int)
    # ego row first
    assert frame["rows"][0][1] == 0


def test_hold_server_keeps_agents_stationary():
    scenario = ScenarioConfig(seed=40, horizon=20)
    with PolicyServer(hold_policy) as server:
        trace, _ = run_episode(PolicyEndpoint("remote", server.address), scenario)
    for rec in trace.records:
        agent_rows = [n for n in rec.nodes if n.node_type == "A"]
        assert [(n.x, n.y) for n in agent_rows] == [(0.1, 0.42), (0.1, 0.52), (0.1, 0.62)]
        assert all(n.action == 4 for n in agent_rows)


def test_out_of_range_action_names_agent_and_step():
    scenario = ScenarioConfig(seed=40, horizon=5)

    def bad_policy(agent, step, frames, config):
        return 9

    with PolicyServer(bad_policy) as server:
        with pytest.raises(ProtocolError, match=r"agent \d+ at step 0: action 9"):
            run_episode(PolicyEndpoint("remote", server.address), scenario)


def test_replayed_heuristic_actions_reproduce_metrics():
    scenarios = generate(55, 3, ScenarioConfig(seed=0, horizon=40))
    local = [run_episode(PolicyEndpoint("heuristic"), s) for s in scenarios]
    script = {
        s.seed: actions_from_records(trace.records)
        for s, (trace, _) in zip(scenarios, local)
    }

    def replay_from_config(agent, step, frames, config):
        return script[config["seed"]][(step, agent)]

    with PolicyServer(replay_from_config) as server:
        endpoint = PolicyEndpoint("remote", server.address)
        remote = [run_episode(endpoint, s) for s in scenarios]

    for (ltrace, lmetrics), (rtrace, rmetrics) in zip(local, remote):
        assert rmetrics == lmetrics
        assert rtrace.records == ltrace.records


def test_replay_policy_helper_serves_mapping():
    fn = replay_policy({(0, 0): 7, (0, 1): 4})
    assert fn(0, 0, [], None) == 7
    assert fn(1, 0, [], None) == 4


def test_remote_sessions_support_parallel_batches():
    scenarios = generate(66, 6, ScenarioConfig(seed=0, horizon=10))
    with PolicyServer(hold_policy) as server:
        endpoint = PolicyEndpoint("remote", server.address)
        serial = run_batch(endpoint, scenarios, parallelism=1)
        parallel = run_batch(endpoint, scenarios, parallelism=6)
    assert serial == parallel
    assert serial.n_failures == 0


def _fake_server(handshake_line):
    """Accept one connection, reply to hello with a canned line, then close."""
    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    srv.bind(("127.0.0.1", 0))
    srv.listen(1)

    def serve():
        conn, _ = srv.accept()
        conn.recv(4096)
        conn.sendall(handshake_line)
        conn.close()

    thread = threading.Thread(target=serve, daemon=True)
    thread.start()
    host, port = srv.getsockname()
    return f"{host}:{port}", srv


def test_version_mismatch_refuses_session():
    address, srv = _fake_server(b'hello {"version": "bridgenet/2"}\n')
    try:
        with pytest.raises(VersionMismatchError, match="bridgenet/2"):
            RemotePolicy(address, timeout=2.0)
    finally:
        srv.close()


def test_non_hello_reply_is_a_protocol_error():
    address, srv = _fake_server(b'action {"agent": 0}\n')
    try:
        with pytest.raises(ProtocolError, match="expected hello"):
            RemotePolicy(address, timeout=2.0)
    finally:
        srv.close()


def test_silent_server_aborts_episode_with_timeout():
    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    srv.bind(("127.0.0.1", 0))
    srv.listen(1)
    host, port = srv.getsockname()
    connections = []
    threading.Thread(target=lambda: connections.append(srv.accept()), daemon=True).start()
    try:
        with pytest.raises(PolicySessionError, match="aborted"):
            RemotePolicy(f"{host}:{port}", timeout=0.3)
    finally:
        srv.close()


def test_unreachable_address_aborts():
    with pytest.raises(PolicySessionError, match="cannot connect"):
        RemotePolicy("127.0.0.1:1", timeout=0.3)


def test_malformed_address_rejected():
    with pytest.raises(ValueError, match="host:port"):
        RemotePolicy("nonsense")


def test_version_constant():
    assert PROTOCOL_VERSION == "bridgenet/1"


def test_session_round_trip_over_json_lines():
    """Drive one raw decision round and check the literal line grammar."""
    scenario = ScenarioConfig(seed=12, horizon=3)
    received = []

    def probe(agent, step, frames, config):
        received.append((agent, step, len(frames), config["seed"]))
        return 4

    with PolicyServer(probe) as server:
        host, port = server.address.split(":")
        sock = socket.create_connection((host, int(port)), timeout=2.0)
        reader = sock.makefile("rb")
        sock.sendall(b'hello {"version": "bridgenet/1"}\n')
        assert json.loads(reader.readline().split(b" ", 1)[1])["version"] == PROTOCOL_VERSION
        sock.sendall(("config " + json.dumps({"scenario": {"seed": 12}}) + "\n").encode())
        assert json.loads(reader.readline().split(b" ", 1)[1])["ok"] is True
        sock.sendall(b'obs {"agent": 2, "step": 0, "frames": [{}, {}]}\n')
        token, body = reader.readline().split(b" ", 1)
        assert token == b"action"
        reply = json.loads(body)
        assert reply == {"agent": 2, "step": 0, "action": 4}
        sock.sendall(b"bye {}\n")
        assert reader.readline().startswith(b"bye")
        sock.close()
    assert received == [(2, 0, 2, 12)]
