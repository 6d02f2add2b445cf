"""Remote-policy wire protocol, version "bridgenet/1".

Newline-delimited messages over a TCP stream; each line is a type token,
one space, and a JSON object (see PROTOCOL.md for the field tables).
The harness is the client. Per decision round it sends one ``obs`` line
per agent (agent id order, each carrying that agent's full observation
stack) and then awaits one ``action`` line per agent, so simultaneity
matches the in-process path exactly.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
from typing import Callable

from .actions import Action
from .env import Observation, ObservationStack, WorldState
from .scenario import ScenarioConfig, config_to_record

PROTOCOL_VERSION = "bridgenet/1"
DEFAULT_TIMEOUT = 5.0


class ProtocolError(RuntimeError):
    """Peer violated the wire protocol (bad message, bad action, bad version)."""


class VersionMismatchError(ProtocolError):
    """Peer speaks a different protocol version; session refused."""


class PolicySessionError(ProtocolError):
    """Remote peer timed out or disconnected; the episode is aborted."""


def encode_observation(o: Observation) -> dict:
    """Plain-data frame: rows follow the feature-table column order
    (node type, id, coordinates, action, T1 coordinates, T2 coordinates)."""
    return {
        "ego": o.ego,
        "step": o.step_index,
        "rows": [
            [r.node_type, r.node_id, r.coord[0], r.coord[1], r.action,
             r.t1_coord[0], r.t1_coord[1], r.t2_coord[0], r.t2_coord[1]]
            for r in o.rows
        ],
        "edges": [[u, v] for u, v in o.local_edges],
    }


def encode_stack(stack: ObservationStack) -> list[dict]:
    return [encode_observation(o) for o in stack.frames]


def _send_line(sock: socket.socket, msg_type: str, payload: dict) -> None:
    line = f"{msg_type} {json.dumps(payload)}\n"
    try:
        sock.sendall(line.encode("utf-8"))
    except (TimeoutError, OSError) as exc:
        raise PolicySessionError(f"send failed, episode aborted: {exc}") from exc


def _parse_line(raw: bytes) -> tuple[str, dict]:
    text = raw.decode("utf-8").rstrip("\n")
    token, _, body = text.partition(" ")
    try:
        payload = json.loads(body) if body else {}
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"unparseable message {text!r}") from exc
    if not isinstance(payload, dict):
        raise ProtocolError(f"message body must be a JSON object, got {text!r}")
    return token, payload


class RemotePolicy:
    """Client session against a remote policy server."""

    def __init__(self, address: str, timeout: float = DEFAULT_TIMEOUT):
        host, _, port = address.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"address must be host:port, got {address!r}")
        try:
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
        except OSError as exc:
            raise PolicySessionError(f"cannot connect to policy at {address}: {exc}") from exc
        self._sock.settimeout(timeout)
        self._reader = self._sock.makefile("rb")
        self._closed = False
        _send_line(self._sock, "hello", {"version": PROTOCOL_VERSION})
        token, payload = self._read()
        if token != "hello":
            self.close()
            raise ProtocolError(f"expected hello, got {token!r}")
        if payload.get("version") != PROTOCOL_VERSION:
            self.close()
            raise VersionMismatchError(
                f"peer version {payload.get('version')!r}, need {PROTOCOL_VERSION!r}"
            )

    def begin(self, scenario: ScenarioConfig) -> None:
        _send_line(self._sock, "config", {"scenario": config_to_record(scenario)})
        token, payload = self._read()
        if token != "config" or payload.get("ok") is not True:
            raise ProtocolError(f"config not acknowledged: {token} {payload}")

    def decide(self, state: WorldState, stacks: dict[int, ObservationStack]) -> list[Action]:
        agent_ids = [a.id for a in state.agents]
        step = state.step_index
        for i in agent_ids:
            _send_line(self._sock, "obs", {"agent": i, "step": step, "frames": encode_stack(stacks[i])})
        replies: dict[int, int] = {}
        for _ in agent_ids:
            token, payload = self._read()
            if token != "action":
                raise ProtocolError(f"expected action, got {token!r}")
            agent = payload.get("agent")
            if agent not in agent_ids or agent in replies:
                raise ProtocolError(f"action for unexpected agent {agent} at step {step}")
            if payload.get("step") != step:
                raise ProtocolError(
                    f"agent {agent}: action for step {payload.get('step')}, expected {step}"
                )
            code = payload.get("action")
            if not isinstance(code, int) or not 0 <= code <= 8:
                raise ProtocolError(
                    f"agent {agent} at step {step}: action {code!r} outside 0..8"
                )
            replies[agent] = code
        return [Action.from_flat(replies[i]) for i in agent_ids]

    def finish(self) -> None:
        if self._closed:
            return
        try:
            _send_line(self._sock, "bye", {})
            self._read()
        except ProtocolError:
            pass
        finally:
            self.close()

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._reader.close()
            self._sock.close()

    def _read(self) -> tuple[str, dict]:
        try:
            raw = self._reader.readline()
        except (TimeoutError, OSError) as exc:
            raise PolicySessionError(f"no reply from policy, episode aborted: {exc}") from exc
        if not raw:
            raise PolicySessionError("policy disconnected, episode aborted")
        return _parse_line(raw)


def remote_policy_session(address: str, timeout: float = DEFAULT_TIMEOUT) -> RemotePolicy:
    """Connect and complete the version handshake."""
    return RemotePolicy(address, timeout=timeout)


# A server-side policy maps (agent id, decision step, stack frames, scenario
# record) to a flat action code.
PolicyFn = Callable[[int, int, list[dict], dict | None], int]


def hold_policy(agent: int, step: int, frames: list[dict], scenario: dict | None) -> int:
    return 4


def replay_policy(actions: dict[tuple[int, int], int]) -> PolicyFn:
    """Serve pre-recorded actions keyed by (decision step, agent id)."""

    def fn(agent: int, step: int, frames: list[dict], scenario: dict | None) -> int:
        return actions[(step, agent)]

    return fn


def actions_from_records(records) -> dict[tuple[int, int], int]:
    """Recover (decision step, agent id) -> action from trace step records.

    The record at step s logs the actions that produced step s, i.e. the
    decision taken at step s - 1.
    """
    out: dict[tuple[int, int], int] = {}
    for rec in records:
        for node in rec.nodes:
            if node.node_type == "A":
                out[(rec.step - 1, node.node_id)] = node.action
    return out


class _PolicyHandler(socketserver.StreamRequestHandler):
    def handle(self):
        scenario: dict | None = None
        while True:
            raw = self.rfile.readline()
            if not raw:
                return
            try:
                token, payload = _parse_line(raw)
            except ProtocolError:
                return  # malformed client; drop the connection
            if token == "hello":
                self._reply("hello", {"version": PROTOCOL_VERSION})
            elif token == "config":
                scenario = payload.get("scenario")
                self._reply("config", {"ok": True})
            elif token == "obs":
                code = self.server.policy_fn(
                    payload.get("agent"), payload.get("step"), payload.get("frames", []), scenario
                )
                self._reply("action", {"agent": payload.get("agent"), "step": payload.get("step"), "action": code})
            elif token == "bye":
                self._reply("bye", {})
                return
            else:
                return

    def _reply(self, msg_type: str, payload: dict) -> None:
        self.wfile.write(f"{msg_type} {json.dumps(payload)}\n".encode("utf-8"))
        self.wfile.flush()


class PolicyServer:
    """Threaded TCP server answering decision rounds with a policy function.

    Useful as a scripted peer in tests and as the skeleton for hosting an
    external (e.g. learned) policy.
    """

    def __init__(self, policy_fn: PolicyFn, host: str = "127.0.0.1", port: int = 0):
        self._server = socketserver.ThreadingTCPServer((host, port), _PolicyHandler, bind_and_activate=True)
        self._server.daemon_threads = True
        self._server.policy_fn = policy_fn
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self._server.server_address[:2]
        return f"{host}:{port}"

    def start(self) -> "PolicyServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "PolicyServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
