"""Aggregator service and edge-client session over the wire protocol.

The aggregator paces rounds with a barrier: broadcast the global model,
collect one update per client until the barrier fills or the deadline
passes, aggregate whatever arrived (sample-weighted, sorted by client
id), and repeat. Stragglers never stall a round beyond its timeout, and
a round with no arrivals carries the previous global model forward.
"""
from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass, field

from .. import fedlearn
from ..fedlearn import ClientDataset, ClientUpdate, FLConfig, ModelParams
from .messages import (
    AckCode,
    AckMessage,
    GlobalModelMessage,
    TruncatedFrameError,
    UpdateMessage,
    encode,
    read_message,
)
from .transport import StreamTransport, TcpListener, TransportClosedError


@dataclass
class RoundBarrier:
    """One round's arrival ledger: which clients have reported, capped at
    the expected population, rejecting duplicates."""

    expected_clients: int
    timeout_ms: float
    round: int
    received: set[int] = field(default_factory=set)

    def __post_init__(self):
        if self.expected_clients < 1:
            raise ValueError("expected_clients must be >= 1")
        if self.timeout_ms < 0:
            raise ValueError("timeout_ms must be non-negative")

    def offer(self, client_id: int) -> bool:
        """Record an arrival; False means the client already reported."""
        if client_id in self.received:
            return False
        self.received.add(client_id)
        return True

    @property
    def full(self) -> bool:
        return len(self.received) >= self.expected_clients


@dataclass(frozen=True)
class RoundLog:
    round: int
    participants: tuple[int, ...]
    duplicates: tuple[int, ...]
    late: tuple[int, ...]
    timed_out: bool


@dataclass(frozen=True)
class AggregatorResult:
    params: ModelParams
    rounds: tuple[RoundLog, ...]


@dataclass(frozen=True)
class ClientSessionResult:
    accuracy_history: tuple[float, ...]
    last_completed_round: int


class ClientSessionError(RuntimeError):
    """The session ended without the server's exit signal."""

    def __init__(self, message: str, last_completed_round: int):
        super().__init__(message)
        self.last_completed_round = last_completed_round


class _Connection:
    def __init__(self, index: int, transport: StreamTransport):
        self.index = index
        self.transport = transport
        self.open = True


def _reader(conn: _Connection, inbox: queue.Queue) -> None:
    while True:
        try:
            msg = read_message(conn.transport)
        except (TransportClosedError, TruncatedFrameError):
            inbox.put(("closed", conn.index, None))
            return
        inbox.put(("msg", conn.index, msg))


def _broadcast(connections: list[_Connection], payload: bytes) -> None:
    for conn in connections:
        if not conn.open:
            continue
        try:
            conn.transport.send_all(payload)
        except TransportClosedError:
            conn.open = False


def aggregator_serve(endpoint: TcpListener | list[StreamTransport],
                     expected_clients: int, timeout_ms: float, rounds: int,
                     initial_params: ModelParams) -> AggregatorResult:
    """Run the full aggregation schedule and return the final global
    parameters plus per-round logs.

    `endpoint` is either a listener (accept exactly expected_clients
    connections first) or pre-connected transports. After the last round
    a global-model frame carrying round == rounds tells clients to exit,
    and every connection is closed.
    """
    if expected_clients < 1:
        raise ValueError("expected_clients must be >= 1")
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    if isinstance(endpoint, TcpListener):
        transports = [endpoint.accept() for _ in range(expected_clients)]
    else:
        transports = list(endpoint)
    connections = [_Connection(i, t) for i, t in enumerate(transports)]
    inbox: queue.Queue = queue.Queue()
    readers = [threading.Thread(target=_reader, args=(c, inbox), daemon=True)
               for c in connections]
    for r in readers:
        r.start()

    layout = initial_params.layout
    global_params = initial_params
    logs: list[RoundLog] = []
    try:
        for rnd in range(rounds):
            _broadcast(connections, encode(
                GlobalModelMessage(rnd, global_params.values)))
            barrier = RoundBarrier(expected_clients, timeout_ms, rnd)
            updates: dict[int, ClientUpdate] = {}
            duplicates: list[int] = []
            late: list[int] = []
            reported: set[int] = set()  # connection indexes heard from
            deadline = time.monotonic() + timeout_ms / 1000.0
            timed_out = False
            while not barrier.full:
                open_idx = {c.index for c in connections if c.open}
                # A dead connection can never report; stop early once
                # every surviving one has.
                if not open_idx or open_idx <= reported:
                    timed_out = True
                    break
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    timed_out = True
                    break
                try:
                    tag, index, msg = inbox.get(timeout=remaining)
                except queue.Empty:
                    timed_out = True
                    break
                if tag == "closed":
                    connections[index].open = False
                    continue
                if not isinstance(msg, UpdateMessage):
                    continue
                if msg.round != rnd:
                    late.append(msg.client_id)
                    continue
                if not barrier.offer(msg.client_id):
                    duplicates.append(msg.client_id)
                    try:
                        connections[index].transport.send_all(encode(
                            AckMessage(rnd, msg.client_id, AckCode.DUPLICATE)))
                    except TransportClosedError:
                        connections[index].open = False
                    continue
                if msg.values.size != layout.param_count or msg.n_samples < 1:
                    barrier.received.discard(msg.client_id)
                    continue
                reported.add(index)
                updates[msg.client_id] = ClientUpdate(
                    client_id=msg.client_id,
                    params=ModelParams(layout, msg.values, version=rnd),
                    n_samples=msg.n_samples, round=rnd)
            if updates:
                global_params = fedlearn.aggregate(list(updates.values()))
            else:
                global_params = ModelParams(layout, global_params.values,
                                            version=rnd + 1)
            logs.append(RoundLog(round=rnd,
                                 participants=tuple(sorted(updates)),
                                 duplicates=tuple(duplicates),
                                 late=tuple(late),
                                 timed_out=timed_out))
        _broadcast(connections, encode(
            GlobalModelMessage(rounds, global_params.values)))
    finally:
        for conn in connections:
            conn.transport.close()
            conn.open = False
        for r in readers:
            r.join(timeout=5.0)
    return AggregatorResult(params=global_params, rounds=tuple(logs))


def client_session(transport: StreamTransport, client_id: int,
                   local_data: ClientDataset, cfg: FLConfig) -> ClientSessionResult:
    """Edge-node loop: wait for each global model, train locally, upload
    the result, and log local accuracy, until the server's exit signal.
    An unexpected disconnect raises with the last completed round."""
    history: list[float] = []
    last_completed = -1
    while True:
        try:
            msg = read_message(transport)
        except (TransportClosedError, TruncatedFrameError) as exc:
            raise ClientSessionError(
                f"server connection lost after round {last_completed}: {exc}",
                last_completed) from exc
        if not isinstance(msg, GlobalModelMessage):
            continue  # duplicate-acks and other frames are informational
        if msg.round >= cfg.rounds:
            break
        global_params = ModelParams(cfg.layout, msg.values, version=msg.round)
        update = fedlearn.client_update(global_params, local_data, cfg)
        transport.send_all(encode(UpdateMessage(
            round=update.round, client_id=client_id,
            n_samples=update.n_samples, values=update.params.values)))
        history.append(fedlearn.evaluate(update.params, local_data))
        last_completed = msg.round
    return ClientSessionResult(tuple(history), last_completed)
