"""Wire format for federated updates and response commands.

Every frame starts with magic "HAFL", a u16 protocol version, and a u8
message type; all integers are little-endian and model parameters travel
as 4-byte IEEE-754 singles. The byte layout is the contract: encode and
decode must round-trip every message bit-exactly.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"HAFL"
VERSION = 1

_PREFIX = struct.Struct("<4sHB")          # magic, version, msg_type
_UPDATE_FIELDS = struct.Struct("<IIII")   # round, client_id, n_samples, param_count
_GLOBAL_FIELDS = struct.Struct("<II")     # round, param_count
_COMMAND_FIELDS = struct.Struct("<IBfQ")  # user_id, kind, intensity, timestamp_ms
_ACK_FIELDS = struct.Struct("<IIB")       # round, client_id, code

MSG_UPDATE = 1
MSG_GLOBAL = 2
MSG_COMMAND = 3
MSG_ACK = 4

U32_MAX = 2 ** 32 - 1
U64_MAX = 2 ** 64 - 1


class ProtocolError(ValueError):
    """Base for every framing or field violation."""


class BadMagicError(ProtocolError):
    pass


class UnsupportedVersionError(ProtocolError):
    pass


class TruncatedFrameError(ProtocolError):
    pass


class FieldOverflowError(ProtocolError):
    """A field value does not fit its wire width or allowed range."""


class AckCode(enum.IntEnum):
    OK = 0
    DUPLICATE = 1
    LATE = 2


class CommandKindCode(enum.IntEnum):
    """Wire codes for response command kinds."""

    NEUTRAL = 0
    SMILE = 1
    SPEAK_REPLY = 2
    GAZE = 3


def _check_u32(value: int, name: str) -> int:
    if not 0 <= value <= U32_MAX:
        raise FieldOverflowError(f"{name}={value} does not fit u32")
    return value


def _check_u64(value: int, name: str) -> int:
    if not 0 <= value <= U64_MAX:
        raise FieldOverflowError(f"{name}={value} does not fit u64")
    return value


def _as_f32_payload(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim != 1:
        raise ProtocolError("parameter payload must be a flat vector")
    return arr


@dataclass(eq=False)
class UpdateMessage:
    """Client-to-server parameters after local training."""

    round: int
    client_id: int
    n_samples: int
    values: np.ndarray

    def __post_init__(self):
        _check_u32(self.round, "round")
        _check_u32(self.client_id, "client_id")
        _check_u32(self.n_samples, "n_samples")
        self.values = _as_f32_payload(self.values)
        _check_u32(self.values.size, "param_count")

    def __eq__(self, other):
        return (isinstance(other, UpdateMessage)
                and (self.round, self.client_id, self.n_samples)
                == (other.round, other.client_id, other.n_samples)
                and self.values.tobytes() == other.values.tobytes())


@dataclass(eq=False)
class GlobalModelMessage:
    """Server-to-client broadcast of the aggregated parameters."""

    round: int
    values: np.ndarray

    def __post_init__(self):
        _check_u32(self.round, "round")
        self.values = _as_f32_payload(self.values)
        _check_u32(self.values.size, "param_count")

    def __eq__(self, other):
        return (isinstance(other, GlobalModelMessage)
                and self.round == other.round
                and self.values.tobytes() == other.values.tobytes())


@dataclass(frozen=True)
class CommandMessage:
    """Rendered-response instruction for one user's view."""

    user_id: int
    kind: int
    intensity: float
    timestamp_ms: int

    def __post_init__(self):
        _check_u32(self.user_id, "user_id")
        if self.kind not in tuple(CommandKindCode):
            raise FieldOverflowError(f"kind={self.kind} outside 0..3")
        if not 0.0 <= self.intensity <= 1.0:
            raise FieldOverflowError(f"intensity={self.intensity} outside [0, 1]")
        _check_u64(self.timestamp_ms, "timestamp_ms")


@dataclass(frozen=True)
class AckMessage:
    round: int
    client_id: int
    code: int

    def __post_init__(self):
        _check_u32(self.round, "round")
        _check_u32(self.client_id, "client_id")
        if self.code not in tuple(AckCode):
            raise FieldOverflowError(f"ack code={self.code} unknown")


Message = UpdateMessage | GlobalModelMessage | CommandMessage | AckMessage


def encode(msg: Message) -> bytes:
    if isinstance(msg, UpdateMessage):
        head = _PREFIX.pack(MAGIC, VERSION, MSG_UPDATE) + _UPDATE_FIELDS.pack(
            msg.round, msg.client_id, msg.n_samples, msg.values.size)
        return head + msg.values.astype("<f4").tobytes()
    if isinstance(msg, GlobalModelMessage):
        head = _PREFIX.pack(MAGIC, VERSION, MSG_GLOBAL) + _GLOBAL_FIELDS.pack(
            msg.round, msg.values.size)
        return head + msg.values.astype("<f4").tobytes()
    if isinstance(msg, CommandMessage):
        return _PREFIX.pack(MAGIC, VERSION, MSG_COMMAND) + _COMMAND_FIELDS.pack(
            msg.user_id, msg.kind, msg.intensity, msg.timestamp_ms)
    if isinstance(msg, AckMessage):
        return _PREFIX.pack(MAGIC, VERSION, MSG_ACK) + _ACK_FIELDS.pack(
            msg.round, msg.client_id, msg.code)
    raise ProtocolError(f"cannot encode {type(msg).__name__}")


def _parse_prefix(data: bytes) -> int:
    if len(data) < _PREFIX.size:
        raise TruncatedFrameError(f"frame prefix needs {_PREFIX.size} bytes, got {len(data)}")
    magic, version, msg_type = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported protocol version {version}")
    return msg_type


def _payload(data: bytes, offset: int, param_count: int) -> np.ndarray:
    need = 4 * param_count
    body = data[offset:offset + need]
    if len(body) != need:
        raise TruncatedFrameError(
            f"payload needs {need} bytes, got {len(body)}")
    return np.frombuffer(body, dtype="<f4").copy()


def _fixed(data: bytes, fields: struct.Struct):
    if len(data) < _PREFIX.size + fields.size:
        raise TruncatedFrameError("frame shorter than its fixed fields")
    return fields.unpack_from(data, _PREFIX.size)


def decode(data: bytes) -> Message:
    """Parse one complete frame. The frame must contain exactly one
    message; trailing bytes are a framing error."""
    msg_type = _parse_prefix(data)
    if msg_type == MSG_UPDATE:
        rnd, client_id, n_samples, param_count = _fixed(data, _UPDATE_FIELDS)
        values = _payload(data, _PREFIX.size + _UPDATE_FIELDS.size, param_count)
        expected = _PREFIX.size + _UPDATE_FIELDS.size + 4 * param_count
        msg: Message = UpdateMessage(rnd, client_id, n_samples, values)
    elif msg_type == MSG_GLOBAL:
        rnd, param_count = _fixed(data, _GLOBAL_FIELDS)
        values = _payload(data, _PREFIX.size + _GLOBAL_FIELDS.size, param_count)
        expected = _PREFIX.size + _GLOBAL_FIELDS.size + 4 * param_count
        msg = GlobalModelMessage(rnd, values)
    elif msg_type == MSG_COMMAND:
        user_id, kind, intensity, timestamp_ms = _fixed(data, _COMMAND_FIELDS)
        expected = _PREFIX.size + _COMMAND_FIELDS.size
        msg = CommandMessage(user_id, kind, float(intensity), timestamp_ms)
    elif msg_type == MSG_ACK:
        rnd, client_id, code = _fixed(data, _ACK_FIELDS)
        expected = _PREFIX.size + _ACK_FIELDS.size
        msg = AckMessage(rnd, client_id, code)
    else:
        raise ProtocolError(f"unknown message type {msg_type}")
    if len(data) != expected:
        raise ProtocolError(
            f"frame is {len(data)} bytes, expected {expected}")
    return msg


def read_message(transport) -> Message:
    """Read exactly one frame from an ordered byte stream.

    A clean end-of-stream between frames propagates as the transport's
    closed error; end-of-stream inside a frame is a truncation error.
    """
    from .transport import TransportClosedError

    prefix = transport.recv_exact(_PREFIX.size)
    msg_type = _parse_prefix(prefix)
    try:
        if msg_type == MSG_UPDATE:
            fixed = transport.recv_exact(_UPDATE_FIELDS.size)
            rnd, client_id, n_samples, param_count = _UPDATE_FIELDS.unpack(fixed)
            body = transport.recv_exact(4 * param_count) if param_count else b""
            return UpdateMessage(rnd, client_id, n_samples,
                                 np.frombuffer(body, dtype="<f4").copy())
        if msg_type == MSG_GLOBAL:
            fixed = transport.recv_exact(_GLOBAL_FIELDS.size)
            rnd, param_count = _GLOBAL_FIELDS.unpack(fixed)
            body = transport.recv_exact(4 * param_count) if param_count else b""
            return GlobalModelMessage(rnd, np.frombuffer(body, dtype="<f4").copy())
        if msg_type == MSG_COMMAND:
            fields = _COMMAND_FIELDS.unpack(transport.recv_exact(_COMMAND_FIELDS.size))
            user_id, kind, intensity, timestamp_ms = fields
            return CommandMessage(user_id, kind, float(intensity), timestamp_ms)
        if msg_type == MSG_ACK:
            rnd, client_id, code = _ACK_FIELDS.unpack(
                transport.recv_exact(_ACK_FIELDS.size))
            return AckMessage(rnd, client_id, code)
    except TransportClosedError as exc:
        raise TruncatedFrameError(f"stream ended inside a frame: {exc}") from exc
    raise ProtocolError(f"unknown message type {msg_type}")
