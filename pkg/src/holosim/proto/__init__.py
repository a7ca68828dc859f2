"""Wire protocol, transports, and the aggregation service."""
from .messages import (
    MAGIC,
    VERSION,
    AckCode,
    AckMessage,
    BadMagicError,
    CommandKindCode,
    CommandMessage,
    FieldOverflowError,
    GlobalModelMessage,
    ProtocolError,
    TruncatedFrameError,
    UnsupportedVersionError,
    UpdateMessage,
    decode,
    encode,
    read_message,
)
from .service import (
    AggregatorResult,
    ClientSessionError,
    ClientSessionResult,
    RoundBarrier,
    RoundLog,
    aggregator_serve,
    client_session,
)
from .transport import (
    StreamTransport,
    TcpListener,
    TransportClosedError,
    connect,
    memory_pair,
)

__all__ = [
    "MAGIC",
    "VERSION",
    "AckCode",
    "AckMessage",
    "AggregatorResult",
    "BadMagicError",
    "ClientSessionError",
    "ClientSessionResult",
    "CommandKindCode",
    "CommandMessage",
    "FieldOverflowError",
    "GlobalModelMessage",
    "ProtocolError",
    "RoundBarrier",
    "RoundLog",
    "StreamTransport",
    "TcpListener",
    "TransportClosedError",
    "TruncatedFrameError",
    "UnsupportedVersionError",
    "UpdateMessage",
    "aggregator_serve",
    "client_session",
    "connect",
    "decode",
    "encode",
    "memory_pair",
    "read_message",
]
