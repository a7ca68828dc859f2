"""Reliable byte-stream transports for the wire protocol.

Only three capabilities are required: ordered send, exact-length receive,
and close. A socketpair serves in-process tests; TCP loopback serves the
integration path. Both directions of one transport may be used from
different threads, but each direction belongs to a single thread.
"""
from __future__ import annotations

import socket


class TransportClosedError(ConnectionError):
    """The peer closed the stream. `received` carries how many bytes of
    the pending read arrived before the close."""

    def __init__(self, message: str, received: int = 0):
        super().__init__(message)
        self.received = received


class StreamTransport:
    def __init__(self, sock: socket.socket):
        self._sock = sock

    def send_all(self, data: bytes) -> None:
        try:
            self._sock.sendall(data)
        except (BrokenPipeError, ConnectionResetError, OSError) as exc:
            raise TransportClosedError(f"send failed: {exc}") from exc

    def recv_exact(self, n: int) -> bytes:
        chunks = []
        got = 0
        while got < n:
            try:
                chunk = self._sock.recv(n - got)
            except (ConnectionResetError, OSError) as exc:
                raise TransportClosedError(f"receive failed: {exc}", got) from exc
            if not chunk:
                raise TransportClosedError(
                    f"stream closed after {got} of {n} bytes", got)
            chunks.append(chunk)
            got += len(chunk)
        return b"".join(chunks)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def memory_pair() -> tuple[StreamTransport, StreamTransport]:
    """Two connected transports in one process."""
    a, b = socket.socketpair()
    return StreamTransport(a), StreamTransport(b)


class TcpListener:
    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen()

    @property
    def port(self) -> int:
        return self._sock.getsockname()[1]

    def accept(self) -> StreamTransport:
        conn, _ = self._sock.accept()
        return StreamTransport(conn)

    def close(self) -> None:
        self._sock.close()


def connect(host: str, port: int, timeout_s: float = 10.0) -> StreamTransport:
    sock = socket.create_connection((host, port), timeout=timeout_s)
    sock.settimeout(None)
    return StreamTransport(sock)
