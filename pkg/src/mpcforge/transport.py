"""Party-to-party messaging with byte/round accounting and bandwidth caps.

Frame layout: 4-byte big-endian payload length, 1-byte message type, payload.
Counters record framed sizes, so accounting is backend-independent.
"""

from __future__ import annotations

import collections
import hashlib
import queue
import socket
import struct
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from .errors import ConfigError, InconsistentBroadcast, TransportFailure, TransportTimeout

FRAME_HEADER = 5


class MsgType:
    DATA = 0
    OPEN = 1
    RESHARE = 2
    INPUT = 3
    ECHO = 4
    OT = 5
    CHECK = 6
    COMMIT = 7
    RAW = 8


def frame(mtype: int, payload: bytes) -> bytes:
    return struct.pack(">IB", len(payload), mtype) + payload


def frame_size(payload_len: int) -> int:
    return FRAME_HEADER + payload_len


@dataclass
class NetMetrics:
    n: int
    bytes_sent: dict = field(default_factory=lambda: collections.Counter())
    messages: int = 0
    rounds: int = 0
    dealer_bytes: int = 0
    wall_clock: float = 0.0

    @property
    def global_bytes(self) -> int:
        return sum(self.bytes_sent.values())

    def per_party(self) -> list[int]:
        out = [0] * self.n
        for (src, _dst), b in self.bytes_sent.items():
            out[src] += b
        return out

    def snapshot(self) -> tuple[int, int, int]:
        return self.global_bytes, self.rounds, self.messages


GBPS = 1_000_000_000


@dataclass(frozen=True)
class BandwidthCap:
    """Token bucket: ``rate`` in bits/second, ``burst`` in bytes. rate None means unlimited."""

    rate: float | None = None
    burst: int | None = None

    PRESETS = {"unlimited": None, "1g": 1 * GBPS, "5g": 5 * GBPS, "10g": 10 * GBPS, "20g": 20 * GBPS}

    def __post_init__(self):
        if self.rate is not None:
            if self.rate <= 0:
                raise ConfigError("bandwidth rate must be positive")
            if self.burst is not None and self.burst < FRAME_HEADER:
                raise ConfigError(f"burst {self.burst} B cannot hold one frame header")

    @classmethod
    def preset(cls, name: str) -> "BandwidthCap":
        try:
            rate = cls.PRESETS[name.lower()]
        except KeyError:
            raise ConfigError(f"unknown bandwidth preset {name!r}") from None
        return cls(rate)

    @property
    def unlimited(self) -> bool:
        return self.rate is None

    @property
    def bytes_per_second(self) -> float:
        return self.rate / 8

    @property
    def effective_burst(self) -> int:
        # default: one millisecond of line rate
        return self.burst if self.burst is not None else max(FRAME_HEADER, int(self.bytes_per_second / 1000))


class TokenBucket:
    def __init__(self, cap: BandwidthCap, clock=time.perf_counter, sleep=time.sleep):
        self.cap = cap
        self._clock = clock
        self._sleep = sleep
        self._tokens = float(cap.effective_burst)
        self._last = clock()

    def _refill(self) -> None:
        now = self._clock()
        self._tokens = min(self.cap.effective_burst, self._tokens + (now - self._last) * self.cap.bytes_per_second)
        self._last = now

    def consume(self, nbytes: int) -> None:
        burst = self.cap.effective_burst
        remaining = nbytes
        while remaining > 0:
            chunk = min(remaining, burst)
            self._refill()
            if self._tokens < chunk:
                self._sleep((chunk - self._tokens) / self.cap.bytes_per_second)
                self._refill()
            self._tokens -= chunk
            remaining -= chunk


Tamper = Callable[[int, int, int, bytes], bytes]


class Network:
    """Base class: accounting, throttling, transcript. Backends move the frames."""

    def __init__(self, n: int, cap: BandwidthCap | None = None, record: bool = True):
        self.n = n
        self.metrics = NetMetrics(n)
        self.cap = cap or BandwidthCap()
        self._buckets = {} if self.cap.unlimited else {i: TokenBucket(self.cap) for i in range(n)}
        self.record = record
        self.transcript: list[tuple[int, int, int, int, int]] = []
        self._content = hashlib.sha256()
        self.tamper: Tamper | None = None
        self.deadline: float | None = None
        self._lock = threading.Lock()
        self._t0 = time.perf_counter()

    def throttle(self, cap: BandwidthCap) -> None:
        if self.metrics.messages:
            raise ConfigError("set the bandwidth cap before the session starts")
        self.cap = cap
        self._buckets = {} if cap.unlimited else {i: TokenBucket(cap) for i in range(self.n)}

    def _check_deadline(self) -> None:
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise TransportTimeout("run exceeded its wall-clock budget")

    def send(self, src: int, dst: int, mtype: int, payload: bytes) -> None:
        if src == dst:
            raise TransportFailure("a party does not message itself")
        self._check_deadline()
        if self.tamper is not None:
            payload = self.tamper(src, dst, mtype, payload)
        data = frame(mtype, payload)
        if self._buckets:
            self._buckets[src].consume(len(data))
        with self._lock:
            self.metrics.bytes_sent[(src, dst)] += len(data)
            self.metrics.messages += 1
            if self.record:
                self.transcript.append((self.metrics.rounds, src, dst, mtype, len(payload)))
                self._content.update(data)
        self._deliver(src, dst, data)

    def recv(self, src: int, dst: int) -> tuple[int, bytes]:
        """Next frame on the src->dst channel, read at dst."""
        data = self._receive(src, dst)
        length, mtype = struct.unpack(">IB", data[:FRAME_HEADER])
        return mtype, data[FRAME_HEADER:FRAME_HEADER + length]

    def recv_payload(self, src: int, dst: int) -> bytes:
        return self.recv(src, dst)[1]

    def broadcast(self, src: int, mtype: int, payload: bytes) -> None:
        for dst in range(self.n):
            if dst != src:
                self.send(src, dst, mtype, payload)

    def exchange_all(self, mtype: int, payloads: list[bytes], echo: bool = False) -> list[list[bytes]]:
        """Every party broadcasts its payload; one round. Returns views[receiver][sender].

        With ``echo`` a second round exchanges digests of each receiver's view and
        raises InconsistentBroadcast if any two honest views differ.
        """
        for src in range(self.n):
            self.broadcast(src, mtype, payloads[src])
        views = [[payloads[dst] if src == dst else self.recv_payload(src, dst) for src in range(self.n)]
                 for dst in range(self.n)]
        self.barrier()
        if echo:
            digests = [hashlib.sha256(b"".join(v)).digest()[:16] for v in views]
            self.echo_check(digests)
        return views

    def echo_check(self, digests: list[bytes]) -> None:
        for src in range(self.n):
            self.broadcast(src, MsgType.ECHO, digests[src])
        seen = [[digests[dst] if src == dst else self.recv_payload(src, dst) for src in range(self.n)]
                for dst in range(self.n)]
        self.barrier()
        for row in seen:
            if len(set(row)) > 1:
                raise InconsistentBroadcast("parties saw different broadcast contents")

    def barrier(self) -> None:
        self._check_deadline()
        with self._lock:
            self.metrics.rounds += 1

    def deal(self, nbytes: int) -> None:
        """Account correlated randomness handed out by the trusted dealer."""
        self.metrics.dealer_bytes += nbytes

    def content_digest(self) -> str:
        return self._content.hexdigest()

    def shape(self) -> list[tuple[int, int, int, int, int]]:
        return list(self.transcript)

    def elapsed(self) -> float:
        return time.perf_counter() - self._t0

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # backend hooks
    def _deliver(self, src: int, dst: int, data: bytes) -> None:
        raise NotImplementedError

    def _receive(self, src: int, dst: int) -> bytes:
        raise NotImplementedError


class InMemoryNetwork(Network):
    """Registry of FIFO channels keyed by (sender, receiver)."""

    def __init__(self, n: int, cap: BandwidthCap | None = None, record: bool = True):
        super().__init__(n, cap, record)
        self._queues = {(s, d): collections.deque() for s in range(n) for d in range(n) if s != d}
        self._closed = False

    def _deliver(self, src, dst, data):
        if self._closed:
            raise TransportFailure("network closed")
        self._queues[(src, dst)].append(data)

    def _receive(self, src, dst):
        if self._closed:
            raise TransportFailure("network closed")
        q = self._queues[(src, dst)]
        if not q:
            raise TransportFailure(f"no message pending on channel {src}->{dst}")
        return q.popleft()

    def close(self):
        self._closed = True

    def pending(self) -> int:
        return sum(len(q) for q in self._queues.values())


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise TransportFailure("peer closed the connection")
        buf += chunk
    return bytes(buf)


class _Writer(threading.Thread):
    def __init__(self, sock: socket.socket):
        super().__init__(daemon=True)
        self.sock = sock
        self.queue: queue.Queue = queue.Queue()
        self.error: Exception | None = None

    def run(self):
        while True:
            data = self.queue.get()
            if data is None:
                return
            try:
                self.sock.sendall(data)
            except OSError as exc:
                self.error = exc
                return


class TcpNetwork(Network):
    """Frames travel over real TCP connections between per-party endpoints.

    ``endpoints`` maps party id to (host, port). Each unordered pair shares one
    connection; each direction is an in-order byte stream.
    """

    def __init__(self, endpoints: dict[int, tuple[str, int]] | None = None, n: int | None = None,
                 cap: BandwidthCap | None = None, record: bool = True, timeout: float = 30.0):
        if endpoints is None:
            if n is None:
                raise ConfigError("give endpoints or a party count")
            endpoints = {i: ("127.0.0.1", 0) for i in range(n)}
        n = len(endpoints)
        super().__init__(n, cap, record)
        self.timeout = timeout
        listeners = {}
        for pid, (host, port) in endpoints.items():
            srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            srv.bind((host, port))
            srv.listen(n)
            listeners[pid] = srv
        self.endpoints = {pid: srv.getsockname() for pid, srv in listeners.items()}
        self._socks: dict[tuple[int, int], socket.socket] = {}
        for i in range(n):
            for j in range(i + 1, n):
                client = socket.create_connection(self.endpoints[j], timeout=timeout)
                client.sendall(struct.pack(">H", i))
                server, _ = listeners[j].accept()
                (peer,) = struct.unpack(">H", _recv_exact(server, 2))
                if peer != i:
                    raise TransportFailure("handshake mismatch")
                for s in (client, server):
                    s.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                    s.settimeout(timeout)
                self._socks[(i, j)] = client  # i's end of the i-j link
                self._socks[(j, i)] = server  # j's end
        for srv in listeners.values():
            srv.close()
        self._writers = {key: _Writer(s) for key, s in self._socks.items()}
        for w in self._writers.values():
            w.start()

    def _deliver(self, src, dst, data):
        w = self._writers[(src, dst)]
        if w.error:
            raise TransportFailure(str(w.error))
        w.queue.put(data)

    def _receive(self, src, dst):
        sock = self._socks[(dst, src)]
        try:
            head = _recv_exact(sock, FRAME_HEADER)
            (length,) = struct.unpack(">I", head[:4])
            return head + _recv_exact(sock, length)
        except socket.timeout as exc:
            raise TransportTimeout(f"no frame from {src} within {self.timeout}s") from exc
        except OSError as exc:
            raise TransportFailure(str(exc)) from exc

    def close(self):
        for w in self._writers.values():
            w.queue.put(None)
        for w in self._writers.values():
            w.join(timeout=1)
        for s in self._socks.values():
            try:
                s.close()
            except OSError:
                pass


def make_network(backend: str, n: int, cap: BandwidthCap | None = None, record: bool = True) -> Network:
    if backend == "mem":
        return InMemoryNetwork(n, cap, record)
    if backend == "tcp":
        return TcpNetwork(n=n, cap=cap, record=record)
    raise ConfigError(f"unknown backend {backend!r}")
