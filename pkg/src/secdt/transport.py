"""Party-to-party channels with exact round, byte, and simulated-time accounting.

Round convention (normative for every protocol in this package):

  * one `exchange` (both parties send, then both receive) costs ONE round;
  * one dependent one-way flight (`send_flight`/`recv_flight`) costs ONE round;
  * independent payloads inside the same flight are concatenated and cost no
    extra round.

Bytes are counted on send, payload only. Elapsed time is a virtual clock, not
wall time: receiving a message sets the local clock to
max(own clock, peer departure + latency + payload_bits / bandwidth), so
transcripts are deterministic for a fixed seed regardless of host speed.

Two transports share the accounting code: an in-memory queue pair (normative)
and a framed TCP socket. TCP frames are {u32 payload length, u8 phase tag,
payload}, little-endian; they carry no clock field, so in TCP mode latency is
charged from the local clock per received flight.
"""
from __future__ import annotations

import queue
import socket
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ChannelClosedError, DesyncError, FormatError, UsageError

DEFAULT_TIMEOUT = 30.0

_LEN = struct.Struct("<I")
_FRAME = struct.Struct("<IB")


def pack_arrays(*arrays: np.ndarray) -> bytes:
    """Serialize arrays as length-prefixed little-endian vectors."""
    parts = []
    for a in arrays:
        a = np.ascontiguousarray(a)
        parts.append(_LEN.pack(a.size))
        parts.append(a.astype(a.dtype.newbyteorder("<"), copy=False).tobytes())
    return b"".join(parts)


def unpack_arrays(buf: bytes, dtypes) -> list[np.ndarray]:
    """Inverse of pack_arrays; dtypes lists the expected element type per vector."""
    out = []
    off = 0
    for dt in dtypes:
        dt = np.dtype(dt)
        if off + _LEN.size > len(buf):
            raise FormatError("payload truncated: missing vector length")
        (count,) = _LEN.unpack_from(buf, off)
        off += _LEN.size
        nbytes = count * dt.itemsize
        if off + nbytes > len(buf):
            raise FormatError("payload truncated: missing vector body")
        out.append(np.frombuffer(buf, dtype=dt.newbyteorder("<"), count=count, offset=off).astype(dt))
        off += nbytes
    if off != len(buf):
        raise FormatError(f"payload has {len(buf) - off} trailing bytes")
    return out


class _PhaseAcc:
    __slots__ = ("rounds", "bytes", "messages", "clock_start", "clock_end")

    def __init__(self, clock_start: float):
        self.rounds = 0
        self.bytes = 0
        self.messages = 0
        self.clock_start = clock_start
        self.clock_end = clock_start


class Recorder:
    """Per-endpoint accounting: phase-labelled counters plus the virtual clock."""

    def __init__(self, party: int, latency_ms: float = 0.0, bandwidth_mbps: float | None = None):
        if party not in (0, 1):
            raise UsageError(f"party must be 0 or 1, got {party}")
        if latency_ms < 0:
            raise UsageError("latency must be nonnegative")
        if bandwidth_mbps is not None and bandwidth_mbps <= 0:
            raise UsageError("bandwidth must be positive")
        self.party = party
        self.latency_ms = float(latency_ms)
        self.bandwidth_mbps = bandwidth_mbps
        self.clock_ms = 0.0
        self._phases: dict[str, _PhaseAcc] = {}
        self._order: list[str] = []
        self.begin_phase("protocol")

    def begin_phase(self, label: str) -> None:
        if label in self._phases:
            raise UsageError(f"phase {label!r} already recorded")
        self._seal()
        self._phases[label] = _PhaseAcc(self.clock_ms)
        self._order.append(label)

    def _seal(self) -> None:
        if self._order:
            self._phases[self._order[-1]].clock_end = self.clock_ms

    @property
    def current_phase(self) -> str:
        return self._order[-1]

    @property
    def phase_index(self) -> int:
        return len(self._order) - 1

    def _acc(self) -> _PhaseAcc:
        return self._phases[self._order[-1]]

    def on_send(self, nbytes: int) -> None:
        acc = self._acc()
        acc.bytes += nbytes
        acc.messages += 1

    def transit_ms(self, nbytes: int) -> float:
        cost = self.latency_ms
        if self.bandwidth_mbps is not None:
            cost += (nbytes * 8) / (self.bandwidth_mbps * 1e6) * 1e3
        return cost

    def on_recv(self, nbytes: int, departure_ms: float) -> None:
        arrival = departure_ms + self.transit_ms(nbytes)
        if arrival > self.clock_ms:
            self.clock_ms = arrival
        self._seal()

    def on_round(self) -> None:
        self._acc().rounds += 1
        self._seal()

    def finish(self) -> None:
        self._seal()

    def snapshot(self):
        # (label, rounds, bytes, messages, clock_start, clock_end) per phase
        return [
            (lbl, a.rounds, a.bytes, a.messages, a.clock_start, a.clock_end)
            for lbl, a in ((l, self._phases[l]) for l in self._order)
        ]

    @property
    def total_rounds(self) -> int:
        return sum(a.rounds for a in self._phases.values())

    @property
    def total_bytes(self) -> int:
        return sum(a.bytes for a in self._phases.values())


class Endpoint:
    """One party's end of a reliable FIFO duplex channel."""

    def __init__(self, party: int, recorder: Recorder, timeout: float = DEFAULT_TIMEOUT):
        self.party = party
        self.recorder = recorder
        self.timeout = timeout

    # transport-specific primitives
    def _send_raw(self, tag: int, departure_ms: float, payload: bytes) -> None:
        raise NotImplementedError

    def _recv_raw(self):
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError

    def begin_phase(self, label: str) -> None:
        self.recorder.begin_phase(label)

    def _send(self, payload: bytes) -> None:
        self.recorder.on_send(len(payload))
        self._send_raw(self.recorder.phase_index & 0xFF, self.recorder.clock_ms, payload)

    def _recv(self) -> bytes:
        tag, departure, payload = self._recv_raw()
        if tag != self.recorder.phase_index & 0xFF:
            raise DesyncError(
                f"party {self.party} expected phase tag "
                f"{self.recorder.phase_index & 0xFF}, peer sent {tag}"
            )
        self.recorder.on_recv(len(payload), departure)
        return payload

    def exchange(self, payload: bytes) -> bytes:
        """Send to the peer and receive the peer's payload: one round."""
        self._send(payload)
        data = self._recv()
        self.recorder.on_round()
        return data

    def send_flight(self, payload: bytes) -> None:
        """One-way dependent flight, sender half: one round."""
        self._send(payload)
        self.recorder.on_round()

    def recv_flight(self) -> bytes:
        """One-way dependent flight, receiver half: one round."""
        data = self._recv()
        self.recorder.on_round()
        return data


class _MemPair:
    def __init__(self):
        self.queues = (queue.SimpleQueue(), queue.SimpleQueue())
        self.closed = False

    def close(self):
        self.closed = True
        for q in self.queues:
            q.put(None)


class _MemEndpoint(Endpoint):
    def __init__(self, party, recorder, pair: _MemPair, timeout):
        super().__init__(party, recorder, timeout)
        self._pair = pair
        self._inbox = pair.queues[party]
        self._outbox = pair.queues[1 - party]

    def _send_raw(self, tag, departure_ms, payload):
        if self._pair.closed:
            raise ChannelClosedError(f"party {self.party}: channel is closed")
        self._outbox.put((tag, departure_ms, payload))

    def _recv_raw(self):
        try:
            item = self._inbox.get(timeout=self.timeout)
        except queue.Empty:
            raise DesyncError(
                f"party {self.party} timed out after {self.timeout}s waiting for "
                f"the peer in phase {self.recorder.current_phase!r}"
            ) from None
        if item is None:
            raise ChannelClosedError(f"party {self.party}: peer closed the channel")
        return item

    def close(self):
        self._pair.close()


def memory_channel_pair(
    latency_ms: float = 0.0,
    bandwidth_mbps: float | None = None,
    timeout: float = DEFAULT_TIMEOUT,
) -> tuple[Endpoint, Endpoint]:
    """Build a connected in-memory endpoint pair for two threads."""
    pair = _MemPair()
    ep0 = _MemEndpoint(0, Recorder(0, latency_ms, bandwidth_mbps), pair, timeout)
    ep1 = _MemEndpoint(1, Recorder(1, latency_ms, bandwidth_mbps), pair, timeout)
    return ep0, ep1


class _TcpEndpoint(Endpoint):
    def __init__(self, party, recorder, sock: socket.socket, timeout):
        super().__init__(party, recorder, timeout)
        self._sock = sock
        sock.settimeout(timeout)

    def _send_raw(self, tag, departure_ms, payload):
        # frame carries no clock field; latency is charged locally on receive
        try:
            self._sock.sendall(_FRAME.pack(len(payload), tag) + payload)
        except OSError as exc:
            raise ChannelClosedError(f"party {self.party}: send failed: {exc}") from exc

    def _read_exact(self, n: int) -> bytes:
        chunks = []
        got = 0
        while got < n:
            try:
                chunk = self._sock.recv(n - got)
            except socket.timeout:
                raise DesyncError(
                    f"party {self.party} timed out waiting for the peer"
                ) from None
            except OSError as exc:
                raise ChannelClosedError(f"party {self.party}: recv failed: {exc}") from exc
            if not chunk:
                raise ChannelClosedError(f"party {self.party}: peer closed the connection")
            chunks.append(chunk)
            got += len(chunk)
        return b"".join(chunks)

    def _recv_raw(self):
        header = self._read_exact(_FRAME.size)
        length, tag = _FRAME.unpack(header)
        payload = self._read_exact(length)
        return tag, self.recorder.clock_ms, payload

    def close(self):
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def tcp_endpoint(
    party: int,
    host: str,
    port: int,
    latency_ms: float = 0.0,
    bandwidth_mbps: float | None = None,
    timeout: float = DEFAULT_TIMEOUT,
) -> Endpoint:
    """Connect one party over TCP. Party 0 listens, party 1 dials."""
    if party == 0:
        srv = socket.create_server((host, port))
        srv.settimeout(timeout)
        try:
            sock, _ = srv.accept()
        except socket.timeout:
            srv.close()
            raise DesyncError("party 0 timed out waiting for party 1 to connect") from None
        finally:
            srv.close()
    else:
        sock = socket.create_connection((host, port), timeout=timeout)
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return _TcpEndpoint(party, Recorder(party, latency_ms, bandwidth_mbps), sock, timeout)


@dataclass(frozen=True)
class PhaseRecord:
    phase: str
    rounds: int
    bytes_p0: int
    bytes_p1: int
    messages: int
    elapsed_ms: float


@dataclass
class Transcript:
    """Merged two-party accounting, one record per protocol phase."""

    phases: tuple[PhaseRecord, ...]
    meta: dict = field(default_factory=dict)

    def phase(self, label: str) -> PhaseRecord:
        for rec in self.phases:
            if rec.phase == label:
                return rec
        raise UsageError(f"no phase {label!r} in transcript")

    @property
    def total_rounds(self) -> int:
        return sum(r.rounds for r in self.phases)

    @property
    def total_bytes(self) -> int:
        return sum(r.bytes_p0 + r.bytes_p1 for r in self.phases)

    @property
    def total_elapsed_ms(self) -> float:
        return sum(r.elapsed_ms for r in self.phases)

    def to_csv(self) -> str:
        lines = ["phase,rounds,bytes_p0,bytes_p1,messages"]
        for r in self.phases:
            lines.append(f"{r.phase},{r.rounds},{r.bytes_p0},{r.bytes_p1},{r.messages}")
        lines.append(
            "total,%d,%d,%d,%d"
            % (
                self.total_rounds,
                sum(r.bytes_p0 for r in self.phases),
                sum(r.bytes_p1 for r in self.phases),
                sum(r.messages for r in self.phases),
            )
        )
        return "\n".join(lines) + "\n"


def merge_transcripts(rec0: Recorder, rec1: Recorder) -> Transcript:
    """Combine the two endpoints' recorders, checking they agree."""
    rec0.finish()
    rec1.finish()
    s0 = rec0.snapshot()
    s1 = rec1.snapshot()
    if [x[0] for x in s0] != [x[0] for x in s1]:
        raise DesyncError(
            f"phase sequences differ: {[x[0] for x in s0]} vs {[x[0] for x in s1]}"
        )
    records = []
    for (lbl, r0, b0, m0, cs0, ce0), (_, r1, b1, m1, cs1, ce1) in zip(s0, s1):
        if r0 != r1:
            raise DesyncError(f"phase {lbl!r}: round counts differ ({r0} vs {r1})")
        if lbl == "protocol" and r0 == 0 and b0 == 0 and b1 == 0:
            continue  # implicit setup phase never used
        elapsed = max(ce0, ce1) - max(cs0, cs1)
        records.append(PhaseRecord(lbl, r0, b0, b1, m0 + m1, elapsed))
    return Transcript(tuple(records))
