"""Per-party protocol context and a two-thread driver for in-memory runs."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .dealer import PreprocessedMaterial
from .errors import ChannelClosedError, DesyncError, UsageError
from .ring import Ring
from .transport import (
    DEFAULT_TIMEOUT,
    Endpoint,
    Transcript,
    memory_channel_pair,
    merge_transcripts,
)


@dataclass
class PartySession:
    """Everything one party needs to run a protocol: identity, channel, coins, material."""

    party: int
    endpoint: Endpoint
    ring: Ring
    material: PreprocessedMaterial | None = None
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    def __post_init__(self):
        if self.party != self.endpoint.party:
            raise UsageError("session party does not match its endpoint")
        if self.material is not None and self.material.party != self.party:
            raise UsageError("preprocessed material belongs to the other party")
        if self.material is not None and self.material.ring != self.ring:
            raise UsageError("preprocessed material is for a different ring width")

    def begin_phase(self, label: str) -> None:
        self.endpoint.begin_phase(label)


def run_pair(
    fn0,
    fn1,
    latency_ms: float = 0.0,
    bandwidth_mbps: float | None = None,
    timeout: float = DEFAULT_TIMEOUT,
):
    """Run fn0 and fn1 against a connected endpoint pair in two threads.

    Each fn receives its Endpoint. Returns (result0, result1, transcript).
    If one side fails, the channel is torn down so the peer unblocks, and the
    root-cause error (not the collateral closed-channel one) is re-raised.
    """
    ep0, ep1 = memory_channel_pair(latency_ms, bandwidth_mbps, timeout)
    results: list = [None, None]
    errors: list = [None, None]

    def runner(i, fn, ep):
        try:
            results[i] = fn(ep)
        except BaseException as exc:  # noqa: BLE001 - propagated to the caller below
            errors[i] = exc
            ep.close()

    threads = [
        threading.Thread(target=runner, args=(0, fn0, ep0), daemon=True),
        threading.Thread(target=runner, args=(1, fn1, ep1), daemon=True),
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    live = [e for e in errors if e is not None]
    if live:
        root = [e for e in live if not isinstance(e, (ChannelClosedError, DesyncError))]
        raise (root or live)[0]
    return results[0], results[1], merge_transcripts(ep0.recorder, ep1.recorder)


def run_protocol(
    proto0,
    proto1,
    rg: Ring,
    materials=(None, None),
    latency_ms: float = 0.0,
    bandwidth_mbps: float | None = None,
    coin_seed=None,
    timeout: float = DEFAULT_TIMEOUT,
):
    """run_pair, but each proto receives a ready PartySession.

    Local coins derive from coin_seed so runs are reproducible when needed.
    """
    seeds = np.random.SeedSequence(coin_seed).spawn(2)

    def wrap(p, proto):
        def fn(endpoint):
            sess = PartySession(
                p, endpoint, rg, materials[p], np.random.default_rng(seeds[p])
            )
            return proto(sess)

        return fn

    return run_pair(wrap(0, proto0), wrap(1, proto1), latency_ms, bandwidth_mbps, timeout)
