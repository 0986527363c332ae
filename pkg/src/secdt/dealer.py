"""Trusted-dealer preprocessing: multiplication triples and transfer correlations.

Everything the online phases consume is generated here ahead of time from one
seed, split into two per-party halves, and handed out strictly in order through
cursor-guarded stores. Running out raises PreprocessingDepletedError; nothing is
ever generated on the fly during the online protocol.

A transfer correlation for one 1-of-N read is a random pad vector R (held by the
sender) plus one random position c and the pad value R[c] (held by the receiver).

Material files are deterministic: the same (seed, budget, width) yields
byte-identical files.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, PreprocessingDepletedError, UsageError
from .ring import Ring, ring

_HEADER = struct.Struct("<7sBBQQQQQI")
MAGIC = b"SDTPRE1"


class TripleStore:
    """Single-use multiplication triples with a consumption cursor."""

    def __init__(self, t1: np.ndarray, t2: np.ndarray, t3: np.ndarray, kind: str):
        if not (t1.shape == t2.shape == t3.shape):
            raise UsageError("triple components must have equal shapes")
        self.t1 = t1
        self.t2 = t2
        self.t3 = t3
        self.kind = kind
        self.used = 0

    @property
    def total(self) -> int:
        return self.t1.shape[0]

    @property
    def remaining(self) -> int:
        return self.total - self.used

    def take(self, n: int):
        if n > self.remaining:
            raise PreprocessingDepletedError(
                f"{self.kind} triples depleted: need {n}, have {self.remaining} of {self.total}"
            )
        lo = self.used
        self.used += n
        return self.t1[lo : lo + n], self.t2[lo : lo + n], self.t3[lo : lo + n]


class PadStore:
    """Sender halves of transfer correlations: one pad row per future read."""

    def __init__(self, pads: np.ndarray):
        self.pads = pads  # (count, N)
        self.used = 0

    @property
    def total(self) -> int:
        return self.pads.shape[0]

    @property
    def width(self) -> int:
        return self.pads.shape[1]

    @property
    def remaining(self) -> int:
        return self.total - self.used

    def take(self, n: int) -> np.ndarray:
        if n > self.remaining:
            raise PreprocessingDepletedError(
                f"transfer pads depleted: need {n}, have {self.remaining} of {self.total}"
            )
        lo = self.used
        self.used += n
        return self.pads[lo : lo + n]


class ChoiceStore:
    """Receiver halves of transfer correlations: (position, pad value) pairs."""

    def __init__(self, choices: np.ndarray, values: np.ndarray, width: int):
        if choices.shape != values.shape:
            raise UsageError("choice and value vectors must have equal shapes")
        self.choices = choices  # uint32 positions
        self.values = values  # ring pads at those positions
        self.width = width  # N, shared with the matching PadStore
        self.used = 0

    @property
    def total(self) -> int:
        return self.choices.shape[0]

    @property
    def remaining(self) -> int:
        return self.total - self.used

    def take(self, n: int):
        if n > self.remaining:
            raise PreprocessingDepletedError(
                f"transfer choices depleted: need {n}, have {self.remaining} of {self.total}"
            )
        lo = self.used
        self.used += n
        return self.choices[lo : lo + n], self.values[lo : lo + n]


@dataclass(frozen=True)
class MaterialBudget:
    """How much offline material one party needs."""

    arith_triples: int
    bool_triples: int
    ot_count: int  # per direction (each party is receiver this many times)
    ot_size: int  # N, the array dimension each read covers

    def __post_init__(self):
        for name in ("arith_triples", "bool_triples", "ot_count"):
            if getattr(self, name) < 0:
                raise UsageError(f"{name} must be nonnegative")
        if self.ot_count > 0 and self.ot_size < 1:
            raise UsageError("ot_size must be at least 1")

    @staticmethod
    def for_inference(
        depth: int,
        feature_dim: int,
        bits: int,
        compare_mode: str = "cla",
        inferences: int = 1,
    ) -> "MaterialBudget":
        """Exact per-inference consumption of the five online phases."""
        if depth < 1:
            raise UsageError(f"depth must be at least 1, got {depth}")
        if feature_dim < 1:
            raise UsageError(f"feature_dim must be at least 1, got {feature_dim}")
        if inferences < 1:
            raise UsageError("inferences must be at least 1")
        ring(bits)  # validates the width
        decision_nodes = 2**depth - 1
        leaves = 2**depth
        if compare_mode == "cla":
            per_compare = 3 * bits - 5
        elif compare_mode == "ripple":
            per_compare = 2 * bits - 3
        else:
            raise UsageError(f"unknown compare mode {compare_mode!r}")
        # conversion: 1 per decision node; path products: 2^(d+1) - 4; inner product: Z
        arith = decision_nodes + (2 ** (depth + 1) - 4) + leaves
        return MaterialBudget(
            arith_triples=arith * inferences,
            bool_triples=decision_nodes * per_compare * inferences,
            ot_count=decision_nodes * inferences,
            ot_size=feature_dim,
        )


@dataclass
class PreprocessedMaterial:
    """One party's half of the dealer output."""

    party: int
    ring: Ring
    seed: int
    arith: TripleStore
    boolean: TripleStore
    ot_send: PadStore
    ot_recv: ChoiceStore

    def counters(self) -> dict:
        return {
            "arith_used": self.arith.used,
            "arith_total": self.arith.total,
            "bool_used": self.boolean.used,
            "bool_total": self.boolean.total,
            "ot_send_used": self.ot_send.used,
            "ot_recv_used": self.ot_recv.used,
            "ot_total": self.ot_send.total,
        }

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(
            MAGIC,
            self.ring.bits,
            self.party,
            self.seed,
            self.arith.total,
            self.boolean.total,
            self.ot_recv.total,
            self.ot_send.total,
            self.ot_send.width,
        )
        from .transport import pack_arrays

        body = pack_arrays(
            self.arith.t1,
            self.arith.t2,
            self.arith.t3,
            self.boolean.t1,
            self.boolean.t2,
            self.boolean.t3,
            self.ot_recv.choices,
            self.ot_recv.values,
            self.ot_send.pads.reshape(-1),
        )
        return header + body

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


def material_from_bytes(buf: bytes) -> PreprocessedMaterial:
    if len(buf) < _HEADER.size:
        raise FormatError("material file truncated: missing header")
    magic, bits, party, seed, n_arith, n_bool, n_recv, n_send, ot_size = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError(f"bad material magic {magic!r}")
    if party not in (0, 1):
        raise FormatError(f"bad party byte {party}")
    rg = ring(bits)
    from .transport import unpack_arrays

    dt = rg.dtype
    arrays = unpack_arrays(
        buf[_HEADER.size :],
        [dt, dt, dt, np.uint8, np.uint8, np.uint8, np.uint32, dt, dt],
    )
    a1, a2, a3, b1, b2, b3, oc, ov, pads = arrays
    if not (a1.size == a2.size == a3.size == n_arith):
        raise FormatError("arithmetic triple counts disagree with header")
    if not (b1.size == b2.size == b3.size == n_bool):
        raise FormatError("boolean triple counts disagree with header")
    if oc.size != n_recv or ov.size != n_recv:
        raise FormatError("receiver correlation counts disagree with header")
    if pads.size != n_send * ot_size:
        raise FormatError("sender pad size disagrees with header")
    return PreprocessedMaterial(
        party=party,
        ring=rg,
        seed=seed,
        arith=TripleStore(a1, a2, a3, "arithmetic"),
        boolean=TripleStore(b1, b2, b3, "boolean"),
        ot_send=PadStore(pads.reshape(n_send, ot_size)),
        ot_recv=ChoiceStore(oc, ov, ot_size),
    )


def load_material(path) -> PreprocessedMaterial:
    with open(path, "rb") as fh:
        return material_from_bytes(fh.read())


def _split_ring(rg: Ring, values: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    r = rg.sample(rng, values.shape)
    return values - r, r


def _split_bits(values: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    r = rng.integers(0, 2, size=values.shape, dtype=np.uint8)
    return values ^ r, r


def dealer_generate(
    rg: Ring, budget: MaterialBudget, seed: int
) -> tuple[PreprocessedMaterial, PreprocessedMaterial]:
    """Produce both parties' material from one seed.

    The draw order below is part of the file format: it is what makes material
    byte-identical for a fixed seed.
    """
    if not 0 <= seed < 2**64:
        raise UsageError("seed must fit in 64 bits")
    rng = np.random.default_rng(seed)

    n = budget.arith_triples
    t1 = rg.sample(rng, n)
    t2 = rg.sample(rng, n)
    t3 = rg.mul(t1, t2)
    a1 = _split_ring(rg, t1, rng)
    a2 = _split_ring(rg, t2, rng)
    a3 = _split_ring(rg, t3, rng)

    m = budget.bool_triples
    u1 = rng.integers(0, 2, size=m, dtype=np.uint8)
    u2 = rng.integers(0, 2, size=m, dtype=np.uint8)
    u3 = u1 & u2
    b1 = _split_bits(u1, rng)
    b2 = _split_bits(u2, rng)
    b3 = _split_bits(u3, rng)

    count, width = budget.ot_count, budget.ot_size
    halves = []
    for _ in range(2):  # direction 0: party 0 receives; direction 1: party 1 receives
        pads = rg.sample(rng, (count, width)) if count else np.empty((0, max(width, 0)), rg.dtype)
        choices = rng.integers(0, max(width, 1), size=count, dtype=np.uint32)
        held = pads[np.arange(count), choices] if count else np.empty(0, rg.dtype)
        halves.append((pads, choices, held))

    (pads0, ch0, held0), (pads1, ch1, held1) = halves
    mat0 = PreprocessedMaterial(
        party=0,
        ring=rg,
        seed=seed,
        arith=TripleStore(a1[0], a2[0], a3[0], "arithmetic"),
        boolean=TripleStore(b1[0], b2[0], b3[0], "boolean"),
        ot_send=PadStore(pads1),  # party 0 is the sender when party 1 receives
        ot_recv=ChoiceStore(ch0, held0, width),
    )
    mat1 = PreprocessedMaterial(
        party=1,
        ring=rg,
        seed=seed,
        arith=TripleStore(a1[1], a2[1], a3[1], "arithmetic"),
        boolean=TripleStore(b1[1], b2[1], b3[1], "boolean"),
        ot_send=PadStore(pads0),
        ot_recv=ChoiceStore(ch1, held1, width),
    )
    return mat0, mat1
