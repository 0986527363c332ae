"""Wrap-around arithmetic in Z_{2^l} and two's-complement encoding of signed values.

Every share and every protocol message is a vector over one of these rings. Widths
are restricted to power-of-two machine sizes so numpy's native unsigned dtypes give
the mod-2^l semantics for free; a ring element is always a canonical unsigned value
in [0, 2^l).

Signed payloads (thresholds, features, leaf labels) occupy only a quarter of the
ring on each side, so that the difference of two in-range values never leaves the
signed-representable window and its top bit equals the comparison outcome.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

SUPPORTED_WIDTHS = (8, 16, 32, 64)

_DTYPES = {8: np.uint8, 16: np.uint16, 32: np.uint32, 64: np.uint64}


class Ring:
    """Arithmetic context for Z_{2^l} with l in {8, 16, 32, 64}."""

    __slots__ = ("bits", "dtype", "mask", "signed_min", "signed_max")

    def __init__(self, bits: int):
        if bits not in _DTYPES:
            raise UsageError(
                f"unsupported ring width {bits}; expected one of {SUPPORTED_WIDTHS}"
            )
        self.bits = bits
        self.dtype = np.dtype(_DTYPES[bits])
        self.mask = (1 << bits) - 1
        # one subtraction of in-range values must stay inside the signed window,
        # so admit only a quarter of the ring on each side of zero
        self.signed_min = -(1 << (bits - 2))
        self.signed_max = (1 << (bits - 2)) - 1

    @property
    def nbytes(self) -> int:
        return self.bits // 8

    def __repr__(self) -> str:
        return f"Ring({self.bits})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Ring) and other.bits == self.bits

    def __hash__(self) -> int:
        return hash(("Ring", self.bits))

    def array(self, values) -> np.ndarray:
        """Coerce canonical unsigned values to this ring's dtype (wrapping)."""
        arr = np.asarray(values)
        if arr.dtype == self.dtype:
            return arr
        if arr.dtype.kind == "O":
            # python ints wider than int64 (l = 64 literals): wrap explicitly
            flat = [int(v) & self.mask for v in arr.reshape(-1)]
            return np.array(flat, dtype=self.dtype).reshape(arr.shape)
        return arr.astype(self.dtype)

    def check(self, *arrays: np.ndarray) -> None:
        for a in arrays:
            if a.dtype != self.dtype:
                raise UsageError(
                    f"ring width mismatch: expected {self.dtype}, got {a.dtype}"
                )

    def add(self, a, b):
        self.check(np.asarray(a), np.asarray(b))
        return a + b

    def sub(self, a, b):
        self.check(np.asarray(a), np.asarray(b))
        return a - b

    def mul(self, a, b):
        self.check(np.asarray(a), np.asarray(b))
        return a * b

    def neg(self, a):
        self.check(np.asarray(a))
        return self.dtype.type(0) - a

    def encode_signed(self, values) -> np.ndarray:
        """Two's-complement encode signed integers into canonical ring elements."""
        v = np.asarray(values, dtype=np.int64)
        if v.size and (v.min() < self.signed_min or v.max() > self.signed_max):
            raise UsageError(
                f"signed value out of range [{self.signed_min}, {self.signed_max}]"
            )
        return v.astype(self.dtype)

    def decode_signed(self, elements) -> np.ndarray:
        """Inverse of encode_signed, as int64."""
        e = np.asarray(elements)
        self.check(e)
        x = e.astype(np.int64)
        if self.bits == 64:
            # uint64 -> int64 cast already reinterprets the top bit as the sign
            return x
        half = 1 << (self.bits - 1)
        return np.where(x >= half, x - (1 << self.bits), x)

    def bit(self, elements, q: int) -> np.ndarray:
        if not 0 <= q < self.bits:
            raise UsageError(f"bit index {q} out of range for width {self.bits}")
        e = np.asarray(elements)
        self.check(e)
        return ((e >> self.dtype.type(q)) & self.dtype.type(1)).astype(np.uint8)

    def msb(self, elements) -> np.ndarray:
        return self.bit(elements, self.bits - 1)

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        """Uniform ring elements."""
        return rng.integers(0, self.mask, size=size, dtype=self.dtype, endpoint=True)


# shared instances; rings are stateless so one per width is plenty
RINGS = {bits: Ring(bits) for bits in SUPPORTED_WIDTHS}


def ring(bits: int) -> Ring:
    if bits not in RINGS:
        raise UsageError(
            f"unsupported ring width {bits}; expected one of {SUPPORTED_WIDTHS}"
        )
    return RINGS[bits]


@dataclass(frozen=True)
class RingElement:
    """A single canonical element of Z_{2^width}.

    Scalar convenience wrapper used at API boundaries (files, CLI output);
    protocol internals work on numpy arrays via Ring.
    """

    value: int
    width: int

    def __post_init__(self):
        if self.width not in _DTYPES:
            raise UsageError(f"unsupported ring width {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise UsageError(
                f"value {self.value} is not canonical for width {self.width}"
            )

    def _same_width(self, other: "RingElement") -> None:
        if not isinstance(other, RingElement):
            raise UsageError("ring operation needs two ring elements")
        if other.width != self.width:
            raise UsageError(
                f"ring width mismatch: {self.width} vs {other.width}"
            )

    def __add__(self, other: "RingElement") -> "RingElement":
        self._same_width(other)
        return RingElement((self.value + other.value) & ((1 << self.width) - 1), self.width)

    def __sub__(self, other: "RingElement") -> "RingElement":
        self._same_width(other)
        return RingElement((self.value - other.value) & ((1 << self.width) - 1), self.width)

    def __mul__(self, other: "RingElement") -> "RingElement":
        self._same_width(other)
        return RingElement((self.value * other.value) & ((1 << self.width) - 1), self.width)

    def bit(self, q: int) -> int:
        if not 0 <= q < self.width:
            raise UsageError(f"bit index {q} out of range for width {self.width}")
        return (self.value >> q) & 1

    @property
    def msb(self) -> int:
        return self.bit(self.width - 1)

    def decode(self) -> int:
        half = 1 << (self.width - 1)
        return self.value - (1 << self.width) if self.value >= half else self.value


def encode_signed(value: int, width: int) -> RingElement:
    r = ring(width)
    if not r.signed_min <= value <= r.signed_max:
        raise UsageError(
            f"signed value {value} out of range [{r.signed_min}, {r.signed_max}]"
        )
    return RingElement(value & r.mask, width)
