"""Two-party additive sharing over Z_{2^l} and XOR sharing over Z_2.

A secret α splits as ([α]_0, [α]_1) = (α − r, r) for uniform r; reconstruction
is addition (XOR in the bit case). Linear operations are local. Multiplication
consumes one precomputed triple per element and costs exactly one round no
matter how many elements are batched into the call: the two difference vectors
are opened in a single exchange.

Public-constant convention: party 0 carries additive constants, party 1
contributes zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import UsageError
from .ring import Ring
from .transport import pack_arrays, unpack_arrays


@dataclass(frozen=True)
class ArithShare:
    """One party's additive share of a vector of ring elements."""

    party: int
    values: np.ndarray
    ring: Ring

    def __post_init__(self):
        if self.party not in (0, 1):
            raise UsageError(f"party must be 0 or 1, got {self.party}")
        if self.values.ndim != 1:
            raise UsageError("share values must be a 1-d vector")
        self.ring.check(self.values)

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class BitShare:
    """One party's XOR share of a vector of bits (stored one bit per byte)."""

    party: int
    bits: np.ndarray

    def __post_init__(self):
        if self.party not in (0, 1):
            raise UsageError(f"party must be 0 or 1, got {self.party}")
        if self.bits.dtype != np.uint8 or self.bits.ndim != 1:
            raise UsageError("bit shares must be a 1-d uint8 vector")

    @property
    def size(self) -> int:
        return self.bits.shape[0]


def share_arith(values, rg: Ring, rng) -> tuple[ArithShare, ArithShare]:
    v = rg.array(np.atleast_1d(values))
    r = rg.sample(rng, v.shape)
    return ArithShare(0, v - r, rg), ArithShare(1, r, rg)


def reconstruct_arith(a: ArithShare, b: ArithShare) -> np.ndarray:
    if a.party == b.party:
        raise UsageError("reconstruction needs shares from opposite parties")
    if a.ring != b.ring:
        raise UsageError("reconstruction needs shares over the same ring")
    if a.size != b.size:
        raise UsageError("reconstruction needs shares of equal length")
    return a.values + b.values


def share_bits(bits, rng) -> tuple[BitShare, BitShare]:
    v = np.atleast_1d(np.asarray(bits)).astype(np.uint8)
    if v.size and v.max() > 1:
        raise UsageError("bit secrets must be 0 or 1")
    r = rng.integers(0, 2, size=v.shape, dtype=np.uint8)
    return BitShare(0, v ^ r), BitShare(1, r)


def reconstruct_bits(a: BitShare, b: BitShare) -> np.ndarray:
    if a.party == b.party:
        raise UsageError("reconstruction needs shares from opposite parties")
    if a.size != b.size:
        raise UsageError("reconstruction needs shares of equal length")
    return a.bits ^ b.bits


def _pairwise(a: ArithShare, b: ArithShare) -> None:
    if a.party != b.party:
        raise UsageError("local operation needs shares held by the same party")
    if a.ring != b.ring:
        raise UsageError("local operation needs shares over the same ring")
    if a.size != b.size:
        raise UsageError("local operation needs shares of equal length")


def add_local(a: ArithShare, b: ArithShare) -> ArithShare:
    _pairwise(a, b)
    return ArithShare(a.party, a.values + b.values, a.ring)


def sub_local(a: ArithShare, b: ArithShare) -> ArithShare:
    _pairwise(a, b)
    return ArithShare(a.party, a.values - b.values, a.ring)


def scale_local(a: ArithShare, k: int) -> ArithShare:
    kk = a.ring.dtype.type(k & a.ring.mask)
    return ArithShare(a.party, a.values * kk, a.ring)


def add_const(a: ArithShare, k: int) -> ArithShare:
    """Add a public constant; only party 0 carries it."""
    if a.party != 0:
        return a
    kk = a.ring.dtype.type(k & a.ring.mask)
    return ArithShare(0, a.values + kk, a.ring)


def const_minus(k: int, a: ArithShare) -> ArithShare:
    """Share of (k - secret) for a public constant k."""
    return add_const(scale_local(a, -1), k)


def xor_local(a: BitShare, b: BitShare) -> BitShare:
    if a.party != b.party:
        raise UsageError("local operation needs shares held by the same party")
    if a.size != b.size:
        raise UsageError("local operation needs shares of equal length")
    return BitShare(a.party, a.bits ^ b.bits)


def xor_const(a: BitShare, bit: int) -> BitShare:
    if a.party != 0 or bit & 1 == 0:
        return a
    return BitShare(0, a.bits ^ np.uint8(1))


def beaver_mul_arith(sess, a: ArithShare, b: ArithShare) -> ArithShare:
    """Share of the elementwise product; one round for the whole batch."""
    _pairwise(a, b)
    if a.party != sess.party:
        raise UsageError("shares do not belong to this session's party")
    if a.ring != sess.ring:
        raise UsageError("share ring does not match the session ring")
    t1, t2, t3 = sess.material.arith.take(a.size)
    e_share = a.values - t1
    f_share = b.values - t2
    dt = a.ring.dtype
    peer_e, peer_f = unpack_arrays(
        sess.endpoint.exchange(pack_arrays(e_share, f_share)), [dt, dt]
    )
    if peer_e.size != a.size or peer_f.size != a.size:
        raise UsageError("peer opened a different number of products")
    e = e_share + peer_e
    f = f_share + peer_f
    out = kernels.beaver_combine(sess.party, e, f, t1, t2, t3)
    return ArithShare(sess.party, out, a.ring)


def beaver_mul_bits(sess, a: BitShare, b: BitShare) -> BitShare:
    """Share of the elementwise AND; one round for the whole batch."""
    if a.party != b.party or a.party != sess.party:
        raise UsageError("shares do not belong to this session's party")
    if a.size != b.size:
        raise UsageError("AND needs shares of equal length")
    t1, t2, t3 = sess.material.boolean.take(a.size)
    e_share = a.bits ^ t1
    f_share = b.bits ^ t2
    peer_e, peer_f = unpack_arrays(
        sess.endpoint.exchange(pack_arrays(e_share, f_share)), [np.uint8, np.uint8]
    )
    if peer_e.size != a.size or peer_f.size != a.size:
        raise UsageError("peer opened a different number of products")
    e = e_share ^ peer_e
    f = f_share ^ peer_f
    out = kernels.beaver_combine_bits(sess.party, e, f, t1, t2, t3)
    return BitShare(sess.party, out)
