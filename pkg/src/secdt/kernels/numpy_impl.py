"""Pure-numpy reference implementations of the hot kernels.

Semantics here are the contract; the jitted backend must match bit for bit.
All ring-valued inputs are unsigned numpy arrays and wrap at their dtype width.
"""
import numpy as np

BACKEND = "numpy"


def beaver_combine(party, e, f, t1, t2, t3):
    # share of the product: party * e*f + t1*f + t2*e + t3
    out = t3 + t1 * f + t2 * e
    if party:
        out = out + e * f
    return out


def beaver_combine_bits(party, e, f, t1, t2, t3):
    # same combination over Z_2: XOR for +, AND for *
    out = t3 ^ (t1 & f) ^ (t2 & e)
    if party:
        out = out ^ (e & f)
    return out


def bit_decompose(values, bits):
    # (n,) unsigned -> (n, bits) of 0/1 bytes, LSB first
    v = values.reshape(-1, 1)
    shifts = np.arange(bits, dtype=values.dtype)
    return ((v >> shifts) & values.dtype.type(1)).astype(np.uint8)


def shifted_array_batch(values, shifts, masks, dim):
    """Build one masked, cyclically displaced copy of `values` per (shift, mask).

    Row j places values[i] + masks[j] at position (i + shifts[j]) mod dim.
    Shifts must satisfy shifts[j] <= 2^l - dim so the mod-2^l add cannot wrap.
    """
    count = shifts.shape[0]
    j = np.arange(dim, dtype=np.uint64)
    pos = ((j[None, :] + shifts[:, None].astype(np.uint64)) % np.uint64(dim)).astype(
        np.int64
    )
    out = np.empty((count, dim), dtype=values.dtype)
    rows = np.broadcast_to(np.arange(count)[:, None], (count, dim))
    out[rows, pos] = values[None, :] + masks[:, None]
    return out


def ot_pad_batch(messages, pads, deltas):
    """Mask message row j with its pad row rotated by deltas[j].

    Y[j, t] = messages[j, t] + pads[j, (t - deltas[j]) mod N]. Deltas must be < N.
    """
    n = messages.shape[1]
    t = np.arange(n, dtype=np.int64)
    idx = (t[None, :] - deltas[:, None].astype(np.int64)) % n
    rows = np.broadcast_to(np.arange(messages.shape[0])[:, None], messages.shape)
    return messages + pads[rows, idx]
