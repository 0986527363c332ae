"""Jitted kernels. Same contracts as numpy_impl; see there for semantics."""
import numpy as np
from numba import njit

BACKEND = "numba"


@njit(cache=True)
def _beaver_combine(party, e, f, t1, t2, t3):
    out = np.empty_like(t3)
    if party == 0:
        for i in range(out.size):
            out[i] = t3[i] + t1[i] * f[i] + t2[i] * e[i]
    else:
        for i in range(out.size):
            out[i] = t3[i] + t1[i] * f[i] + t2[i] * e[i] + e[i] * f[i]
    return out


@njit(cache=True)
def _beaver_combine_bits(party, e, f, t1, t2, t3):
    out = np.empty_like(t3)
    if party == 0:
        for i in range(out.size):
            out[i] = t3[i] ^ (t1[i] & f[i]) ^ (t2[i] & e[i])
    else:
        for i in range(out.size):
            out[i] = t3[i] ^ (t1[i] & f[i]) ^ (t2[i] & e[i]) ^ (e[i] & f[i])
    return out


@njit(cache=True)
def _bit_decompose(values, bits):
    n = values.shape[0]
    out = np.empty((n, bits), dtype=np.uint8)
    for i in range(n):
        v = np.uint64(values[i])
        for q in range(bits):
            out[i, q] = np.uint8((v >> np.uint64(q)) & np.uint64(1))
    return out


@njit(cache=True)
def _shifted_array_batch(values, shifts, masks, dim):
    count = shifts.shape[0]
    out = np.empty((count, dim), dtype=values.dtype)
    udim = np.uint64(dim)
    for j in range(count):
        s = np.uint64(shifts[j])
        m = masks[j]
        for i in range(dim):
            pos = (np.uint64(i) + s) % udim
            out[j, np.int64(pos)] = values[i] + m
    return out


@njit(cache=True)
def _ot_pad_batch(messages, pads, deltas):
    count, n = messages.shape
    out = np.empty_like(messages)
    for j in range(count):
        d = np.int64(deltas[j])
        for t in range(n):
            out[j, t] = messages[j, t] + pads[j, (t - d) % n]
    return out


def beaver_combine(party, e, f, t1, t2, t3):
    return _beaver_combine(party, e, f, t1, t2, t3)


def beaver_combine_bits(party, e, f, t1, t2, t3):
    return _beaver_combine_bits(party, e, f, t1, t2, t3)


def bit_decompose(values, bits):
    return _bit_decompose(values, bits)


def shifted_array_batch(values, shifts, masks, dim):
    return _shifted_array_batch(values, shifts, masks, dim)


def ot_pad_batch(messages, pads, deltas):
    return _ot_pad_batch(messages, pads, deltas)
