"""Oblivious array reads: fetch shares of x[i] when both x and i are shared.

Used to route each decision node's feature out of the shared feature vector
without either server learning which feature it is. The scheme is symmetric;
party m prepares, per read:

  1. a displaced masked copy of its own share of the array: entry i of the
     share vector lands at position (i + s_m) mod dim with mask r_m added,
     where the displacement s_m <= 2^l - dim so the mod-2^l index arithmetic
     cannot wrap (keeping the placement a bijection on [0, dim) for every dim,
     not just powers of two);
  2. an additive mask for the shared read index.

Both parties then reveal to each other the index displaced by the OTHER side's
s (two exchanges: masked index shares, then displaced openings), leaving each
with a query position into the peer's displaced copy that tells it nothing
about the true index. Each fetches the addressed entry by a precomputed 1-of-N
transfer (two more exchanges, both directions batched together), obtaining the
peer's masked share of the wanted entry. A final one-way re-share flight from
party 1 to party 0 turns the two masked fetches into a fresh additive sharing
of x[i].

Round cost: exactly 5 for any number of reads, because every read in the batch
rides the same five flights.

The 1-of-N transfer is dealer-assisted: the sender holds a random pad vector R,
the receiver holds one position c and the value R[c]. The receiver reveals only
the offset between its wanted position and c; the sender returns all entries,
each masked by R rotated by that offset, so exactly the wanted entry is
unmaskable. For honest-but-curious servers that is all that is needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import UsageError
from .ring import Ring
from .sharing import ArithShare
from .transport import pack_arrays, unpack_arrays


@dataclass(frozen=True)
class ShiftParams:
    """Per-read displacement and mask one party applies to its array copy."""

    shifts: np.ndarray
    masks: np.ndarray


def sample_shift_params(rg: Ring, dim: int, count: int, rng) -> ShiftParams:
    if dim < 1:
        raise UsageError(f"array dimension must be at least 1, got {dim}")
    if dim > rg.mask:
        raise UsageError(f"array dimension {dim} too large for width {rg.bits}")
    # inclusive upper bound 2^l - dim keeps position arithmetic wrap-free
    bound = rg.dtype.type(rg.mask - dim + 1)
    shifts = rng.integers(0, bound, size=count, dtype=rg.dtype, endpoint=True)
    masks = rg.sample(rng, count)
    return ShiftParams(shifts, masks)


def build_shifted_arrays(values: np.ndarray, params: ShiftParams, dim: int) -> np.ndarray:
    """One displaced masked copy of `values` per read; rejects wrapping shifts."""
    if values.shape != (dim,):
        raise UsageError(f"expected a ({dim},) array")
    rg_mask = int(np.iinfo(values.dtype).max)
    if params.shifts.size and int(params.shifts.max()) > rg_mask - dim + 1:
        raise UsageError("displacement would wrap the index arithmetic")
    return kernels.shifted_array_batch(values, params.shifts, params.masks, dim)


def ot_read(sess, *, messages: np.ndarray | None = None, choice: int | None = None):
    """One dealer-assisted 1-of-N read over the channel.

    The sender passes `messages` (length N); the receiver passes `choice`.
    Returns the chosen message at the receiver, None at the sender. Two rounds.
    """
    if (messages is None) == (choice is None):
        raise UsageError("pass exactly one of messages= (sender) or choice= (receiver)")
    dt = sess.ring.dtype
    if messages is not None:
        pads = sess.material.ot_send.take(1)
        if messages.shape != (pads.shape[1],):
            raise UsageError(
                f"got {messages.shape[0]} messages, correlation covers {pads.shape[1]}"
            )
        (delta,) = unpack_arrays(sess.endpoint.recv_flight(), [dt])
        masked = kernels.ot_pad_batch(messages.reshape(1, -1), pads, delta)
        sess.endpoint.send_flight(pack_arrays(masked.reshape(-1)))
        return None
    width = sess.material.ot_recv.width
    if not 0 <= choice < width:
        raise UsageError(f"choice {choice} out of range for size {width}")
    positions, held = sess.material.ot_recv.take(1)
    delta = (choice - int(positions[0])) % width
    sess.endpoint.send_flight(pack_arrays(np.array([delta], dtype=dt)))
    (masked,) = unpack_arrays(sess.endpoint.recv_flight(), [dt])
    if masked.size != width:
        raise UsageError("sender returned a wrong-size response")
    return (masked[choice : choice + 1] - held)[0]


def oblivious_select(sess, array: ArithShare, index: ArithShare) -> ArithShare:
    """Batched oblivious reads: shares of array[index[j]] for every j. Five rounds."""
    if array.party != sess.party or index.party != sess.party:
        raise UsageError("shares do not belong to this session's party")
    if array.ring != sess.ring or index.ring != sess.ring:
        raise UsageError("share ring does not match the session ring")
    rg = sess.ring
    dim = array.size
    count = index.size
    dt = rg.dtype

    params = sample_shift_params(rg, dim, count, sess.rng)
    shifted = build_shifted_arrays(array.values, params, dim)
    index_mask = rg.sample(sess.rng, count)

    # flight 1: masked index shares cross
    (peer_masked,) = unpack_arrays(
        sess.endpoint.exchange(pack_arrays(index.values + index_mask)), [dt]
    )
    # flight 2: each side opens the index displaced by ITS shift, for the peer
    reveal_out = peer_masked + index.values + params.shifts
    (peer_reveal,) = unpack_arrays(sess.endpoint.exchange(pack_arrays(reveal_out)), [dt])
    displaced = peer_reveal - index_mask  # (index + peer shift), wrap-free by the bound
    query = (displaced % dt.type(dim)).astype(np.int64)

    # flight 3: transfer offsets cross (each side acts as receiver once per read)
    if sess.material.ot_send.width != dim or sess.material.ot_recv.width != dim:
        raise UsageError(
            f"transfer correlations sized {sess.material.ot_send.width}, "
            f"array dimension is {dim}"
        )
    positions, held = sess.material.ot_recv.take(count)
    pads = sess.material.ot_send.take(count)
    delta_out = ((query - positions.astype(np.int64)) % dim).astype(dt)
    (peer_delta,) = unpack_arrays(sess.endpoint.exchange(pack_arrays(delta_out)), [dt])

    # flight 4: masked array copies cross, padded per the peer's offsets
    response = kernels.ot_pad_batch(shifted, pads, peer_delta)
    (peer_response,) = unpack_arrays(
        sess.endpoint.exchange(pack_arrays(response.reshape(-1))), [dt]
    )
    peer_response = peer_response.reshape(count, dim)
    fetched = np.take_along_axis(peer_response, query[:, None], axis=1).reshape(-1) - held
    # fetched = peer share of array[index] + peer's per-read mask

    # flight 5: party 1 re-shares; party 0 folds everything back together
    if sess.party == 1:
        fresh = rg.sample(sess.rng, count)
        sess.endpoint.send_flight(pack_arrays(fetched - params.masks - fresh))
        return ArithShare(1, fresh, rg)
    (reshared,) = unpack_arrays(sess.endpoint.recv_flight(), [dt])
    return ArithShare(0, reshared + fetched - params.masks, rg)
