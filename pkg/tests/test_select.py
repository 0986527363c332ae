"""Oblivious array reads: displaced copies, 1-of-N transfer, full selection."""
import numpy as np
import pytest

from conftest import make_material
from secdt import select
from secdt.dealer import MaterialBudget, dealer_generate
from secdt.errors import PreprocessingDepletedError, UsageError
from secdt.ring import ring
from secdt.session import run_protocol
from secdt.sharing import reconstruct_arith, share_arith


def test_shifted_array_frozen_example(rg8):
    # shift 2 rotates [11, 21, 31, 41] so old entry i sits at (i + 2) mod 4
    params = select.ShiftParams(
        shifts=np.array([2], np.uint8), masks=np.array([0], np.uint8)
    )
    out = select.build_shifted_arrays(np.array([11, 21, 31, 41], np.uint8), params, 4)
    assert out.tolist() == [[31, 41, 11, 21]]


def test_shifted_array_applies_mask(rg8):
    params = select.ShiftParams(
        shifts=np.array([1], np.uint8), masks=np.array([100], np.uint8)
    )
    out = select.build_shifted_arrays(np.array([10, 20, 200], np.uint8), params, 3)
    assert out.tolist() == [[44, 110, 120]]  # 200+100 wraps to 44


def test_shifted_placement_is_bijection_exhaustive(rg8):
    # every legal shift must permute the positions, including non-power dims
    for dim in (3, 4, 7):
        vals = np.arange(1, dim + 1, dtype=np.uint8)
        shifts = np.arange(0, 257 - dim, dtype=np.uint8)
        params = select.ShiftParams(shifts=shifts, masks=np.zeros_like(shifts))
        rows = select.build_shifted_arrays(vals, params, dim)
        assert all(sorted(row) == list(range(1, dim + 1)) for row in rows.tolist())


def test_shift_sampler_respects_wrap_bound(rg8):
    rng = np.random.default_rng(0)
    dim = 9
    params = select.sample_shift_params(rg8, dim, 5000, rng)
    assert int(params.shifts.max()) <= 256 - dim
    # the bound is tight: both endpoints appear across 5000 draws
    assert int(params.shifts.min()) == 0
    assert int(params.shifts.max()) == 256 - dim


def test_build_rejects_wrapping_shift(rg8):
    params = select.ShiftParams(
        shifts=np.array([255], np.uint8), masks=np.array([0], np.uint8)
    )
    with pytest.raises(UsageError):
        select.build_shifted_arrays(np.zeros(4, np.uint8), params, 4)


def test_sampler_rejects_oversized_dim(rg8):
    with pytest.raises(UsageError):
        select.sample_shift_params(rg8, 400, 1, np.random.default_rng(1))


def _ot_pair(rg, messages, choice, seed):
    dim = messages.size
    mats = dealer_generate(rg, MaterialBudget(0, 0, 1, dim), seed=seed)

    def sender(sess):
        return select.ot_read(sess, messages=messages)

    def receiver(sess):
        return select.ot_read(sess, choice=choice)

    return run_protocol(sender, receiver, rg, mats)


def test_ot_read_exhaustive_small(rg8):
    # every choice over a 4-entry table, fresh correlation each time
    messages = np.array([17, 34, 51, 68], np.uint8)
    for choice in range(4):
        r0, r1, tr = _ot_pair(rg8, messages, choice, seed=choice + 1)
        assert r0 is None
        assert int(r1) == int(messages[choice])
        assert tr.total_rounds == 2


def test_ot_choice_out_of_range(rg8):
    with pytest.raises(UsageError):
        _ot_pair(rg8, np.array([1, 2, 3], np.uint8), 3, seed=5)


def test_ot_requires_exactly_one_role(rg64):
    mats = dealer_generate(rg64, MaterialBudget(0, 0, 1, 2), seed=6)

    def both(sess):
        return select.ot_read(sess, messages=np.zeros(2, np.uint64), choice=0)

    with pytest.raises(UsageError):
        run_protocol(both, both, rg64, mats)


def test_ot_message_count_must_match_correlation(rg8):
    mats = dealer_generate(rg8, MaterialBudget(0, 0, 1, 4), seed=7)

    def sender(sess):
        return select.ot_read(sess, messages=np.zeros(3, np.uint8))

    def receiver(sess):
        return select.ot_read(sess, choice=1)

    with pytest.raises(UsageError):
        run_protocol(sender, receiver, rg8, mats, timeout=2.0)


def test_ot_wire_carries_only_offset_and_masked_rows(rg8):
    # receiver leaks one offset element; sender returns dim masked elements
    messages = np.arange(40, 44, dtype=np.uint8)
    _, _, tr = _ot_pair(rg8, messages, 2, seed=8)
    rec = tr.phases[0]
    sender_bytes, receiver_bytes = rec.bytes_p0, rec.bytes_p1
    assert receiver_bytes == 4 + 1  # length prefix + one uint8 offset
    assert sender_bytes == 4 + 4  # length prefix + four masked entries


def _selection_run(rg, array, idx, seed, latency_ms=0.0):
    rng = np.random.default_rng(seed)
    mats = dealer_generate(rg, MaterialBudget(0, 0, idx.size, array.size), seed=seed)
    arr_sh = share_arith(array, rg, rng)
    idx_sh = share_arith(idx.astype(rg.dtype), rg, rng)

    def proto(p):
        return lambda sess: select.oblivious_select(sess, arr_sh[p], idx_sh[p])

    return run_protocol(proto(0), proto(1), rg, mats, latency_ms=latency_ms)


def test_select_every_index_every_dim(rg8):
    rng = np.random.default_rng(10)
    for dim in (1, 2, 4, 9, 16):
        array = rng.integers(0, 256, size=dim).astype(np.uint8)
        idx = np.arange(dim)
        r0, r1, tr = _selection_run(rg8, array, idx, seed=dim)
        assert np.array_equal(reconstruct_arith(r0, r1), array[idx])
        assert tr.total_rounds == 5


def test_select_64bit_random(rg64):
    rng = np.random.default_rng(11)
    array = rng.integers(0, 2**64, size=57, dtype=np.uint64)
    idx = rng.integers(0, 57, size=200)
    r0, r1, _ = _selection_run(rg64, array, idx, seed=12)
    assert np.array_equal(reconstruct_arith(r0, r1), array[idx])


def test_select_output_is_fresh_sharing(rg64):
    # rerunning with a different coin seed changes both output shares but
    # not their sum
    rng = np.random.default_rng(13)
    array = rng.integers(0, 2**64, size=9, dtype=np.uint64)
    idx = np.array([4])
    outs = []
    for coin in (1, 2):
        mats = dealer_generate(rg64, MaterialBudget(0, 0, 1, 9), seed=20)
        rng_s = np.random.default_rng(21)
        arr_sh = share_arith(array, rg64, rng_s)
        idx_sh = share_arith(idx.astype(np.uint64), rg64, rng_s)

        def proto(p):
            return lambda sess: select.oblivious_select(sess, arr_sh[p], idx_sh[p])

        r0, r1, _ = run_protocol(proto(0), proto(1), rg64, mats, coin_seed=coin)
        outs.append((r0.values.copy(), r1.values.copy()))
    assert not np.array_equal(outs[0][0], outs[1][0])
    assert (outs[0][0] + outs[0][1])[0] == (outs[1][0] + outs[1][1])[0] == array[4]


def test_select_five_rounds_under_latency(rg8):
    array = np.arange(4, dtype=np.uint8)
    r0, r1, tr = _selection_run(rg8, array, np.array([3]), seed=30, latency_ms=10.0)
    assert tr.total_rounds == 5
    assert tr.total_elapsed_ms == pytest.approx(50.0)
    assert int(reconstruct_arith(r0, r1)[0]) == 3


def test_select_depletion(rg8):
    array = np.arange(4, dtype=np.uint8)
    idx = np.arange(4)
    rng = np.random.default_rng(31)
    mats = dealer_generate(rg8, MaterialBudget(0, 0, 3, 4), seed=31)  # one short
    arr_sh = share_arith(array, rg8, rng)
    idx_sh = share_arith(idx.astype(np.uint8), rg8, rng)

    def proto(p):
        return lambda sess: select.oblivious_select(sess, arr_sh[p], idx_sh[p])

    with pytest.raises(PreprocessingDepletedError):
        run_protocol(proto(0), proto(1), rg8, mats)


def test_select_rejects_foreign_shares(rg8):
    rng = np.random.default_rng(32)
    mats = dealer_generate(rg8, MaterialBudget(0, 0, 1, 4), seed=32)
    arr_sh = share_arith(np.arange(4, dtype=np.uint64), ring(64), rng)
    idx_sh = share_arith(np.array([0], np.uint64), ring(64), rng)

    def proto(p):
        return lambda sess: select.oblivious_select(sess, arr_sh[p], idx_sh[p])

    with pytest.raises(UsageError):
        run_protocol(proto(0), proto(1), rg8, mats)
