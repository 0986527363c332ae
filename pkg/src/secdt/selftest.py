"""Built-in diagnostic suites behind `secdt selftest`.

Each suite returns (ok, detail). They lean on exhaustive small-ring oracles:
everything at l = 8 is cheap enough to check completely, and a protocol bug
anywhere in the stack shows up as a plaintext mismatch here.
"""
from __future__ import annotations

import numpy as np

from . import compare, infer, select
from .dealer import MaterialBudget, dealer_generate
from .errors import PreprocessingDepletedError, SecdtError
from .model import gen_synthetic
from .ring import ring
from .session import run_protocol
from .sharing import reconstruct_arith, reconstruct_bits, share_arith


def _suite_ring():
    rg = ring(8)
    signed = np.arange(rg.signed_min, rg.signed_max + 1)
    dec = rg.decode_signed(rg.encode_signed(signed))
    if not np.array_equal(dec, signed):
        return False, "encode/decode round trip failed"
    vals = np.arange(256, dtype=np.uint8)
    a = np.repeat(vals, 256)
    b = np.tile(vals, 256)
    if not np.array_equal((a + b) - b, a):
        return False, "additive inverse failed"
    x = np.repeat(signed, signed.size)
    y = np.tile(signed, signed.size)
    d = rg.encode_signed(x) - rg.encode_signed(y)
    if not np.array_equal(rg.msb(d), (x < y).astype(np.uint8)):
        return False, "difference top bit does not match <"
    return True, f"l=8 exhaustive: {signed.size**2} ordered pairs"


def _suite_beaver_bits():
    # every (secret pair, triple, share split) combination over Z_2
    checked = 0
    for alpha in (0, 1):
        for beta in (0, 1):
            for t1 in (0, 1):
                for t2 in (0, 1):
                    t3 = t1 & t2
                    for a0 in (0, 1):
                        for b0 in (0, 1):
                            for u0 in (0, 1):
                                for v0 in (0, 1):
                                    for w0 in (0, 1):
                                        a = (a0, alpha ^ a0)
                                        b = (b0, beta ^ b0)
                                        u = (u0, t1 ^ u0)
                                        v = (v0, t2 ^ v0)
                                        w = (w0, t3 ^ w0)
                                        e = alpha ^ t1
                                        f = beta ^ t2
                                        out = 0
                                        for p in (0, 1):
                                            s = w[p] ^ (u[p] & f) ^ (v[p] & e)
                                            if p:
                                                s ^= e & f
                                            out ^= s
                                        if out != alpha & beta:
                                            return False, (
                                                f"wrong product for alpha={alpha} "
                                                f"beta={beta}"
                                            )
                                        checked += 1
    return True, f"{checked} exhaustive share splits"


def _exhaustive_pairs():
    rg = ring(8)
    signed = np.arange(rg.signed_min, rg.signed_max + 1)
    return rg, np.repeat(signed, signed.size), np.tile(signed, signed.size)


def _suite_compare(mode):
    rg, x, y = _exhaustive_pairs()
    n = x.size
    per = 3 * rg.bits - 5 if mode == "cla" else 2 * rg.bits - 3
    mats = dealer_generate(rg, MaterialBudget(0, n * per, 0, 0), seed=7)
    rng = np.random.default_rng(11)
    xs = share_arith(rg.encode_signed(x), rg, rng)
    ys = share_arith(rg.encode_signed(y), rg, rng)

    def proto(p):
        return lambda sess: compare.secure_compare(sess, xs[p], ys[p], mode)

    r0, r1, tr = run_protocol(proto(0), proto(1), rg, mats)
    got = reconstruct_bits(r0, r1)
    want = (x < y).astype(np.uint8)
    if not np.array_equal(got, want):
        bad = int(np.argmax(got != want))
        return False, f"first mismatch at x={x[bad]} y={y[bad]}"
    expect_rounds = 4 if mode == "cla" else rg.bits - 1
    if tr.total_rounds != expect_rounds:
        return False, f"rounds {tr.total_rounds}, expected {expect_rounds}"
    return True, f"{n} ordered pairs, {tr.total_rounds} rounds"


def _suite_select():
    rg = ring(8)
    rng = np.random.default_rng(23)
    reps = 3
    total = 0
    for dim in (4, 9, 16):
        array = rng.integers(0, 256, size=dim).astype(rg.dtype)
        idx = np.tile(np.arange(dim), reps)
        mats = dealer_generate(rg, MaterialBudget(0, 0, idx.size, dim), seed=dim)
        arr_sh = share_arith(array, rg, rng)
        idx_sh = share_arith(idx.astype(rg.dtype), rg, rng)

        def proto(p):
            return lambda sess: select.oblivious_select(sess, arr_sh[p], idx_sh[p])

        r0, r1, tr = run_protocol(proto(0), proto(1), rg, mats)
        got = reconstruct_arith(r0, r1)
        if not np.array_equal(got, array[idx]):
            return False, f"wrong entries at dim={dim}"
        if tr.total_rounds != 5:
            return False, f"rounds {tr.total_rounds}, expected 5 (dim={dim})"
        total += idx.size
    return True, f"{total} reads over dims 4/9/16"


def _suite_end_to_end():
    runs = 0
    for bits in (8, 64):
        for seed in range(5):
            rng = np.random.default_rng((bits, seed))
            model, features = gen_synthetic(3, 9, bits, rng)
            out = infer.outsourced_inference(
                model, features, seed=seed, collect_leaf_terms=True
            )
            if not out.verified:
                return False, f"mismatch at l={bits} seed={seed}"
            terms = out.leaf_terms
            if int(terms.sum()) != 1 or not np.array_equal(
                np.sort(terms)[:-1], np.zeros(terms.size - 1, terms.dtype)
            ):
                return False, f"leaf indicator not one-hot at l={bits} seed={seed}"
            runs += 1
    return True, f"{runs} verified runs (d=3, l=8/64)"


def _suite_depletion():
    rg = ring(64)
    mats = dealer_generate(rg, MaterialBudget(0, 0, 0, 0), seed=1)
    rng = np.random.default_rng(3)
    xs = share_arith(rg.encode_signed(np.array([1])), rg, rng)
    ys = share_arith(rg.encode_signed(np.array([2])), rg, rng)

    def proto(p):
        return lambda sess: compare.secure_compare(sess, xs[p], ys[p])

    try:
        run_protocol(proto(0), proto(1), rg, mats)
    except PreprocessingDepletedError:
        return True, "empty material raises the depletion error"
    except SecdtError as exc:
        return False, f"wrong error type: {type(exc).__name__}"
    return False, "no error raised on empty material"


SUITES = (
    ("ring", _suite_ring),
    ("beaver_bits", _suite_beaver_bits),
    ("compare_cla", lambda: _suite_compare("cla")),
    ("compare_ripple", lambda: _suite_compare("ripple")),
    ("select", _suite_select),
    ("end_to_end", _suite_end_to_end),
    ("depletion", _suite_depletion),
)


def run_selftest(report=print) -> bool:
    """Run every suite; report one line each; True when all pass."""
    all_ok = True
    for name, fn in SUITES:
        try:
            ok, detail = fn()
        except SecdtError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        report(f"{'PASS' if ok else 'FAIL'}  {name:<16} {detail}")
    return all_ok
