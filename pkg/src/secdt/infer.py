"""End-to-end secure tree evaluation over shared model and features.

Five strictly sequential phases, each with its own transcript label:

  selection      route each decision node's feature out of the shared vector
                 by batched oblivious reads                        (5 rounds)
  comparison     shares of v_j = (x_j < y_j) for all nodes         (log2(l)+1 or l-1)
  conversion     XOR shares of v_j to additive shares              (1 round)
  path_products  multiply edge indicators down the tree so leaf z
                 holds 1 exactly when the evaluation reaches it    (d-1 rounds)
  inner_product  sum of leaf_indicator * leaf_value                (1 round)

Edge indicators: left edge of node j carries 1 - v_j, right edge carries v_j,
so along every root-to-leaf path the product of indicators is 1 on the taken
path and 0 elsewhere, and the final inner product reveals nothing beyond the
predicted label once reconstructed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compare import secure_compare
from .dealer import MaterialBudget, PreprocessedMaterial, dealer_generate
from .errors import UsageError
from .model import (
    DecisionTreeModel,
    FeatureShare,
    FeatureVector,
    ModelShare,
    client_encrypt,
    plaintext_infer,
    provider_encrypt,
)
from .ring import Ring, ring
from .select import oblivious_select
from .session import PartySession, run_pair
from .sharing import (
    ArithShare,
    BitShare,
    beaver_mul_arith,
    const_minus,
    reconstruct_arith,
)
from .transport import DEFAULT_TIMEOUT, Transcript


def to_arith(sess, v: BitShare) -> ArithShare:
    """Convert XOR shares of bits to additive shares of the same 0/1 values.

    With t1, t2 the two parties' bit shares, v = t1 + t2 - 2*t1*t2 in the ring;
    one arithmetic triple per bit, one round per batch.
    """
    rg = sess.ring
    emb = v.bits.astype(rg.dtype)
    zero = np.zeros_like(emb)
    lhs = emb if sess.party == 0 else zero
    rhs = zero if sess.party == 0 else emb
    prod = beaver_mul_arith(
        sess, ArithShare(sess.party, lhs, rg), ArithShare(sess.party, rhs, rg)
    )
    return ArithShare(sess.party, emb - prod.values - prod.values, rg)


def edge_shares(v: ArithShare) -> tuple[ArithShare, ArithShare]:
    """Per-node edge indicators: left edge is 1 - v, right edge is v."""
    return const_minus(1, v), v


def path_products(sess, left: ArithShare, right: ArithShare, depth: int) -> ArithShare:
    """Shares of the leaf indicator vector: product of edges along each path.

    Nodes are heap-ordered; the products grow level by level, one batched
    multiplication round per level below the first, d - 1 rounds total.
    """
    if left.size != 2**depth - 1 or right.size != 2**depth - 1:
        raise UsageError("edge vectors do not match the depth")
    rg = sess.ring
    prefix = np.zeros(2 ** (depth + 1) - 1, dtype=rg.dtype)
    prefix[1] = left.values[0]
    prefix[2] = right.values[0]
    for level in range(2, depth + 1):
        ids = np.arange(2**level - 1, 2 ** (level + 1) - 1)
        parents = (ids - 1) >> 1
        edges = np.where(ids & 1, left.values[parents], right.values[parents])
        prod = beaver_mul_arith(
            sess,
            ArithShare(sess.party, prefix[parents], rg),
            ArithShare(sess.party, edges.astype(rg.dtype), rg),
        )
        prefix[ids] = prod.values
    leaf_terms = prefix[2**depth - 1 :]
    return ArithShare(sess.party, np.ascontiguousarray(leaf_terms), rg)


def aggregate_result(sess, indicators: ArithShare, leaves: ArithShare) -> ArithShare:
    """Inner product of leaf indicators and leaf labels; one round, then local sum."""
    prod = beaver_mul_arith(sess, indicators, leaves)
    total = np.add.reduce(prod.values, dtype=sess.ring.dtype)
    return ArithShare(sess.party, np.array([total], dtype=sess.ring.dtype), sess.ring)


def evaluate_shares(
    sess: PartySession,
    model_share: ModelShare,
    feature_share: FeatureShare,
    compare_mode: str = "cla",
    debug_sink: dict | None = None,
) -> ArithShare:
    """One party's side of the full five-phase evaluation."""
    if model_share.party != sess.party or feature_share.party != sess.party:
        raise UsageError("shares do not belong to this session's party")
    if model_share.bits != sess.ring.bits or feature_share.bits != sess.ring.bits:
        raise UsageError("share width does not match the session ring")
    if feature_share.dim != model_share.feature_dim:
        raise UsageError(
            f"feature vector has {feature_share.dim} entries, "
            f"model expects {model_share.feature_dim}"
        )

    sess.begin_phase("selection")
    selected = oblivious_select(sess, feature_share.values, model_share.indices)

    sess.begin_phase("comparison")
    v = secure_compare(sess, selected, model_share.thresholds, compare_mode)

    sess.begin_phase("conversion")
    v_arith = to_arith(sess, v)

    sess.begin_phase("path_products")
    left, right = edge_shares(v_arith)
    indicators = path_products(sess, left, right, model_share.depth)

    sess.begin_phase("inner_product")
    out = aggregate_result(sess, indicators, model_share.leaves)
    if debug_sink is not None:
        debug_sink["leaf_terms"] = indicators
    return out


def run_inference(
    model_shares: tuple[ModelShare, ModelShare],
    feature_shares: tuple[FeatureShare, FeatureShare],
    materials: tuple[PreprocessedMaterial, PreprocessedMaterial],
    compare_mode: str = "cla",
    latency_ms: float = 0.0,
    bandwidth_mbps: float | None = None,
    coin_seed=None,
    timeout: float = DEFAULT_TIMEOUT,
    collect_leaf_terms: bool = False,
):
    """Drive both parties in-memory. Returns (share0, share1, transcript)."""
    if (model_shares[0].party, model_shares[1].party) != (0, 1):
        raise UsageError("model shares must be ordered (party 0, party 1)")
    if (feature_shares[0].party, feature_shares[1].party) != (0, 1):
        raise UsageError("feature shares must be ordered (party 0, party 1)")
    if model_shares[0].depth != model_shares[1].depth:
        raise UsageError("model share depths disagree")
    bits = {
        model_shares[0].bits,
        model_shares[1].bits,
        feature_shares[0].bits,
        feature_shares[1].bits,
    }
    if len(bits) != 1:
        raise UsageError("model and feature shares use different ring widths")
    rg = ring(bits.pop())
    seeds = np.random.SeedSequence(coin_seed).spawn(2)
    sinks = ({}, {}) if collect_leaf_terms else (None, None)

    def party_fn(p):
        def fn(endpoint):
            sess = PartySession(
                p, endpoint, rg, materials[p], np.random.default_rng(seeds[p])
            )
            return evaluate_shares(
                sess, model_shares[p], feature_shares[p], compare_mode, sinks[p]
            )

        return fn

    s0, s1, transcript = run_pair(
        party_fn(0), party_fn(1), latency_ms, bandwidth_mbps, timeout
    )
    transcript.meta.update(
        depth=model_shares[0].depth,
        feature_dim=model_shares[0].feature_dim,
        bits=rg.bits,
        compare_mode=compare_mode,
        client_download_elements=2,
        client_download_bytes=2 * rg.nbytes,
    )
    if collect_leaf_terms:
        terms = reconstruct_arith(sinks[0]["leaf_terms"], sinks[1]["leaf_terms"])
        return s0, s1, transcript, terms
    return s0, s1, transcript


@dataclass
class InferenceOutcome:
    """Everything one end-to-end run produced."""

    result: int
    expected: int
    result_shares: tuple[int, int]
    transcript: Transcript
    leaf_terms: np.ndarray | None = None

    @property
    def verified(self) -> bool:
        return self.result == self.expected


def outsourced_inference(
    model: DecisionTreeModel,
    features: FeatureVector,
    seed: int = 0,
    compare_mode: str = "cla",
    latency_ms: float = 0.0,
    bandwidth_mbps: float | None = None,
    collect_leaf_terms: bool = False,
    timeout: float = DEFAULT_TIMEOUT,
) -> InferenceOutcome:
    """Full pipeline: dealer, both encryptions, online run, reconstruction.

    All randomness (dealer material, sharing masks, protocol coins) derives
    from `seed`, so a run is reproducible end to end.
    """
    if features.dim != model.feature_dim:
        raise UsageError("feature vector dimension does not match the model")
    if features.bits != model.bits:
        raise UsageError("feature vector width does not match the model")
    rg = ring(model.bits)
    keys = np.random.SeedSequence(seed).generate_state(4, dtype=np.uint64)
    budget = MaterialBudget.for_inference(
        model.depth, model.feature_dim, model.bits, compare_mode
    )
    materials = dealer_generate(rg, budget, int(keys[0]))
    model_shares = provider_encrypt(model, np.random.default_rng(int(keys[1])))
    feature_shares = client_encrypt(features, np.random.default_rng(int(keys[2])))
    out = run_inference(
        model_shares,
        feature_shares,
        materials,
        compare_mode=compare_mode,
        latency_ms=latency_ms,
        bandwidth_mbps=bandwidth_mbps,
        coin_seed=int(keys[3]),
        timeout=timeout,
        collect_leaf_terms=collect_leaf_terms,
    )
    if collect_leaf_terms:
        s0, s1, transcript, terms = out
    else:
        s0, s1, transcript = out
        terms = None
    recon = reconstruct_arith(s0, s1)
    result = int(rg.decode_signed(recon)[0])
    expected = plaintext_infer(model, features)
    transcript.meta.update(
        provider_bytes=len(model_shares[0].to_bytes()) + len(model_shares[1].to_bytes()),
        client_upload_elements=2 * features.dim,
        client_upload_bytes=2 * features.dim * rg.nbytes,
    )
    return InferenceOutcome(
        result=result,
        expected=expected,
        result_shares=(int(s0.values[0]), int(s1.values[0])),
        transcript=transcript,
        leaf_terms=terms,
    )
