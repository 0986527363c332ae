"""Decision tree models, feature vectors, the plaintext oracle, and file formats.

A model is a complete binary tree of some depth d stored in heap order: node j
has children 2j+1 (left) and 2j+2 (right), the J = 2^d - 1 internal nodes hold
a threshold and a feature index each, and the Z = 2^d leaves hold labels. At
node j the plaintext rule is v = (x[index_j] < threshold_j); v = 0 goes left,
v = 1 goes right, so ties go left.

Irregular trees are padded to complete ones before encryption: a leaf that sits
above the target depth becomes a dummy subtree whose internal nodes compare
feature 0 against threshold 0 and whose leaves all carry the original label, so
the padded tree computes the same function while its shape reveals only d.

The provider cost of encryption is one shared vector per component: thresholds
(J), feature indices (J), leaves (Z). Its serialized size therefore depends on
d alone, never on the feature dimension.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, UsageError
from .ring import Ring, ring
from .sharing import ArithShare, share_arith

TREE_MAGIC = b"SDTREE1"
VECT_MAGIC = b"SDVECT1"
RESULT_MAGIC = b"SDTRES1"

_TREE_HEADER = struct.Struct("<7sBBI")
_VECT_HEADER = struct.Struct("<7sBI")
_RESULT_HEADER = struct.Struct("<7sB")


@dataclass(frozen=True)
class DecisionTreeModel:
    """Complete binary decision tree in heap order, plaintext signed values."""

    depth: int
    feature_dim: int
    bits: int
    thresholds: np.ndarray  # (J,) int64
    feature_index: np.ndarray  # (J,) int64, each in [0, feature_dim)
    leaves: np.ndarray  # (Z,) int64

    def __post_init__(self):
        if self.depth < 1:
            raise UsageError(f"depth must be at least 1, got {self.depth}")
        if self.feature_dim < 1:
            raise UsageError(f"feature_dim must be at least 1, got {self.feature_dim}")
        rg = ring(self.bits)
        for name in ("thresholds", "feature_index", "leaves"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        j, z = self.node_count, self.leaf_count
        if self.thresholds.shape != (j,) or self.feature_index.shape != (j,):
            raise UsageError(f"expected {j} internal nodes")
        if self.leaves.shape != (z,):
            raise UsageError(f"expected {z} leaves")
        for name, arr in (("thresholds", self.thresholds), ("leaves", self.leaves)):
            if arr.size and (arr.min() < rg.signed_min or arr.max() > rg.signed_max):
                raise UsageError(f"{name} outside the signed range of width {self.bits}")
        if self.feature_index.min() < 0 or self.feature_index.max() >= self.feature_dim:
            raise UsageError("feature index out of range")

    @property
    def node_count(self) -> int:
        return 2**self.depth - 1

    @property
    def leaf_count(self) -> int:
        return 2**self.depth


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray  # (feature_dim,) int64
    bits: int

    def __post_init__(self):
        rg = ring(self.bits)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.int64))
        if self.values.ndim != 1 or self.values.size < 1:
            raise UsageError("feature vector must be a nonempty 1-d array")
        if self.values.min() < rg.signed_min or self.values.max() > rg.signed_max:
            raise UsageError(f"feature outside the signed range of width {self.bits}")

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def leaf_index(model: DecisionTreeModel, features: FeatureVector) -> int:
    """Index of the leaf the plaintext evaluation reaches."""
    if features.dim != model.feature_dim:
        raise UsageError("feature vector dimension does not match the model")
    j = 0
    for _ in range(model.depth):
        v = int(features.values[model.feature_index[j]] < model.thresholds[j])
        j = 2 * j + 1 + v
    return j - model.node_count


def plaintext_infer(model: DecisionTreeModel, features: FeatureVector) -> int:
    return int(model.leaves[leaf_index(model, features)])


@dataclass(frozen=True)
class Leaf:
    value: int


@dataclass(frozen=True)
class Node:
    feature: int
    threshold: int
    left: "Node | Leaf"
    right: "Node | Leaf"


def evaluate_node(node, features: FeatureVector) -> int:
    """Plaintext evaluation of an irregular tree (reference for padding)."""
    while isinstance(node, Node):
        v = features.values[node.feature] < node.threshold
        node = node.right if v else node.left
    return int(node.value)


def pad_to_complete(root, depth: int, feature_dim: int, bits: int) -> DecisionTreeModel:
    """Embed an irregular tree into a complete one of the given depth."""
    j = 2**depth - 1
    thresholds = np.zeros(j, dtype=np.int64)
    index = np.zeros(j, dtype=np.int64)
    leaves = np.zeros(2**depth, dtype=np.int64)

    def fill(node, pos, level):
        if isinstance(node, Leaf):
            if level == depth:
                leaves[pos - j] = node.value
                return
            # dummy decision: compares feature 0 against 0, both subtrees keep
            # the original label, so whichever way it routes the result holds
            fill(node, 2 * pos + 1, level + 1)
            fill(node, 2 * pos + 2, level + 1)
            return
        if level == depth:
            raise UsageError(f"tree has an internal node below depth {depth}")
        thresholds[pos] = node.threshold
        index[pos] = node.feature
        fill(node.left, 2 * pos + 1, level + 1)
        fill(node.right, 2 * pos + 2, level + 1)

    fill(root, 0, 0)
    return DecisionTreeModel(depth, feature_dim, bits, thresholds, index, leaves)


@dataclass(frozen=True)
class ModelShare:
    """One party's encrypted model: additive shares of all three components."""

    party: int
    depth: int
    feature_dim: int
    thresholds: ArithShare
    indices: ArithShare
    leaves: ArithShare

    def __post_init__(self):
        j, z = 2**self.depth - 1, 2**self.depth
        if not (self.thresholds.party == self.indices.party == self.leaves.party == self.party):
            raise UsageError("model share components belong to different parties")
        if self.thresholds.size != j or self.indices.size != j or self.leaves.size != z:
            raise UsageError("model share component lengths do not match the depth")

    @property
    def bits(self) -> int:
        return self.thresholds.ring.bits

    def to_bytes(self) -> bytes:
        header = _TREE_HEADER.pack(TREE_MAGIC, self.bits, self.depth, self.feature_dim)
        return header + bytes([self.party]) + _raw(
            self.thresholds.values, self.indices.values, self.leaves.values
        )

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


@dataclass(frozen=True)
class FeatureShare:
    """One party's encrypted feature vector."""

    party: int
    values: ArithShare

    @property
    def bits(self) -> int:
        return self.values.ring.bits

    @property
    def dim(self) -> int:
        return self.values.size

    def to_bytes(self) -> bytes:
        header = _VECT_HEADER.pack(VECT_MAGIC, self.bits, self.dim)
        return header + bytes([self.party]) + _raw(self.values.values)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


def _raw(*arrays: np.ndarray) -> bytes:
    return b"".join(
        a.astype(a.dtype.newbyteorder("<"), copy=False).tobytes() for a in arrays
    )


def provider_encrypt(model: DecisionTreeModel, rng) -> tuple[ModelShare, ModelShare]:
    """Secret-share the padded model. Cost is O(J) elements per component."""
    rg = ring(model.bits)
    thr = share_arith(rg.encode_signed(model.thresholds), rg, rng)
    idx = share_arith(rg.array(model.feature_index.astype(rg.dtype)), rg, rng)
    lvs = share_arith(rg.encode_signed(model.leaves), rg, rng)
    return tuple(
        ModelShare(p, model.depth, model.feature_dim, thr[p], idx[p], lvs[p])
        for p in (0, 1)
    )


def client_encrypt(features: FeatureVector, rng) -> tuple[FeatureShare, FeatureShare]:
    rg = ring(features.bits)
    xs = share_arith(rg.encode_signed(features.values), rg, rng)
    return FeatureShare(0, xs[0]), FeatureShare(1, xs[1])


def gen_synthetic(
    depth: int, feature_dim: int, bits: int, rng
) -> tuple[DecisionTreeModel, FeatureVector]:
    """Random complete model and feature vector with in-range signed values."""
    rg = ring(bits)
    j, z = 2**depth - 1, 2**depth
    model = DecisionTreeModel(
        depth,
        feature_dim,
        bits,
        thresholds=rng.integers(rg.signed_min, rg.signed_max, size=j, endpoint=True),
        feature_index=rng.integers(0, feature_dim, size=j),
        leaves=rng.integers(rg.signed_min, rg.signed_max, size=z, endpoint=True),
    )
    features = FeatureVector(
        rng.integers(rg.signed_min, rg.signed_max, size=feature_dim, endpoint=True), bits
    )
    return model, features


# ---------------------------------------------------------------------------
# file round-trips


def _read_exact(buf: bytes, expected: int, what: str) -> None:
    if len(buf) != expected:
        raise FormatError(f"{what}: expected {expected} bytes, got {len(buf)}")


def _decode_vectors(buf: bytes, rg: Ring, counts):
    out = []
    off = 0
    for n in counts:
        out.append(
            np.frombuffer(buf, dtype=rg.dtype.newbyteorder("<"), count=n, offset=off)
            .astype(rg.dtype)
        )
        off += n * rg.nbytes
    return out


def write_tree(model: DecisionTreeModel, path) -> None:
    rg = ring(model.bits)
    header = _TREE_HEADER.pack(TREE_MAGIC, model.bits, model.depth, model.feature_dim)
    payload = _raw(
        rg.encode_signed(model.thresholds),
        model.feature_index.astype(rg.dtype),
        rg.encode_signed(model.leaves),
    )
    with open(path, "wb") as fh:
        fh.write(header + payload)


def read_tree(path) -> DecisionTreeModel:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _TREE_HEADER.size:
        raise FormatError("tree file truncated: missing header")
    magic, bits, depth, feature_dim = _TREE_HEADER.unpack_from(buf)
    if magic != TREE_MAGIC:
        raise FormatError(f"bad tree magic {magic!r}")
    if bits not in (8, 16, 32, 64):
        raise FormatError(f"bad tree width {bits}")
    if not 1 <= depth <= 30:
        raise FormatError(f"bad tree depth {depth}")
    rg = ring(bits)
    j, z = 2**depth - 1, 2**depth
    body = buf[_TREE_HEADER.size :]
    _read_exact(body, (2 * j + z) * rg.nbytes, "tree payload")
    thr, idx, lvs = _decode_vectors(body, rg, [j, j, z])
    return DecisionTreeModel(
        depth,
        feature_dim,
        bits,
        thresholds=rg.decode_signed(thr),
        feature_index=idx.astype(np.int64),
        leaves=rg.decode_signed(lvs),
    )


def write_features(features: FeatureVector, path) -> None:
    rg = ring(features.bits)
    header = _VECT_HEADER.pack(VECT_MAGIC, features.bits, features.dim)
    with open(path, "wb") as fh:
        fh.write(header + _raw(rg.encode_signed(features.values)))


def read_features(path) -> FeatureVector:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _VECT_HEADER.size:
        raise FormatError("feature file truncated: missing header")
    magic, bits, dim = _VECT_HEADER.unpack_from(buf)
    if magic != VECT_MAGIC:
        raise FormatError(f"bad feature magic {magic!r}")
    if bits not in (8, 16, 32, 64):
        raise FormatError(f"bad feature width {bits}")
    rg = ring(bits)
    body = buf[_VECT_HEADER.size :]
    _read_exact(body, dim * rg.nbytes, "feature payload")
    (vals,) = _decode_vectors(body, rg, [dim])
    return FeatureVector(rg.decode_signed(vals), bits)


def read_model_share(path) -> ModelShare:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _TREE_HEADER.size + 1:
        raise FormatError("model share file truncated")
    magic, bits, depth, feature_dim = _TREE_HEADER.unpack_from(buf)
    if magic != TREE_MAGIC:
        raise FormatError(f"bad tree magic {magic!r}")
    if bits not in (8, 16, 32, 64):
        raise FormatError(f"bad tree width {bits}")
    rg = ring(bits)
    party = buf[_TREE_HEADER.size]
    if party not in (0, 1):
        raise FormatError(f"bad party byte {party}")
    j, z = 2**depth - 1, 2**depth
    body = buf[_TREE_HEADER.size + 1 :]
    _read_exact(body, (2 * j + z) * rg.nbytes, "model share payload")
    thr, idx, lvs = _decode_vectors(body, rg, [j, j, z])
    return ModelShare(
        party,
        depth,
        feature_dim,
        ArithShare(party, thr, rg),
        ArithShare(party, idx, rg),
        ArithShare(party, lvs, rg),
    )


def read_feature_share(path) -> FeatureShare:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _VECT_HEADER.size + 1:
        raise FormatError("feature share file truncated")
    magic, bits, dim = _VECT_HEADER.unpack_from(buf)
    if magic != VECT_MAGIC:
        raise FormatError(f"bad feature magic {magic!r}")
    if bits not in (8, 16, 32, 64):
        raise FormatError(f"bad feature width {bits}")
    rg = ring(bits)
    party = buf[_VECT_HEADER.size]
    if party not in (0, 1):
        raise FormatError(f"bad party byte {party}")
    body = buf[_VECT_HEADER.size + 1 :]
    _read_exact(body, dim * rg.nbytes, "feature share payload")
    (vals,) = _decode_vectors(body, rg, [dim])
    return FeatureShare(party, ArithShare(party, vals, rg))


def write_result_shares(share0: int, share1: int, bits: int, path) -> None:
    rg = ring(bits)
    vals = rg.array(np.array([share0 & rg.mask, share1 & rg.mask], dtype=np.object_))
    with open(path, "wb") as fh:
        fh.write(_RESULT_HEADER.pack(RESULT_MAGIC, bits) + _raw(vals))


def read_result_shares(path) -> tuple[int, int, int]:
    """Returns (share0, share1, bits)."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _RESULT_HEADER.size:
        raise FormatError("result file truncated: missing header")
    magic, bits = _RESULT_HEADER.unpack_from(buf)
    if magic != RESULT_MAGIC:
        raise FormatError(f"bad result magic {magic!r}")
    if bits not in (8, 16, 32, 64):
        raise FormatError(f"bad result width {bits}")
    rg = ring(bits)
    body = buf[_RESULT_HEADER.size :]
    _read_exact(body, 2 * rg.nbytes, "result payload")
    vals = np.frombuffer(body, dtype=rg.dtype.newbyteorder("<"))
    return int(vals[0]), int(vals[1]), bits
