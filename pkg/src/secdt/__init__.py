"""Two-server secure decision tree inference over additive secret shares.

A model provider secret-shares a padded decision tree between two
non-colluding servers; a client secret-shares its feature vector; the servers
evaluate the tree on precomputed dealer material and hand the client two
result shares. Nothing but vector lengths ever crosses the wire in the clear,
and every protocol run carries an exact transcript of rounds, bytes, and
simulated elapsed time.
"""
from .bench import BenchConfig, kernel_bench, run_bench
from .compare import CarrySignals, carry_combine, secure_compare
from .dealer import (
    MaterialBudget,
    PreprocessedMaterial,
    dealer_generate,
    load_material,
)
from .errors import (
    ChannelClosedError,
    DesyncError,
    FormatError,
    PreprocessingDepletedError,
    ProtocolError,
    SecdtError,
    UsageError,
    VerificationError,
)
from .infer import (
    InferenceOutcome,
    evaluate_shares,
    outsourced_inference,
    run_inference,
)
from .model import (
    DecisionTreeModel,
    FeatureVector,
    Leaf,
    Node,
    client_encrypt,
    gen_synthetic,
    pad_to_complete,
    plaintext_infer,
    provider_encrypt,
    read_features,
    read_tree,
    write_features,
    write_tree,
)
from .ring import Ring, RingElement, SUPPORTED_WIDTHS, encode_signed, ring
from .select import oblivious_select, ot_read
from .session import PartySession, run_pair, run_protocol
from .sharing import (
    ArithShare,
    BitShare,
    beaver_mul_arith,
    beaver_mul_bits,
    reconstruct_arith,
    reconstruct_bits,
    share_arith,
    share_bits,
)
from .transport import Transcript, memory_channel_pair, tcp_endpoint

__version__ = "0.1.0"
