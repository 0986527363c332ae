"""Command line interface.

Subcommands: gen (synthesize model/feature files), run (one secure inference,
in-memory or over TCP), bench (deterministic cost sweep), selftest (exhaustive
small-ring oracles), kernel-bench (jitted vs pure-numpy backend timing).

Exit codes: 0 success, 2 usage, 3 file/format, 4 protocol mismatch,
5 preprocessing depleted.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import (
    BenchConfig,
    DEFAULT_GRID,
    kernel_bench,
    kernel_rows_to_csv,
    rows_to_csv,
    run_bench,
)
from .dealer import MaterialBudget, dealer_generate
from .errors import EXIT_IO, EXIT_PROTOCOL, EXIT_USAGE, SecdtError, UsageError, VerificationError
from .infer import evaluate_shares, outsourced_inference
from .model import (
    client_encrypt,
    gen_synthetic,
    plaintext_infer,
    provider_encrypt,
    read_features,
    read_tree,
    write_features,
    write_result_shares,
    write_tree,
)
from .ring import ring
from .selftest import run_selftest
from .session import PartySession
from .sharing import reconstruct_arith
from .transport import pack_arrays, tcp_endpoint, unpack_arrays


def _cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    model, features = gen_synthetic(args.depth, args.features, args.bitlen, rng)
    tree_path = f"{args.out}.tree"
    feat_path = f"{args.out}.features"
    write_tree(model, tree_path)
    write_features(features, feat_path)
    import os

    print(f"depth {model.depth}: {model.node_count} decision nodes, "
          f"{model.leaf_count} leaves, {model.feature_dim} features, l={model.bits}")
    print(f"wrote {tree_path} ({os.path.getsize(tree_path)} bytes)")
    print(f"wrote {feat_path} ({os.path.getsize(feat_path)} bytes)")
    return 0


def _print_phases(transcript) -> None:
    print(f"{'phase':<14} {'rounds':>6} {'bytes_p0':>10} {'bytes_p1':>10} {'ms':>10}")
    for rec in transcript.phases:
        print(
            f"{rec.phase:<14} {rec.rounds:>6} {rec.bytes_p0:>10} "
            f"{rec.bytes_p1:>10} {rec.elapsed_ms:>10.3f}"
        )
    print(
        f"{'total':<14} {transcript.total_rounds:>6} "
        f"{sum(r.bytes_p0 for r in transcript.phases):>10} "
        f"{sum(r.bytes_p1 for r in transcript.phases):>10} "
        f"{transcript.total_elapsed_ms:>10.3f}"
    )


def _cmd_run_mem(args, model, features) -> int:
    out = outsourced_inference(
        model,
        features,
        seed=args.seed,
        compare_mode=args.compare,
        latency_ms=args.latency_ms,
        bandwidth_mbps=args.bandwidth_mbps,
    )
    _print_phases(out.transcript)
    print(f"result: {out.result} (expected {out.expected})")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out.transcript.to_csv())
        print(f"wrote {args.out}")
    if args.result:
        write_result_shares(*out.result_shares, model.bits, args.result)
        print(f"wrote {args.result}")
    if not out.verified:
        raise VerificationError(
            f"secure result {out.result} does not match plaintext {out.expected}"
        )
    print("VERIFIED")
    return 0


def _cmd_run_tcp(args, model, features) -> int:
    if args.party is None:
        raise UsageError("--transport tcp requires --party 0 or 1")
    party = args.party
    rg = ring(model.bits)
    # both endpoints derive identical material and shares from the shared seed
    keys = np.random.SeedSequence(args.seed).generate_state(4, dtype=np.uint64)
    budget = MaterialBudget.for_inference(
        model.depth, model.feature_dim, model.bits, args.compare
    )
    materials = dealer_generate(rg, budget, int(keys[0]))
    model_shares = provider_encrypt(model, np.random.default_rng(int(keys[1])))
    feature_shares = client_encrypt(features, np.random.default_rng(int(keys[2])))
    coins = np.random.SeedSequence(int(keys[3])).spawn(2)

    endpoint = tcp_endpoint(
        party, args.host, args.port, args.latency_ms, args.bandwidth_mbps
    )
    try:
        sess = PartySession(
            party, endpoint, rg, materials[party], np.random.default_rng(coins[party])
        )
        share = evaluate_shares(
            sess, model_shares[party], feature_shares[party], args.compare
        )
        # reveal: party 1 hands its result share to party 0 for reconstruction
        endpoint.begin_phase("reveal")
        if party == 1:
            endpoint.send_flight(pack_arrays(share.values))
            print(f"party 1 result share: {int(share.values[0])}")
        else:
            (peer,) = unpack_arrays(endpoint.recv_flight(), [rg.dtype])
            from .sharing import ArithShare

            recon = reconstruct_arith(share, ArithShare(1, peer, rg))
            result = int(rg.decode_signed(recon)[0])
            expected = plaintext_infer(model, features)
            print(f"result: {result} (expected {expected})")
            if result != expected:
                raise VerificationError(
                    f"secure result {result} does not match plaintext {expected}"
                )
            print("VERIFIED")
    finally:
        endpoint.close()
    return 0


def _cmd_run(args) -> int:
    model = read_tree(args.tree)
    features = read_features(args.features)
    if args.transport == "tcp":
        return _cmd_run_tcp(args, model, features)
    return _cmd_run_mem(args, model, features)


def _parse_grid(text: str):
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            d, dim = chunk.split(":")
            pairs.append((int(d), int(dim)))
        except ValueError:
            raise UsageError(f"bad grid point {chunk!r}; expected depth:features")
    if not pairs:
        raise UsageError("benchmark grid is empty")
    return tuple(pairs)


def _cmd_bench(args) -> int:
    config = BenchConfig(
        pairs=_parse_grid(args.grid),
        bits=args.bitlen,
        latency_ms=args.latency_ms,
        bandwidth_mbps=args.bandwidth_mbps,
        seed=args.seed,
        reps=args.reps,
        allow_deep=args.allow_deep,
    )
    rows = run_bench(config)
    csv = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
        print(f"wrote {args.out} ({len(rows)} rows)")
    else:
        sys.stdout.write(csv)
    return 0


def _cmd_selftest(args) -> int:
    ok = run_selftest()
    if not ok:
        print("selftest FAILED")
        return EXIT_PROTOCOL
    print("selftest passed")
    return 0


def _cmd_kernel_bench(args) -> int:
    rows = kernel_bench(sizes=tuple(args.sizes), bits=args.bitlen, repeat=args.repeat)
    csv = kernel_rows_to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(csv)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secdt",
        description="Two-server secure decision tree inference with exact cost accounting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic model and feature file")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--features", type=int, default=13)
    p.add_argument("--bitlen", type=int, default=64, choices=(8, 16, 32, 64))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser("run", help="run one secure inference")
    p.add_argument("--tree", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--latency-ms", type=float, default=75.0)
    p.add_argument("--bandwidth-mbps", type=float, default=None)
    p.add_argument("--transport", choices=("mem", "tcp"), default="mem")
    p.add_argument("--compare", choices=("cla", "ripple"), default="cla")
    p.add_argument("--out", help="write the transcript CSV here")
    p.add_argument("--result", help="write the result share file here")
    p.add_argument("--party", type=int, choices=(0, 1), default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=9431)
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("bench", help="deterministic cost sweep over a (depth, features) grid")
    p.add_argument(
        "--grid",
        default=",".join(f"{d}:{i}" for d, i in DEFAULT_GRID),
        help="comma-separated depth:features pairs",
    )
    p.add_argument("--bitlen", type=int, default=64, choices=(8, 16, 32, 64))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--latency-ms", type=float, default=75.0)
    p.add_argument("--bandwidth-mbps", type=float, default=None)
    p.add_argument("--allow-deep", action="store_true",
                   help="permit depths beyond 13 (slow, large)")
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(handler=_cmd_bench)

    p = sub.add_parser("selftest", help="run the exhaustive small-ring diagnostics")
    p.set_defaults(handler=_cmd_selftest)

    p = sub.add_parser("kernel-bench", help="time jitted kernels against pure numpy")
    p.add_argument("--sizes", type=int, nargs="+", default=[1 << 16, 1 << 20])
    p.add_argument("--bitlen", type=int, default=64, choices=(8, 16, 32, 64))
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(handler=_cmd_kernel_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.handler(args)
    except SecdtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
