"""Benchmark sweeps: protocol cost grid and kernel backend comparison.

Protocol rows are fully deterministic for a fixed seed: counts come from the
transcript and elapsed time from the virtual clock, so the emitted CSV is
byte-identical across hosts and runs.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .compare import COMPARE_MODES
from .errors import UsageError, VerificationError
from .infer import outsourced_inference
from .model import gen_synthetic
from .ring import ring

DEFAULT_GRID = ((3, 13), (4, 15), (8, 9), (13, 13))
DEEP_POINT = (17, 57)

BENCH_COLUMNS = (
    "d",
    "I_dim",
    "l",
    "phase",
    "compare_mode",
    "rounds",
    "bytes_p0",
    "bytes_p1",
    "sim_elapsed_ms",
    "provider_bytes",
    "client_up_bytes",
    "client_down_bytes",
)


@dataclass(frozen=True)
class BenchConfig:
    pairs: tuple = DEFAULT_GRID
    bits: int = 64
    latency_ms: float = 75.0
    bandwidth_mbps: float | None = None
    seed: int = 0
    reps: int = 1
    compare_modes: tuple = COMPARE_MODES
    allow_deep: bool = False

    def __post_init__(self):
        if not self.pairs:
            raise UsageError("benchmark grid is empty")
        for d, dim in self.pairs:
            if d < 1 or dim < 1:
                raise UsageError(f"bad grid point ({d}, {dim})")
            if d > 13 and not self.allow_deep:
                raise UsageError(
                    f"depth {d} exceeds 13; pass allow_deep to run it anyway"
                )
        if self.reps < 1:
            raise UsageError("reps must be at least 1")
        ring(self.bits)
        for mode in self.compare_modes:
            if mode not in COMPARE_MODES:
                raise UsageError(f"unknown compare mode {mode!r}")


def run_bench(config: BenchConfig, progress=None) -> list[dict]:
    """One verified inference per (grid point, mode, rep); one row per phase.

    Counts must agree across reps (they depend only on the shape parameters);
    a disagreement means nondeterminism crept in and is raised as an error.
    """
    rows: list[dict] = []
    for d, dim in config.pairs:
        for mode in config.compare_modes:
            reference = None
            for rep in range(config.reps):
                seq = np.random.SeedSequence(
                    (config.seed, d, dim, config.bits, COMPARE_MODES.index(mode), rep)
                )
                gen_key, run_key = (int(k) for k in seq.generate_state(2, np.uint64))
                model, features = gen_synthetic(
                    d, dim, config.bits, np.random.default_rng(gen_key)
                )
                out = outsourced_inference(
                    model,
                    features,
                    seed=run_key,
                    compare_mode=mode,
                    latency_ms=config.latency_ms,
                    bandwidth_mbps=config.bandwidth_mbps,
                )
                if not out.verified:
                    raise VerificationError(
                        f"bench point d={d} I={dim} mode={mode} rep={rep}: "
                        f"secure result {out.result} != plaintext {out.expected}"
                    )
                tr = out.transcript
                phase_rows = [
                    {
                        "d": d,
                        "I_dim": dim,
                        "l": config.bits,
                        "phase": rec.phase,
                        "compare_mode": mode,
                        "rounds": rec.rounds,
                        "bytes_p0": rec.bytes_p0,
                        "bytes_p1": rec.bytes_p1,
                        "sim_elapsed_ms": rec.elapsed_ms,
                        "provider_bytes": tr.meta["provider_bytes"],
                        "client_up_bytes": tr.meta["client_upload_bytes"],
                        "client_down_bytes": tr.meta["client_download_bytes"],
                    }
                    for rec in tr.phases
                ]
                phase_rows.append(
                    {
                        "d": d,
                        "I_dim": dim,
                        "l": config.bits,
                        "phase": "total",
                        "compare_mode": mode,
                        "rounds": tr.total_rounds,
                        "bytes_p0": sum(r.bytes_p0 for r in tr.phases),
                        "bytes_p1": sum(r.bytes_p1 for r in tr.phases),
                        "sim_elapsed_ms": tr.total_elapsed_ms,
                        "provider_bytes": tr.meta["provider_bytes"],
                        "client_up_bytes": tr.meta["client_upload_bytes"],
                        "client_down_bytes": tr.meta["client_download_bytes"],
                    }
                )
                if reference is None:
                    reference = phase_rows
                elif reference != phase_rows:
                    raise VerificationError(
                        f"bench point d={d} I={dim} mode={mode}: "
                        "cost rows changed between reps"
                    )
                if progress is not None:
                    progress(d, dim, mode, rep)
            rows.extend(reference)
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    lines = [",".join(BENCH_COLUMNS)]
    for row in rows:
        cells = []
        for col in BENCH_COLUMNS:
            val = row[col]
            cells.append(f"{val:.3f}" if isinstance(val, float) else str(val))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# kernel backend benchmark (the numba/numpy comparison)

KERNEL_SIZES = (1 << 16, 1 << 20)


def _kernel_inputs(name: str, size: int, bits: int, rng):
    rg = ring(bits)
    if name in ("beaver_combine", "beaver_combine_bits"):
        if name.endswith("bits"):
            arrs = [rng.integers(0, 2, size, dtype=np.uint8) for _ in range(5)]
        else:
            arrs = [rg.sample(rng, size) for _ in range(5)]
        return (1, *arrs)
    if name == "bit_decompose":
        return (rg.sample(rng, size), bits)
    if name == "shifted_array_batch":
        dim = 16
        count = max(size // dim, 1)
        values = rg.sample(rng, dim)
        shifts = rng.integers(0, rg.mask - dim + 1, size=count, dtype=rg.dtype, endpoint=True)
        masks = rg.sample(rng, count)
        return (values, shifts, masks, dim)
    if name == "ot_pad_batch":
        dim = 16
        count = max(size // dim, 1)
        messages = rg.sample(rng, (count, dim))
        pads = rg.sample(rng, (count, dim))
        deltas = rng.integers(0, dim, size=count, dtype=rg.dtype)
        return (messages, pads, deltas)
    raise UsageError(f"unknown kernel {name!r}")


def kernel_bench(sizes=KERNEL_SIZES, bits: int = 64, repeat: int = 5, seed: int = 0):
    """Time each kernel under both backends. Returns one row per (kernel, size)."""
    from .kernels import numpy_impl

    try:
        from .kernels import numba_impl
    except ImportError:
        numba_impl = None

    names = (
        "beaver_combine",
        "beaver_combine_bits",
        "bit_decompose",
        "shifted_array_batch",
        "ot_pad_batch",
    )
    rng = np.random.default_rng(seed)
    rows = []
    for name in names:
        for size in sizes:
            args = _kernel_inputs(name, size, bits, rng)
            row = {"kernel": name, "size": size, "l": bits}
            for impl in (numpy_impl, numba_impl):
                if impl is None:
                    continue
                fn = getattr(impl, name)
                fn(*args)  # warm-up; compiles the jitted variant
                best = min(
                    _timed(fn, args) for _ in range(repeat)
                )
                row[f"{impl.BACKEND}_ms"] = best * 1e3
            if "numba_ms" in row and row["numba_ms"] > 0:
                row["speedup"] = row["numpy_ms"] / row["numba_ms"]
            rows.append(row)
    return rows


def _timed(fn, args) -> float:
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


def kernel_rows_to_csv(rows) -> str:
    cols = ["kernel", "size", "l", "numpy_ms", "numba_ms", "speedup"]
    lines = [",".join(cols)]
    for row in rows:
        cells = []
        for col in cols:
            val = row.get(col)
            if val is None:
                cells.append("")
            elif isinstance(val, float):
                cells.append(f"{val:.4f}")
            else:
                cells.append(str(val))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
