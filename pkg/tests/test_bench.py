"""Benchmark sweeps: schema, determinism, validation, kernel timing rows."""
import pytest

from secdt.bench import (
    BENCH_COLUMNS,
    BenchConfig,
    kernel_bench,
    kernel_rows_to_csv,
    rows_to_csv,
    run_bench,
)
from secdt.errors import UsageError


def _tiny_config(**overrides):
    defaults = dict(pairs=((2, 4), (3, 5)), bits=16, seed=3, reps=1)
    defaults.update(overrides)
    return BenchConfig(**defaults)


def test_run_bench_row_schema():
    rows = run_bench(_tiny_config())
    # per grid point and mode: five phase rows plus a total row
    assert len(rows) == 2 * 2 * 6
    for row in rows:
        assert tuple(row.keys()) == BENCH_COLUMNS
    totals = [r for r in rows if r["phase"] == "total"]
    assert {r["compare_mode"] for r in totals} == {"cla", "ripple"}
    d2_cla = next(r for r in totals if r["d"] == 2 and r["compare_mode"] == "cla")
    assert d2_cla["rounds"] == 5 + 5 + 1 + 1 + 1
    d2_rip = next(r for r in totals if r["d"] == 2 and r["compare_mode"] == "ripple")
    assert d2_rip["rounds"] == 5 + 15 + 1 + 1 + 1
    assert d2_cla["sim_elapsed_ms"] == pytest.approx(13 * 75.0)


def test_run_bench_deterministic():
    a = run_bench(_tiny_config())
    b = run_bench(_tiny_config())
    assert a == b
    c = run_bench(_tiny_config(seed=4))
    assert [r["rounds"] for r in a] == [r["rounds"] for r in c]  # counts shape-only


def test_run_bench_reps_must_agree():
    rows = run_bench(_tiny_config(reps=2))
    assert len(rows) == 2 * 2 * 6  # reps collapse into one verified row set


def test_provider_cost_independent_of_dim_in_rows():
    rows = run_bench(BenchConfig(pairs=((3, 9), (3, 57)), bits=64, seed=5,
                                 compare_modes=("cla",)))
    sizes = {r["I_dim"]: r["provider_bytes"] for r in rows if r["phase"] == "total"}
    assert sizes[9] == sizes[57]


def test_csv_shape():
    rows = run_bench(_tiny_config(pairs=((2, 4),), compare_modes=("cla",)))
    csv = rows_to_csv(rows)
    lines = csv.strip().splitlines()
    assert lines[0] == ",".join(BENCH_COLUMNS)
    assert len(lines) == 1 + 6
    assert lines[1].startswith("2,4,16,selection,cla,5,")
    for line in lines[1:]:
        assert len(line.split(",")) == len(BENCH_COLUMNS)


def test_config_validation():
    with pytest.raises(UsageError):
        BenchConfig(pairs=())
    with pytest.raises(UsageError):
        BenchConfig(pairs=((14, 9),))  # needs allow_deep
    BenchConfig(pairs=((14, 9),), allow_deep=True)
    with pytest.raises(UsageError):
        BenchConfig(pairs=((0, 9),))
    with pytest.raises(UsageError):
        BenchConfig(reps=0)
    with pytest.raises(UsageError):
        BenchConfig(bits=12)
    with pytest.raises(UsageError):
        BenchConfig(compare_modes=("cla", "quantum"))


def test_kernel_bench_rows():
    rows = kernel_bench(sizes=(512,), bits=64, repeat=1, seed=1)
    assert len(rows) == 5
    for row in rows:
        assert row["size"] == 512
        assert row["l"] == 64
        assert row["numpy_ms"] >= 0.0
    csv = kernel_rows_to_csv(rows)
    assert csv.splitlines()[0] == "kernel,size,l,numpy_ms,numba_ms,speedup"
    assert len(csv.strip().splitlines()) == 6
