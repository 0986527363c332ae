"""Shared fixtures, builders, and the acceptance verdict reporter."""
import numpy as np
import pytest

from secdt.dealer import ChoiceStore, PadStore, PreprocessedMaterial, TripleStore
from secdt.ring import ring

_acceptance: list[tuple[int, str, bool, str]] = []


def record_acceptance(num: int, name: str, ok: bool, detail: str) -> None:
    """Collect one criterion verdict; printed after the run (survives capture)."""
    _acceptance.append((num, name, bool(ok), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(_acceptance):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num} [{status}] {name}: {detail}")


def make_material(party, rg, *, arith=None, boolean=None, pads=None, choices=None,
                  ot_width=1):
    """Build one party's material from explicit arrays (empty where omitted).

    arith / boolean: (t1, t2, t3) tuples. pads: (count, N) array. choices:
    (positions, values) pair. Lets tests pin exact correlated randomness
    instead of going through the dealer stream.
    """
    dt = rg.dtype
    if arith is None:
        z = np.zeros(0, dt)
        arith = (z, z, z)
    if boolean is None:
        z = np.zeros(0, np.uint8)
        boolean = (z, z, z)
    if pads is None:
        pads = np.zeros((0, ot_width), dt)
    if choices is None:
        choices = (np.zeros(0, np.uint32), np.zeros(0, dt))
    return PreprocessedMaterial(
        party=party,
        ring=rg,
        seed=0,
        arith=TripleStore(*arith, "arithmetic"),
        boolean=TripleStore(*boolean, "boolean"),
        ot_send=PadStore(pads),
        ot_recv=ChoiceStore(*choices, width=pads.shape[1]),
    )


@pytest.fixture
def rg8():
    return ring(8)


@pytest.fixture
def rg64():
    return ring(64)
