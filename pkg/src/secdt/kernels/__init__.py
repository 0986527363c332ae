"""Hot numeric kernels behind a switchable backend.

Backend selection, via the SECDT_KERNELS environment variable:

    unset / "auto"  use the jitted backend when numba imports, else pure numpy
    "numba"         require the jitted backend, error if unavailable
    "numpy"         force the pure-numpy fallback

Both backends implement identical bit-for-bit contracts (see numpy_impl);
`secdt kernel-bench` times one against the other.
"""
import os

from ..errors import UsageError
from . import numpy_impl

_requested = os.environ.get("SECDT_KERNELS", "auto").strip().lower() or "auto"
if _requested not in ("auto", "numba", "numpy"):
    raise UsageError(
        f"SECDT_KERNELS={_requested!r}: expected 'auto', 'numba' or 'numpy'"
    )

if _requested in ("auto", "numba"):
    try:
        from . import numba_impl as _impl
    except ImportError:
        if _requested == "numba":
            raise UsageError("SECDT_KERNELS=numba but numba is not importable")
        _impl = numpy_impl
else:
    _impl = numpy_impl


def backend() -> str:
    """Name of the active backend: 'numba' or 'numpy'."""
    return _impl.BACKEND


beaver_combine = _impl.beaver_combine
beaver_combine_bits = _impl.beaver_combine_bits
bit_decompose = _impl.bit_decompose
shifted_array_batch = _impl.shifted_array_batch
ot_pad_batch = _impl.ot_pad_batch
