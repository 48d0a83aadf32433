"""Kernel dispatch: compiled core if available, NumPy fallback otherwise.

The choice is made once at import.  Set ``QAOAFLOW_KERNELS=numpy`` or
``QAOAFLOW_KERNELS=compiled`` to force one implementation (``compiled``
raises if the extension was not built).
"""

import os

from . import _fallback

_REQUESTED = os.environ.get("QAOAFLOW_KERNELS", "auto").lower()
if _REQUESTED not in ("auto", "compiled", "numpy"):
    raise ValueError(
        f"QAOAFLOW_KERNELS must be 'auto', 'compiled' or 'numpy', "
        f"got {_REQUESTED!r}"
    )

if _REQUESTED == "numpy":
    _impl = _fallback
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        if _REQUESTED == "compiled":
            raise
        _impl = _fallback
        BACKEND = "numpy"

diagonal_energies = _impl.diagonal_energies
accumulate_parity_phase = _impl.accumulate_parity_phase
apply_phase = _impl.apply_phase
apply_uniform_phase = _impl.apply_uniform_phase
apply_rx = _impl.apply_rx
apply_hadamard = _impl.apply_hadamard
apply_xy = _impl.apply_xy
probabilities = _impl.probabilities
expectation = _impl.expectation


def implementations():
    """Available kernel modules keyed by name (for tests and benchmarks)."""
    impls = {"numpy": _fallback}
    try:
        from . import _core
        impls["compiled"] = _core
    except ImportError:
        pass
    return impls
