"""Ensemble propagation kernels.

Two implementations of the same contract live here: a Cython extension
(built at install time) and a vectorized numpy fallback.  Import-time
selection prefers the compiled kernel; set CORRNOISE_KERNEL=python or
=cython to force one explicitly.

Kernel contract: propagate_sum(psi0, h0_diag, z_diags, offsets, slice_dts,
gate_idx, gates, out_sum) adds, for every offset row, the projector onto
the propagated state at each record point into out_sum (shape
(n_slices + 1, dim, dim); record 0 is the initial state, record s+1 the
state after slice s, post-gate when gate_idx[s] >= 0).  Accumulation order
over rows is fixed, so a given chunk of offsets always produces the same
floats.
"""

from __future__ import annotations

import os

from . import ensemble_py

try:
    from . import ensemble_cy
except ImportError:  # extension not built; numpy path carries everything
    ensemble_cy = None

_BACKENDS = {"python": ensemble_py.propagate_sum}
if ensemble_cy is not None:
    _BACKENDS["cython"] = ensemble_cy.propagate_sum


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str):
    """(resolved name, kernel) for 'python', 'cython', or 'auto'."""
    if name == "auto":
        name = "cython" if "cython" in _BACKENDS else "python"
    if name not in _BACKENDS:
        raise ValueError(f"kernel backend {name!r} not available (have {available_backends()})")
    return name, _BACKENDS[name]


BACKEND_NAME, propagate_sum = get_backend(os.environ.get("CORRNOISE_KERNEL", "auto"))
