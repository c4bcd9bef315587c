"""Numpy implementation of the ensemble propagation kernel.

Whole-chunk vectorization: states for all offset rows are carried as a
(n_rows, dim) matrix, phase factors are applied elementwise, gates via one
matmul, and each record point accumulates sum_r |psi_r><psi_r| as a single
(dim, n_rows) x (n_rows, dim) product.
"""

from __future__ import annotations

import numpy as np


def propagate_sum(
    psi0: np.ndarray,
    h0_diag: np.ndarray,
    z_diags: np.ndarray,
    offsets: np.ndarray,
    slice_dts: np.ndarray,
    gate_idx: np.ndarray,
    gates: np.ndarray,
    out_sum: np.ndarray,
) -> None:
    n_rows = offsets.shape[0]
    if n_rows == 0:
        return
    psi = np.broadcast_to(psi0, (n_rows, psi0.size)).copy()
    heff = offsets @ z_diags + h0_diag  # (n_rows, dim), constant per row

    out_sum[0] += n_rows * np.outer(psi0, psi0.conj())

    phases = None
    phases_dt = None
    for s in range(slice_dts.size):
        dt = slice_dts[s]
        if dt != 0.0:
            if phases is None or dt != phases_dt:
                phases = np.exp(-1j * dt * heff)
                phases_dt = dt
            psi *= phases
        g = gate_idx[s]
        if g >= 0:
            psi = psi @ gates[g].T
        out_sum[s + 1] += psi.T @ psi.conj()
