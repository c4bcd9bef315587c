# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementation of the ensemble propagation kernel.

The chunk of states is carried as one (n_rows, dim) buffer whose memory,
read column-major, is the dim x n_rows matrix BLAS wants.  Per slice:
in-place phase multiplication (cached per distinct dt, so the trig cost
is paid once), zgemm for gate application, and a zherk rank-n_rows update
for the projector accumulation, which does half the work of a full gemm
because the record is Hermitian.  Everything runs without the GIL so
chunks can execute on real threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin
from scipy.linalg.cython_blas cimport zgemm, zherk

_MAX_DT_CACHE = 8


def propagate_sum(
    const double complex[::1] psi0,
    const double[::1] h0_diag,
    const double[:, ::1] z_diags,
    const double[:, ::1] offsets,
    const double[::1] slice_dts,
    const int[::1] gate_idx,
    const double complex[:, :, ::1] gates,
    double complex[:, :, ::1] out_sum,
):
    cdef Py_ssize_t n_rows_py = offsets.shape[0]
    cdef Py_ssize_t n_qubits = offsets.shape[1]
    cdef Py_ssize_t dim_py = psi0.shape[0]
    cdef Py_ssize_t n_slices = slice_dts.shape[0]
    if n_rows_py == 0:
        return

    # distinct slice durations, first-seen order; slots beyond the cache
    # recompute into scratch every time they appear
    dts: list = []
    slot_np = np.full(n_slices, -1, dtype=np.int32)
    cdef Py_ssize_t s
    for s in range(n_slices):
        dt_val = slice_dts[s]
        if dt_val == 0.0:
            continue
        if dt_val in dts:
            idx = dts.index(dt_val)
        else:
            dts.append(dt_val)
            idx = len(dts) - 1
        slot_np[s] = idx if idx < _MAX_DT_CACHE else -2
    n_cached = min(len(dts), _MAX_DT_CACHE)

    psi_np = np.empty((n_rows_py, dim_py), dtype=np.complex128)
    tmp_np = np.empty((n_rows_py, dim_py), dtype=np.complex128)
    heff_np = np.empty((n_rows_py, dim_py), dtype=np.float64)
    cache_np = np.empty((max(n_cached, 1), n_rows_py, dim_py), dtype=np.complex128)
    scratch_np = np.empty((n_rows_py, dim_py), dtype=np.complex128)
    ready_np = np.zeros(max(n_cached, 1), dtype=np.int8)
    acc_np = np.zeros((n_slices + 1, dim_py, dim_py), dtype=np.complex128)

    cdef double complex[:, ::1] psi_mv = psi_np
    cdef double complex[:, ::1] tmp_mv = tmp_np
    cdef double[:, ::1] heff = heff_np
    cdef double complex[:, :, ::1] cache = cache_np
    cdef double complex[:, ::1] scratch = scratch_np
    cdef signed char[::1] ready = ready_np
    cdef double complex[:, :, ::1] acc = acc_np
    cdef const int[::1] slot = slot_np

    cdef double complex* psi = &psi_mv[0, 0]
    cdef double complex* tmp = &tmp_mv[0, 0]
    cdef double complex* phase
    cdef double complex* swap
    cdef double complex* gptr
    cdef double complex zone = 1.0
    cdef double complex zzero = 0.0
    cdef double done = 1.0
    cdef int bdim = <int> dim_py
    cdef int brows = <int> n_rows_py
    cdef Py_ssize_t r, i, j, q, flat, total
    cdef int g, sl
    cdef double dt, h, x

    total = n_rows_py * dim_py
    with nogil:
        for r in range(n_rows_py):
            for i in range(dim_py):
                h = h0_diag[i]
                for q in range(n_qubits):
                    h += offsets[r, q] * z_diags[q, i]
                heff[r, i] = h
                psi_mv[r, i] = psi0[i]

        # record 0, written in the same packed-triangle layout zherk uses:
        # element (i, j) with i >= j lives at acc[0, j, i]
        for j in range(dim_py):
            for i in range(j, dim_py):
                acc[0, j, i] = n_rows_py * (psi0[i] * psi0[j].conjugate())

        for s in range(n_slices):
            dt = slice_dts[s]
            if dt != 0.0:
                sl = slot[s]
                if sl >= 0:
                    phase = &cache[sl, 0, 0]
                    if not ready[sl]:
                        for r in range(n_rows_py):
                            for i in range(dim_py):
                                x = -dt * heff[r, i]
                                cache[sl, r, i] = cos(x) + 1j * sin(x)
                        ready[sl] = 1
                else:
                    phase = &scratch[0, 0]
                    for r in range(n_rows_py):
                        for i in range(dim_py):
                            x = -dt * heff[r, i]
                            scratch[r, i] = cos(x) + 1j * sin(x)
                for flat in range(total):
                    psi[flat] = psi[flat] * phase[flat]
            g = gate_idx[s]
            if g >= 0:
                # column-major view of psi is dim x n_rows, so the gate acts
                # as tmp = G @ psi; the row-major gate matrix reads as G^T
                # column-major, hence the 'T'
                gptr = <double complex*> &gates[g, 0, 0]
                zgemm("T", "N", &bdim, &brows, &bdim, &zone,
                      gptr, &bdim, psi, &bdim, &zzero, tmp, &bdim)
                swap = psi
                psi = tmp
                tmp = swap
            zherk("L", "N", &bdim, &brows, &done,
                  psi, &bdim, &done, &acc[s + 1, 0, 0], &bdim)

        # unpack the Hermitian triangles into the caller's accumulator
        for s in range(n_slices + 1):
            for j in range(dim_py):
                out_sum[s, j, j] += acc[s, j, j]
                for i in range(j + 1, dim_py):
                    out_sum[s, i, j] += acc[s, j, i]
                    out_sum[s, j, i] += acc[s, j, i].conjugate()
