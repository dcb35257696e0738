# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-pixel ridge kernels: bordered normal equations + LAPACK dposv.

Same contract as the pure fallback; pixels within a row are solved in
parallel (OpenMP), each with its own scratch buffers, so results do not
depend on the schedule.
"""

from cython.parallel cimport prange
cimport openmp
from scipy.linalg.cython_lapack cimport dposv

import numpy as np

BACKEND = "compiled"


cdef int _fit_pixel(const double[:, :, ::1] inputs, const double[:, :, ::1] targets,
                    int row, int col, int r, double penalty,
                    double* a, double* rhs, double* patch) noexcept nogil:
    # Assemble [[X'X + cI, X'1], [1'X, N + c]] and [X't, 1't] for the patch
    # design at (row, col), replicate-padded, then solve in place via dposv.
    cdef int n_img = inputs.shape[0]
    cdef int height = inputs.shape[1]
    cdef int width = inputs.shape[2]
    cdef int k = r * r
    cdef int kk = k + 1
    cdef int half = r // 2
    cdef int m, i, j, dr, dc, rr, cc
    cdef int nrhs = 1, info = 0
    cdef char uplo = b'L'
    cdef double t

    for i in range(kk * kk):
        a[i] = 0.0
    for i in range(kk):
        rhs[i] = 0.0

    for m in range(n_img):
        i = 0
        for dr in range(-half, half + 1):
            rr = row + dr
            if rr < 0:
                rr = 0
            elif rr >= height:
                rr = height - 1
            for dc in range(-half, half + 1):
                cc = col + dc
                if cc < 0:
                    cc = 0
                elif cc >= width:
                    cc = width - 1
                patch[i] = inputs[m, rr, cc]
                i += 1
        t = targets[m, row, col]
        for i in range(k):
            for j in range(i, k):
                a[i * kk + j] += patch[i] * patch[j]
            a[i * kk + k] += patch[i]
            rhs[i] += patch[i] * t
        rhs[k] += t

    for i in range(k):
        a[i * kk + i] += penalty
    a[k * kk + k] = n_img + penalty

    # Row-major upper triangle is LAPACK's column-major lower triangle.
    dposv(&uplo, &kk, &nrhs, a, &kk, rhs, &kk, &info)
    return info


def train_row(const double[:, :, ::1] inputs, const double[:, :, ::1] targets,
              int row, int r, double penalty, int threads,
              double[:, ::1] w_out, double[::1] b_out):
    """Fit every pixel of one row; returns first failing column or -1."""
    cdef int width = inputs.shape[2]
    cdef int k = r * r
    cdef int kk = k + 1
    cdef int n_threads = threads if threads > 0 else openmp.omp_get_max_threads()
    cdef double[:, ::1] a_buf = np.empty((n_threads, kk * kk))
    cdef double[:, ::1] rhs_buf = np.empty((n_threads, kk))
    cdef double[:, ::1] p_buf = np.empty((n_threads, k))
    cdef int[::1] info = np.zeros(width, dtype=np.intc)
    cdef int col, i, tid

    for col in prange(width, nogil=True, num_threads=n_threads, schedule="static"):
        tid = openmp.omp_get_thread_num()
        info[col] = _fit_pixel(inputs, targets, row, col, r, penalty,
                               &a_buf[tid, 0], &rhs_buf[tid, 0], &p_buf[tid, 0])
        if info[col] == 0:
            for i in range(k):
                w_out[col, i] = rhs_buf[tid, i]
            b_out[col] = rhs_buf[tid, k]

    for col in range(width):
        if info[col] != 0:
            return col
    return -1


def apply_plane(const double[:, ::1] plane, const double[:, :, ::1] weights,
                const double[:, ::1] biases, int r, int threads,
                double[:, ::1] out):
    """Affine map per pixel over one channel plane, clamped to [0, 1]."""
    cdef int height = plane.shape[0]
    cdef int width = plane.shape[1]
    cdef int half = r // 2
    cdef int n_threads = threads if threads > 0 else openmp.omp_get_max_threads()
    cdef int row, col, dr, dc, rr, cc, i
    cdef double acc

    for row in prange(height, nogil=True, num_threads=n_threads, schedule="static"):
        for col in range(width):
            acc = biases[row, col]
            i = 0
            for dr in range(-half, half + 1):
                rr = row + dr
                if rr < 0:
                    rr = 0
                elif rr >= height:
                    rr = height - 1
                for dc in range(-half, half + 1):
                    cc = col + dc
                    if cc < 0:
                        cc = 0
                    elif cc >= width:
                        cc = width - 1
                    acc = acc + weights[row, col, i] * plane[rr, cc]
                    i = i + 1
            if acc < 0.0:
                acc = 0.0
            elif acc > 1.0:
                acc = 1.0
            out[row, col] = acc
