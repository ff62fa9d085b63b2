"""Compiled inner loop for the fixed-length subsequence kernel."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


cdef double _pair_dp(const int* s, Py_ssize_t ls, const int* t, Py_ssize_t lt,
                     int p, double lam, double* kp_prev, double* kp_cur) noexcept nogil:
    """Kernel value for one pair; scratch buffers hold (ls+1)*(lt+1) doubles."""
    cdef Py_ssize_t i, m, n, w = lt + 1
    cdef double kd, result = 0.0
    cdef double lam2 = lam * lam
    cdef double* tmp

    for m in range((ls + 1) * w):
        kp_prev[m] = 1.0
    for i in range(1, p):
        for n in range(w):
            kp_cur[n] = 0.0
        for m in range(1, ls + 1):
            kd = 0.0
            kp_cur[m * w] = 0.0
            for n in range(1, lt + 1):
                kd = lam * kd
                if s[m - 1] == t[n - 1]:
                    kd = kd + lam2 * kp_prev[(m - 1) * w + (n - 1)]
                kp_cur[m * w + n] = lam * kp_cur[(m - 1) * w + n] + kd
        tmp = kp_prev
        kp_prev = kp_cur
        kp_cur = tmp
    for m in range(1, ls + 1):
        for n in range(1, lt + 1):
            if s[m - 1] == t[n - 1]:
                result += kp_prev[(m - 1) * w + (n - 1)]
    return lam2 * result


def gram_codes(xs_codes, xs_len, ys_codes, ys_len, int p, double lam, bint symmetric):
    """Unnormalised subsequence-kernel Gram matrix between two code batches."""
    cdef const int[:, ::1] xc = np.ascontiguousarray(xs_codes, dtype=np.int32)
    cdef const int[:, ::1] yc = np.ascontiguousarray(ys_codes, dtype=np.int32)
    cdef const Py_ssize_t[:] xl = np.ascontiguousarray(xs_len, dtype=np.intp)
    cdef const Py_ssize_t[:] yl = np.ascontiguousarray(ys_len, dtype=np.intp)
    cdef Py_ssize_t a = xc.shape[0], b = yc.shape[0]
    out_arr = np.zeros((a, b))
    if a == 0 or b == 0 or p < 1:
        return out_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t scratch = (xc.shape[1] + 1) * (yc.shape[1] + 1)
    buf_arr = np.empty(2 * scratch)
    cdef double[::1] buf = buf_arr
    cdef Py_ssize_t i, j, jmax
    cdef double val
    with nogil:
        for i in range(a):
            jmax = i + 1 if symmetric else b
            for j in range(jmax):
                if xl[i] < p or yl[j] < p:
                    val = 0.0
                else:
                    val = _pair_dp(&xc[i, 0], xl[i], &yc[j, 0], yl[j], p, lam,
                                   &buf[0], &buf[scratch])
                out[i, j] = val
                if symmetric:
                    out[j, i] = val
    return out_arr


def self_values(codes, lens, int p, double lam):
    """Diagonal k(s, s) for each string in the batch."""
    cdef const int[:, ::1] xc = np.ascontiguousarray(codes, dtype=np.int32)
    cdef const Py_ssize_t[:] xl = np.ascontiguousarray(lens, dtype=np.intp)
    cdef Py_ssize_t a = xc.shape[0]
    out_arr = np.zeros(a)
    if a == 0 or p < 1:
        return out_arr
    cdef double[::1] out = out_arr
    cdef Py_ssize_t scratch = (xc.shape[1] + 1) * (xc.shape[1] + 1)
    buf_arr = np.empty(2 * scratch)
    cdef double[::1] buf = buf_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(a):
            if xl[i] >= p:
                out[i] = _pair_dp(&xc[i, 0], xl[i], &xc[i, 0], xl[i], p, lam,
                                  &buf[0], &buf[scratch])
    return out_arr
