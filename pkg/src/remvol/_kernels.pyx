# Event-window accumulation kernels.
#
# Compiled twin of `_kernels_py`; same signatures, same results to float
# accumulation order. Loops run per event in O(1) scratch memory, which
# is what makes minute-scale bootstraps feasible without materializing
# an events-by-lags matrix.

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def window_stats(const double[::1] values, const unsigned char[::1] included,
                 const long long[::1] events, int step, int t_max):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = events.shape[0]
    cdef Py_ssize_t L = t_max + 1
    cnt_arr = np.zeros(L, dtype=np.int64)
    s1_arr = np.zeros(L, dtype=np.float64)
    s2_arr = np.zeros(L, dtype=np.float64)
    cdef long long[::1] cnt = cnt_arr
    cdef double[::1] s1 = s1_arr
    cdef double[::1] s2 = s2_arr
    cdef Py_ssize_t i, k
    cdef long long j, e
    cdef double x
    for i in range(m):
        e = events[i]
        for k in range(L):
            j = e + step * k
            if j < 0 or j >= n:
                break
            if included[j]:
                x = values[j]
                cnt[k] += 1
                s1[k] += x
                s2[k] += x * x
    return cnt_arr, s1_arr, s2_arr


def omori_stats(const double[::1] values, const unsigned char[::1] included,
                const long long[::1] events, int step, int t_max, double thresh):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = events.shape[0]
    cdef Py_ssize_t L = t_max + 1
    contrib_arr = np.zeros(L, dtype=np.int64)
    s1_arr = np.zeros(L, dtype=np.float64)
    s2_arr = np.zeros(L, dtype=np.float64)
    cdef long long[::1] contrib = contrib_arr
    cdef double[::1] s1 = s1_arr
    cdef double[::1] s2 = s2_arr
    cdef Py_ssize_t i, k
    cdef long long j, e
    cdef double c
    for i in range(m):
        e = events[i]
        c = 0.0
        for k in range(L):
            j = e + step * k
            if j >= 0 and j < n and included[j]:
                contrib[k] += 1
                if k > 0 and values[j] > thresh:
                    c += 1.0
            # Counts freeze once the window leaves the series, but the
            # frozen value still enters every later lag's statistics.
            s1[k] += c
            s2[k] += c * c
    return contrib_arr, s1_arr, s2_arr


def bootstrap_stats(const double[::1] values, const unsigned char[::1] included,
                    const long long[::1] events, int step, int t_max,
                    const double[:, ::1] weights):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = events.shape[0]
    cdef Py_ssize_t B = weights.shape[0]
    cdef Py_ssize_t L = t_max + 1
    ws_arr = np.zeros((B, L), dtype=np.float64)
    wc_arr = np.zeros((B, L), dtype=np.float64)
    wz_arr = np.zeros(B, dtype=np.float64)
    cdef double[:, ::1] ws = ws_arr
    cdef double[:, ::1] wc = wc_arr
    cdef double[::1] wz = wz_arr
    cdef Py_ssize_t b, i, k
    cdef long long j, e
    cdef double w
    for b in range(B):
        for i in range(m):
            w = weights[b, i]
            if w == 0.0:
                continue
            e = events[i]
            wz[b] += w * values[e]
            for k in range(L):
                j = e + step * k
                if j < 0 or j >= n:
                    break
                if included[j]:
                    ws[b, k] += w * values[j]
                    wc[b, k] += w
    return ws_arr, wc_arr, wz_arr
