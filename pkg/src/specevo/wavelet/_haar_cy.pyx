# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled single-level Haar kernels (hot path of every candidate
reconstruction). Same contract and coefficient layout as ``_haar_np``;
selected at import when available."""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def haar_analyze(const cnp.float64_t[:, :, :] x):
    cdef Py_ssize_t n_ch = x.shape[0]
    cdef Py_ssize_t h2 = x.shape[1] // 2
    cdef Py_ssize_t w2 = x.shape[2] // 2
    ll_arr = np.empty((n_ch, h2, w2), dtype=np.float64)
    lh_arr = np.empty((n_ch, h2, w2), dtype=np.float64)
    hl_arr = np.empty((n_ch, h2, w2), dtype=np.float64)
    hh_arr = np.empty((n_ch, h2, w2), dtype=np.float64)
    cdef cnp.float64_t[:, :, :] ll = ll_arr
    cdef cnp.float64_t[:, :, :] lh = lh_arr
    cdef cnp.float64_t[:, :, :] hl = hl_arr
    cdef cnp.float64_t[:, :, :] hh = hh_arr
    cdef Py_ssize_t c, i, j
    cdef double a, b, cc, d
    for c in range(n_ch):
        for i in range(h2):
            for j in range(w2):
                a = x[c, 2 * i, 2 * j]
                b = x[c, 2 * i, 2 * j + 1]
                cc = x[c, 2 * i + 1, 2 * j]
                d = x[c, 2 * i + 1, 2 * j + 1]
                ll[c, i, j] = (a + b + cc + d) * 0.5
                lh[c, i, j] = (a - b + cc - d) * 0.5
                hl[c, i, j] = (a + b - cc - d) * 0.5
                hh[c, i, j] = (a - b - cc + d) * 0.5
    return ll_arr, lh_arr, hl_arr, hh_arr


def haar_synthesize(const cnp.float64_t[:, :, :] ll, const cnp.float64_t[:, :, :] lh,
                    const cnp.float64_t[:, :, :] hl, const cnp.float64_t[:, :, :] hh):
    cdef Py_ssize_t n_ch = ll.shape[0]
    cdef Py_ssize_t h2 = ll.shape[1]
    cdef Py_ssize_t w2 = ll.shape[2]
    out_arr = np.empty((n_ch, 2 * h2, 2 * w2), dtype=np.float64)
    cdef cnp.float64_t[:, :, :] out = out_arr
    cdef Py_ssize_t c, i, j
    cdef double s, t, u, v
    for c in range(n_ch):
        for i in range(h2):
            for j in range(w2):
                s = ll[c, i, j]
                t = lh[c, i, j]
                u = hl[c, i, j]
                v = hh[c, i, j]
                out[c, 2 * i, 2 * j] = (s + t + u + v) * 0.5
                out[c, 2 * i, 2 * j + 1] = (s - t + u - v) * 0.5
                out[c, 2 * i + 1, 2 * j] = (s + t - u - v) * 0.5
                out[c, 2 * i + 1, 2 * j + 1] = (s - t - u + v) * 0.5
    return out_arr
