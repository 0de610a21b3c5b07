# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: consecutive-frame EMD and the collapsed-Gibbs sweep.

Expression trees and accumulation order match ``_pure.py`` exactly so the
two backends are bit-identical.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

BACKEND = "compiled"


def emd_1d_consecutive(cnp.ndarray[cnp.float64_t, ndim=2] hists):
    cdef Py_ssize_t n = hists.shape[0]
    cdef Py_ssize_t bins = hists.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n - 1, dtype=np.float64)
    cdef Py_ssize_t i, b
    cdef double cdf_prev, cdf_cur, cost
    for i in range(n - 1):
        cdf_prev = 0.0
        cdf_cur = 0.0
        cost = 0.0
        for b in range(bins):
            cdf_prev = cdf_prev + hists[i, b]
            cdf_cur = cdf_cur + hists[i + 1, b]
            cost = cost + fabs(cdf_cur - cdf_prev)
        out[i] = cost
    return out


def gibbs_sweep(cnp.ndarray[cnp.int64_t, ndim=1] z,
                cnp.ndarray[cnp.int64_t, ndim=1] doc_of,
                cnp.ndarray[cnp.int64_t, ndim=1] word_of,
                cnp.ndarray[cnp.int64_t, ndim=2] n_dk,
                cnp.ndarray[cnp.int64_t, ndim=2] n_kw,
                cnp.ndarray[cnp.int64_t, ndim=1] n_k,
                double alpha, double beta,
                cnp.ndarray[cnp.float64_t, ndim=2] topic_time_pdf,
                cnp.ndarray[cnp.float64_t, ndim=1] uniforms):
    cdef Py_ssize_t n_tokens = z.shape[0]
    cdef Py_ssize_t n_topics = n_k.shape[0]
    cdef Py_ssize_t vocab = n_kw.shape[1]
    cdef double vbeta = vocab * beta
    cdef Py_ssize_t i, k
    cdef cnp.int64_t d, w, k_old, k_new
    cdef double cum, target, p
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cumbuf = np.empty(n_topics, dtype=np.float64)
    for i in range(n_tokens):
        d = doc_of[i]
        w = word_of[i]
        k_old = z[i]
        n_dk[d, k_old] -= 1
        n_kw[k_old, w] -= 1
        n_k[k_old] -= 1
        cum = 0.0
        for k in range(n_topics):
            p = ((n_dk[d, k] + alpha) * (n_kw[k, w] + beta)
                 / (n_k[k] + vbeta) * topic_time_pdf[i, k])
            cum = cum + p
            cumbuf[k] = cum
        target = uniforms[i] * cum
        k_new = 0
        while k_new < n_topics - 1 and cumbuf[k_new] <= target:
            k_new += 1
        z[i] = k_new
        n_dk[d, k_new] += 1
        n_kw[k_new, w] += 1
        n_k[k_new] += 1
