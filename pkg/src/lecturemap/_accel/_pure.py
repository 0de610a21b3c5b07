"""Pure-numpy fallback kernels.

These mirror the compiled kernels in ``_core.pyx`` operation for operation
(same expression trees, sequential accumulation) so both backends produce
bit-identical results; tests assert this equivalence.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def emd_1d_consecutive(hists: np.ndarray) -> np.ndarray:
    """1-D EMD between each consecutive row pair of a (n, bins) matrix."""
    cdf = np.cumsum(hists, axis=1)
    diff = np.abs(cdf[1:] - cdf[:-1])
    # cumsum keeps the accumulation sequential, matching the compiled loop
    return diff.cumsum(axis=1)[:, -1]


def gibbs_sweep(z: np.ndarray, doc_of: np.ndarray, word_of: np.ndarray,
                n_dk: np.ndarray, n_kw: np.ndarray, n_k: np.ndarray,
                alpha: float, beta: float, topic_time_pdf: np.ndarray,
                uniforms: np.ndarray) -> None:
    """One collapsed-Gibbs sweep over all tokens, updating state in place.

    ``topic_time_pdf[i, k]`` is the timestamp density of token i under
    topic k for this sweep; ``uniforms[i]`` drives token i's draw.
    """
    n_tokens = z.shape[0]
    n_topics = n_k.shape[0]
    vocab = n_kw.shape[1]
    vbeta = vocab * beta
    for i in range(n_tokens):
        d = doc_of[i]
        w = word_of[i]
        k_old = z[i]
        n_dk[d, k_old] -= 1
        n_kw[k_old, w] -= 1
        n_k[k_old] -= 1
        probs = ((n_dk[d] + alpha) * (n_kw[:, w] + beta)
                 / (n_k + vbeta) * topic_time_pdf[i])
        cum = np.cumsum(probs)
        target = uniforms[i] * cum[-1]
        k_new = int(np.searchsorted(cum, target, side="right"))
        if k_new >= n_topics:
            k_new = n_topics - 1
        z[i] = k_new
        n_dk[d, k_new] += 1
        n_kw[k_new, w] += 1
        n_k[k_new] += 1
