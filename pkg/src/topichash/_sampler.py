"""Collapsed Gibbs sweep kernels.

The kernels are written in the numba-compatible subset of Python and are
jitted at import when numba is available; otherwise they run interpreted
(slow but identical logic).  All randomness is consumed from a pre-drawn
array of uniforms (one per token, drawn from the caller's PCG64 stream),
so the RNG stays outside the kernel and results are reproducible
independently of compilation.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


@njit(cache=True)
def gibbs_sweep(
    doc_offsets,   # int64[D+1], token span of each document
    token_words,   # int32[N], word id per token
    z,             # int32[N], topic assignment per token (updated in place)
    allowed,       # int32[*], pooled per-document admissible topic ids
    allowed_start, # int64[D], start of each document's slice in `allowed`
    allowed_end,   # int64[D]
    n_dk,          # int32[D,K]
    n_kw,          # int32[K,V]
    n_k,           # int64[K]
    alpha,
    beta,
    vocab_size,
    uniforms,      # float64[N], one uniform draw per token
    buf,           # float64[K], scratch
):
    """One full sweep of the collapsed sampler.

    Per token: remove it from the counts, evaluate the full conditional
    p(z=k) ~ (n_dk + alpha) * (n_kw + beta) / (n_k + V*beta) over the
    document's admissible topics, draw the new topic by inverse CDF on the
    token's uniform, and restore the counts.
    """
    vbeta = vocab_size * beta
    t = 0
    for d in range(doc_offsets.shape[0] - 1):
        start = allowed_start[d]
        width = allowed_end[d] - start
        for i in range(doc_offsets[d], doc_offsets[d + 1]):
            w = token_words[i]
            k_old = z[i]
            n_dk[d, k_old] -= 1
            n_kw[k_old, w] -= 1
            n_k[k_old] -= 1

            total = 0.0
            for j in range(width):
                k = allowed[start + j]
                p = (n_dk[d, k] + alpha) * (n_kw[k, w] + beta) / (n_k[k] + vbeta)
                buf[j] = p
                total += p

            u = uniforms[t] * total
            t += 1
            k_new = allowed[start + width - 1]
            acc = 0.0
            for j in range(width):
                acc += buf[j]
                if u < acc:
                    k_new = allowed[start + j]
                    break

            z[i] = k_new
            n_dk[d, k_new] += 1
            n_kw[k_new, w] += 1
            n_k[k_new] += 1


@njit(cache=True)
def foldin_sweep(
    token_words,  # int32[n], one document's word ids
    z,            # int32[n], topic assignments (updated in place)
    counts,       # int64[K], document topic counts
    phi,          # float64[K,V], fixed topic-word probabilities
    alpha,
    uniforms,     # float64[n]
    buf,          # float64[K]
):
    """One fold-in sweep for a single document with phi held fixed.

    Full conditional: p(z=k) ~ (counts[k] + alpha) * phi[k, w].
    """
    num_topics = counts.shape[0]
    for i in range(token_words.shape[0]):
        w = token_words[i]
        k_old = z[i]
        counts[k_old] -= 1

        total = 0.0
        for k in range(num_topics):
            p = (counts[k] + alpha) * phi[k, w]
            buf[k] = p
            total += p

        u = uniforms[i] * total
        k_new = num_topics - 1
        acc = 0.0
        for k in range(num_topics):
            acc += buf[k]
            if u < acc:
                k_new = k
                break

        z[i] = k_new
        counts[k_new] += 1
