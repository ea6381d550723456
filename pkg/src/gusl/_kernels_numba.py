"""Numba-jitted simulation kernel.

See _kernels_numpy.py for the reference semantics of advance_chunk; the two
modules implement the identical chunk contract and are swapped by
gusl.backends.  Compilation is cached on disk, so only the first call in a
fresh environment pays the jit cost.
"""

import math

import numpy as np
from numba import njit

LOG_2PI = math.log(2.0 * math.pi)

# Evidence kinds, shared with the harness: 0 empty, 1 finite, 2 dogmatic.
KIND_EMPTY = 0
KIND_FINITE = 1
KIND_DOGMATIC = 2


@njit(cache=True)
def _predictive_increment(mu, kappa, alpha, beta, n, mean0, m20, mean1, m21):
    # Change in the log marginal probability of the stream under one
    # Gaussian-gamma model when the observation count goes n -> n + 1.
    kn = kappa + n
    kn1 = kn + 1.0
    b0 = beta + 0.5 * m20 + 0.5 * kappa * n * (mean0 - mu) ** 2 / kn
    b1 = beta + 0.5 * m21 + 0.5 * kappa * (n + 1.0) * (mean1 - mu) ** 2 / kn1
    return (
        math.lgamma(alpha + 0.5 * (n + 1.0))
        - math.lgamma(alpha + 0.5 * n)
        + (alpha + 0.5 * n) * math.log(b0)
        - (alpha + 0.5 * (n + 1.0)) * math.log(b1)
        - 0.5 * LOG_2PI
        + 0.5 * (math.log(kn) - math.log(kn1))
    )


@njit(cache=True)
def advance_chunk(
    weights,
    log_mu,
    ell_acc,
    stream_mean,
    stream_m2,
    t0,
    obs,
    kinds,
    post_mu,
    post_kappa,
    post_alpha,
    post_beta,
    dog_mu,
    dog_lam,
    prior_mu,
    prior_kappa,
    prior_alpha,
    prior_beta,
    ckpt_steps,
    out_log_mu,
    out_ell_acc,
):
    m, h = log_mu.shape
    steps = obs.shape[0]
    ell = np.empty((m, h))
    mixed = np.empty((m, h))
    ck = 0
    for s in range(steps):
        n = float(t0 + s)
        for i in range(m):
            x = obs[s, i]
            mean0 = stream_mean[i]
            m20 = stream_m2[i]
            delta = x - mean0
            mean1 = mean0 + delta / (n + 1.0)
            m21 = m20 + delta * (x - mean1)
            den = _predictive_increment(
                prior_mu, prior_kappa, prior_alpha, prior_beta, n, mean0, m20, mean1, m21
            )
            for k in range(h):
                kind = kinds[i, k]
                if kind == KIND_EMPTY:
                    ell[i, k] = 0.0
                elif kind == KIND_FINITE:
                    num = _predictive_increment(
                        post_mu[i, k],
                        post_kappa[i, k],
                        post_alpha[i, k],
                        post_beta[i, k],
                        n,
                        mean0,
                        m20,
                        mean1,
                        m21,
                    )
                    ell[i, k] = num - den
                else:
                    num = (
                        0.5 * (math.log(dog_lam[i, k]) - LOG_2PI)
                        - 0.5 * dog_lam[i, k] * (x - dog_mu[i, k]) ** 2
                    )
                    ell[i, k] = num - den
            stream_mean[i] = mean1
            stream_m2[i] = m21
        for i in range(m):
            for k in range(h):
                acc = ell[i, k]
                for j in range(m):
                    acc += weights[i, j] * log_mu[j, k]
                mixed[i, k] = acc
        for i in range(m):
            for k in range(h):
                log_mu[i, k] = mixed[i, k]
                ell_acc[i, k] += ell[i, k]
        if ck < ckpt_steps.shape[0] and t0 + s + 1 == ckpt_steps[ck]:
            for i in range(m):
                for k in range(h):
                    out_log_mu[ck, i, k] = log_mu[i, k]
                    out_ell_acc[ck, i, k] = ell_acc[i, k]
            ck += 1
    return ck
