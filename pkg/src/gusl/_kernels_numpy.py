"""Pure-numpy simulation kernel: the reference implementation of the chunk
contract, vectorised over agents and hypotheses at each step.

advance_chunk plays ``steps`` synchronous rounds starting from observation
count ``t0`` (the same count for every agent, since each agent sees exactly
one measurement per round):

* fold ``obs[s, i]`` into agent i's running (mean, m2) statistics;
* score every (agent, hypothesis) cell with the one-step log likelihood
  ratio implied by its evidence kind (0 empty -> 0, 1 finite -> posterior
  predictive increment minus ignorance increment, 2 dogmatic -> exact
  Gaussian log density minus ignorance increment);
* mix log beliefs through the weight matrix and add the scores;
* when the absolute round number hits the next entry of ``ckpt_steps``,
  snapshot beliefs and accumulated scores into the output arrays.

``log_mu``, ``ell_acc``, ``stream_mean`` and ``stream_m2`` are updated in
place so a long horizon can be split across many chunks.  Returns the
number of checkpoints written.
"""

import math

import numpy as np
from scipy.special import gammaln

LOG_2PI = math.log(2.0 * math.pi)

KIND_EMPTY = 0
KIND_FINITE = 1
KIND_DOGMATIC = 2


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
    steps = obs.shape[0]
    finite = kinds == KIND_FINITE
    dogmatic = kinds == KIND_DOGMATIC
    dog_base = 0.5 * (np.log(dog_lam) - LOG_2PI)
    ck = 0
    for s in range(steps):
        n = float(t0 + s)
        x = obs[s]
        delta = x - stream_mean
        mean1 = stream_mean + delta / (n + 1.0)
        m21 = stream_m2 + delta * (x - mean1)

        kn = prior_kappa + n
        kn1 = kn + 1.0
        b0 = prior_beta + 0.5 * stream_m2 + 0.5 * prior_kappa * n * (stream_mean - prior_mu) ** 2 / kn
        b1 = prior_beta + 0.5 * m21 + 0.5 * prior_kappa * (n + 1.0) * (mean1 - prior_mu) ** 2 / kn1
        den = (
            math.lgamma(prior_alpha + 0.5 * (n + 1.0))
            - math.lgamma(prior_alpha + 0.5 * n)
            + (prior_alpha + 0.5 * n) * np.log(b0)
            - (prior_alpha + 0.5 * (n + 1.0)) * np.log(b1)
            - 0.5 * LOG_2PI
            + 0.5 * (math.log(kn) - math.log(kn1))
        )

        pkn = post_kappa + n
        pkn1 = pkn + 1.0
        pb0 = post_beta + 0.5 * stream_m2[:, None] + 0.5 * post_kappa * n * (stream_mean[:, None] - post_mu) ** 2 / pkn
        pb1 = post_beta + 0.5 * m21[:, None] + 0.5 * post_kappa * (n + 1.0) * (mean1[:, None] - post_mu) ** 2 / pkn1
        num = (
            gammaln(post_alpha + 0.5 * (n + 1.0))
            - gammaln(post_alpha + 0.5 * n)
            + (post_alpha + 0.5 * n) * np.log(pb0)
            - (post_alpha + 0.5 * (n + 1.0)) * np.log(pb1)
            - 0.5 * LOG_2PI
            + 0.5 * (np.log(pkn) - np.log(pkn1))
        )
        dog_num = dog_base - 0.5 * dog_lam * (x[:, None] - dog_mu) ** 2

        ell = np.where(finite, num - den[:, None], 0.0)
        ell = np.where(dogmatic, dog_num - den[:, None], ell)

        log_mu[:] = weights @ log_mu + ell
        ell_acc += ell
        stream_mean[:] = mean1
        stream_m2[:] = m21
        if ck < len(ckpt_steps) and t0 + s + 1 == ckpt_steps[ck]:
            out_log_mu[ck] = log_mu
            out_ell_acc[ck] = ell_acc
            ck += 1
    return ck
