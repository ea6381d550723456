"""Independent reference computations used by the tests.

The closed forms in gusl.core all reduce to one object: the marginal
probability of a batch of Gaussian samples with the (mean, precision) pair
integrated against a Gaussian-gamma weight.  The oracle here computes that
integral by brute-force nested adaptive quadrature straight from the
density definitions, using the raw samples (never the package's summary
statistics or posterior formulas), so agreement is evidence that the
closed forms are right and not merely self-consistent.
"""

import math

from scipy.integrate import quad
from scipy.stats import gamma as gamma_dist

from gusl.core import GaussGammaParams

LOG_2PI = math.log(2.0 * math.pi)


def _log_joint(mu, lam, samples, prior):
    """Log of prod_k N(x_k | mu, 1/lam) times the Gaussian-gamma density."""
    if lam <= 0.0:
        return -math.inf
    p = prior
    val = (
        p.alpha * math.log(p.beta)
        + 0.5 * math.log(p.kappa)
        - math.lgamma(p.alpha)
        - 0.5 * LOG_2PI
        + (p.alpha - 0.5) * math.log(lam)
        - p.beta * lam
        - 0.5 * p.kappa * lam * (mu - p.mu) ** 2
    )
    for x in samples:
        val += 0.5 * (math.log(lam) - LOG_2PI) - 0.5 * lam * (x - mu) ** 2
    return val


def log_marginal_via_quadrature(samples, prior: GaussGammaParams = GaussGammaParams()) -> float:
    """ln of the marginal probability of ``samples``, by 2-d quadrature.

    The precision integral runs over (0, lam_hi] where lam_hi bounds the
    posterior precision tail below 1e-14 (the posterior rate can only
    exceed the prior's, so a gamma with the prior rate is a stochastic
    upper envelope).  For each precision the mean integrand is a Gaussian
    bump; completing the square in the exponent puts its centre at a
    data-weighted average independent of the precision, and the integral
    spans twelve standard deviations either side.
    """
    samples = [float(x) for x in samples]
    n = len(samples)
    if n == 0:
        return 0.0

    lam_hi = 2.0 * gamma_dist.ppf(1.0 - 1e-14, a=prior.alpha + 0.5 * n + 1.0, scale=1.0 / prior.beta)
    centre = (prior.kappa * prior.mu + math.fsum(samples)) / (prior.kappa + n)

    # A rough scale for where the precision integrand peaks, from the raw
    # data scatter only; used purely as a quadrature hint.
    mean = math.fsum(samples) / n
    scatter = prior.beta + 0.5 * math.fsum((x - mean) ** 2 for x in samples) + 0.5 * n * (
        mean - prior.mu
    ) ** 2
    lam_mode = (prior.alpha + 0.5 * n) / scatter
    hints = sorted(
        {min(max(v, lam_hi * 1e-12), lam_hi * (1 - 1e-12)) for v in (lam_mode / 8, lam_mode, lam_mode * 8)}
    )

    def mean_slice(lam):
        width = 12.0 / math.sqrt(lam * (prior.kappa + n))
        val, _ = quad(
            lambda mu: math.exp(_log_joint(mu, lam, samples, prior)),
            centre - width,
            centre + width,
            epsabs=0.0,
            epsrel=1e-11,
            limit=200,
        )
        return val

    val, _ = quad(mean_slice, 0.0, lam_hi, points=hints, epsabs=0.0, epsrel=1e-10, limit=300)
    return math.log(val)


def log_predictive_via_quadrature(ev_samples, obs_samples, prior=GaussGammaParams()) -> float:
    """ln P(observations | evidence) as a ratio of two raw marginals."""
    joint = log_marginal_via_quadrature(list(ev_samples) + list(obs_samples), prior)
    return joint - log_marginal_via_quadrature(ev_samples, prior)


def batch_mean_m2(values) -> tuple[float, float]:
    """Two-pass batch mean and sum of squared deviations."""
    vals = [float(v) for v in values]
    n = len(vals)
    if n == 0:
        return 0.0, 0.0
    mean = math.fsum(vals) / n
    m2 = math.fsum((v - mean) ** 2 for v in vals)
    return mean, m2
