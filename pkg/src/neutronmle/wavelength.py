"""Wavelength estimation from the fitted absorption probability.

For a monochromatic beam the absorption cross-section grows linearly with
wavelength, so ``p = 1 - exp(-chi mu)`` with ``chi = rho_at d_l varsigma``
and the wavelength is recovered as ``mu = -log(1 - p) / chi``.  The slope
``varsigma`` comes from external measurements (n' runs), so ``chi`` carries
its own variance.  First-order propagation splits the standard error of the
plug-in wavelength into a statistical term (shrinks with more runs and
layers) and a systematic cross-section term that no amount of detector data
reduces; see :func:`delta_terms`.

All wavelengths are carried in meters internally; Angstrom conversion is a
presentation concern (``M_PER_ANGSTROM``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import (
    check_nonnegative,
    check_positive,
    check_probability,
    check_run_count,
)
from .asymptotics import AsymCov, covariance_closed_form
from .mle import EstimationError, MleResult, fit_mle

__all__ = [
    "M_PER_ANGSTROM",
    "DEFAULT_CROSS_SECTION",
    "CrossSectionModel",
    "WavelengthEstimate",
    "mu_from_p",
    "p_from_mu",
    "normal_quantile",
    "delta_terms",
    "confidence_interval",
    "estimate_wavelength",
]

M_PER_ANGSTROM = 1e-10


@dataclass(frozen=True)
class CrossSectionModel:
    """Externally measured cross-section slope, aggregated into chi.

    ``chi_hat`` (m^-1) and its variance ``sigma2_chi`` (m^-2) may be given
    directly or derived from the slope ``varsigma`` via
    :meth:`from_varsigma`; ``n_prime`` is the sample size behind the
    measurement.
    """

    chi_hat: float
    sigma2_chi: float
    n_prime: int
    varsigma_hat: float | None = None
    sigma2_varsigma: float | None = None

    def __post_init__(self):
        check_positive(self.chi_hat, "chi_hat")
        check_nonnegative(self.sigma2_chi, "sigma2_chi")
        check_run_count(self.n_prime, name="n_prime")

    @classmethod
    def from_varsigma(cls, varsigma_hat: float, sigma2_varsigma: float,
                      n_prime: int, rho_at: float, d_l: float) -> "CrossSectionModel":
        """Aggregate a slope estimate into chi = rho_at * d_l * varsigma."""
        check_positive(varsigma_hat, "varsigma_hat")
        check_nonnegative(sigma2_varsigma, "sigma2_varsigma")
        check_positive(rho_at, "rho_at")
        check_positive(d_l, "d_l")
        factor = rho_at * d_l
        return cls(
            chi_hat=factor * varsigma_hat,
            sigma2_chi=factor * factor * sigma2_varsigma,
            n_prime=n_prime,
            varsigma_hat=varsigma_hat,
            sigma2_varsigma=sigma2_varsigma,
        )


# Boron-10 values behind the worked examples: chi = 2.142e8 m^-1 with
# variance 0.021e8 m^-2 pooled from three series of 15 runs.
DEFAULT_CROSS_SECTION = CrossSectionModel(
    chi_hat=2.142e8, sigma2_chi=0.021e8, n_prime=45
)


def mu_from_p(p: float, chi: float) -> float:
    """Wavelength (m) from absorption probability: mu = -log(1 - p) / chi."""
    check_probability(p, "p", open_high=True)
    check_positive(chi, "chi")
    return -math.log1p(-p) / chi


def p_from_mu(mu: float, chi: float) -> float:
    """Absorption probability from wavelength (m): p = 1 - exp(-chi mu)."""
    check_nonnegative(mu, "mu")
    check_positive(chi, "chi")
    return -math.expm1(-chi * mu)


# Rational approximation of the inverse standard-normal CDF (Acklam's
# coefficients), accurate to ~1.15e-9 before refinement.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _quantile_low_half(u: float) -> float:
    """Quantile for u in (0, 0.5]; Phi(x) stays small so erfc is fully accurate."""
    if u < _P_LOW:
        r = math.sqrt(-2.0 * math.log(u))
        x = ((((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5])
             / ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0))
    else:
        r = u - 0.5
        s = r * r
        x = ((((((_A[0] * s + _A[1]) * s + _A[2]) * s + _A[3]) * s + _A[4]) * s + _A[5]) * r
             / (((((_B[0] * s + _B[1]) * s + _B[2]) * s + _B[3]) * s + _B[4]) * s + 1.0))
    # One Newton refinement of Phi(x) = u.
    pdf = _norm_pdf(x)
    if pdf > 0.0:
        x -= (_norm_cdf(x) - u) / pdf
    return x


def normal_quantile(u: float) -> float:
    """Inverse standard-normal CDF on (0, 1), absolute error well below 1e-9.

    Rational initial approximation refined by one Newton step on the CDF,
    evaluated on the lower half and reflected (1 - u is exact for u >= 0.5),
    so antisymmetry holds by construction.
    """
    u = float(u)
    if not 0.0 < u < 1.0:
        raise ValueError(f"quantile argument must lie in (0, 1), got {u}")
    if u > 0.5:
        return -_quantile_low_half(1.0 - u)
    return _quantile_low_half(u)


def delta_terms(mle: MleResult, cov: AsymCov, xsec: CrossSectionModel,
                n: int) -> tuple[float, float]:
    """Statistical and systematic standard-error terms of the plug-in wavelength.

    Returns ``(s_p, s_chi)`` in meters:
    ``s_p = sigma_p / (sqrt(n) (1 - p) chi)`` from the detector data and
    ``s_chi = |log(1 - p)| sigma_chi / (sqrt(n') chi^2)`` from the
    cross-section measurement.
    """
    check_run_count(n)
    p = check_probability(mle.p_hat, "p_hat", open_low=True, open_high=True)
    chi = xsec.chi_hat
    s_p = math.sqrt(cov.sigma2_p) / (math.sqrt(n) * (1.0 - p) * chi)
    s_chi = (abs(math.log1p(-p)) * math.sqrt(xsec.sigma2_chi)
             / (math.sqrt(xsec.n_prime) * chi * chi))
    return s_p, s_chi


@dataclass(frozen=True)
class WavelengthEstimate:
    """Plug-in wavelength with its error decomposition and confidence interval.

    All lengths in meters.  ``s_total_over_sqrt_n`` is
    ``sqrt(s_p^2 + s_chi^2)``, the standard error of the estimate; the
    interval has half-width ``z_(alpha/2) * s_total_over_sqrt_n``.
    ``gamma`` is the sample-size ratio n'/n (NaN when unknown).
    """

    mu_hat: float
    s_p: float
    s_chi: float
    s_total_over_sqrt_n: float
    gamma: float
    alpha: float
    ci: tuple[float, float]


def confidence_interval(mu_hat: float, s_p: float, s_chi: float, n: int,
                        alpha: float, gamma: float = math.nan) -> WavelengthEstimate:
    """Two-sided normal interval for the wavelength at level 1 - alpha.

    The half-width is ``z * sqrt(s_p^2 + s_chi^2)`` with z the upper alpha/2
    standard-normal quantile (``normal_quantile(1 - alpha/2)``).
    """
    check_probability(alpha, "alpha", open_low=True, open_high=True)
    check_run_count(n)
    se = math.hypot(s_p, s_chi)
    z = normal_quantile(1.0 - alpha / 2.0)
    return WavelengthEstimate(
        mu_hat=mu_hat,
        s_p=s_p,
        s_chi=s_chi,
        s_total_over_sqrt_n=se,
        gamma=gamma,
        alpha=alpha,
        ci=(mu_hat - z * se, mu_hat + z * se),
    )


def estimate_wavelength(data, t: float, xsec: CrossSectionModel,
                        alpha: float = 0.01) -> WavelengthEstimate:
    """Full pipeline: MLE, plug-in covariance, error terms, interval.

    Estimation errors are re-raised with a ``stage`` attribute naming the
    step that failed ("mle" or "covariance").
    """
    n, k = np.asarray(data).shape
    try:
        mle = fit_mle(data, t)
    except EstimationError as err:
        err.stage = "mle"
        raise
    if not 0.0 < mle.p_hat < 1.0:
        err = EstimationError(
            f"p_hat = {mle.p_hat} is on the boundary; no wavelength interval exists"
        )
        err.code = "BOUNDARY_ESTIMATE"
        err.stage = "mle"
        raise err
    try:
        cov = covariance_closed_form(mle.p_hat, mle.lambda_hat, k=int(k), t=t)
    except Exception as exc:
        err = EstimationError(f"covariance evaluation failed: {exc}")
        err.stage = "covariance"
        raise err from exc
    s_p, s_chi = delta_terms(mle, cov, xsec, int(n))
    mu_hat = mu_from_p(mle.p_hat, xsec.chi_hat)
    return confidence_interval(mu_hat, s_p, s_chi, int(n), alpha,
                               gamma=xsec.n_prime / n)
