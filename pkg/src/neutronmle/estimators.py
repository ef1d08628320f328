"""Scikit-learn style estimators wrapping the core fitting routines.

``X`` is always an (n_runs, n_layers) matrix of nonnegative integer counts;
both estimators are unsupervised, so ``fit`` ignores ``y``.  Fitted
attributes follow the sklearn trailing-underscore convention and the classes
compose with ``sklearn.base.clone``, ``get_params`` / ``set_params`` and
pipeline machinery.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_counts
from .asymptotics import covariance_closed_form
from .mle import fit_mle, log_likelihood
from .wavelength import (
    DEFAULT_CROSS_SECTION,
    CrossSectionModel,
    M_PER_ANGSTROM,
    estimate_wavelength,
)

__all__ = ["ThinnedPoissonMLE", "WavelengthEstimator"]


def _validated_counts(X) -> np.ndarray:
    X = check_array(X, dtype="numeric", ensure_2d=True)
    return check_counts(X)


class ThinnedPoissonMLE(BaseEstimator):
    """Maximum likelihood estimator of (absorption probability, intensity).

    Parameters
    ----------
    t : float, default=1.0
        Exposure time per run, seconds.
    tol : float, default=1e-12
        Root-solver tolerance.

    Attributes
    ----------
    p_ : float
        Estimated absorption probability per layer.
    lambda_ : float
        Estimated beam intensity (s^-1).
    y_ip_ : float
        Inflection point of the score polynomial (existence diagnostic).
    n_iter_ : int
        Root-solver iterations.
    residual_ : float
        |f(y_hat)| on the normalized score polynomial.
    layer_means_ : ndarray of shape (n_layers,)
        Fitted expected counts per layer.
    result_ : MleResult
        Full fit record, including boundary warnings.

    Examples
    --------
    >>> ThinnedPoissonMLE(t=1.0).fit([[3, 1]]).p_
    0.666666666666...
    """

    def __init__(self, t: float = 1.0, tol: float = 1e-12):
        self.t = t
        self.tol = tol

    def fit(self, X, y=None):
        X = _validated_counts(X)
        result = fit_mle(X, t=self.t, tol=self.tol)
        self.n_features_in_ = X.shape[1]
        self.result_ = result
        self.p_ = result.p_hat
        self.lambda_ = result.lambda_hat
        self.y_ip_ = result.y_ip
        self.n_iter_ = result.solver_iters
        self.residual_ = result.residual
        i = np.arange(self.n_features_in_)
        self.layer_means_ = (self.p_ * (1.0 - self.p_) ** i
                             * self.lambda_ * self.t)
        return self

    def score_samples(self, X) -> np.ndarray:
        """Per-run log-likelihood at the fitted parameters (factorial term omitted)."""
        check_is_fitted(self, "p_")
        X = _validated_counts(X)
        return np.array([
            log_likelihood(self.p_, self.lambda_, row.reshape(1, -1), self.t)
            for row in X
        ])

    def score(self, X, y=None) -> float:
        """Total log-likelihood of X at the fitted parameters."""
        return float(self.score_samples(X).sum())


class WavelengthEstimator(BaseEstimator):
    """End-to-end wavelength estimator with a delta-method confidence interval.

    Parameters
    ----------
    t : float, default=1.0
        Exposure time per run, seconds.
    chi : float, default=2.142e8
        Aggregated cross-section coefficient, m^-1.
    sigma2_chi : float, default=0.021e8
        Asymptotic variance of the chi estimate, m^-2.
    n_prime : int, default=45
        Sample size behind the cross-section measurement.
    alpha : float, default=0.01
        Two-sided interval level is 1 - alpha.

    Attributes
    ----------
    mu_ : float
        Estimated wavelength in meters (``mu_angstrom_`` for Angstrom).
    ci_ : tuple of float
        Confidence interval (meters).
    s_p_, s_chi_ : float
        Statistical and systematic standard-error terms (meters).
    gamma_ : float
        Sample-size ratio n'/n.
    estimate_ : WavelengthEstimate
        Full estimation record.
    """

    def __init__(self, t: float = 1.0,
                 chi: float = DEFAULT_CROSS_SECTION.chi_hat,
                 sigma2_chi: float = DEFAULT_CROSS_SECTION.sigma2_chi,
                 n_prime: int = DEFAULT_CROSS_SECTION.n_prime,
                 alpha: float = 0.01):
        self.t = t
        self.chi = chi
        self.sigma2_chi = sigma2_chi
        self.n_prime = n_prime
        self.alpha = alpha

    def fit(self, X, y=None):
        X = _validated_counts(X)
        xsec = CrossSectionModel(chi_hat=self.chi, sigma2_chi=self.sigma2_chi,
                                 n_prime=self.n_prime)
        mle = fit_mle(X, t=self.t)
        estimate = estimate_wavelength(X, t=self.t, xsec=xsec, alpha=self.alpha)
        self.n_features_in_ = X.shape[1]
        self.p_ = mle.p_hat
        self.lambda_ = mle.lambda_hat
        self.cov_ = covariance_closed_form(mle.p_hat, mle.lambda_hat,
                                           k=X.shape[1], t=self.t)
        self.estimate_ = estimate
        self.mu_ = estimate.mu_hat
        self.mu_angstrom_ = estimate.mu_hat / M_PER_ANGSTROM
        self.ci_ = estimate.ci
        self.s_p_ = estimate.s_p
        self.s_chi_ = estimate.s_chi
        self.gamma_ = estimate.gamma
        return self
