"""Fisher information and asymptotic covariance of the layered-count MLE.

One run observes k independent Poisson counts with means
``m_i = p (1-p)^(i-1) lam t``, so the information in a run is the sum over
layers of the rank-one per-layer matrices ``(grad m_i)(grad m_i)^T / m_i``.
The inverse of that per-run sum is the asymptotic covariance of
``sqrt(n) ((p_hat, lam_hat) - (p, lam))``; closed forms are

    sigma2_p   = (1 - q^k) q p^2 / (lam t Q),
    sigma2_lam = lam H / (t Q),
    sigma_plam = k p (q^(k+1) - q^k) / (t Q),   q = 1 - p,

with ``H = 1 - k^2 q^(k+1) + (2 k^2 - 1) q^k - k^2 q^(k-1)`` and
``Q = q^(2k) - k^2 q^(k+1) + 2 (k^2 - 1) q^k - k^2 q^(k-1) + 1``.

Direct evaluation of Q loses up to half its digits to cancellation when p is
small (Q ~ k^2 (k^2 - 1) p^4 / 12 built from O(k^2) terms).  Both Q and H are
therefore evaluated through the exact factorizations

    Q = (u - v)(u + v),   H = u - v^2,
    u = 1 - q^k,          v = k p q^((k-1)/2),

with u - v expanded as a sum of nonnegative products, giving full relative
precision for all p in (0, 1) and k >= 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_layer_count, check_positive, check_probability

__all__ = [
    "FisherInfo",
    "AsymCov",
    "SingularInformationError",
    "q_factor",
    "h_factor",
    "fisher_layer",
    "fisher_matrix",
    "covariance_closed_form",
    "covariance_numeric",
]

_SINGULAR_TOL = 1e-15


class SingularInformationError(Exception):
    """The information matrix is numerically singular (e.g. k = 1)."""


@dataclass(frozen=True)
class FisherInfo:
    """2x2 information matrix over (p, lam) with its aggregation scope."""

    matrix: np.ndarray
    scope: str  # "per-layer" | "summed" | "averaged"


@dataclass(frozen=True)
class AsymCov:
    """Per-run asymptotic (co)variances of the MLE, with the Q and H factors."""

    sigma2_p: float
    sigma2_lambda: float
    sigma_p_lambda: float
    q: float
    h: float


def _u_v(p: float, k: int) -> tuple[float, float]:
    lw = 0.5 * np.log1p(-p)  # log sqrt(1 - p)
    u = -np.expm1(k * 2.0 * lw)
    v = k * p * np.exp((k - 1) * lw)
    return float(u), float(v)


def _u_minus_v(p: float, k: int) -> float:
    # u - v = (1 - w) * sum_{j=0}^{k-1} w^j (1 - w^(k-1-j)) (1 - w^(k-j)),
    # w = sqrt(1 - p): every summand is nonnegative, so no cancellation.
    lw = 0.5 * np.log1p(-p)
    j = np.arange(k)
    terms = np.exp(j * lw) * (-np.expm1((k - 1 - j) * lw)) * (-np.expm1((k - j) * lw))
    return float(-np.expm1(lw) * terms.sum())


def q_factor(p: float, k: int) -> float:
    """Q(p, k), the determinant factor of the summed information matrix.

    Equals ``q^(2k) - k^2 q^(k+1) + 2(k^2-1) q^k - k^2 q^(k-1) + 1`` with
    q = 1 - p; zero identically at k = 1 and ``p^4`` at k = 2.
    """
    check_probability(p, "p", open_low=True, open_high=True)
    check_layer_count(k)
    if k == 1:
        return 0.0
    u, v = _u_v(p, k)
    return _u_minus_v(p, k) * (u + v)


def h_factor(p: float, k: int) -> float:
    """H(p, k) = 1 - k^2 q^(k+1) + (2k^2 - 1) q^k - k^2 q^(k-1), q = 1 - p."""
    check_probability(p, "p", open_low=True, open_high=True)
    check_layer_count(k)
    u, v = _u_v(p, k)
    return u - v * v


def fisher_layer(i: int, p: float, lam: float, t: float) -> FisherInfo:
    """Information matrix of the single layer-i Poisson count, order (p, lam).

    The count has mean ``m_i = p q^(i-1) lam t`` with gradient
    ``(lam t q^(i-2) (1 - i p), m_i / lam)``, so the matrix is the rank-one
    outer product of the gradient divided by the mean.
    """
    if i < 1:
        raise ValueError(f"layer index must be >= 1, got {i}")
    check_probability(p, "p", open_low=True, open_high=True)
    check_positive(lam, "lam")
    check_positive(t, "t")
    q = 1.0 - p
    m = p * q ** (i - 1) * lam * t
    grad = np.array([lam * t * q ** (i - 2) * (1.0 - i * p), m / lam])
    return FisherInfo(matrix=np.outer(grad, grad) / m, scope="per-layer")


def fisher_matrix(p: float, lam: float, k: int, t: float,
                  scope: str = "summed") -> FisherInfo:
    """Aggregate per-layer information over a k-layer run.

    ``scope="summed"`` is the per-run information whose inverse is the
    asymptotic covariance; ``scope="averaged"`` divides by k and is exposed
    as a diagnostic only.
    """
    check_layer_count(k)
    if scope not in ("summed", "averaged"):
        raise ValueError(f"scope must be 'summed' or 'averaged', got {scope!r}")
    total = np.zeros((2, 2))
    for i in range(1, k + 1):
        total += fisher_layer(i, p, lam, t).matrix
    if scope == "averaged":
        total /= k
    return FisherInfo(matrix=total, scope=scope)


def covariance_closed_form(p: float, lam: float, k: int, t: float) -> AsymCov:
    """Closed-form per-run asymptotic covariance of the MLE."""
    check_probability(p, "p", open_low=True, open_high=True)
    check_positive(lam, "lam")
    check_positive(t, "t")
    check_layer_count(k)
    qq = q_factor(p, k)
    if qq <= _SINGULAR_TOL:
        raise SingularInformationError(
            f"information is singular: Q({p:.4g}, {k}) = {qq:.4g}"
        )
    hh = h_factor(p, k)
    q = 1.0 - p
    u, _ = _u_v(p, k)
    sigma2_p = u * q * p * p / (lam * t * qq)
    sigma2_lambda = lam * hh / (t * qq)
    sigma_p_lambda = k * p * (q ** (k + 1) - q**k) / (t * qq)
    return AsymCov(sigma2_p=sigma2_p, sigma2_lambda=sigma2_lambda,
                   sigma_p_lambda=sigma_p_lambda, q=qq, h=hh)


def covariance_numeric(p: float, lam: float, k: int, t: float) -> AsymCov:
    """Per-run asymptotic covariance via explicit 2x2 inversion of the summed
    information matrix; validates the closed forms."""
    info = fisher_matrix(p, lam, k, t, scope="summed").matrix
    a, b, c = info[0, 0], info[0, 1], info[1, 1]
    det = a * c - b * b
    if det <= _SINGULAR_TOL * a * c:
        raise SingularInformationError(
            f"information matrix is numerically singular: det = {det:.4g}"
        )
    return AsymCov(
        sigma2_p=c / det,
        sigma2_lambda=a / det,
        sigma_p_lambda=-b / det,
        q=q_factor(p, k),
        h=h_factor(p, k),
    )
