"""Maximum likelihood estimation of (absorption probability, intensity).

With counts ``x_ij`` (run j, layer i) from independent Poisson layers with
means ``m_i = p (1-p)^(i-1) lam t``, the likelihood depends on the data only
through two per-run averages

    s = (1/n) sum_j sum_i x_ij          (total count)
    z = (1/n) sum_j sum_i (i-1) x_ij    (depth-weighted count)

Writing ``y = 1 - p``, the score equations reduce to a single polynomial
equation

    f(y) = a y^(k+1) - b y^k + c y - d = 0,
    a = (k-1) s - z,  b = k s - z,  c = s + z,  d = z,

together with ``lam = s / (t (1 - y^k))``.  f always vanishes at y = 1; it
has exactly one further root in (0, 1) if and only if the inflection point

    y_ip = b (k-1) / (a (k+1))

is below 1 (:func:`root_gate`).  In that case f is negative at 0+, rises to
a single interior maximum left of ``y_ip`` and decreases back to f(1) = 0,
so the root is bracketed in (0, y_ip) and bisection cannot fail
(:func:`solve_y`).  As the number of runs grows, the gate statistic
converges almost surely to a constant strictly below one
(:func:`gate_limit`), so the estimate exists for all sufficiently large n.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_counts, check_positive, check_probability

__all__ = [
    "SufficientStats",
    "PolyCoeffs",
    "GateResult",
    "MleResult",
    "EstimationError",
    "NoDetectionsError",
    "NotIdentifiableError",
    "NoInteriorRootError",
    "NumericFailureError",
    "BoundaryEstimateWarning",
    "sufficient_stats",
    "poly_coeffs",
    "root_gate",
    "solve_y",
    "fit_mle",
    "log_likelihood",
    "score_equations",
    "gate_limit",
]


class EstimationError(Exception):
    """Base class for estimation failures, carrying a machine-readable code."""

    code = "ESTIMATION_ERROR"

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


class NoDetectionsError(EstimationError):
    """Every count in the data is zero; nothing can be estimated."""

    code = "NO_DETECTIONS"


class NotIdentifiableError(EstimationError):
    """Single-layer data identifies only the product p * lam."""

    code = "NOT_IDENTIFIABLE"


class NoInteriorRootError(EstimationError):
    """The existence gate failed: no root of the score polynomial in (0, 1)."""

    code = "NO_INTERIOR_ROOT"

    def __init__(self, message: str, y_ip: float, stage: str | None = None):
        super().__init__(message, stage)
        self.y_ip = y_ip


class NumericFailureError(EstimationError):
    """The guaranteed bracket lost its sign change; coefficients are corrupt."""

    code = "NUMERIC_FAILURE"


class BoundaryEstimateWarning(UserWarning):
    """All detections in the first layer: the likelihood peaks at p = 1."""


@dataclass(frozen=True)
class SufficientStats:
    """Per-run mean total count ``s`` and mean depth-weighted count ``z``."""

    s: float
    z: float
    n: int
    k: int

    def __post_init__(self):
        if self.s < 0 or self.z < 0:
            raise ValueError("sufficient statistics must be nonnegative")
        if self.z > (self.k - 1) * self.s:
            raise ValueError("z cannot exceed (k-1) * s")


@dataclass(frozen=True)
class PolyCoeffs:
    """Coefficients of the score polynomial f(y) = a y^(k+1) - b y^k + c y - d."""

    a: float
    b: float
    c: float
    d: float
    k: int

    def __post_init__(self):
        # f(1) = a - b + c - d = 0 holds algebraically; allow rounding only.
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d), 1e-300)
        if abs(self.a - self.b + self.c - self.d) > 1e-12 * scale:
            raise ValueError("coefficients do not satisfy f(1) = 0")

    def value(self, y: float) -> float:
        k = self.k
        return self.a * y ** (k + 1) - self.b * y**k + self.c * y - self.d

    def derivative(self, y: float) -> float:
        k = self.k
        return self.a * (k + 1) * y**k - self.b * k * y ** (k - 1) + self.c

    def normalized(self) -> "PolyCoeffs":
        """Scale-invariant copy: divide by the largest coefficient magnitude."""
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        return PolyCoeffs(self.a / scale, self.b / scale, self.c / scale,
                          self.d / scale, self.k)


@dataclass(frozen=True)
class GateResult:
    """Existence decision: unique interior root iff ``y_ip < 1``."""

    unique_root: bool
    y_ip: float


@dataclass(frozen=True)
class MleResult:
    p_hat: float
    lambda_hat: float
    y_hat: float
    y_ip: float
    solver_iters: int
    residual: float
    warnings: tuple[str, ...] = ()


def sufficient_stats(data) -> SufficientStats:
    """Reduce a counts matrix to its sufficient statistics (s, z, n, k)."""
    X = check_counts(data)
    n, k = X.shape
    s = float(X.sum()) / n
    z = float((X * np.arange(k)).sum()) / n
    return SufficientStats(s=s, z=z, n=n, k=k)


def poly_coeffs(stats: SufficientStats) -> PolyCoeffs:
    """Build the score-polynomial coefficients from the sufficient statistics."""
    if stats.k == 1:
        raise NotIdentifiableError(
            "k = 1: only the product p * lam is identifiable from one layer"
        )
    if stats.s == 0.0:
        raise NoDetectionsError("all counts are zero; (p, lam) is not estimable")
    s, z, k = stats.s, stats.z, stats.k
    ks = k * s
    return PolyCoeffs(a=ks - s - z, b=ks - z, c=s + z, d=z, k=k)


def root_gate(coeffs: PolyCoeffs) -> GateResult:
    """Decide root existence from the inflection point y_ip = b(k-1)/(a(k+1)).

    Requires a > 0 (guaranteed whenever s > 0 and z < (k-1) s); a unique root
    of f in (0, 1) exists iff y_ip < 1.
    """
    if coeffs.a <= 0.0:
        raise ValueError(f"root gate needs a > 0, got a = {coeffs.a}")
    if coeffs.b <= 0.0:
        raise ValueError(f"root gate needs b > 0, got b = {coeffs.b}")
    y_ip = coeffs.b * (coeffs.k - 1) / (coeffs.a * (coeffs.k + 1))
    return GateResult(unique_root=bool(y_ip < 1.0), y_ip=y_ip)


_BRACKET_EPS = 1e-14
_MAX_ITERS = 200


def solve_y(coeffs: PolyCoeffs, tol: float = 1e-12) -> tuple[float, int, float]:
    """Find the unique root of f in (0, 1), given the gate passed.

    The root is bracketed in (0, y_ip): f(0+) = -d < 0 while f stays positive
    between its interior maximum and 1.  Bisection shrinks the bracket, then
    Newton steps polish until ``|f| <= tol`` on the normalized polynomial.

    Returns ``(y_hat, iterations, residual)``.
    """
    gate = root_gate(coeffs)
    if not gate.unique_root:
        raise NoInteriorRootError(
            f"no root in (0, 1): inflection point y_ip = {gate.y_ip:.6g} >= 1",
            y_ip=gate.y_ip,
        )
    c = coeffs.normalized()
    if c.d <= 0.0:
        # f(0) = 0 exactly: the only admissible estimate is the boundary p = 1,
        # which the caller reports instead of solving.
        raise ValueError("d = 0: f has no interior root, boundary estimate applies")
    lo = min(_BRACKET_EPS, 0.5 * c.d / c.c)
    hi = gate.y_ip * (1.0 - _BRACKET_EPS)
    f_lo, f_hi = c.value(lo), c.value(hi)
    if not (f_lo < 0.0 < f_hi):
        raise NumericFailureError(
            "bracket lost its sign change: "
            f"f({lo:.3g}) = {f_lo:.3g}, f({hi:.6g}) = {f_hi:.3g}; "
            f"coefficients (a={coeffs.a:.6g}, b={coeffs.b:.6g}, "
            f"c={coeffs.c:.6g}, d={coeffs.d:.6g}, k={coeffs.k})"
        )
    iters = 0
    while hi - lo > tol and iters < _MAX_ITERS:
        mid = 0.5 * (lo + hi)
        if c.value(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        iters += 1
    y = 0.5 * (lo + hi)
    fy = c.value(y)
    while abs(fy) > tol and iters < _MAX_ITERS:
        dfy = c.derivative(y)
        if dfy == 0.0:
            break
        step = fy / dfy
        y_new = y - step
        if not (lo <= y_new <= hi):
            break
        y = y_new
        fy = c.value(y)
        iters += 1
    return y, iters, abs(fy)


def fit_mle(data, t: float, tol: float = 1e-12) -> MleResult:
    """Maximum likelihood estimate of (p, lam) from an (n, k) counts matrix.

    Raises :class:`NotIdentifiableError` for single-layer data,
    :class:`NoDetectionsError` for all-zero data and
    :class:`NoInteriorRootError` when the existence gate fails (all the weight
    of the counts sits in the deepest layer).  When every detection is in the
    first layer the likelihood is maximized on the boundary; the boundary
    estimate ``(p, lam) = (1, s/t)`` is returned with a
    :class:`BoundaryEstimateWarning`.
    """
    check_positive(t, "t")
    stats = sufficient_stats(data)
    if stats.k == 1:
        raise NotIdentifiableError(
            "k = 1: only the product p * lam is identifiable from one layer"
        )
    if stats.s == 0.0:
        raise NoDetectionsError("all counts are zero; (p, lam) is not estimable")
    k = stats.k
    if stats.z == 0.0:
        warnings.warn(
            "all detections in the first layer: reporting boundary estimate p = 1",
            BoundaryEstimateWarning,
        )
        return MleResult(
            p_hat=1.0,
            lambda_hat=stats.s / t,
            y_hat=0.0,
            y_ip=k / (k + 1),
            solver_iters=0,
            residual=0.0,
            warnings=("boundary-estimate",),
        )
    coeffs = poly_coeffs(stats)
    if coeffs.a <= 0.0:
        # z = (k-1) s: every count in the deepest layer pushes p to 0 where
        # lam is unidentifiable.
        raise NoInteriorRootError(
            "no root in (0, 1): inflection point y_ip = inf >= 1 "
            "(all counts in the deepest layer)",
            y_ip=np.inf,
        )
    gate = root_gate(coeffs)
    if not gate.unique_root:
        raise NoInteriorRootError(
            f"no root in (0, 1): inflection point y_ip = {gate.y_ip:.6g} >= 1",
            y_ip=gate.y_ip,
        )
    y_hat, iters, residual = solve_y(coeffs, tol=tol)
    p_hat = 1.0 - y_hat
    lambda_hat = stats.s / (t * (1.0 - y_hat**k))
    return MleResult(
        p_hat=p_hat,
        lambda_hat=lambda_hat,
        y_hat=y_hat,
        y_ip=gate.y_ip,
        solver_iters=iters,
        residual=residual,
    )


def log_likelihood(p: float, lam: float, data, t: float) -> float:
    """Poisson log-likelihood of the counts at (p, lam), up to a data-only shift.

    Returns ``sum_ij (-m_i + x_ij log m_i)``; the term ``-sum_ij log x_ij!``
    is constant in (p, lam) and omitted, so values are comparable across
    parameters for fixed data but are not absolute log-probabilities.
    """
    check_probability(p, "p", open_low=True, open_high=True)
    check_positive(lam, "lam")
    check_positive(t, "t")
    X = check_counts(data)
    n, k = X.shape
    i = np.arange(k)
    m = p * (1.0 - p) ** i * lam * t
    col_sums = X.sum(axis=0)
    return float(-n * m.sum() + (col_sums * np.log(m)).sum())


def score_equations(p: float, lam: float, stats: SufficientStats,
                    t: float) -> tuple[float, float]:
    """Evaluate both score equations at (p, lam); zero at the interior MLE.

    Returns the numerators of the per-run score equations in (lam, p) order:
    ``s - lam t (1 - y^k)`` and ``(1-p)(s+z) - z - lam t k (y^k - y^(k+1))``
    with ``y = 1 - p``.
    """
    y = 1.0 - p
    k = stats.k
    eq_lam = stats.s - lam * t * (1.0 - y**k)
    eq_p = (y * (stats.s + stats.z) - stats.z
            - lam * t * k * (y**k - y ** (k + 1)))
    return eq_lam, eq_p


def gate_limit(p: float, k: int) -> float:
    """Almost-sure limit of the gate statistic b(k-1)/(a(k+1)) as n grows.

    Computed from the exact expectations of the sufficient statistics:

        c = (k-1)/(k+1) * (k - (k+1) q + q^(k+1)) / ((k-1) - k q + q^k),

    with q = 1 - p.  The value is strictly below 1 for every k > 1 and
    p in (0, 1), which is why the existence gate eventually always passes.
    """
    check_probability(p, "p", open_low=True, open_high=True)
    if k <= 1:
        raise ValueError("gate limit requires k > 1")
    q = 1.0 - p
    num = k - (k + 1) * q + q ** (k + 1)
    den = (k - 1) - k * q + q**k
    return (k - 1) / (k + 1) * num / den
