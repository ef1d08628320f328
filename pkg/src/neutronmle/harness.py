"""Monte Carlo experiments: error-term sweeps and coverage studies.

Sweeps average the full simulate-estimate pipeline over replicates at each
grid value of a chosen variable (layer count, beam intensity or run count),
producing plot-ready tables of the statistical and systematic error terms.
Coverage experiments count how often the wavelength interval captures the
true wavelength.  Replicates draw independent RNG substreams keyed by
(seed, cell, replicate), so results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ._validation import check_probability, check_run_count
from .mle import EstimationError
from .sim import BeamParams, DetectorConfig, derive_seed, simulate_counts
from .wavelength import CrossSectionModel, estimate_wavelength, mu_from_p

__all__ = [
    "SweepSpec",
    "SweepRow",
    "CoverageReport",
    "run_sweep",
    "crossover_layer",
    "coverage_experiment",
]

SWEEP_VARIABLES = ("layers", "intensity", "runs")


@dataclass(frozen=True)
class SweepSpec:
    """One-variable sweep around a base configuration."""

    variable: str
    grid: tuple
    detector: DetectorConfig
    beam: BeamParams
    xsec: CrossSectionModel
    n: int
    alpha: float
    replicates: int
    seed: int

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(
                f"variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}"
            )
        if len(self.grid) == 0:
            raise ValueError("grid must be nonempty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")
        check_run_count(self.replicates, name="replicates")
        check_run_count(self.n)
        check_probability(self.alpha, "alpha", open_low=True, open_high=True)


@dataclass(frozen=True)
class SweepRow:
    """Replicate-averaged pipeline outputs at one grid value."""

    grid_value: float
    s_p_mean: float
    s_chi_mean: float
    mu_hat_mean: float
    ci_halfwidth_mean: float
    failures: int


def _cell_setup(spec: SweepSpec, value) -> tuple[DetectorConfig, BeamParams, int]:
    if spec.variable == "layers":
        return replace(spec.detector, k=int(value)), spec.beam, spec.n
    if spec.variable == "intensity":
        return spec.detector, replace(spec.beam, lam=float(value)), spec.n
    return spec.detector, spec.beam, int(value)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Average the simulate-estimate pipeline over replicates per grid value.

    Replicates whose estimation fails (existence gate, no detections) are
    excluded from the averages and counted per cell; they never abort the
    sweep.
    """
    rows = []
    for g_idx, value in enumerate(spec.grid):
        detector, beam, n = _cell_setup(spec, value)
        s_p_sum = s_chi_sum = mu_sum = hw_sum = 0.0
        failures = 0
        for r_idx in range(spec.replicates):
            seed = derive_seed(spec.seed, g_idx, r_idx)
            data = simulate_counts(detector, beam, n, seed)
            try:
                est = estimate_wavelength(data, t=detector.t, xsec=spec.xsec,
                                          alpha=spec.alpha)
            except EstimationError:
                failures += 1
                continue
            s_p_sum += est.s_p
            s_chi_sum += est.s_chi
            mu_sum += est.mu_hat
            hw_sum += 0.5 * (est.ci[1] - est.ci[0])
        evaluated = spec.replicates - failures
        if evaluated > 0:
            rows.append(SweepRow(
                grid_value=float(value),
                s_p_mean=s_p_sum / evaluated,
                s_chi_mean=s_chi_sum / evaluated,
                mu_hat_mean=mu_sum / evaluated,
                ci_halfwidth_mean=hw_sum / evaluated,
                failures=failures,
            ))
        else:
            rows.append(SweepRow(
                grid_value=float(value),
                s_p_mean=math.nan,
                s_chi_mean=math.nan,
                mu_hat_mean=math.nan,
                ci_halfwidth_mean=math.nan,
                failures=failures,
            ))
    return rows


def crossover_layer(rows: list[SweepRow]) -> float | None:
    """First grid value where the statistical term drops below the systematic
    one, or None if it never does."""
    for row in rows:
        if row.s_p_mean < row.s_chi_mean:
            return row.grid_value
    return None


@dataclass(frozen=True)
class CoverageReport:
    """Empirical interval coverage over Monte Carlo replicates."""

    nominal: float
    empirical: float
    replicates: int
    failures: int
    mc_stderr: float

    @property
    def evaluated(self) -> int:
        return self.replicates - self.failures


def coverage_experiment(detector: DetectorConfig, beam: BeamParams,
                        xsec: CrossSectionModel, n: int, alpha: float,
                        replicates: int, seed: int,
                        chi_fixed: bool = False) -> CoverageReport:
    """Fraction of replicates whose interval covers the true wavelength.

    The truth is ``mu_from_p(beam.p, xsec.chi_hat)``.  With ``chi_fixed`` the
    cross-section is treated as a known constant: its variance is zeroed, so
    the systematic term drops out of the interval.  Failed replicates are
    counted separately and excluded from the coverage fraction.
    """
    check_run_count(replicates, minimum=100, name="replicates")
    check_run_count(n)
    check_probability(alpha, "alpha", open_low=True, open_high=True)
    if chi_fixed:
        xsec = replace(xsec, sigma2_chi=0.0)
    mu_true = mu_from_p(beam.p, xsec.chi_hat)
    covered = 0
    failures = 0
    for r_idx in range(replicates):
        data = simulate_counts(detector, beam, n, derive_seed(seed, r_idx))
        try:
            est = estimate_wavelength(data, t=detector.t, xsec=xsec, alpha=alpha)
        except EstimationError:
            failures += 1
            continue
        if est.ci[0] <= mu_true <= est.ci[1]:
            covered += 1
    evaluated = replicates - failures
    empirical = covered / evaluated if evaluated else math.nan
    return CoverageReport(
        nominal=1.0 - alpha,
        empirical=empirical,
        replicates=replicates,
        failures=failures,
        mc_stderr=math.sqrt(max(empirical * (1.0 - empirical), 0.0) / replicates),
    )
