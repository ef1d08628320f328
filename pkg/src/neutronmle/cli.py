"""Command-line interface: simulate, estimate, wavelength, coverage, sweep.

Configuration is a single JSON document with explicit SI units in the field
names (no unit inference)::

    {
      "detector": {"k": 25, "t_s": 1.0, "rho_at_per_m3": 1e29, "d_l_m": 1e-6},
      "beam":     {"p": 0.1, "lambda_per_s": 1e5},
      "xsec":     {"chi_per_m": 2.142e8, "sigma2_chi_per_m2": 2.1e6, "n_prime": 45},
      "n": 10, "alpha": 0.01, "seed": 1, "replicates": 2000
    }

The beam section takes exactly one of ``p`` or ``mu_angstrom``; a target
wavelength is converted through the cross-section model.  The ``xsec``
section is optional and defaults to the bundled boron-10 values.

Counts travel as UTF-8 CSV with a mandatory ``layer_1,...,layer_k`` header,
one run per line and LF line endings.  Structured results are JSON on
stdout.  Exit codes: 0 success, 2 input error, 3 I/O error, 4 estimation
error (the JSON carries a machine-readable ``error`` code).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .harness import SweepSpec, coverage_experiment, run_sweep
from .mle import BoundaryEstimateWarning, EstimationError, fit_mle
from .sim import BeamParams, DetectorConfig, simulate_counts
from .wavelength import (
    DEFAULT_CROSS_SECTION,
    CrossSectionModel,
    M_PER_ANGSTROM,
    estimate_wavelength,
    p_from_mu,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3
EXIT_ESTIMATION = 4


class ConfigError(Exception):
    """Configuration problem, with the offending field path in the message."""


class CsvFormatError(Exception):
    """Malformed counts CSV, with the offending line number in the message."""


@dataclass(frozen=True)
class RunConfig:
    detector: DetectorConfig
    beam: BeamParams
    xsec: CrossSectionModel
    n: int
    alpha: float
    seed: int
    replicates: int


_REQUIRED = object()


def _field(section: dict, path: str, key: str, kind, default=_REQUIRED):
    where = f"{path}.{key}" if path else key
    if key not in section:
        if default is _REQUIRED:
            raise ConfigError(f"{where}: required field is missing")
        return default
    value = section[key]
    try:
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected {kind.__name__}, got {value!r}") from None


def _section(doc: dict, key: str, required: bool = True) -> dict:
    value = doc.get(key)
    if value is None:
        if required:
            raise ConfigError(f"{key}: required section is missing")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: expected an object, got {value!r}")
    return value


def parse_run_config(doc: dict) -> RunConfig:
    """Build a validated RunConfig from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    det = _section(doc, "detector")
    try:
        detector = DetectorConfig(
            k=_field(det, "detector", "k", int),
            t=_field(det, "detector", "t_s", float, 1.0),
            rho_at=_field(det, "detector", "rho_at_per_m3", float, 1e29),
            d_l=_field(det, "detector", "d_l_m", float, 1e-6),
        )
    except ValueError as exc:
        raise ConfigError(f"detector: {exc}") from None

    xs = _section(doc, "xsec", required=False)
    try:
        xsec = CrossSectionModel(
            chi_hat=_field(xs, "xsec", "chi_per_m", float,
                           DEFAULT_CROSS_SECTION.chi_hat),
            sigma2_chi=_field(xs, "xsec", "sigma2_chi_per_m2", float,
                              DEFAULT_CROSS_SECTION.sigma2_chi),
            n_prime=_field(xs, "xsec", "n_prime", int,
                           DEFAULT_CROSS_SECTION.n_prime),
        )
    except ValueError as exc:
        raise ConfigError(f"xsec: {exc}") from None

    bm = _section(doc, "beam")
    has_p = "p" in bm
    has_mu = "mu_angstrom" in bm
    if has_p == has_mu:
        raise ConfigError("beam: supply exactly one of 'p' or 'mu_angstrom'")
    lam = _field(bm, "beam", "lambda_per_s", float)
    try:
        if has_p:
            p = _field(bm, "beam", "p", float)
        else:
            mu = _field(bm, "beam", "mu_angstrom", float) * M_PER_ANGSTROM
            p = p_from_mu(mu, xsec.chi_hat)
        beam = BeamParams(p=p, lam=lam)
    except ValueError as exc:
        raise ConfigError(f"beam: {exc}") from None

    try:
        return RunConfig(
            detector=detector,
            beam=beam,
            xsec=xsec,
            n=_field(doc, "", "n", int, 1),
            alpha=_field(doc, "", "alpha", float, 0.01),
            seed=_field(doc, "", "seed", int, 0),
            replicates=_field(doc, "", "replicates", int, 2000),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def run_config_to_dict(config: RunConfig) -> dict:
    """Inverse of :func:`parse_run_config` (round-trips exactly)."""
    return {
        "detector": {
            "k": config.detector.k,
            "t_s": config.detector.t,
            "rho_at_per_m3": config.detector.rho_at,
            "d_l_m": config.detector.d_l,
        },
        "beam": {"p": config.beam.p, "lambda_per_s": config.beam.lam},
        "xsec": {
            "chi_per_m": config.xsec.chi_hat,
            "sigma2_chi_per_m2": config.xsec.sigma2_chi,
            "n_prime": config.xsec.n_prime,
        },
        "n": config.n,
        "alpha": config.alpha,
        "seed": config.seed,
        "replicates": config.replicates,
    }


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_run_config(doc)


def counts_to_csv(X: np.ndarray) -> str:
    k = X.shape[1]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"layer_{i + 1}" for i in range(k)])
    for row in X:
        writer.writerow([int(v) for v in row])
    return buf.getvalue()


def counts_from_csv(text: str) -> np.ndarray:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("line 1: missing header row") from None
    expected = [f"layer_{i + 1}" for i in range(len(header))]
    if header != expected:
        raise CsvFormatError(
            f"line 1: header must be {','.join(expected)}, got {','.join(header)}"
        )
    k = len(header)
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != k:
            raise CsvFormatError(f"line {lineno}: expected {k} cells, got {len(row)}")
        try:
            values = [int(cell) for cell in row]
        except ValueError:
            raise CsvFormatError(f"line {lineno}: non-integer cell in {row}") from None
        if any(v < 0 for v in values):
            raise CsvFormatError(f"line {lineno}: negative count in {row}")
        rows.append(values)
    if not rows:
        raise CsvFormatError("line 2: no data rows")
    return np.array(rows, dtype=np.int64)


def read_counts_file(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CsvFormatError(f"cannot read {path}: {exc}") from None
    return counts_from_csv(text)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _sig4(x: float) -> float:
    return float(f"{x:.4g}")


def _fmt(x) -> str:
    return repr(float(x))


def _print_json(obj: dict) -> None:
    print(json.dumps(obj, indent=2))


def _emit_json(obj: dict, out: str | None) -> None:
    _write_text(out, json.dumps(obj, indent=2) + "\n")


def cmd_simulate(args) -> int:
    config = load_run_config(args.config)
    seed = config.seed if args.seed is None else args.seed
    X = simulate_counts(config.detector, config.beam, config.n, seed)
    _write_text(args.out, counts_to_csv(X))
    return EXIT_OK


def cmd_estimate(args) -> int:
    X = read_counts_file(args.counts)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", BoundaryEstimateWarning)
            result = fit_mle(X, t=args.t)
    except EstimationError as err:
        _print_json({"error": err.code, "message": str(err)})
        return EXIT_ESTIMATION
    payload = {
        "p_hat": result.p_hat,
        "lambda_hat": result.lambda_hat,
        "y_hat": result.y_hat,
        "y_ip": result.y_ip,
        "solver_iters": result.solver_iters,
        "residual": result.residual,
        "warnings": [str(w.message) for w in caught],
    }
    if result.warnings:
        # Boundary estimates are reported with their values but flagged as an
        # estimation error so scripted callers never mistake p = 1 for an
        # interior solution.
        payload["error"] = "BOUNDARY_ESTIMATE"
        _print_json(payload)
        return EXIT_ESTIMATION
    _emit_json(payload, args.out)
    return EXIT_OK


def cmd_wavelength(args) -> int:
    X = read_counts_file(args.counts)
    config = load_run_config(args.config)
    alpha = config.alpha if args.alpha is None else args.alpha
    try:
        est = estimate_wavelength(X, t=config.detector.t, xsec=config.xsec,
                                  alpha=alpha)
    except EstimationError as err:
        _print_json({
            "error": err.code,
            "stage": err.stage,
            "message": str(err),
        })
        return EXIT_ESTIMATION
    _emit_json({
        "mu_hat_angstrom": _sig4(est.mu_hat / M_PER_ANGSTROM),
        "ci_angstrom": [_sig4(est.ci[0] / M_PER_ANGSTROM),
                        _sig4(est.ci[1] / M_PER_ANGSTROM)],
        "s_p": est.s_p,
        "s_chi": est.s_chi,
        "gamma": est.gamma,
        "alpha": est.alpha,
    }, args.out)
    return EXIT_OK


def cmd_coverage(args) -> int:
    config = load_run_config(args.config)
    seed = config.seed if args.seed is None else args.seed
    replicates = config.replicates if args.replicates is None else args.replicates
    report = coverage_experiment(
        config.detector, config.beam, config.xsec,
        n=config.n, alpha=config.alpha, replicates=replicates,
        seed=seed, chi_fixed=args.chi_fixed,
    )
    lines = [
        "replicates,nominal,empirical,mc_stderr,failures",
        ",".join([
            str(report.replicates), _fmt(report.nominal), _fmt(report.empirical),
            _fmt(report.mc_stderr), str(report.failures),
        ]),
    ]
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = load_run_config(args.config)
    seed = config.seed if args.seed is None else args.seed
    replicates = config.replicates if args.replicates is None else args.replicates
    try:
        grid = tuple(float(v) for v in args.grid.split(","))
    except ValueError:
        raise ConfigError(f"--grid: expected comma-separated numbers, got {args.grid!r}")
    if args.variable in ("layers", "runs"):
        if any(not v.is_integer() for v in grid):
            raise ConfigError(f"--grid: {args.variable} grid must be integers")
        grid = tuple(int(v) for v in grid)
    try:
        spec = SweepSpec(
            variable=args.variable, grid=grid,
            detector=config.detector, beam=config.beam, xsec=config.xsec,
            n=config.n, alpha=config.alpha, replicates=replicates, seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = run_sweep(spec)
    lines = ["grid_value,s_p_mean,s_chi_mean,mu_hat_mean,ci_halfwidth_mean"]
    for row in rows:
        lines.append(",".join([
            _fmt(row.grid_value), _fmt(row.s_p_mean), _fmt(row.s_chi_mean),
            _fmt(row.mu_hat_mean), _fmt(row.ci_halfwidth_mean),
        ]))
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=None,
                        help="override the seed from the config file")
    shared.add_argument("--out", default=None,
                        help="output file (default: stdout)")
    shared.add_argument("--json", action="store_true",
                        help="machine-readable output (JSON is the default "
                             "for structured results)")

    parser = argparse.ArgumentParser(
        prog="neutronmle",
        description="Simulate multilayer detector counts and estimate the "
                    "beam wavelength by maximum likelihood.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", parents=[shared],
                           help="draw a counts matrix and write it as CSV")
    p_sim.add_argument("config", help="JSON run configuration")
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", parents=[shared],
                           help="fit (p, lambda) from a counts CSV")
    p_est.add_argument("counts", help="counts CSV file")
    p_est.add_argument("--t", type=float, default=1.0,
                       help="exposure seconds per run (default 1)")
    p_est.set_defaults(func=cmd_estimate)

    p_wav = sub.add_parser("wavelength", parents=[shared],
                           help="estimate the wavelength with a confidence interval")
    p_wav.add_argument("counts", help="counts CSV file")
    p_wav.add_argument("config", help="JSON run configuration")
    p_wav.add_argument("--alpha", type=float, default=None,
                       help="override the interval level from the config")
    p_wav.set_defaults(func=cmd_wavelength)

    p_cov = sub.add_parser("coverage", parents=[shared],
                           help="Monte Carlo coverage of the wavelength interval")
    p_cov.add_argument("config", help="JSON run configuration")
    p_cov.add_argument("--replicates", type=int, default=None)
    p_cov.add_argument("--chi-fixed", action="store_true",
                       help="treat the cross-section as a known constant")
    p_cov.set_defaults(func=cmd_coverage)

    p_swp = sub.add_parser("sweep", parents=[shared],
                           help="sweep layers/intensity/runs and tabulate error terms")
    p_swp.add_argument("config", help="JSON run configuration")
    p_swp.add_argument("--variable", required=True,
                       choices=["layers", "intensity", "runs"])
    p_swp.add_argument("--grid", required=True,
                       help="comma-separated, strictly increasing grid values")
    p_swp.add_argument("--replicates", type=int, default=None)
    p_swp.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CsvFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EstimationError as exc:
        _print_json({"error": exc.code, "message": str(exc)})
        return EXIT_ESTIMATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
