"""Synthetic count data for a multilayer absorbing detector.

A monochromatic beam arriving as a Poisson stream of intensity ``lam`` is
sequentially thinned by ``k`` identical layers, each absorbing a passing
neutron independently with probability ``p``.  Two simulators are provided:

* :func:`simulate_counts` draws the per-layer counts directly as independent
  Poisson variates with means ``m_i = p (1-p)^(i-1) lam t`` (the marginal law
  of the thinned process).
* :func:`simulate_event_level` draws the incident count per run and walks the
  surviving beam through the layers, so conservation
  ``incident = absorbed + transmitted`` holds exactly per run.

Both produce the same joint distribution of layer counts; the test suite
checks this equivalence, which is a property of Poisson thinning rather than
of the implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import (
    check_layer_count,
    check_nonnegative,
    check_positive,
    check_probability,
    check_run_count,
)

# Event-level runs refuse configurations with more incident neutrons than this.
MAX_INCIDENT = 2**31 - 1


@dataclass(frozen=True)
class DetectorConfig:
    """Detector geometry and exposure.

    Parameters
    ----------
    k : int
        Number of absorbing layers (>= 1).
    t : float
        Exposure time per run, seconds.
    rho_at : float
        Atomic density of the absorbing isotope in the coating, m^-3.
    d_l : float
        Layer coating thickness, m.
    """

    k: int
    t: float = 1.0
    rho_at: float = 1e29
    d_l: float = 1e-6

    def __post_init__(self):
        check_layer_count(self.k)
        check_positive(self.t, "t")
        check_positive(self.rho_at, "rho_at")
        check_positive(self.d_l, "d_l")


@dataclass(frozen=True)
class BeamParams:
    """Absorption probability per layer and beam intensity (s^-1)."""

    p: float
    lam: float

    def __post_init__(self):
        check_probability(self.p, "p")
        check_nonnegative(self.lam, "lam")


@dataclass(frozen=True)
class SimTrace:
    """Event-level bookkeeping: per-run incident, absorbed and transmitted counts.

    ``incident[j] == absorbed[j].sum() + transmitted[j]`` holds exactly for
    every run j.
    """

    incident: np.ndarray       # shape (n,)
    absorbed: np.ndarray       # shape (n, k)
    transmitted: np.ndarray    # shape (n,)

    def __post_init__(self):
        if self.absorbed.ndim != 2 or self.incident.shape != self.transmitted.shape:
            raise ValueError("inconsistent trace shapes")
        if self.incident.shape[0] != self.absorbed.shape[0]:
            raise ValueError("incident and absorbed run counts differ")
        if np.any(self.incident < 0) or np.any(self.absorbed < 0) or np.any(self.transmitted < 0):
            raise ValueError("trace counts must be nonnegative")
        if not np.array_equal(self.incident, self.absorbed.sum(axis=1) + self.transmitted):
            raise ValueError("trace violates incident = absorbed + transmitted")


def layer_means(config: DetectorConfig, beam: BeamParams) -> np.ndarray:
    """Expected counts per layer over one run: ``m_i = p (1-p)^(i-1) lam t``."""
    i = np.arange(config.k)
    return beam.p * (1.0 - beam.p) ** i * beam.lam * config.t


def run_rng(seed: int, run_index: int) -> np.random.Generator:
    """Independent substream for one run, keyed from the master seed.

    Philox is counter-based: placing the run index in the high counter word
    gives non-overlapping streams whose draws do not depend on the order in
    which runs are generated.
    """
    key = int(seed) & ((1 << 128) - 1)
    return np.random.Generator(np.random.Philox(key=key, counter=run_index << 192))


def derive_seed(*path: int) -> int:
    """Collapse a (seed, index, ...) path to a fresh 64-bit seed."""
    ss = np.random.SeedSequence([int(x) for x in path])
    return int(ss.generate_state(1, np.uint64)[0])


def simulate_counts(config: DetectorConfig, beam: BeamParams, n: int,
                    seed: int) -> np.ndarray:
    """Draw an (n, k) counts matrix of independent Poisson layer counts.

    Entry (j, i) is Poisson with mean ``m_i``.  Identical
    (config, beam, n, seed) give bit-identical output.
    """
    n = check_run_count(n)
    means = layer_means(config, beam)
    out = np.empty((n, config.k), dtype=np.int64)
    for j in range(n):
        out[j] = run_rng(seed, j).poisson(means)
    return out


def simulate_event_level(config: DetectorConfig, beam: BeamParams, n: int,
                         seed: int) -> SimTrace:
    """Walk a Poisson beam through the layers, one run at a time.

    Each run draws the incident count ``X0 ~ Poisson(lam t)`` and then thins
    the surviving beam layer by layer: every surviving neutron is absorbed
    independently with probability p, so the absorbed count at a layer is
    binomial in the survivors.  Conservation holds exactly.
    """
    n = check_run_count(n)
    lam_t = beam.lam * config.t
    if lam_t > MAX_INCIDENT:
        raise ValueError(
            f"lam * t = {lam_t:.4g} exceeds the per-run incident cap {MAX_INCIDENT}"
        )
    k = config.k
    incident = np.empty(n, dtype=np.int64)
    absorbed = np.zeros((n, k), dtype=np.int64)
    transmitted = np.empty(n, dtype=np.int64)
    for j in range(n):
        rng = run_rng(seed, j)
        x0 = min(int(rng.poisson(lam_t)), MAX_INCIDENT)
        incident[j] = x0
        survivors = x0
        if beam.p > 0.0:
            for i in range(k):
                if survivors == 0:
                    break
                hit = int(rng.binomial(survivors, beam.p))
                absorbed[j, i] = hit
                survivors -= hit
        transmitted[j] = survivors
    return SimTrace(incident=incident, absorbed=absorbed, transmitted=transmitted)


def trace_to_counts(trace: SimTrace) -> np.ndarray:
    """Drop the incident/transmitted bookkeeping, keeping the counts matrix."""
    return trace.absorbed.copy()
