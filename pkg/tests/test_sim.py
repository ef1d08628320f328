import numpy as np
import pytest

from neutronmle import (
    BeamParams,
    DetectorConfig,
    SimTrace,
    layer_means,
    simulate_counts,
    simulate_event_level,
    trace_to_counts,
)


def test_zero_absorption_gives_zero_counts():
    det = DetectorConfig(k=4)
    X = simulate_counts(det, BeamParams(p=0.0, lam=1e5), 3, seed=1)
    assert X.shape == (3, 4)
    assert not X.any()


def test_zero_intensity_gives_zero_counts():
    det = DetectorConfig(k=4)
    X = simulate_counts(det, BeamParams(p=0.5, lam=0.0), 3, seed=1)
    assert not X.any()


def test_first_layer_mean_matches_poisson():
    det = DetectorConfig(k=25, t=1.0)
    beam = BeamParams(p=0.1, lam=1e5)
    n = 100
    X = simulate_counts(det, beam, n, seed=7)
    m1 = 1e4
    assert abs(X[:, 0].mean() - m1) <= 5.0 * np.sqrt(m1 / n)


def test_counts_are_deterministic_in_seed():
    det = DetectorConfig(k=3)
    beam = BeamParams(p=0.4, lam=100.0)
    a = simulate_counts(det, beam, 6, seed=11)
    b = simulate_counts(det, beam, 6, seed=11)
    assert np.array_equal(a, b)
    c = simulate_counts(det, beam, 6, seed=12)
    assert not np.array_equal(a, c)


def test_run_substreams_do_not_depend_on_run_count():
    # Per-run counter-keyed streams: run j is the same whether or not later
    # runs are generated.
    det = DetectorConfig(k=3)
    beam = BeamParams(p=0.4, lam=100.0)
    short = simulate_counts(det, beam, 2, seed=5)
    long = simulate_counts(det, beam, 8, seed=5)
    assert np.array_equal(short, long[:2])


def test_event_level_certain_absorption():
    trace = simulate_event_level(DetectorConfig(k=4), BeamParams(p=1.0, lam=50.0),
                                 5, seed=2)
    assert np.array_equal(trace.absorbed[:, 0], trace.incident)
    assert not trace.absorbed[:, 1:].any()
    assert not trace.transmitted.any()


def test_event_level_no_absorption():
    trace = simulate_event_level(DetectorConfig(k=4), BeamParams(p=0.0, lam=50.0),
                                 5, seed=2)
    assert not trace.absorbed.any()
    assert np.array_equal(trace.transmitted, trace.incident)


def test_event_level_layer_means():
    det = DetectorConfig(k=3, t=1.0)
    beam = BeamParams(p=0.5, lam=50.0)
    n = 200
    trace = simulate_event_level(det, beam, n, seed=3)
    means = trace_to_counts(trace).mean(axis=0)
    expected = np.array([25.0, 12.5, 6.25])
    se = np.sqrt(expected / n)
    assert np.all(np.abs(means - expected) <= 5.0 * se)


def test_conservation_is_exact():
    trace = simulate_event_level(DetectorConfig(k=6), BeamParams(p=0.3, lam=200.0),
                                 50, seed=9)
    assert np.array_equal(trace.incident,
                          trace.absorbed.sum(axis=1) + trace.transmitted)


def test_trace_to_counts_is_a_projection():
    absorbed = np.array([[2, 1], [0, 3]], dtype=np.int64)
    trace = SimTrace(incident=np.array([4, 3]), absorbed=absorbed,
                     transmitted=np.array([1, 0]))
    out = trace_to_counts(trace)
    assert np.array_equal(out, absorbed)
    out[0, 0] = 99  # the projection must be an independent copy
    assert trace.absorbed[0, 0] == 2


def test_trace_to_counts_zero_runs():
    trace = simulate_event_level(DetectorConfig(k=2), BeamParams(p=0.5, lam=0.0),
                                 4, seed=0)
    assert not trace_to_counts(trace).any()


def test_trace_constructor_rejects_broken_accounting():
    with pytest.raises(ValueError):
        SimTrace(incident=np.array([5]), absorbed=np.array([[2, 1]]),
                 transmitted=np.array([1]))


def test_simulator_equivalence_small():
    # The per-layer Poisson draw and the sequential event walk share the same
    # joint law: means and variances agree, distinct layers are uncorrelated.
    det = DetectorConfig(k=4, t=1.0)
    beam = BeamParams(p=0.3, lam=40.0)
    n = 400
    direct = simulate_counts(det, beam, n, seed=21)
    walked = trace_to_counts(simulate_event_level(det, beam, n, seed=22))
    m = layer_means(det, beam)
    se_mean = np.sqrt(2.0 * m / n)
    assert np.all(np.abs(direct.mean(0) - walked.mean(0)) <= 5.0 * se_mean)
    se_var = np.sqrt((m + 2.0 * m**2) * 2.0 / n)
    assert np.all(np.abs(direct.var(0, ddof=1) - walked.var(0, ddof=1))
                  <= 5.0 * se_var)
    corr = np.corrcoef(walked.T)
    off = corr[~np.eye(det.k, dtype=bool)]
    assert np.all(np.abs(off) <= 5.0 / np.sqrt(n))


def test_layer_means_are_nonincreasing():
    det = DetectorConfig(k=10, t=2.0)
    m = layer_means(det, BeamParams(p=0.2, lam=1e3))
    assert np.all(np.diff(m) <= 0)
    assert m[0] == pytest.approx(0.2 * 1e3 * 2.0)


@pytest.mark.parametrize("bad", [
    dict(k=0), dict(k=2, t=0.0), dict(k=2, rho_at=-1.0), dict(k=2, d_l=0.0),
])
def test_detector_validation(bad):
    with pytest.raises(ValueError):
        DetectorConfig(**{"k": 2, **bad})


@pytest.mark.parametrize("p,lam", [(-0.1, 1.0), (1.1, 1.0), (0.5, -1.0)])
def test_beam_validation(p, lam):
    with pytest.raises(ValueError):
        BeamParams(p=p, lam=lam)


def test_event_level_rejects_oversized_beam():
    det = DetectorConfig(k=2, t=1.0)
    with pytest.raises(ValueError, match="cap"):
        simulate_event_level(det, BeamParams(p=0.5, lam=2**31), 1, seed=0)


def test_run_count_validation():
    det = DetectorConfig(k=2)
    with pytest.raises(ValueError):
        simulate_counts(det, BeamParams(p=0.5, lam=1.0), 0, seed=0)
