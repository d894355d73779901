import math

import numpy as np
import pytest

from beamcoherence.correlation import corr_nlos_exact
from beamcoherence.mcsim import ChannelTrace, empirical_correlation, simulate_ensemble, simulate_nlos, trace_seeds
from beamcoherence.scenario import Beam, Scenario

BEAM = Beam.from_concentration(50)
SC = Scenario(pointing=math.radians(80))
DT = 0.01 / SC.doppler


def test_trace_has_unit_power():
    tr = simulate_nlos(SC, BEAM, 2000, 300 * DT, DT, seed=4)
    assert len(tr.samples) == 300
    assert np.mean(np.abs(tr.samples) ** 2) == pytest.approx(1.0, abs=0.02)


def test_deterministic_given_seed():
    a = simulate_nlos(SC, BEAM, 500, 50 * DT, DT, seed=9)
    b = simulate_nlos(SC, BEAM, 500, 50 * DT, DT, seed=9)
    c = simulate_nlos(SC, BEAM, 500, 50 * DT, DT, seed=10)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_ensemble_seeds_independent_of_batch_size():
    small = simulate_ensemble(SC, BEAM, 500, 20 * DT, DT, 7, 3)
    large = simulate_ensemble(SC, BEAM, 500, 20 * DT, DT, 7, 6)
    assert [t.seed for t in small] == trace_seeds(7, 3) == [t.seed for t in large[:3]]
    for s, l in zip(small, large):
        assert np.allclose(s.samples, l.samples, atol=1e-12)


def test_constant_trace_correlation():
    tr = ChannelTrace(1.0, np.full(20, 0.3 - 0.4j), 0)
    assert all(s.value == pytest.approx(1.0) for s in empirical_correlation([tr], [1.0, 5.0, 10.0]))


def test_white_noise_correlation_bound():
    rng = np.random.default_rng(0)
    n = 20_000
    h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2)
    est = empirical_correlation([ChannelTrace(1.0, h, 0)], [1.0, 2.0, 50.0])
    assert all(abs(s.value) <= 5 / math.sqrt(n) for s in est)


def test_estimator_errors():
    tr = ChannelTrace(1.0, np.ones(10, complex), 0)
    with pytest.raises(ValueError):
        empirical_correlation([tr], [10.0])
    with pytest.raises(ValueError):
        empirical_correlation([tr], [0.5])
    with pytest.raises(ValueError):
        empirical_correlation([tr, ChannelTrace(2.0, np.ones(10, complex), 1)], [1.0])
    with pytest.raises(ValueError):
        empirical_correlation([], [1.0])


def test_invalid_inputs():
    with pytest.raises(ValueError):
        simulate_nlos(SC, BEAM, 50, 10 * DT, DT, 0)
    with pytest.raises(ValueError):
        simulate_nlos(SC, BEAM, 500, 10.5 * DT, DT, 0)
    with pytest.raises(ValueError):
        ChannelTrace(0.0, np.ones(3), 0)
    with pytest.raises(ValueError):
        ChannelTrace(1.0, np.ones(0), 0)


@pytest.fixture(scope="module")
def ensemble():
    return simulate_ensemble(SC, BEAM, 10000, 200 * DT, DT, 11, 200)


def test_ensemble_matches_exact(ensemble):
    lags = DT * np.arange(1, 51)
    est = np.array([s.value for s in empirical_correlation(ensemble, lags)])
    assert np.max(np.abs(est - corr_nlos_exact(SC, BEAM, lags))) <= 0.05


def test_ensemble_magnitude_within_noise(ensemble):
    lags = DT * np.arange(1, 150, 7)
    est = empirical_correlation(ensemble, lags)
    se = 1 / math.sqrt(len(ensemble))
    assert all(abs(s.value) <= 1 + 3 * se for s in est)


def test_halving_dt_is_consistent():
    coarse = simulate_ensemble(SC, BEAM, 4000, 100 * DT, DT, 3, 100)
    fine = simulate_ensemble(SC, BEAM, 4000, 100 * DT, DT / 2, 3, 100)
    lags = DT * np.array([5, 10, 20, 40])
    a = np.array([s.value for s in empirical_correlation(coarse, lags)])
    b = np.array([s.value for s in empirical_correlation(fine, lags)])
    assert np.max(np.abs(a - b)) <= 0.03


def test_csv_dump(tmp_path):
    tr = simulate_nlos(SC, BEAM, 200, 5 * DT, DT, 1)
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,re,im" and len(lines) == 6
    t, re, im = map(float, lines[2].split(","))
    assert t == pytest.approx(DT, rel=1e-8) and complex(re, im) == pytest.approx(tr.samples[1], rel=1e-8)
