import numpy as np
import pytest

from rsnoum.calibration import (
    Z90,
    ThresholdEntry,
    ThresholdTable,
    _check_monotone,
    _fit_probit,
    awgn_trial,
    calibrate_thresholds,
    success_rate,
)
from rsnoum.errors import CalibrationError


def test_shipped_thresholds_increase(thresholds):
    values = [thresholds.entry(i)[0] for i in range(10)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_width_spans_ten_to_ninety_percent_of_measured_curve(thresholds):
    # Measured (not fitted) success rates interpolated half a width either side.
    for index, entry in thresholds.entries.items():
        snr, p = np.array(entry.curve).T
        hi = np.interp(entry.threshold_db + entry.width_db / 2, snr, p)
        lo = np.interp(entry.threshold_db - entry.width_db / 2, snr, p)
        assert hi == pytest.approx(0.9, abs=0.05), index
        assert lo == pytest.approx(0.1, abs=0.05), index


def test_fitted_curve_tracks_measurements(thresholds):
    for entry in thresholds.entries.values():
        snr, p = np.array(entry.curve).T
        assert np.max(np.abs(entry.success_probability(snr) - p)) <= 0.1


def test_probit_fit_recovers_parameters():
    rng = np.random.default_rng(0)
    snr = np.round(np.arange(-1.0, 1.01, 0.1), 2)
    runs = 2000
    p = rng.binomial(runs, 0.5 * (1 + np.vectorize(__import__("math").erf)((snr - 0.2) / (0.3 * np.sqrt(2))))) / runs
    mu, sd = _fit_probit(snr, p, runs, 0.0)
    assert mu == pytest.approx(0.2, abs=0.02)
    assert sd == pytest.approx(0.3, abs=0.03)


def test_monotonicity_guard():
    _check_monotone(0, np.array([0.0, 0.1, 0.6, 0.55, 1.0]), 200)
    with pytest.raises(CalibrationError):
        _check_monotone(0, np.array([0.0, 0.9, 0.2, 1.0]), 200)


def test_awgn_trial_extremes_and_determinism():
    assert awgn_trial(0, 10.0, [1, 2])
    assert not awgn_trial(0, -10.0, [1, 2])
    assert success_rate(0, -2.2, 10, seed=4) == success_rate(0, -2.2, 10, seed=4)


def test_entry_lookup_and_sd():
    table = ThresholdTable({3: ThresholdEntry(4.0, 2 * Z90)})
    assert table.entry(3) == (4.0, pytest.approx(1.0))
    with pytest.raises(CalibrationError):
        table.entry(4)


def test_table_format_checks():
    with pytest.raises(CalibrationError):
        ThresholdTable.from_dict({"format": "other"})
    with pytest.raises(CalibrationError):
        ThresholdTable.from_dict({"format": "rsnoum-thresholds", "version": 1, "entries": {"0": {}}})


def test_minimum_runs():
    with pytest.raises(ValueError):
        calibrate_thresholds(runs_per_point=50)
