"""SINR thresholds for the fast link mode, measured with the full waveform.

For each MCS the block success probability on a unit-gain AWGN channel is
measured on an SNR grid around a bisection estimate of the 50% point.  A
probit curve ``P(snr) = Phi((snr - threshold) / sd)`` is fitted by maximum
likelihood; the stored width is the 10%-90% span ``2 * 1.2816 * sd``.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import optimize, stats

from .errors import CalibrationError
from .waveform import MCS_TABLE, FrameConfig, mcs_params, ofdm_extract, qam_demodulate_llr, stream_code, stream_waveform

log = logging.getLogger(__name__)

FORMAT_NAME = "rsnoum-thresholds"
FORMAT_VERSION = 1
Z90 = stats.norm.ppf(0.9)

_COARSE_RUNS = 30
_GRID_STEP_DB = 0.1
_MIN_SD_DB = 0.01


@dataclass(frozen=True)
class ThresholdEntry:
    threshold_db: float
    width_db: float
    curve: tuple[tuple[float, float], ...] = ()

    @property
    def sd_db(self) -> float:
        return self.width_db / (2 * Z90)

    def success_probability(self, snr_db) -> np.ndarray:
        return stats.norm.cdf((np.asarray(snr_db, dtype=float) - self.threshold_db) / self.sd_db)


@dataclass(frozen=True)
class ThresholdTable:
    entries: dict[int, ThresholdEntry]
    frame: FrameConfig = FrameConfig()
    runs_per_point: int = 0
    seed: int = 0
    version: int = FORMAT_VERSION

    def entry(self, index: int) -> tuple[float, float]:
        """``(threshold_db, jitter sd in dB)`` for an MCS index."""
        try:
            e = self.entries[index]
        except KeyError:
            raise CalibrationError(f"no threshold calibrated for MCS index {index}") from None
        return e.threshold_db, e.sd_db

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": self.version,
            "frame": asdict(self.frame),
            "runs_per_point": self.runs_per_point,
            "seed": self.seed,
            "entries": {
                str(i): {
                    "threshold_db": e.threshold_db,
                    "width_db": e.width_db,
                    "curve": [list(p) for p in e.curve],
                }
                for i, e in sorted(self.entries.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdTable":
        if data.get("format") != FORMAT_NAME:
            raise CalibrationError("not a threshold table")
        if data.get("version") != FORMAT_VERSION:
            raise CalibrationError(f"unsupported threshold table version {data.get('version')}")
        try:
            entries = {
                int(i): ThresholdEntry(float(e["threshold_db"]), float(e["width_db"]),
                                       tuple((float(a), float(b)) for a, b in e.get("curve", ())))
                for i, e in data["entries"].items()
            }
            return cls(entries, FrameConfig(**data["frame"]), int(data["runs_per_point"]), int(data["seed"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise CalibrationError(f"malformed threshold table: {exc}") from exc


def _point_seed(seed: int, index: int, snr_db: float, run: int) -> list[int]:
    return [seed, index, int(round((snr_db + 100) * 1000)), run]


def awgn_trial(index: int, snr_db: float, seed, frame: FrameConfig = FrameConfig()) -> bool:
    """One full-waveform block over a unit-gain AWGN channel; True on CRC pass."""
    mcs = mcs_params(index)
    rng = np.random.default_rng(seed)
    code = stream_code(mcs, frame)
    bits = rng.integers(0, 2, code.k, dtype=np.uint8)
    x = stream_waveform(bits, mcs, frame)
    nv = 10 ** (-snr_db / 10)
    y = x + np.sqrt(nv / 2) * (rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size))
    _, ok = code.decode(qam_demodulate_llr(ofdm_extract(y, frame), mcs.m, nv))
    return ok


def success_rate(index: int, snr_db: float, runs: int, seed: int,
                 frame: FrameConfig = FrameConfig()) -> float:
    hits = sum(awgn_trial(index, snr_db, _point_seed(seed, index, snr_db, r), frame) for r in range(runs))
    return hits / runs


def _fit_probit(snr: np.ndarray, p: np.ndarray, runs: int, start: float) -> tuple[float, float]:
    k = p * runs

    def nll(theta):
        mu, log_sd = theta
        z = (snr - mu) / np.exp(log_sd)
        return -np.sum(k * stats.norm.logcdf(z) + (runs - k) * stats.norm.logsf(z))

    res = optimize.minimize(nll, x0=[start, np.log(0.1)], method="Nelder-Mead",
                            options={"xatol": 1e-6, "fatol": 1e-9, "maxiter": 4000})
    mu, log_sd = res.x
    return float(mu), float(max(np.exp(log_sd), _MIN_SD_DB))


def _check_monotone(index: int, p: np.ndarray, runs: int) -> None:
    tol = 4 * np.sqrt(0.5 / runs)
    running_max = np.maximum.accumulate(p)
    if np.any(running_max - p > tol):
        raise CalibrationError(f"success curve for MCS {index} is not monotone in SNR: {p.tolist()}")


def calibrate_mcs(index: int, frame: FrameConfig, runs_per_point: int, seed: int) -> ThresholdEntry:
    mcs = mcs_params(index)
    guess = 10 * np.log10(2 ** mcs.spectral_efficiency - 1)
    lo, hi = guess - 8.0, guess + 12.0
    if success_rate(index, hi, _COARSE_RUNS, seed, frame) < 0.5:
        raise CalibrationError(f"MCS {index} never decodes reliably below {hi:.1f} dB")
    while hi - lo > 0.2:
        mid = 0.5 * (lo + hi)
        if success_rate(index, mid, _COARSE_RUNS, seed, frame) >= 0.5:
            hi = mid
        else:
            lo = mid
    center = round(0.5 * (lo + hi) / _GRID_STEP_DB) * _GRID_STEP_DB

    def at(step: int) -> float:
        return round(center + step * _GRID_STEP_DB, 2)

    curve = {0: success_rate(index, at(0), runs_per_point, seed, frame)}
    for direction, limit in ((-1, 0.0), (1, 1.0)):
        step, saturated = 0, 0
        while saturated < 2 and abs(step) < 30:
            step += direction
            curve[step] = success_rate(index, at(step), runs_per_point, seed, frame)
            saturated = saturated + 1 if curve[step] == limit else 0
    steps = sorted(curve)
    snr = np.array([at(s) for s in steps])
    p = np.array([curve[s] for s in steps])
    _check_monotone(index, p, runs_per_point)
    mu, sd = _fit_probit(snr, p, runs_per_point, center)
    log.info("MCS %d: threshold %.3f dB, width %.3f dB over %d points", index, mu, 2 * Z90 * sd, len(steps))
    return ThresholdEntry(mu, 2 * Z90 * sd, tuple(zip(snr.tolist(), p.tolist())))


def calibrate_thresholds(frame: FrameConfig = FrameConfig(), runs_per_point: int = 200, seed: int = 0,
                         mcs_indices: Iterable[int] | None = None,
                         progress: Callable[[int, ThresholdEntry], None] | None = None) -> ThresholdTable:
    """Measure per-MCS SINR thresholds through the full waveform pipeline."""
    if runs_per_point < 100:
        raise ValueError("runs_per_point must be at least 100")
    indices = [m.index for m in MCS_TABLE] if mcs_indices is None else list(mcs_indices)
    entries = {}
    for index in indices:
        entries[index] = calibrate_mcs(index, frame, runs_per_point, seed)
        if progress is not None:
            progress(index, entries[index])
    return ThresholdTable(entries, frame, runs_per_point, seed)
