"""One downlink trial: superpose the three precoded streams, add noise, SIC-decode.

Two modes share the same decision structure:

* ``run_trial`` pushes real bits through polar coding, QAM and OFDM, decodes
  the common stream at each user, cancels the *re-encoded decoded* common
  stream and then decodes the private stream.  By default a common CRC
  failure ends that user's SIC chain.
  Receivers use the true effective gains ``h_i^H p_x`` by default, or a
  least-squares estimate from the stream-orthogonal pilots.
* ``run_trial_fast`` compares per-stream SINRs against calibrated thresholds
  with a Gaussian jitter in dB.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calibration import ThresholdTable
from .channel import ChannelPair
from .precoder import PowerSplit, PrecoderSet, compute_precoders
from .waveform import (
    FrameConfig,
    McsLevel,
    mcs_params,
    ofdm_extract,
    ofdm_pilots,
    qam_demodulate_llr,
    qam_modulate,
    stream_code,
    stream_pilots,
    stream_scrambler,
    stream_waveform,
)

# Floor on the post-equalisation noise variance for noiseless trials.
_MIN_NOISE_VAR = 1e-12


@dataclass(frozen=True)
class StreamPlan:
    mcs_c: McsLevel
    mcs_1: McsLevel
    mcs_2: McsLevel
    split: PowerSplit

    @classmethod
    def from_indices(cls, mcs_c: int, mcs_1: int, mcs_2: int, t: float,
                     p_total: float = 1.0) -> "StreamPlan":
        return cls(mcs_params(mcs_c), mcs_params(mcs_1), mcs_params(mcs_2), PowerSplit(t, p_total))

    @property
    def indices(self) -> tuple[int, int, int]:
        return self.mcs_c.index, self.mcs_1.index, self.mcs_2.index

    @property
    def streams(self) -> tuple[McsLevel, McsLevel, McsLevel]:
        return self.mcs_c, self.mcs_1, self.mcs_2


@dataclass(frozen=True)
class TrialOutcome:
    common_ok_u1: bool
    common_ok_u2: bool
    private_ok_u1: bool
    private_ok_u2: bool
    sinr_common: tuple[float, float] = field(default=(np.nan, np.nan))
    sinr_private: tuple[float, float] = field(default=(np.nan, np.nan))

    @property
    def common_ok_both(self) -> bool:
        return self.common_ok_u1 and self.common_ok_u2


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    pos = den > 0
    np.divide(num, den, out=out, where=pos)
    out[~pos & (num > 0)] = np.inf
    return out


def sinr_from_gains(gains: np.ndarray, noise_var: float) -> tuple[np.ndarray, np.ndarray]:
    """SINRs from the 2x3 matrix of ``|h_i^H p_x|^2``; see ``sinr_values``."""
    g = np.asarray(gains, dtype=float)
    common = _ratio(g[:, 0], g[:, 1] + g[:, 2] + noise_var)
    private = _ratio(np.array([g[0, 1], g[1, 2]]), np.array([g[0, 2], g[1, 1]]) + noise_var)
    return common, private


def sinr_values(pair: ChannelPair, pre: PrecoderSet, noise_var: float) -> tuple[np.ndarray, np.ndarray]:
    """Linear SINRs ``(common per user, private per user)``.

    The common stream sees both private streams as noise; the private stream
    sees only the other private stream, assuming the common one was removed.
    """
    if noise_var < 0:
        raise ValueError("noise_var must be non-negative")
    gains = np.abs(pair.true.conj() @ pre.matrix) ** 2
    return sinr_from_gains(gains, noise_var)


def _db(x: np.ndarray) -> tuple[float, float]:
    with np.errstate(divide="ignore"):
        return tuple(float(v) for v in 10 * np.log10(x))


# -- full waveform -----------------------------------------------------------

def transmit_signal(pair: ChannelPair, plan: StreamPlan, seed: int,
                    frame: FrameConfig = FrameConfig()) -> tuple[np.ndarray, list[np.ndarray], PrecoderSet]:
    """Transmit samples ``x`` (antennas x samples), the payloads and the precoders."""
    pre = compute_precoders(pair, plan.split)
    # One generator per stream so a stream's payload does not depend on the others' MCS.
    payloads = [np.random.default_rng([seed, 10 + s]).integers(0, 2, stream_code(mcs, frame).k, dtype=np.uint8)
                for s, mcs in enumerate(plan.streams)]
    x = np.zeros((pair.h1.size, frame.n_samples), dtype=complex)
    for s, (bits, mcs, p) in enumerate(zip(payloads, plan.streams, pre.matrix.T)):
        if np.any(p):
            x += np.outer(p, stream_waveform(bits, mcs, frame, stream_pilots(s, frame.n_pilot),
                                             stream_scrambler(s, frame)))
    return x, payloads, pre


def _decode(received: np.ndarray, gain: complex, noise_var: float, mcs: McsLevel,
            frame: FrameConfig, exact_llr: bool, stream: int) -> tuple[np.ndarray, bool]:
    code = stream_code(mcs, frame)
    nv = max(noise_var / abs(gain) ** 2, _MIN_NOISE_VAR)
    llr = qam_demodulate_llr(received / (gain * stream_scrambler(stream, frame)), mcs.m, nv, exact=exact_llr)
    return code.decode(llr)


def estimate_gains(samples: np.ndarray, frame: FrameConfig = FrameConfig()) -> np.ndarray:
    """Least-squares estimates of the three effective gains from the pilots."""
    pilots = ofdm_pilots(samples, frame)
    refs = np.stack([stream_pilots(s, frame.n_pilot) for s in range(3)])
    return (pilots @ refs.conj().T).mean(axis=0) / frame.n_pilot


RECEIVERS = ("genie", "ls")
SIC_POLICIES = ("abort", "cancel")


def run_trial(pair: ChannelPair, plan: StreamPlan, noise_var: float, seed: int,
              frame: FrameConfig = FrameConfig(), exact_llr: bool = False,
              receiver: str = "genie", sic: str = "abort") -> TrialOutcome:
    """Full-waveform trial.

    ``receiver="genie"`` equalises with the true ``h_i^H p_x``; ``"ls"`` uses
    pilot-based estimates instead.

    ``sic`` decides what happens when a user's common CRC fails.  ``"abort"``
    stops that user's SIC chain, so its private stream counts as lost.
    ``"cancel"`` subtracts the re-encoded best list candidate anyway and
    decodes the private stream on the remainder; a weak common stream then
    leaves a small residual that a private stream with margin can survive.

    Flags are CRC outcomes, so a rare undetected error counts as a success
    and its wrong codeword is cancelled.  Streams with a zero precoder are
    not transmitted; their flags are False.
    With no common stream (``t = 1``) the private streams are decoded directly.
    """
    if noise_var < 0:
        raise ValueError("noise_var must be non-negative")
    if receiver not in RECEIVERS:
        raise ValueError(f"receiver must be one of {RECEIVERS}")
    if sic not in SIC_POLICIES:
        raise ValueError(f"sic must be one of {SIC_POLICIES}")
    x, _, pre = transmit_signal(pair, plan, seed, frame)
    rng = np.random.default_rng([seed, 1])
    gains = pair.true.conj() @ pre.matrix
    power = np.abs(gains) ** 2
    common_sinr, private_sinr = sinr_from_gains(power, noise_var)
    has_common = bool(np.any(pre.p_c))

    common_ok = [False, False]
    private_ok = [False, False]
    for i, h in enumerate(pair.true):
        noise = np.sqrt(noise_var / 2) * (rng.standard_normal(frame.n_samples)
                                          + 1j * rng.standard_normal(frame.n_samples))
        received = h.conj() @ x + noise
        y = ofdm_extract(received, frame)
        g = gains[i] if receiver == "genie" else estimate_gains(received, frame)
        g_c, g_own, g_other = g[0], g[1 + i], g[2 - i]
        if has_common and power[i, 0] > 0:
            interference = abs(g[1]) ** 2 + abs(g[2]) ** 2 + noise_var
            bits, common_ok[i] = _decode(y, g_c, interference, plan.mcs_c, frame, exact_llr, 0)
            if not common_ok[i] and sic == "abort":
                continue
            y = y - g_c * stream_scrambler(0, frame) * qam_modulate(
                stream_code(plan.mcs_c, frame).encode(bits), plan.mcs_c.m)
        if power[i, 1 + i] > 0:
            mcs = plan.mcs_1 if i == 0 else plan.mcs_2
            _, private_ok[i] = _decode(y, g_own, abs(g_other) ** 2 + noise_var, mcs, frame, exact_llr, 1 + i)
    return TrialOutcome(*common_ok, *private_ok, _db(common_sinr), _db(private_sinr))


# -- threshold abstraction ---------------------------------------------------

def trial_jitter(seed: int) -> np.ndarray:
    """Standard-normal jitter for (common u1, common u2, private u1, private u2)."""
    return np.random.default_rng([seed, 2]).standard_normal(4)


def fast_decisions(common_db: np.ndarray, private_db: np.ndarray, plan: StreamPlan,
                   thresholds: ThresholdTable, jitter: np.ndarray,
                   has_common: bool, has_private: bool) -> np.ndarray:
    """Boolean flags ``[..., (c1, c2, p1, p2)]``.

    SINRs in dB have shape ``(..., 2)`` (per user) and broadcast against the
    jitter of shape ``(..., 4)``.  A private stream is only decodable where the
    same user decoded the common stream, unless no common stream is sent.
    """
    jitter = np.asarray(jitter, dtype=float)
    thr_c, sd_c = thresholds.entry(plan.mcs_c.index)
    common = np.asarray(common_db) >= thr_c + sd_c * jitter[..., :2]
    common &= has_common
    private = np.empty_like(common)
    for i, mcs in enumerate((plan.mcs_1, plan.mcs_2)):
        thr, sd = thresholds.entry(mcs.index)
        private[..., i] = np.asarray(private_db)[..., i] >= thr + sd * jitter[..., 2 + i]
    private &= has_private
    if has_common:
        private &= common
    return np.concatenate([common, private], axis=-1)


def run_trial_fast(pair: ChannelPair, plan: StreamPlan, noise_var: float,
                   thresholds: ThresholdTable, seed: int) -> TrialOutcome:
    pre = compute_precoders(pair, plan.split)
    common, private = sinr_values(pair, pre, noise_var)
    common_db, private_db = np.array(_db(common)), np.array(_db(private))
    flags = fast_decisions(common_db, private_db, plan, thresholds, trial_jitter(seed)[None, :],
                           bool(np.any(pre.p_c)), bool(np.any(pre.p_1)))[0]
    return TrialOutcome(*(bool(f) for f in flags), tuple(common_db), tuple(private_db))
