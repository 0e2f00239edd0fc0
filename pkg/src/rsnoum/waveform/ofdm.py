"""OFDM frame assembly and extraction with a unitary FFT.

The subcarrier plan follows 802.11a/g: data and pilots on -26..26 without DC,
pilots on -21, -7, 7, 21, everything else nulled.

Superposed streams carry the base pilot pattern multiplied by different
Walsh-Hadamard rows, so pilots of different streams are orthogonal within
every OFDM symbol.  They then neither add coherently in transmit power nor
mask each other at a pilot-based receiver.

Data symbols of each stream are also rotated by a fixed pseudo-random phase
per resource element.  On a flat channel the phase offset between two
superposed streams is otherwise the same on every subcarrier, and a BPSK
stream whose interferer sits in quadrature sees almost none of it.  The
rotation spreads the interference over all phases so it behaves like the
circular noise the SINR bookkeeping assumes.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from scipy.linalg import hadamard

from .mcs import FrameConfig

PILOT_SEQUENCE = np.array([1.0, 1.0, 1.0, -1.0], dtype=complex)


def stream_pilots(stream: int, n_pilot: int = 4) -> np.ndarray:
    """Pilot values of superposed stream ``stream`` (0 is the base pattern)."""
    if n_pilot < 1 or n_pilot & (n_pilot - 1):
        raise ValueError("orthogonal stream pilots need a power-of-two pilot count")
    if not 0 <= stream < n_pilot:
        raise ValueError(f"at most {n_pilot} orthogonal pilot patterns")
    base = np.resize(PILOT_SEQUENCE, n_pilot)
    return base * hadamard(n_pilot)[stream]


@lru_cache(maxsize=None)
def _scrambler(stream: int, n: int) -> np.ndarray:
    phases = np.random.default_rng([0x5C4A, stream]).uniform(0.0, 2 * np.pi, n)
    out = np.exp(1j * phases)
    out.flags.writeable = False
    return out


def stream_scrambler(stream: int, frame: FrameConfig = FrameConfig()) -> np.ndarray:
    """Unit-modulus data rotation of stream ``stream``, one value per data symbol."""
    if stream < 0:
        raise ValueError("stream index must be non-negative")
    return _scrambler(stream, frame.n_data * frame.payload_symbols)


@lru_cache(maxsize=None)
def subcarrier_plan(frame: FrameConfig) -> tuple[np.ndarray, np.ndarray]:
    """FFT bin indices of the data and pilot subcarriers."""
    if frame.n_fft == 64 and frame.n_data == 48 and frame.n_pilot == 4:
        pilots = np.array([-21, -7, 7, 21])
        used = np.array([k for k in range(-26, 27) if k != 0])
    else:
        n_used = frame.n_data + frame.n_pilot
        lo = -(n_used // 2)
        used = np.array([k for k in range(lo, lo + n_used + 1) if k != 0])[:n_used]
        pilots = used[np.linspace(0, n_used - 1, frame.n_pilot + 2)[1:-1].round().astype(int)] \
            if frame.n_pilot else np.array([], dtype=int)
    data = np.array([k for k in used if k not in set(pilots.tolist())])
    data_bins = np.mod(data, frame.n_fft)
    pilot_bins = np.mod(pilots, frame.n_fft)
    data_bins.setflags(write=False)
    pilot_bins.setflags(write=False)
    return data_bins, pilot_bins


def ofdm_assemble(data_syms: np.ndarray, frame: FrameConfig = FrameConfig(),
                  pilot_seq: np.ndarray = PILOT_SEQUENCE) -> np.ndarray:
    """Map symbols onto subcarriers, IFFT and prepend the cyclic prefix."""
    data_syms = np.asarray(data_syms, dtype=complex)
    expected = frame.n_data * frame.payload_symbols
    if data_syms.shape != (expected,):
        raise ValueError(f"expected {expected} data symbols, got shape {data_syms.shape}")
    pilot_seq = np.asarray(pilot_seq, dtype=complex)
    if pilot_seq.shape != (frame.n_pilot,):
        raise ValueError(f"expected {frame.n_pilot} pilot values")
    data_bins, pilot_bins = subcarrier_plan(frame)
    grid = np.zeros((frame.payload_symbols, frame.n_fft), dtype=complex)
    grid[:, data_bins] = data_syms.reshape(frame.payload_symbols, frame.n_data)
    grid[:, pilot_bins] = pilot_seq
    body = np.fft.ifft(grid, axis=1, norm="ortho")
    return np.concatenate([body[:, frame.n_fft - frame.cp_len:], body], axis=1).ravel()


def ofdm_extract(samples: np.ndarray, frame: FrameConfig = FrameConfig()) -> np.ndarray:
    """Strip the cyclic prefix, FFT, and return data subcarriers in assembly order."""
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != (frame.n_samples,):
        raise ValueError(f"expected {frame.n_samples} samples, got shape {samples.shape}")
    blocks = samples.reshape(frame.payload_symbols, frame.samples_per_symbol)[:, frame.cp_len:]
    grid = np.fft.fft(blocks, axis=1, norm="ortho")
    data_bins, _ = subcarrier_plan(frame)
    return grid[:, data_bins].ravel()


def ofdm_pilots(samples: np.ndarray, frame: FrameConfig = FrameConfig()) -> np.ndarray:
    """Received pilot subcarriers, shape ``(payload_symbols, n_pilot)``."""
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != (frame.n_samples,):
        raise ValueError(f"expected {frame.n_samples} samples, got shape {samples.shape}")
    blocks = samples.reshape(frame.payload_symbols, frame.samples_per_symbol)[:, frame.cp_len:]
    _, pilot_bins = subcarrier_plan(frame)
    return np.fft.fft(blocks, axis=1, norm="ortho")[:, pilot_bins]
