"""Gray-mapped square QAM with max-log (or exact) soft demapping.

Bit ``0`` maps to the positive half-axis.  For ``m >= 2`` the first ``m/2``
bits of every group select the in-phase level and the remaining bits the
quadrature level.  Constellations are scaled to unit average energy.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

SUPPORTED_ORDERS = (1, 2, 4, 6, 8)


def _check_order(m: int) -> None:
    if m not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported bits per symbol {m}; expected one of {SUPPORTED_ORDERS}")


@lru_cache(maxsize=None)
def _axis(m: int) -> tuple[np.ndarray, np.ndarray]:
    """PAM levels of one axis and their Gray labels, shape ``(M,)`` and ``(M, b)``."""
    b = 1 if m == 1 else m // 2
    M = 2 ** b
    idx = np.arange(M)
    scale = 1.0 if m == 1 else np.sqrt(2 * (M * M - 1) / 3)
    levels = ((M - 1) - 2 * idx) / scale
    gray = idx ^ (idx >> 1)
    labels = (gray[:, None] >> np.arange(b - 1, -1, -1)) & 1
    levels.setflags(write=False)
    labels.setflags(write=False)
    return levels, labels.astype(np.uint8)


def constellation(m: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``2**m`` points and their bit labels, shape ``(2**m,)`` and ``(2**m, m)``."""
    _check_order(m)
    words = (np.arange(2 ** m)[:, None] >> np.arange(m - 1, -1, -1)) & 1
    return qam_modulate(words.ravel(), m), words.astype(np.uint8)


def qam_modulate(bits: np.ndarray, m: int) -> np.ndarray:
    _check_order(m)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1 or bits.size % m:
        raise ValueError(f"bit count {bits.size} is not a multiple of m={m}")
    levels, _ = _axis(m)
    if m == 1:
        return levels[bits].astype(complex)
    half = m // 2
    groups = bits.reshape(-1, 2, half)
    weights = 1 << np.arange(half - 1, -1, -1)
    gray = groups @ weights
    # Gray code -> binary index by prefix XOR
    idx = gray.copy()
    shift = gray >> 1
    while np.any(shift):
        idx ^= shift
        shift >>= 1
    return levels[idx[:, 0]] + 1j * levels[idx[:, 1]]


def _axis_llr(y: np.ndarray, m: int, noise_var: float, exact: bool) -> np.ndarray:
    levels, labels = _axis(m)
    metric = -((y[:, None] - levels[None, :]) ** 2) / noise_var
    out = np.empty((y.size, labels.shape[1]))
    for j in range(labels.shape[1]):
        zero = labels[:, j] == 0
        if exact:
            out[:, j] = logsumexp(metric[:, zero], axis=1) - logsumexp(metric[:, ~zero], axis=1)
        else:
            out[:, j] = metric[:, zero].max(axis=1) - metric[:, ~zero].max(axis=1)
    return out


def qam_demodulate_llr(symbols: np.ndarray, m: int, noise_var: float,
                       exact: bool = False) -> np.ndarray:
    """Per-bit LLRs ``log P(b=0|y) / P(b=1|y)`` under circular Gaussian noise.

    ``noise_var`` is the total complex noise variance per symbol.  Max-log by
    default; ``exact=True`` evaluates the full log-sum-exp.
    """
    _check_order(m)
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")
    y = np.asarray(symbols, dtype=complex).ravel()
    if m == 1:
        return _axis_llr(y.real, 1, noise_var, exact).ravel()
    llr_i = _axis_llr(y.real, m, noise_var, exact)
    llr_q = _axis_llr(y.imag, m, noise_var, exact)
    return np.concatenate([llr_i, llr_q], axis=1).ravel()
