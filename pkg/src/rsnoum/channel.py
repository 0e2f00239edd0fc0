"""Two-user MISO channel realizations with exact inter-user correlation.

User 1's channel is i.i.d. Rayleigh.  User 2's channel is built from user 1's
direction so that ``|u1^H u2|`` equals the configured ``rho`` for every draw,
and its norm is set by the pathloss offset.  Transmitter estimates are the
true channels plus scaled complex Gaussian error.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DegenerateGeometryError


@dataclass(frozen=True)
class ChannelConfig:
    rho: float = 0.3
    pathloss_delta_db: float = 0.0
    snr_db: float = 20.0
    csit_error_var: float = 0.0
    n_tx: int = 2

    def __post_init__(self) -> None:
        if self.n_tx != 2:
            raise ConfigError("n_tx", "only two transmit antennas are supported")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho", f"must lie in [0, 1], got {self.rho}")
        if not self.pathloss_delta_db >= 0.0:
            raise ConfigError("pathloss_delta_db", f"must be >= 0, got {self.pathloss_delta_db}")
        if not self.csit_error_var >= 0.0:
            raise ConfigError("csit_error_var", f"must be >= 0, got {self.csit_error_var}")
        if not np.isfinite(self.snr_db):
            raise ConfigError("snr_db", "must be finite")


# Stand-in values: the measured correlations of the four lab scenarios are
# unpublished.  SNR and CSIT error are shared by all presets and were chosen
# by scanning operating points; with exact correlation and perfect CSIT the
# SINRs do not depend on the channel draw, so some estimate error is needed
# for realizations to differ at all.
_SNR_DB = 22.0
_CSIT_VAR = 0.1

PRESETS: dict[str, ChannelConfig] = {
    "case1": ChannelConfig(rho=0.3, snr_db=_SNR_DB, csit_error_var=_CSIT_VAR),
    "case2": ChannelConfig(rho=0.7, snr_db=_SNR_DB, csit_error_var=_CSIT_VAR),
    "case3": ChannelConfig(rho=0.95, snr_db=_SNR_DB, csit_error_var=_CSIT_VAR),
    "case4": ChannelConfig(rho=0.95, pathloss_delta_db=8.0, snr_db=_SNR_DB, csit_error_var=_CSIT_VAR),
}


def preset(name: str, **overrides) -> ChannelConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigError("scenario", f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides) if overrides else base


@dataclass(frozen=True)
class ChannelPair:
    """True channels ``h1, h2`` and their transmitter-side estimates."""

    h1: np.ndarray
    h2: np.ndarray
    h1_hat: np.ndarray | None = None
    h2_hat: np.ndarray | None = None

    def __post_init__(self) -> None:
        for name in ("h1", "h2", "h1_hat", "h2_hat"):
            value = getattr(self, name)
            if value is None:
                value = getattr(self, name[:2])
            value = np.array(value, dtype=complex)
            if value.ndim != 1 or value.shape != np.shape(self.h1):
                raise ValueError(f"{name} must be a vector of length {np.size(self.h1)}")
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def true(self) -> np.ndarray:
        """Rows ``h1, h2``."""
        return np.stack([self.h1, self.h2])

    @property
    def estimated(self) -> np.ndarray:
        return np.stack([self.h1_hat, self.h2_hat])


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def orthogonal_unit(v: np.ndarray) -> np.ndarray:
    """Unit vector spanning the orthogonal complement of ``v`` in C^2.

    The phase is fixed so the first non-zero entry is real positive.
    """
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise DegenerateGeometryError("zero-norm channel has no unique nullspace")
    w = np.array([-np.conj(v[1]), np.conj(v[0])]) / norm
    lead = w[0] if w[0] != 0 else w[1]
    return w * (np.conj(lead) / abs(lead))


def generate_channel_pair(cfg: ChannelConfig, seed: int) -> ChannelPair:
    rng = _rng(seed)
    h1 = (rng.standard_normal(cfg.n_tx) + 1j * rng.standard_normal(cfg.n_tx)) / np.sqrt(2)
    phase = rng.uniform(0.0, 2 * np.pi)
    norm1 = np.linalg.norm(h1)
    u1 = h1 / norm1
    direction = cfg.rho * u1 + np.sqrt(1 - cfg.rho ** 2) * orthogonal_unit(h1) * np.exp(1j * phase)
    h2 = norm1 * 10 ** (-cfg.pathloss_delta_db / 20) * direction
    return ChannelPair(h1, h2)


def corrupt_csit(pair: ChannelPair, cfg: ChannelConfig, seed: int) -> ChannelPair:
    """Replace the estimates by ``h_i + e_i``, ``e_i ~ CN(0, var * |h_i|^2 / n_tx)``."""
    if cfg.csit_error_var == 0:
        return ChannelPair(pair.h1, pair.h2)
    rng = _rng(seed)
    estimates = []
    for h in (pair.h1, pair.h2):
        var = cfg.csit_error_var * np.vdot(h, h).real / h.size
        e = np.sqrt(var / 2) * (rng.standard_normal(h.size) + 1j * rng.standard_normal(h.size))
        estimates.append(h + e)
    return ChannelPair(pair.h1, pair.h2, *estimates)


def correlation(pair: ChannelPair) -> float:
    n1, n2 = np.linalg.norm(pair.h1), np.linalg.norm(pair.h2)
    if n1 == 0 or n2 == 0:
        raise DegenerateGeometryError("correlation undefined for a zero-norm channel")
    return float(min(abs(np.vdot(pair.h1, pair.h2)) / (n1 * n2), 1.0))


def noise_variance(pair: ChannelPair, cfg: ChannelConfig, p_total: float = 1.0) -> float:
    """Per-sample noise variance giving user 1 the configured SNR at full power."""
    return float(np.vdot(pair.h1, pair.h1).real * p_total / (cfg.n_tx * 10 ** (cfg.snr_db / 10)))
