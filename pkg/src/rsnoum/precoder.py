"""MRT common precoder and ZF private precoders for a power split ``t``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelPair, orthogonal_unit
from .errors import DegenerateGeometryError

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class PowerSplit:
    """``t`` is the fraction of ``p_total`` given to the two private streams."""

    t: float
    p_total: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")
        if not self.p_total > 0:
            raise ValueError(f"p_total must be positive, got {self.p_total}")


@dataclass(frozen=True)
class PrecoderSet:
    p_c: np.ndarray
    p_1: np.ndarray
    p_2: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Columns ``p_c, p_1, p_2``."""
        return np.stack([self.p_c, self.p_1, self.p_2], axis=1)

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))


def _unit(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    norm = np.linalg.norm(h)
    if norm == 0:
        raise DegenerateGeometryError("zero-norm channel estimate")
    return h / norm


def common_precoder(h1_hat: np.ndarray, h2_hat: np.ndarray, split: PowerSplit) -> np.ndarray:
    if split.t == 1:
        return np.zeros(np.size(h1_hat), dtype=complex)
    direction = _unit(h1_hat) + _unit(h2_hat)
    norm = np.linalg.norm(direction)
    if norm < _NORM_TOL:
        raise DegenerateGeometryError("anti-parallel channel estimates: MRT direction undefined")
    return np.sqrt(split.p_total * (1 - split.t)) * direction / norm


def private_precoders(h1_hat: np.ndarray, h2_hat: np.ndarray,
                      split: PowerSplit) -> tuple[np.ndarray, np.ndarray]:
    """``p_i`` lies in the nullspace of the other user's estimate."""
    null1 = orthogonal_unit(h1_hat)
    null2 = orthogonal_unit(h2_hat)
    scale = np.sqrt(split.p_total * split.t / 2)
    return scale * null2, scale * null1


def compute_precoders(pair: ChannelPair, split: PowerSplit) -> PrecoderSet:
    p_c = common_precoder(pair.h1_hat, pair.h2_hat, split)
    p_1, p_2 = private_precoders(pair.h1_hat, pair.h2_hat, split)
    return PrecoderSet(p_c, p_1, p_2)


def effective_gains(pair: ChannelPair, pre: PrecoderSet) -> np.ndarray:
    """``|h_i^H p_x|^2`` on the true channels; rows users, columns ``c, 1, 2``."""
    return np.abs(pair.true.conj() @ pre.matrix) ** 2
