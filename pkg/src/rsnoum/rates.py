"""MCS-limited stream rates and their multicast / unicast split."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .link import StreamPlan, TrialOutcome
from .waveform import BANDWIDTH_MHZ


@dataclass(frozen=True)
class MessageSplit:
    """``alpha = |W_0| / |W_c|``; 1 is MULP, 0 a purely unicast common stream."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class StreamRates:
    """Rates in bits/s/Hz with the success probabilities behind them."""

    r_c: float
    r_1: float
    r_2: float
    success_probs: tuple[float, float, float]
    runs: int = 1
    spectral_efficiencies: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def standard_errors(self) -> tuple[float, float, float]:
        """Monte-Carlo standard error of each rate estimate."""
        return tuple(
            float(se * np.sqrt(p * (1 - p) / self.runs))
            for se, p in zip(self.spectral_efficiencies, self.success_probs)
        )


@dataclass(frozen=True)
class RatePoint:
    r_mult: float
    r_uni: float

    @property
    def mult_mbps(self) -> float:
        return BANDWIDTH_MHZ * self.r_mult

    @property
    def uni_mbps(self) -> float:
        return BANDWIDTH_MHZ * self.r_uni


def empirical_stream_rates(outcomes: Sequence[TrialOutcome], plan: StreamPlan) -> StreamRates:
    if not outcomes:
        raise ValueError("need at least one trial outcome")
    n = len(outcomes)
    p_c = sum(o.common_ok_u1 and o.common_ok_u2 for o in outcomes) / n
    p_1 = sum(o.private_ok_u1 for o in outcomes) / n
    p_2 = sum(o.private_ok_u2 for o in outcomes) / n
    return rates_from_probabilities(plan, (p_c, p_1, p_2), n)


def rates_from_probabilities(plan: StreamPlan, probs: Sequence[float], runs: int) -> StreamRates:
    se = tuple(m.spectral_efficiency for m in plan.streams)
    probs = tuple(float(p) for p in probs)
    return StreamRates(se[0] * probs[0], se[1] * probs[1], se[2] * probs[2], probs, runs, se)


def noum_split(rates: StreamRates, split: MessageSplit | float) -> RatePoint:
    alpha = split.alpha if isinstance(split, MessageSplit) else MessageSplit(split).alpha
    return RatePoint(alpha * rates.r_c, (1 - alpha) * rates.r_c + rates.r_1 + rates.r_2)


def mulp_point(rates: StreamRates) -> RatePoint:
    """MULP-based NOUM: the common stream carries only the multicast message."""
    return RatePoint(rates.r_c, rates.r_1 + rates.r_2)


def sum_rate(rates: StreamRates) -> float:
    return rates.r_c + rates.r_1 + rates.r_2
