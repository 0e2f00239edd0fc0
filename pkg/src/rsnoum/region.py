"""Power-split and MCS sweeps, the achievable rate region and the RSMA/MULP comparison.

For every ``t`` on the grid the MCS triple maximising the sum of the three
stream rates is found by exhaustive search.  Each such ``t`` contributes a
MULP point ``(r_1 + r_2, r_c)`` and a slope -1 segment to the purely unicast
point ``(r_c + r_1 + r_2, 0)`` obtained by moving common-stream capacity from
the multicast message to unicast parts.  Regions are convexified by time
sharing.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .calibration import ThresholdTable
from .channel import ChannelConfig, ChannelPair, corrupt_csit, generate_channel_pair, noise_variance
from .errors import CalibrationError
from .link import StreamPlan, fast_decisions, run_trial, sinr_values, trial_jitter
from .precoder import PowerSplit, compute_precoders
from .rates import RatePoint, StreamRates, empirical_stream_rates, mulp_point, noum_split, rates_from_probabilities
from .seeding import CHANNEL, CSIT, TRIAL, derive_seed
from .waveform import MCS_TABLE, FrameConfig, mcs_params

DEFAULT_T_GRID = tuple(round(0.1 * i, 1) for i in range(11))
MODES = ("fast", "full")
CHANNEL_MODES = ("fixed", "ensemble")


@dataclass(frozen=True)
class SweepConfig:
    t_grid: tuple[float, ...] = DEFAULT_T_GRID
    mcs_indices: tuple[int, ...] = tuple(range(len(MCS_TABLE)))
    runs: int = 50
    mode: str = "full"
    channel_mode: str = "fixed"

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        object.__setattr__(self, "mcs_indices", tuple(sorted({int(i) for i in self.mcs_indices})))
        if not self.t_grid:
            raise ValueError("t_grid must not be empty")
        if any(not 0.0 <= t <= 1.0 for t in self.t_grid):
            raise ValueError("t values must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise ValueError("t_grid must be strictly increasing")
        if not self.mcs_indices:
            raise ValueError("mcs_indices must not be empty")
        for i in self.mcs_indices:
            mcs_params(i)
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.channel_mode not in CHANNEL_MODES:
            raise ValueError(f"channel_mode must be one of {CHANNEL_MODES}")


@dataclass(frozen=True)
class Scenario:
    """Channel statistics plus everything needed to reproduce trials."""

    channel: ChannelConfig
    base_seed: int = 0
    p_total: float = 1.0
    frame: FrameConfig = FrameConfig()
    thresholds: ThresholdTable | None = None

    def channel_pair(self, run: int | None = None) -> ChannelPair:
        """The fixed realization, or run ``run``'s draw in ensemble mode."""
        keys = (self.base_seed,) if run is None else (self.base_seed, run)
        pair = generate_channel_pair(self.channel, derive_seed(*keys, CHANNEL))
        return corrupt_csit(pair, self.channel, derive_seed(*keys, CSIT))

    def realizations(self, cfg: SweepConfig) -> list[tuple[ChannelPair, float]]:
        if cfg.channel_mode == "fixed":
            pair = self.channel_pair()
            return [(pair, noise_variance(pair, self.channel, self.p_total))] * cfg.runs
        out = []
        for run in range(cfg.runs):
            pair = self.channel_pair(run)
            out.append((pair, noise_variance(pair, self.channel, self.p_total)))
        return out

    def trial_seed(self, t_index: int, run: int) -> int:
        # Shared by all MCS triples at a given (t, run): common random numbers.
        return derive_seed(self.base_seed, TRIAL, t_index, run)


@dataclass(frozen=True)
class SweepRow:
    t: float
    plan: StreamPlan
    rates: StreamRates
    counts: tuple[int, int, int]

    @property
    def score(self) -> int:
        """Sum rate in Mbps times the run count; exact for comparisons."""
        return sum(int(m.max_data_rate_mbps) * c for m, c in zip(self.plan.streams, self.counts))


@dataclass(frozen=True)
class TRecord:
    """Best MCS triple at one power split."""

    t: float
    plan: StreamPlan
    rates: StreamRates
    score: int

    @property
    def sum_rate(self) -> float:
        return self.rates.r_c + self.rates.r_1 + self.rates.r_2

    @property
    def mulp(self) -> RatePoint:
        return noum_split(self.rates, 1.0)

    @property
    def unicast_end(self) -> RatePoint:
        return noum_split(self.rates, 0.0)

    @property
    def private_sum(self) -> float:
        return self.rates.r_1 + self.rates.r_2


def _triples(t: float, indices: tuple[int, ...]) -> list[tuple[int, int, int]]:
    # Absent streams cannot influence decoding, so their MCS is pinned.
    common = indices[:1] if t == 1 else indices
    private = indices[:1] if t == 0 else indices
    return list(itertools.product(common, private, private))


def _row(t: float, plan: StreamPlan, counts: tuple[int, int, int], runs: int) -> SweepRow:
    rates = rates_from_probabilities(plan, [c / runs for c in counts], runs)
    return SweepRow(t, plan, rates, counts)


def _evaluate_fast(t_index: int, t: float, scenario: Scenario, cfg: SweepConfig) -> list[SweepRow]:
    if scenario.thresholds is None:
        raise CalibrationError("fast mode needs a threshold table")
    split = PowerSplit(t, scenario.p_total)
    common_db = np.empty((cfg.runs, 2))
    private_db = np.empty((cfg.runs, 2))
    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for run, (pair, nv) in enumerate(scenario.realizations(cfg)):
        if id(pair) not in cache:
            c, p = sinr_values(pair, compute_precoders(pair, split), nv)
            with np.errstate(divide="ignore"):
                cache[id(pair)] = 10 * np.log10(c), 10 * np.log10(p)
        common_db[run], private_db[run] = cache[id(pair)]
    jitter = np.stack([trial_jitter(scenario.trial_seed(t_index, r)) for r in range(cfg.runs)])
    rows = []
    for indices in _triples(t, cfg.mcs_indices):
        plan = StreamPlan.from_indices(*indices, t, scenario.p_total)
        flags = fast_decisions(common_db, private_db, plan, scenario.thresholds, jitter, t < 1, t > 0)
        counts = (int(np.sum(flags[:, 0] & flags[:, 1])), int(flags[:, 2].sum()), int(flags[:, 3].sum()))
        rows.append(_row(t, plan, counts, cfg.runs))
    return rows


def _evaluate_full(t_index: int, t: float, scenario: Scenario, cfg: SweepConfig) -> list[SweepRow]:
    reals = scenario.realizations(cfg)
    triples = _triples(t, cfg.mcs_indices)

    def bound(ix):
        return sum(int(mcs_params(i).max_data_rate_mbps) for i in ix) * cfg.runs

    # Highest attainable first; a triple whose ceiling is below the best
    # measured score cannot win, so the search stays exhaustive in effect.
    triples.sort(key=lambda ix: (-bound(ix), ix))
    rows: list[SweepRow] = []
    best = -1
    for indices in triples:
        if bound(indices) < best:
            break
        plan = StreamPlan.from_indices(*indices, t, scenario.p_total)
        outcomes = [run_trial(pair, plan, nv, scenario.trial_seed(t_index, r), scenario.frame)
                    for r, (pair, nv) in enumerate(reals)]
        rates = empirical_stream_rates(outcomes, plan)
        counts = (sum(o.common_ok_both for o in outcomes),
                  sum(o.private_ok_u1 for o in outcomes),
                  sum(o.private_ok_u2 for o in outcomes))
        row = SweepRow(t, plan, rates, counts)
        rows.append(row)
        best = max(best, row.score)
    return rows


def evaluate_t(t_index: int, t: float, scenario: Scenario, cfg: SweepConfig) -> list[SweepRow]:
    """Every MCS triple evaluated at one grid point, ``runs`` trials each."""
    if cfg.mode == "fast":
        return _evaluate_fast(t_index, t, scenario, cfg)
    return _evaluate_full(t_index, t, scenario, cfg)


def _best(rows: list[SweepRow]) -> SweepRow:
    return min(rows, key=lambda r: (-r.score, r.plan.indices))


def best_mcs_at_t(t: float, scenario: Scenario, cfg: SweepConfig,
                  t_index: int | None = None) -> tuple[StreamPlan, StreamRates]:
    """Brute-force MCS search at ``t``; ties go to the lowest index triple."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if t_index is None:
        t_index = cfg.t_grid.index(t) if t in cfg.t_grid else 0
    row = _best(evaluate_t(t_index, t, scenario, cfg))
    return row.plan, row.rates


# -- geometry ------------------------------------------------------------------

def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def time_sharing_boundary(points: list[RatePoint]) -> list[RatePoint]:
    """Upper-right boundary of the down-closed convex hull, by increasing ``r_uni``.

    Starts on the multicast axis and ends on the unicast axis.
    """
    if not points:
        raise ValueError("need at least one point")
    xy = [(p.r_uni, p.r_mult) for p in points]
    top = max(y for _, y in xy)
    right = max(x for x, _ in xy)
    cand = sorted(set(xy) | {(0.0, top), (right, 0.0)}, key=lambda q: (q[0], -q[1]))
    hull: list[tuple[float, float]] = []
    for q in cand:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], q) >= 0:
            hull.pop()
        if hull and hull[-1][0] == q[0] and q[1] <= hull[-1][1] and q != (right, 0.0):
            continue
        hull.append(q)
    return [RatePoint(y, x) for x, y in hull]


def region_area(boundary: list[RatePoint]) -> float:
    """Area enclosed by the boundary and both axes."""
    poly = [(0.0, 0.0)] + [(p.r_uni, p.r_mult) for p in boundary]
    area = 0.0
    for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]):
        area += x0 * y1 - x1 * y0
    return abs(area) / 2


@dataclass(frozen=True)
class RateRegion:
    per_t: tuple[TRecord, ...]
    rows: tuple[SweepRow, ...]
    t_star: float
    hull: tuple[RatePoint, ...]
    mulp_hull: tuple[RatePoint, ...]
    landmarks: dict[str, RatePoint] = field(default_factory=dict)
    sweep: SweepConfig = SweepConfig()

    def at(self, t: float) -> TRecord:
        for rec in self.per_t:
            if rec.t == t:
                return rec
        raise KeyError(t)

    @property
    def star(self) -> TRecord:
        return self.at(self.t_star)

    @property
    def max_sum_rate(self) -> float:
        return self.star.sum_rate

    @property
    def peak_multicast(self) -> float:
        if "A" in self.landmarks:
            return self.landmarks["A"].r_mult
        return max(rec.rates.r_c for rec in self.per_t)

    @property
    def common_share(self) -> float:
        """Fraction of the maximum sum rate carried by the common stream."""
        total = self.max_sum_rate
        return self.star.rates.r_c / total if total > 0 else 0.0

    @property
    def rsma_area(self) -> float:
        return region_area(list(self.hull))

    @property
    def mulp_area(self) -> float:
        return region_area(list(self.mulp_hull))

    @property
    def area_gap(self) -> float:
        return self.rsma_area - self.mulp_area

    def landmark_e(self, r_0: float) -> RatePoint | None:
        """RSMA point on the ``t*`` segment delivering multicast rate ``r_0``."""
        if not 0 <= r_0 <= self.star.rates.r_c:
            return None
        return RatePoint(r_0, self.max_sum_rate - r_0)


def build_region(scenario: Scenario, cfg: SweepConfig) -> RateRegion:
    if not cfg.t_grid:
        raise ValueError("empty t grid")
    per_t, rows = [], []
    for t_index, t in enumerate(cfg.t_grid):
        evaluated = evaluate_t(t_index, t, scenario, cfg)
        rows.extend(evaluated)
        best = _best(evaluated)
        per_t.append(TRecord(t, best.plan, best.rates, best.score))
    # argmax of the sum rate; ties go to the smallest t
    star = min(per_t, key=lambda rec: (-rec.score, rec.t))
    landmarks = {}
    if per_t[0].t == 0.0:
        landmarks["A"] = RatePoint(per_t[0].sum_rate, 0.0)
    if per_t[-1].t == 1.0:
        landmarks["B"] = RatePoint(0.0, per_t[-1].sum_rate)
    landmarks["D"] = star.mulp
    landmarks["F"] = RatePoint(0.0, star.sum_rate)
    mulp_points = [rec.mulp for rec in per_t]
    hull = time_sharing_boundary(mulp_points + [rec.unicast_end for rec in per_t])
    return RateRegion(tuple(per_t), tuple(rows), star.t, tuple(hull),
                      tuple(time_sharing_boundary(mulp_points)), landmarks, cfg)


# -- dominance over MULP at a fixed multicast rate ----------------------------

@dataclass(frozen=True)
class Lemma1Result:
    r_0: float
    feasible: bool
    mulp_uni: float
    rsma_uni: float
    t_0: float | None
    margin: float
    holds: bool
    strict: bool


def _se(rates: StreamRates, streams: tuple[int, ...]) -> float:
    errors = rates.standard_errors
    return math.sqrt(sum(errors[i] ** 2 for i in streams))


def lemma1_check(region: RateRegion, r_0: float) -> Lemma1Result:
    """Unicast sum rate of RSMA at ``t*`` versus the best MULP grid point meeting ``r_0``.

    ``margin`` is twice the Monte-Carlo standard error of the difference.
    """
    if r_0 < 0:
        raise ValueError("r_0 must be non-negative")
    feasible = [rec for rec in region.per_t if rec.rates.r_c >= r_0]
    if not feasible:
        return Lemma1Result(r_0, False, math.nan, math.nan, None, math.nan, False, False)
    t0 = min(feasible, key=lambda rec: (-rec.private_sum, rec.t))
    mulp_uni = t0.private_sum
    mulp_se = _se(t0.rates, (1, 2))
    star = region.star
    if r_0 <= star.rates.r_c:
        rsma_uni = star.rates.r_c - r_0 + star.rates.r_1 + star.rates.r_2
        rsma_se = _se(star.rates, (0, 1, 2))
    else:
        rsma_uni, rsma_se = mulp_uni, mulp_se
    margin = 2 * math.hypot(rsma_se, mulp_se)
    return Lemma1Result(r_0, True, mulp_uni, rsma_uni, t0.t, margin,
                        rsma_uni >= mulp_uni - margin, rsma_uni > mulp_uni)


def r0_grid(region: RateRegion, points: int = 20) -> np.ndarray:
    """Evenly spaced multicast targets from 0 to the peak multicast rate."""
    return np.linspace(0.0, region.peak_multicast, points)


def lemma1_table(region: RateRegion, points: int = 20) -> list[Lemma1Result]:
    return [lemma1_check(region, float(r)) for r in r0_grid(region, points)]
