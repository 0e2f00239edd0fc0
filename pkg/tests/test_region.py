import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsnoum.channel import ChannelConfig, preset
from rsnoum.rates import RatePoint
from rsnoum.region import (
    RateRegion,
    Scenario,
    SweepConfig,
    TRecord,
    best_mcs_at_t,
    build_region,
    lemma1_check,
    lemma1_table,
    r0_grid,
    region_area,
    time_sharing_boundary,
)
from rsnoum.link import StreamPlan
from rsnoum.rates import noum_split, rates_from_probabilities


def _dominated(point, boundary, tol=1e-9):
    # Brute force: some convex combination of two boundary vertices (or one) weakly dominates.
    verts = [(b.r_uni, b.r_mult) for b in boundary]
    for (x0, y0), (x1, y1) in itertools.product(verts, repeat=2):
        for lam in np.linspace(0, 1, 201):
            x, y = lam * x0 + (1 - lam) * x1, lam * y0 + (1 - lam) * y1
            if x >= point.r_uni - tol and y >= point.r_mult - tol:
                return True
    return False


def _slopes(boundary):
    pts = [(b.r_uni, b.r_mult) for b in boundary]
    # a vertical drop (all points on the multicast axis) counts as slope -inf
    return [(y1 - y0) / (x1 - x0) if x1 > x0 else -np.inf for (x0, y0), (x1, y1) in zip(pts, pts[1:])]


def test_boundary_of_random_cloud_dominates_every_point():
    rng = np.random.default_rng(0)
    for _ in range(20):
        cloud = [RatePoint(float(a), float(b)) for a, b in rng.uniform(0, 5, (12, 2))]
        boundary = time_sharing_boundary(cloud)
        assert all(_dominated(p, boundary) for p in cloud)
        assert boundary[0].r_uni == 0 and boundary[-1].r_mult == 0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10)), min_size=1, max_size=15))
def test_boundary_is_sorted_and_concave(points):
    boundary = time_sharing_boundary([RatePoint(b, a) for a, b in points])
    xs = [p.r_uni for p in boundary]
    ys = [p.r_mult for p in boundary]
    assert xs == sorted(xs) and ys == sorted(ys, reverse=True)
    slopes = _slopes(boundary)
    assert all(s1 <= s0 + 1e-9 for s0, s1 in zip(slopes, slopes[1:]))


def test_boundary_single_point_and_area():
    boundary = time_sharing_boundary([RatePoint(2.0, 3.0)])
    assert [(p.r_mult, p.r_uni) for p in boundary] == [(2.0, 0.0), (2.0, 3.0), (0.0, 3.0)]
    assert region_area(boundary) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        time_sharing_boundary([])


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(t_grid=(0.5, 0.2))
    with pytest.raises(ValueError):
        SweepConfig(mode="slow")
    with pytest.raises(ValueError):
        SweepConfig(runs=0)
    assert SweepConfig().t_grid == tuple(round(0.1 * i, 1) for i in range(11))


def _noiseless():
    return Scenario(ChannelConfig(rho=0.0, snr_db=200.0), base_seed=3)


def test_extremes_full_mode_noiseless():
    cfg = SweepConfig(t_grid=(0.0, 1.0), mcs_indices=(0, 4, 9), runs=1, mode="full")
    plan, rates = best_mcs_at_t(0.0, _noiseless(), cfg)
    assert plan.indices == (9, 0, 0)
    assert (rates.r_1, rates.r_2) == (0.0, 0.0) and rates.r_c == pytest.approx(20 / 3)
    plan, rates = best_mcs_at_t(1.0, _noiseless(), cfg)
    assert plan.indices == (0, 9, 9)
    assert rates.r_c == 0.0
    assert rates.r_1 + rates.r_2 == pytest.approx(40 / 3)


def test_noiseless_interior_uses_sum_of_spectral_efficiencies():
    cfg = SweepConfig(t_grid=(0.5,), mcs_indices=(0, 2, 4, 9), runs=1, mode="full")
    plan, rates = best_mcs_at_t(0.5, _noiseless(), cfg)
    # common SINR is exactly 0 dB: only BPSK 1/2 and QPSK 1/2 are candidates, QPSK fails
    assert plan.indices == (0, 9, 9)
    assert rates.success_probs == (1.0, 1.0, 1.0)
    assert rates.r_c + rates.r_1 + rates.r_2 == pytest.approx(sum(p.spectral_efficiency for p in plan.streams))


def _record(t, r_c, r_1, r_2):
    plan = StreamPlan.from_indices(0, 0, 0, t)
    se = plan.mcs_c.spectral_efficiency
    rates = rates_from_probabilities(plan, (r_c / se, r_1 / se, r_2 / se), 50)
    return TRecord(t, plan, rates, 0)


def _region(records, t_star):
    mulp = [r.mulp for r in records]
    hull = time_sharing_boundary(mulp + [r.unicast_end for r in records])
    landmarks = {"A": RatePoint(records[0].sum_rate, 0.0), "B": RatePoint(0.0, records[-1].sum_rate)}
    return RateRegion(tuple(records), (), t_star, tuple(hull), tuple(time_sharing_boundary(mulp)), landmarks)


def test_rsma_equals_mulp_when_sdma_is_best():
    records = [_record(0.0, 0.4, 0.0, 0.0), _record(0.5, 0.2, 0.3, 0.3), _record(1.0, 0.0, 0.5, 0.5)]
    region = _region(records, 1.0)
    res = lemma1_check(region, 0.0)
    assert res.rsma_uni == res.mulp_uni == 1.0


def test_lemma_on_synthetic_region():
    records = [_record(0.0, 0.5, 0.0, 0.0), _record(0.5, 0.3, 0.4, 0.4), _record(1.0, 0.0, 0.45, 0.45)]
    region = _region(records, 0.5)
    for res in lemma1_table(region):
        assert res.feasible and res.holds
        if res.r_0 < 0.3:
            assert res.strict
    assert r0_grid(region).size == 20 and r0_grid(region)[-1] == 0.5
    assert lemma1_check(region, 0.6).feasible is False
    with pytest.raises(ValueError):
        lemma1_check(region, -1.0)


def test_segments_have_unit_slope_and_conserve_rate():
    records = [_record(0.0, 0.5, 0.0, 0.0), _record(0.3, 0.3, 0.17, 0.4), _record(1.0, 0.0, 0.45, 0.45)]
    for rec in records:
        a, b = rec.mulp, rec.unicast_end
        # exact in real arithmetic; floating point leaves one rounding step
        assert b.r_uni - a.r_uni == pytest.approx(rec.rates.r_c, abs=1e-12)
        if rec.rates.r_c:
            assert (b.r_mult - a.r_mult) / (b.r_uni - a.r_uni) == pytest.approx(-1.0, abs=1e-12)
        for alpha in np.linspace(0, 1, 11):
            p = noum_split(rec.rates, alpha)
            assert p.r_mult + p.r_uni == pytest.approx(rec.sum_rate, abs=1e-12)


def test_full_mode_determinism_and_rows():
    cfg = SweepConfig(t_grid=(0.0, 0.5, 1.0), mcs_indices=(0, 3), runs=2, mode="full")
    scen = Scenario(preset("case2"), base_seed=4)
    a, b = build_region(scen, cfg), build_region(scen, cfg)
    assert a == b
    assert {row.t for row in a.rows} == {0.0, 0.5, 1.0}
    assert a.hull[0].r_uni == 0.0 and a.hull[-1].r_mult == 0.0
    assert a.area_gap >= -1e-12


def test_fast_mode_needs_thresholds():
    from rsnoum.errors import CalibrationError

    with pytest.raises(CalibrationError):
        build_region(Scenario(preset("case1")), SweepConfig(mode="fast", runs=2))
