import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsnoum.channel import (
    ChannelConfig,
    ChannelPair,
    corrupt_csit,
    correlation,
    generate_channel_pair,
    noise_variance,
    orthogonal_unit,
    preset,
)
from rsnoum.errors import ConfigError, DegenerateGeometryError
from rsnoum.precoder import PowerSplit, compute_precoders, effective_gains

T_GRID = [round(0.1 * i, 1) for i in range(11)]


def test_correlation_example():
    pair = ChannelPair(np.array([1, 0]), np.array([1, 1]) / np.sqrt(2))
    assert correlation(pair) == pytest.approx(1 / np.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("rho", [0.0, 0.3, 0.7, 0.95, 1.0])
def test_generated_correlation_is_exact(rho):
    cfg = ChannelConfig(rho=rho)
    for seed in range(200):
        pair = generate_channel_pair(cfg, seed)
        inner = abs(np.vdot(pair.h1, pair.h2)) / (np.linalg.norm(pair.h1) * np.linalg.norm(pair.h2))
        assert abs(inner - rho) < 1e-12


@pytest.mark.parametrize("delta", [0.0, 8.0])
def test_pathloss_ratio(delta):
    cfg = ChannelConfig(pathloss_delta_db=delta)
    ratios = [np.linalg.norm(p.h2) ** 2 / np.linalg.norm(p.h1) ** 2
              for p in (generate_channel_pair(cfg, s) for s in range(10_000))]
    assert np.mean(ratios) == pytest.approx(10 ** (-delta / 10), rel=0.05)


def test_user1_average_power():
    powers = [np.mean(np.abs(generate_channel_pair(ChannelConfig(), s).h1) ** 2) for s in range(10_000)]
    assert np.mean(powers) == pytest.approx(1.0, rel=0.05)


def test_csit_error_variance():
    cfg = ChannelConfig(csit_error_var=0.01)
    errs = []
    for s in range(10_000):
        pair = corrupt_csit(generate_channel_pair(cfg, s), cfg, s + 1)
        for h, hh in ((pair.h1, pair.h1_hat), (pair.h2, pair.h2_hat)):
            errs.append(np.linalg.norm(hh - h) ** 2 / np.linalg.norm(h) ** 2)
    assert np.mean(errs) == pytest.approx(0.01, rel=0.1)


def test_determinism():
    cfg = ChannelConfig(rho=0.7, csit_error_var=0.05)
    a = corrupt_csit(generate_channel_pair(cfg, 11), cfg, 12)
    b = corrupt_csit(generate_channel_pair(cfg, 11), cfg, 12)
    for name in ("h1", "h2", "h1_hat", "h2_hat"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()


def test_perfect_csit_estimates_equal_truth():
    pair = generate_channel_pair(ChannelConfig(), 3)
    assert np.array_equal(pair.h1_hat, pair.h1)
    assert not pair.h1.flags.writeable


def test_orthogonal_unit_phase_convention():
    w = orthogonal_unit(np.array([0.3 + 0.1j, -1.2j]))
    assert abs(np.linalg.norm(w) - 1) < 1e-15
    assert w[0].imag == 0 and w[0].real > 0
    assert abs(np.vdot(np.array([0.3 + 0.1j, -1.2j]), w)) < 1e-15


def test_config_errors_name_the_key():
    with pytest.raises(ConfigError) as exc:
        ChannelConfig(rho=1.5)
    assert exc.value.key == "rho"
    with pytest.raises(ConfigError) as exc:
        preset("case9")
    assert exc.value.key == "scenario"


def test_preset_table():
    c4 = preset("case4")
    assert (c4.rho, c4.pathloss_delta_db) == (0.95, 8.0)
    assert [preset(f"case{i}").rho for i in (1, 2, 3)] == [0.3, 0.7, 0.95]


def test_noise_variance_convention():
    pair = ChannelPair(np.array([1, 1]), np.array([1, -1]))
    assert noise_variance(pair, ChannelConfig(snr_db=10.0)) == pytest.approx(0.1)


# -- precoders -------------------------------------------------------------------

def test_orthonormal_example_gains():
    pair = ChannelPair(np.array([1, 0]), np.array([0, 1]))
    gains = effective_gains(pair, compute_precoders(pair, PowerSplit(0.5)))
    assert np.allclose(gains, [[0.25, 0.25, 0.0], [0.25, 0.0, 0.25]], atol=1e-15)


def test_power_and_orthogonality_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(200):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        pair = ChannelPair(h[0], h[1])
        for t in T_GRID:
            pre = compute_precoders(pair, PowerSplit(t, 2.0))
            assert pre.total_power == pytest.approx(2.0, rel=1e-9)
            for hj, p in ((pair.h2_hat, pre.p_1), (pair.h1_hat, pre.p_2)):
                assert abs(np.vdot(hj, p)) <= 1e-9 * np.linalg.norm(hj) * max(np.linalg.norm(p), 1e-300)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.floats(0.01, 100.0), st.floats(0.0, 1.0))
def test_scaling_estimates_leaves_precoders_unchanged(entries, scale, t):
    h1 = np.array([entries[0] + 1j * entries[1], 1.0 + 0.5j])
    h2 = np.array([0.7 - 0.2j, entries[2] + 1j * entries[3]])
    pair = ChannelPair(h1, h2)
    scaled = ChannelPair(h1, h2, scale * h1, scale * h2)
    a = compute_precoders(pair, PowerSplit(t))
    b = compute_precoders(scaled, PowerSplit(t))
    assert np.allclose(a.matrix, b.matrix, atol=1e-12)


def test_imperfect_csit_leaks_interference():
    cfg = ChannelConfig(rho=0.5, csit_error_var=0.05)
    pair = corrupt_csit(generate_channel_pair(cfg, 1), cfg, 2)
    gains = effective_gains(pair, compute_precoders(pair, PowerSplit(0.5)))
    assert gains[0, 2] > 0 and gains[1, 1] > 0


def test_extreme_splits():
    pair = generate_channel_pair(ChannelConfig(), 0)
    pre = compute_precoders(pair, PowerSplit(1.0))
    assert not np.any(pre.p_c)
    pre = compute_precoders(pair, PowerSplit(0.0))
    assert not np.any(pre.p_1) and not np.any(pre.p_2)


def test_antiparallel_estimates_rejected():
    pair = ChannelPair(np.array([1, 1j]), np.array([-1, -1j]))
    with pytest.raises(DegenerateGeometryError):
        compute_precoders(pair, PowerSplit(0.5))


@pytest.mark.parametrize("t", [-0.1, 1.1])
def test_power_split_range(t):
    with pytest.raises(ValueError):
        PowerSplit(t)
