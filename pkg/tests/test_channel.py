import numpy as np
import pytest

from rficancel.channel import (LinkBudget, SCENARIO_NAMES, apply_gain_db, awgn,
                               bandlimit, composite_uplink_path, fade,
                               make_scenario)
from rficancel.errors import InvalidArgument
from rficancel.lte import UeGeometry
from rficancel.signals import ComplexSeries, gen_circular_gaussian, power


def unit_noise(n, seed, fs=1.0):
    return gen_circular_gaussian(n, 1.0, seed, sample_rate=fs)


def test_gain_zero_is_identity():
    x = unit_noise(64, 0)
    assert np.array_equal(apply_gain_db(x, 0.0).samples, x.samples)


def test_propagation_loss_value():
    x = unit_noise(50_000, 1)
    x = x.with_samples(x.samples / np.sqrt(power(x)))
    out = apply_gain_db(x, -92.46)
    assert power(out) == pytest.approx(10 ** (-9.246), rel=1e-9)


def test_gain_inverts():
    x = unit_noise(256, 2)
    back = apply_gain_db(apply_gain_db(x, -40.0), 40.0)
    assert np.allclose(back.samples, x.samples, atol=1e-12)


def test_gain_composes():
    x = unit_noise(256, 3)
    a = apply_gain_db(x, -7.3 + -2.9)
    b = apply_gain_db(apply_gain_db(x, -7.3), -2.9)
    assert np.allclose(a.samples, b.samples, atol=1e-12)


def test_awgn_zero_power_is_identity():
    x = unit_noise(64, 4)
    assert np.array_equal(awgn(x, 0.0, seed=1).samples, x.samples)


def test_awgn_power():
    x = ComplexSeries(np.zeros(100_000), 1.0)
    out = awgn(x, 1.0, seed=5)
    assert power(out) == pytest.approx(1.0, rel=0.03)


def test_awgn_reproducible():
    x = unit_noise(512, 6)
    a = awgn(x, 0.5, seed=7)
    b = awgn(x, 0.5, seed=7)
    assert np.array_equal(a.samples, b.samples)


def test_all_scenarios_have_valid_profiles():
    for name in SCENARIO_NAMES:
        sc = make_scenario(name, 15.36e6)
        powers = [p for _, p in sc.taps]
        delays = [d for d, _ in sc.taps]
        assert sum(powers) == pytest.approx(1.0, abs=1e-9)
        assert delays[0] == 0
        assert all(b > a for a, b in zip(delays, delays[1:]))


def test_fade_awgn_scenario_is_identity():
    sc = make_scenario("awgn", 1e6)
    x = unit_noise(128, 8, fs=1e6)
    assert fade(x, sc, seed=1) is x


def test_flat_rayleigh_is_scalar_with_unit_mean_power():
    sc = make_scenario("flat_rayleigh", 1e6)
    x = unit_noise(200, 9, fs=1e6)
    ratios = []
    for seed in range(1000):
        y = fade(x, sc, seed=seed)
        h = y.samples[0] / x.samples[0]
        assert np.allclose(y.samples, h * x.samples, atol=1e-12)
        ratios.append(abs(h) ** 2)
    assert np.mean(ratios) == pytest.approx(1.0, rel=0.05)


def test_two_tap_profile_on_impulse():
    sc = make_scenario("urban_micro", 1e6, taps=[(0, 0.5), (5, 0.5)])
    imp = np.zeros(64, dtype=complex)
    imp[0] = 1.0
    y = fade(ComplexSeries(imp, 1e6), sc, seed=3)
    assert np.count_nonzero(y.samples) == 2
    assert y.samples[0] != 0 and y.samples[5] != 0


def test_fade_energy_conserved_in_expectation():
    sc = make_scenario("urban_macro", 15.36e6)
    x = unit_noise(3000, 10, fs=15.36e6)
    px = power(x)
    ratios = [power(fade(x, sc, seed=s)) / px for s in range(1000)]
    assert np.mean(ratios) == pytest.approx(1.0, rel=0.05)


def test_fade_linear_for_fixed_seed():
    sc = make_scenario("suburban_macro", 15.36e6)
    x = unit_noise(2000, 11, fs=15.36e6)
    y = unit_noise(2000, 12, fs=15.36e6)
    lhs = fade(x.with_samples(x.samples + 2.0 * y.samples), sc, seed=42)
    rhs_x = fade(x, sc, seed=42)
    rhs_y = fade(y, sc, seed=42)
    assert np.allclose(lhs.samples, rhs_x.samples + 2.0 * rhs_y.samples, atol=1e-10)


def test_fade_delay_overflow_rejected():
    sc = make_scenario("urban_micro", 1e6, taps=[(0, 0.5), (100, 0.5)])
    with pytest.raises(InvalidArgument):
        fade(unit_noise(50, 13, fs=1e6), sc, seed=1)


def test_uplink_boundary_loss_matches_budget_composition():
    budget = LinkBudget()
    sc = make_scenario("awgn", 1e6, cell_radius_m=1000.0)
    x = unit_noise(5000, 14, fs=1e6)
    path = composite_uplink_path(UeGeometry(1000.0), sc, budget, x, seed=1)
    r_total = budget.distance_km * 1000.0 - 1000.0
    expected = budget.propagation_loss_db + 20 * np.log10(r_total / (budget.distance_km * 1000.0))
    assert path.telescope_loss_db == pytest.approx(expected, abs=1e-9)


def test_uplink_arms_share_fading_draw():
    budget = LinkBudget()
    sc = make_scenario("flat_rayleigh", 1e6, cell_radius_m=1000.0)
    x = unit_noise(500, 15, fs=1e6)
    path = composite_uplink_path(UeGeometry(700.0), sc, budget, x, seed=99)
    ratio = path.to_telescope.samples / path.to_bs.samples
    assert np.allclose(ratio, ratio[0], atol=1e-9)


def test_power_control_cancels_bs_pathloss():
    budget = LinkBudget()
    sc = make_scenario("awgn", 1e6, cell_radius_m=1000.0)
    x = unit_noise(5000, 16, fs=1e6)
    x = x.with_samples(x.samples / np.sqrt(power(x)))
    powers = [power(composite_uplink_path(UeGeometry(d), sc, budget, x, seed=1).to_bs)
              for d in (250.0, 500.0, 750.0, 1000.0)]
    for p in powers[1:]:
        assert p == pytest.approx(powers[0], rel=1e-9)


def test_bandlimit_selectivity():
    n = np.arange(1 << 14)
    tone_in = ComplexSeries(np.exp(2j * np.pi * 0.10 * n), 1.0)
    tone_out = ComplexSeries(np.exp(2j * np.pi * 0.30 * n), 1.0)
    kept = bandlimit(tone_in, 0.1, 0.05)
    rejected = bandlimit(tone_out, 0.1, 0.05)
    assert power(kept) == pytest.approx(1.0, rel=0.01)
    assert power(rejected) < 1e-5
