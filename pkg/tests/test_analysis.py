import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from transient_bench import analysis as an
from transient_bench.errors import ParameterError


def test_natural_frequencies():
    assert an.natural_frequency(12.45e-3, 13.2e-9) == pytest.approx(12.42e3, abs=10)
    assert an.natural_frequency(12.45e-3, 8.8e-9) == pytest.approx(15.21e3, abs=10)
    assert an.natural_frequency(15.13e-3, 118e-9) == pytest.approx(3.767e3, abs=1)


def test_forty_metre_cable_scales_capacitance():
    assert 13.2e-9 * 40 / 60 == pytest.approx(8.8e-9)


@pytest.mark.parametrize("l, c", [(0.0, 1e-9), (1e-3, -1e-9)])
def test_natural_frequency_rejects_non_positive(l, c):
    with pytest.raises(ParameterError):
        an.natural_frequency(l, c)


def test_travel_metrics_cable():
    m = an.travel_metrics(7100, 150e6)
    assert m.tau == pytest.approx(47.33e-6, abs=0.01e-6)
    assert m.cycle == pytest.approx(189.3e-6, abs=0.1e-6)
    assert m.f == pytest.approx(5.28e3, abs=5)
    assert m.round_trip == pytest.approx(2 * m.tau)


def test_travel_metrics_line():
    m = an.travel_metrics(4000, 285.7e6)
    assert m.tau == pytest.approx(14e-6, rel=1e-3)
    # 28 us is one round trip of this line
    assert m.round_trip == pytest.approx(28e-6, rel=1e-3)
    assert 1 / m.round_trip == pytest.approx(35.7e3, rel=1e-3)


def test_travel_metrics_unit_case():
    assert an.travel_metrics(1, 1) == (1.0, 2.0, 4.0, 0.25)


def test_travel_metrics_rejects_zero():
    with pytest.raises(ParameterError):
        an.travel_metrics(0, 1)


def sine(f, amp=1.0, fs=1e6, duration=10e-3, phase=0.3):
    t = np.arange(int(round(duration * fs))) / fs
    return amp * np.sin(2 * np.pi * f * t + phase)


def test_dominant_pure_sine():
    x = sine(5e3)
    p = an.dominant_frequency(x, 1e-6)
    assert p.frequency == pytest.approx(5e3, abs=p.bin_width / 10)
    assert p.amplitude == pytest.approx(1.0, rel=0.02)


def test_dominant_picks_larger_component():
    x = sine(5e3) + sine(12e3, 0.3, phase=1.1)
    p = an.dominant_frequency(x, 1e-6)
    assert p.frequency == pytest.approx(5e3, abs=p.bin_width / 10)


def test_dominant_ignores_power_frequency():
    x = sine(50.0, 100.0, duration=40e-3) + sine(3.77e3, 1.0, duration=40e-3)
    p = an.dominant_frequency(x, 1e-6, exclude_below=500)
    assert p.frequency == pytest.approx(3.77e3, rel=2e-3)


def test_dominant_window_selection():
    x = np.concatenate([sine(2e3, duration=5e-3), sine(9e3, duration=5e-3)])
    p = an.dominant_frequency(x, 1e-6, t_start=5e-3, t_end=10e-3)
    assert p.frequency == pytest.approx(9e3, rel=1e-2)


def test_dominant_all_zero_is_no_peak():
    assert an.dominant_frequency(np.zeros(1000), 1e-6) is None


def test_dominant_constant_is_no_peak():
    assert an.dominant_frequency(np.full(1000, 7.0), 1e-6) is None


def test_dominant_empty_window():
    with pytest.raises(ValueError, match="empty"):
        an.dominant_frequency(np.ones(100), 1e-6, t_start=1.0, t_end=2.0)


def test_dominant_short_window():
    with pytest.raises(ValueError, match="16"):
        an.dominant_frequency(np.ones(10), 1e-6)


def test_dominant_zero_padding_refines():
    x = sine(5.3e3, duration=1e-3)
    coarse = an.dominant_frequency(x, 1e-6)
    fine = an.dominant_frequency(x, 1e-6, n_fft=1 << 16)
    assert fine.bin_width < coarse.bin_width
    assert abs(fine.frequency - 5.3e3) <= abs(coarse.frequency - 5.3e3) + 1.0


@given(st.floats(1e3, 50e3), st.floats(0.0, 2 * math.pi))
def test_dominant_random_sine_within_half_bin(f, phase):
    fs = 20 * 50e3
    n = max(int(20 * fs / f) + 1, 2048)
    t = np.arange(n) / fs
    p = an.dominant_frequency(np.sin(2 * np.pi * f * t + phase), 1 / fs)
    assert p.frequency >= 0 and p.amplitude >= 0
    assert abs(p.frequency - f) <= 0.5 * p.bin_width


def test_peak_overvoltage_bases():
    assert an.base_peak(150e3) == pytest.approx(122.47e3, abs=10)
    assert an.base_peak(52.5e3) == pytest.approx(42.87e3, abs=10)


def test_peak_overvoltage_constant():
    rep = an.peak_overvoltage(np.full(10, 122.47e3), 150e3)
    assert rep.per_unit == pytest.approx(1.0, abs=1e-4)
    assert rep.per_unit == rep.peak_abs / rep.base_peak


def test_peak_overvoltage_negative_peak_and_time():
    x = np.array([0.0, 1.0, -3.0, 2.0])
    rep = an.peak_overvoltage(x, 1.0, dt=0.5, t0=1.0)
    assert rep.peak_abs == 3.0
    assert rep.time_of_peak == 2.0


def test_peak_overvoltage_errors():
    with pytest.raises(ValueError):
        an.peak_overvoltage(np.array([]), 150e3)
    with pytest.raises(ParameterError):
        an.peak_overvoltage(np.ones(3), 0.0)


def test_lattice_ideal_source():
    tau = 1e-5
    assert an.lattice_oracle(40.0, tau, 0.0, 1.0, 1.5 * tau) == 2.0
    assert an.lattice_oracle(40.0, tau, 0.0, 1.0, 3.5 * tau) == 0.0
    assert an.lattice_oracle(40.0, tau, 0.0, 1.0, 0.5 * tau) == 0.0


def test_lattice_matched_source():
    tau = 1e-5
    t = np.linspace(1.01 * tau, 40 * tau, 500)
    assert np.all(an.lattice_oracle(40.0, tau, 40.0, 1.0, t) == 1.0)


def test_lattice_two_terms_by_hand():
    tau = 1e-5
    assert an.lattice_oracle(30.0, tau, 10.0, 1.0, 1.5 * tau) == pytest.approx(1.5)
    assert an.lattice_oracle(30.0, tau, 10.0, 1.0, 3.5 * tau) == pytest.approx(0.75)


def test_lattice_converges_to_step():
    assert an.lattice_oracle(30.0, 1e-5, 10.0, 1.0, 1.0) == pytest.approx(1.0)


def test_lattice_rejects_negative_source():
    with pytest.raises(ParameterError):
        an.lattice_oracle(30.0, 1e-5, -1.0, 1.0, 0.0)


@given(st.integers(0, 30), st.floats(0.05, 1.95))
def test_lattice_telescopes(k, frac):
    tau = 1e-5
    t = (1 + 2 * k + frac) * tau
    expected = 2.0 if k % 2 == 0 else 0.0
    assert an.lattice_oracle(40.0, tau, 0.0, 1.0, t) == expected


def test_lc_undamped_peak():
    l, c = 12.45e-3, 13.2e-9
    t_peak = math.pi * math.sqrt(l * c)
    assert t_peak == pytest.approx(40.3e-6, abs=0.05e-6)
    assert an.lc_step_oracle(67e3, l, c, 0.0, t_peak) == pytest.approx(134e3, rel=1e-9)
    t = np.linspace(0, 4 * t_peak, 2001)
    assert an.lc_step_oracle(1.0, l, c, 0.0, t).max() == pytest.approx(2.0, abs=1e-6)


def test_lc_limits():
    assert an.lc_step_oracle(1.0, 1e-3, 1e-6, 5.0, 0.0) == 0.0
    assert an.lc_step_oracle(1.0, 1e-3, 1e-6, 5.0, 1.0) == pytest.approx(1.0)


def test_lc_overdamped_rejected():
    with pytest.raises(ParameterError):
        an.lc_step_oracle(1.0, 1e-3, 1e-6, 100.0, 0.0)


@given(st.floats(0.0, 1e-3), st.floats(1e-4, 1e-1), st.floats(1e-9, 1e-6))
def test_lc_half_period_antisymmetry(t, l, c):
    half = math.pi * math.sqrt(l * c)
    total = an.lc_step_oracle(1.0, l, c, 0.0, t) + an.lc_step_oracle(1.0, l, c, 0.0, t + half)
    assert total == pytest.approx(2.0, abs=1e-9)


def test_rl_exp():
    assert 15e-3 / 200 == pytest.approx(75e-6)
    assert an.rl_exp_oracle(1.0, 15e-3, 200.0, 75e-6) == pytest.approx(1 - math.exp(-1))
    assert an.rl_exp_oracle(1.0, 15e-3, 200.0, 75e-6) == pytest.approx(0.6321, abs=1e-4)
    assert an.rl_exp_oracle(1.0, 15e-3, 200.0, 0.0) == 0.0


def test_oracles_are_deterministic():
    t = np.linspace(0, 1e-3, 50)
    for _ in range(2):
        a = an.lattice_oracle(30.0, 1e-5, 10.0, 1.0, t)
        b = an.lattice_oracle(30.0, 1e-5, 10.0, 1.0, t)
        assert np.array_equal(a, b)
