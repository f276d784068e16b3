import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from jpa_selfenergy.circuit_model import PumpSpec, from_ratios
from jpa_selfenergy.errors import DomainError
from jpa_selfenergy.metrics_sweep import (
    GainProfile,
    SweepBase,
    adaptive_profile,
    count_lobes,
    count_peaks,
    evaluate_row,
    gain_profile,
    matched_markov_sigma,
    metrics,
    peak_positions,
    sweep,
    threshold_scan,
    tradeoff_reference,
)
from jpa_selfenergy.self_energy import MARKOV, ConstantSelfEnergy, SelfEnergyModel

SERIES_BASE = SweepBase("series_lc", {"zs_over_z0": 1.0, "cc_over_cs": 10.0, "lc_over_ls": 1.0})


def markov_gain_closed(delta, eps, gamma):
    """Markov signal gain at zero pump detuning without internal loss."""
    return 1.0 + 4 * eps**2 * gamma**2 / ((delta**2 - gamma**2 + eps**2) ** 2 + 4 * delta**2 * gamma**2)


def markov_pump_for_gain(target, gamma):
    return brentq(lambda e: markov_gain_closed(0.0, e, gamma) - target, 0.0, gamma * (1 - 1e-12), xtol=1e-15)


def series_profile(r=0.9, mode="exact"):
    dc = from_ratios("series_lc", 1.0, cc_over_cs=10.0, lc_over_ls=0.9)
    model = SelfEnergyModel(dc, mode)
    p0 = PumpSpec(0.0, 0.0)
    from jpa_selfenergy.parametric_response import threshold

    return adaptive_profile(p0.with_epsilon(r * threshold(p0, model).epsilon_th), model)


class TestProfiles:
    """Sampling of gain profiles."""

    def test_grid_contains_zero(self):
        prof = gain_profile(PumpSpec(0.0, 0.2), ConstantSelfEnergy(-0.5j), points=11, half_width=0.5)
        assert prof.delta[5] == 0.0
        assert prof.g0 == prof.gs[5]
        assert np.all(np.diff(prof.delta) > 0)

    def test_even_points_rejected(self):
        with pytest.raises(DomainError):
            gain_profile(PumpSpec(0.0, 0.2), ConstantSelfEnergy(-0.5j), points=10)

    def test_grid_capped_below_reference(self):
        prof = gain_profile(PumpSpec(0.0, 0.2), ConstantSelfEnergy(-0.5j, omega_ref=1.0), points=11, half_width=5.0)
        assert np.max(np.abs(prof.delta)) < 1.0

    def test_adaptive_brackets_half_maximum(self):
        prof = series_profile()
        half = 0.5 * prof.g0
        assert prof.gs[0] < half and prof.gs[-1] < half


class TestMetrics:
    """Gain, bandwidth, ripple and gain-bandwidth product."""

    @pytest.mark.parametrize("target", [10.0, 100.0, 1000.0])
    def test_markov_bandwidth_against_closed_form(self, target):
        gamma = 1.0
        eps = markov_pump_for_gain(target, gamma)
        m = metrics(adaptive_profile(PumpSpec(0.0, eps), ConstantSelfEnergy(-1j * gamma, omega_ref=100.0)))
        half = brentq(lambda d: markov_gain_closed(d, eps, gamma) - 0.5 * target, 0.0, 10.0, xtol=1e-15)
        assert m.g_max == pytest.approx(target, rel=1e-9)
        assert m.sigma == pytest.approx(2 * half, rel=1e-9)
        assert m.ripple_ratio == 0.0

    def test_markov_bandwidth_frozen(self):
        """sigma sqrt(G) of the exact Markov profile at G = 100 is 1.9238 Gamma_E."""
        eps = markov_pump_for_gain(100.0, 1.0)
        m = metrics(adaptive_profile(PumpSpec(0.0, eps), ConstantSelfEnergy(-1j, omega_ref=100.0)))
        assert m.gbp == pytest.approx(1.9238, abs=1e-4)

    @settings(max_examples=10, deadline=None)
    @given(g=st.floats(100.0, 1e4), gamma=st.floats(0.05, 0.5))
    def test_tradeoff_reference_large_gain(self, g, gamma):
        """The Markov trade-off law reproduces the measured sigma sqrt(G) within 1% for G >= 100."""
        eps = markov_pump_for_gain(g, gamma)
        m = metrics(adaptive_profile(PumpSpec(0.0, eps), ConstantSelfEnergy(-1j * gamma, omega_ref=100.0)))
        assert m.gbp == pytest.approx(tradeoff_reference(gamma, 0.0, eps, m.g_max), rel=0.01)

    def test_series_profile_frozen(self):
        m = metrics(series_profile())
        assert m.g_max == pytest.approx(90.7445324292775, rel=1e-9)
        assert m.sigma == pytest.approx(0.48597410015940223, rel=1e-7)
        assert m.ripple_ratio == pytest.approx(2.9891055262587747, rel=1e-7)
        assert m.g_max_db == pytest.approx(10 * math.log10(m.g_max))

    def test_series_profile_peaks(self):
        prof = series_profile()
        np.testing.assert_allclose(peak_positions(prof), [-0.153, 0.153], atol=1e-3)
        assert count_peaks(series_profile(mode=MARKOV).gs) == 1

    def test_non_markov_broadening(self):
        m = metrics(series_profile())
        dc = from_ratios("series_lc", 1.0, cc_over_cs=10.0, lc_over_ls=0.9)
        assert m.sigma > 1.5 * matched_markov_sigma(m.g_max, SelfEnergyModel(dc).gamma_e)

    def test_first_crossing_per_side(self):
        """A side lobe beyond a deep valley does not widen the bandwidth."""
        delta = np.linspace(-3, 3, 601)
        gs = 10 * np.exp(-delta**2) + 9 * np.exp(-((np.abs(delta) - 2.5) ** 2) / 0.01)
        m = metrics(GainProfile(delta, gs, gs, float(gs[300])))
        expected = 2 * math.sqrt(math.log(2.0))
        assert m.sigma == pytest.approx(expected, rel=1e-3)

    def test_non_increasing_grid_rejected(self):
        d = np.array([0.0, 0.0, 1.0])
        with pytest.raises(DomainError):
            metrics(GainProfile(d, np.ones(3), np.ones(3), 1.0))


class TestPeakCounting:
    """Strict local maxima above a prominence floor."""

    def test_counts(self):
        x = np.linspace(-1, 1, 201)
        assert count_peaks(np.exp(-x**2)) == 1
        assert count_peaks(np.exp(-((x - 0.5) ** 2) / 0.01) + np.exp(-((x + 0.5) ** 2) / 0.01)) == 2
        assert count_peaks(np.ones(5)) == 0

    def test_lobes(self):
        assert count_lobes([3, 2, 1, 2, 3]) == 1
        assert count_lobes([3, 1, 2, 1, 3]) == 2
        assert count_lobes([np.nan, np.nan]) == 0


class TestSweep:
    """Single-parameter sweeps."""

    def test_optimum_row_broadening(self):
        """At each optimum row the non-Markov bandwidth beats the Markov one at equal gain."""
        for ratios, value in (
            ({"zs_over_z0": 1.0, "cc_over_cs": 10.0}, 0.842211),
            ({"zs_over_z0": 2.0, "cc_over_cs": 10.0}, 0.571),
            ({"zs_over_z0": 0.75, "cc_over_cs": 4.9}, 1.665),
        ):
            row = evaluate_row("lc_over_ls", value, SweepBase("series_lc", {**ratios, "lc_over_ls": 1.0}), 0.98)
            assert row.acceptable
            assert row.sigma > matched_markov_sigma(row.g_max, -row.im_sigma0)

    def test_frozen_optimum_row(self):
        row = evaluate_row("lc_over_ls", 0.842211, SERIES_BASE, 0.98)
        assert row.gbp == pytest.approx(8.630428002440988, rel=1e-7)
        assert row.epsilon_p == pytest.approx(0.98 * row.epsilon_th)

    def test_resonance_crossing(self):
        """omega_Sigma = omega_s where L_c/L_s = (1 + C_c/C_s)/(C_c/C_s) = 1.1."""
        res = sweep("lc", np.linspace(1.0, 1.2, 5), SERIES_BASE)
        assert res.resonance_value == pytest.approx(1.1, rel=1e-12)
        assert res.param == "lc_over_ls"

    def test_deterministic_and_thread_independent(self):
        values = np.linspace(0.5, 1.5, 6)
        a = sweep("lc", values, SERIES_BASE)
        b = sweep("lc", values, SERIES_BASE)
        c = sweep("lc", values, SERIES_BASE, threads=3)
        assert a.rows == b.rows
        assert [r.value for r in c.rows] == list(values)
        for x, y in zip(a.rows, c.rows):
            assert x.gbp == y.gbp

    def test_errors_are_captured(self):
        res = sweep("cg", [1.0], SERIES_BASE)
        assert res.rows[0].error
        assert res.best is None

    def test_unknown_parameter(self):
        with pytest.raises(DomainError):
            sweep("z0", [1.0], SERIES_BASE)

    def test_thread_env(self, monkeypatch):
        monkeypatch.setenv("JPA_THREADS", "many")
        with pytest.raises(DomainError):
            sweep("lc", [1.0], SERIES_BASE)


class TestThresholdScan:
    """Threshold versus pump detuning."""

    def test_ladder_three_lobes(self):
        dc = from_ratios("ladder", 0.7, cc_over_cs=1.12, lc_over_ls=4.0, cg_over_cs=120.0, lg_over_ls=0.002)
        scan = threshold_scan(np.linspace(-0.6, 0.4, 101), SelfEnergyModel(dc))
        assert scan.lobes == 3
        assert set(scan.mechanism) == {"determinant-root", "eigenvalue-crossing"}
        assert np.all(np.isfinite(scan.epsilon_th))

    def test_single_mode_markov_below_exact_near_zero(self):
        dc = from_ratios("series_lc", 2.0, cc_over_cs=10.0, lc_over_ls=0.4)
        scan = threshold_scan([0.0], SelfEnergyModel(dc))
        assert scan.epsilon_th_markov[0] / scan.epsilon_th[0] == pytest.approx(0.6892375, rel=1e-6)
        assert scan.lobes == 1
