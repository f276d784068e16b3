import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jpa_selfenergy.circuit_model import (
    LADDER,
    Capacitive,
    FluxPumpSpec,
    Inductive,
    ParallelLC,
    PumpSpec,
    Resonator,
    SeriesLC,
    SimpleLadder,
    TransmissionLine,
    derive,
    from_ratios,
    ladder_g_quarter_power,
    pump_from_flux,
)
from jpa_selfenergy.errors import DomainError

positive = st.floats(min_value=0.05, max_value=20.0)


def ladder_circuit():
    return from_ratios("ladder", 0.7, cc_over_cs=1.12, lc_over_ls=4.0, cg_over_cs=120.0, lg_over_ls=0.002)


class TestTransmissionLine:
    """Per-unit-length constants of the line."""

    def test_per_length_constants(self):
        tl = TransmissionLine(50.0, 1.2e8)
        assert tl.c0 == pytest.approx(1.0 / (50.0 * 1.2e8))
        assert tl.l0 == pytest.approx(50.0 / 1.2e8)
        assert math.sqrt(tl.l0 / tl.c0) == pytest.approx(50.0)

    @pytest.mark.parametrize("z0, v", [(0.0, 1.0), (1.0, -1.0), (math.nan, 1.0)])
    def test_rejects_bad_values(self, z0, v):
        with pytest.raises(DomainError):
            TransmissionLine(z0, v)


class TestDerive:
    """Coupling lengths and secondary frequencies computed from element values."""

    def test_series_alpha_beta(self):
        tl = TransmissionLine(50.0, 1.0e8)
        res = Resonator(1e-12, 1e-9)
        dc = derive(SeriesLC(0.3e-12, 2e-9), res, tl)
        assert dc.alpha == pytest.approx(0.3e-12 * 1e-12 / (tl.c0 * 1.3e-12), rel=1e-15)
        assert dc.beta == pytest.approx(2e-9 / tl.l0, rel=1e-15)

    def test_ladder_alpha_is_cc_over_c0(self):
        tl = TransmissionLine(50.0, 1.0e8)
        dc = derive(SimpleLadder(1e-12, 1e-10, 0.4e-12, 2e-9), Resonator(1e-12, 1e-9), tl)
        assert dc.alpha == pytest.approx(0.4e-12 / tl.c0, rel=1e-15)

    def test_series_omega_sigma(self):
        res = Resonator(2.0, 0.5)
        net = SeriesLC(0.7, 1.3)
        dc = derive(net, res, TransmissionLine(1.0, 1.0))
        expected = math.sqrt(1.0 + 0.7 / 2.0) / math.sqrt(1.3 * 0.7)
        assert dc.omega_sigma == pytest.approx(expected, rel=1e-14)

    def test_ladder_omega_sigma_equals_omega_c(self):
        dc = ladder_circuit()
        net = dc.network
        assert dc.omega_sigma == pytest.approx(1.0 / math.sqrt(net.lc * net.cc), rel=1e-14)
        assert dc.omega_sigma == pytest.approx(dc.omega_c, rel=1e-14)

    def test_ladder_coupling_two_forms(self):
        dc = ladder_circuit()
        assert dc.g == pytest.approx(ladder_g_quarter_power(dc), rel=1e-12)

    def test_capacitive_has_no_beta(self):
        dc = derive(Capacitive(0.3), Resonator(1.0, 1.0), TransmissionLine())
        assert dc.beta is None
        assert dc.omega_sigma is None
        assert dc.gamma_e_eff == pytest.approx(dc.gamma_c)

    def test_inductive_shifts_resonator(self):
        dc = derive(Inductive(3.0), Resonator(1.0, 1.0), TransmissionLine())
        assert dc.omega_s == pytest.approx(1.0 / math.sqrt(0.75))
        assert dc.alpha is None

    def test_parallel_effective_rate(self):
        dc = derive(ParallelLC(0.3, 5.0), Resonator(1.0, 1.0), TransmissionLine())
        expected = 0.5 * (math.sqrt(2 * dc.gamma_c) - math.sqrt(2 * dc.gamma_l)) ** 2
        assert dc.gamma_e_eff == pytest.approx(expected)

    @settings(max_examples=40, deadline=None)
    @given(cs=positive, ls=positive, cc=positive, lc=positive, s=st.floats(0.1, 10.0))
    def test_scaling_elements(self, cs, ls, cc, lc, s):
        """Multiplying every C and L by s divides frequencies by s and keeps Z_s/Z_0."""
        tl = TransmissionLine(1.0, 1.0)
        a = derive(SeriesLC(cc, lc), Resonator(cs, ls), tl)
        b = derive(SeriesLC(s * cc, s * lc), Resonator(s * cs, s * ls), tl)
        assert b.omega_s == pytest.approx(a.omega_s / s, rel=1e-12)
        assert b.omega_sigma == pytest.approx(a.omega_sigma / s, rel=1e-12)
        assert b.omega_c == pytest.approx(a.omega_c / s, rel=1e-12)
        assert b.z_s / tl.z0 == pytest.approx(a.z_s / tl.z0, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(cs=positive, ls=positive, cg=positive, lg=positive, cc=positive, lc=positive, s=st.floats(0.1, 10.0))
    def test_scaling_ladder(self, cs, ls, cg, lg, cc, lc, s):
        tl = TransmissionLine(1.0, 1.0)
        a = derive(SimpleLadder(cg, lg, cc, lc), Resonator(cs, ls), tl)
        b = derive(SimpleLadder(s * cg, s * lg, s * cc, s * lc), Resonator(s * cs, s * ls), tl)
        assert b.omega_a == pytest.approx(a.omega_a / s, rel=1e-12)
        assert b.g == pytest.approx(a.g / s, rel=1e-12)
        assert b.z_a == pytest.approx(a.z_a, rel=1e-12)


class TestFromRatios:
    """Dimensionless construction with omega_s = Z_0 = v = 1."""

    @pytest.mark.parametrize(
        "variant, kw",
        [
            ("capacitive", {"cc_over_cs": 0.5}),
            ("inductive", {"lc_over_ls": 2.0}),
            ("series_lc", {"cc_over_cs": 10.0, "lc_over_ls": 0.4}),
            ("parallel_lc", {"cc_over_cs": 2.0, "lc_over_ls": 3.0}),
            ("ladder", {"cc_over_cs": 1.12, "lc_over_ls": 4.0, "cg_over_cs": 120.0, "lg_over_ls": 0.002}),
        ],
    )
    def test_normalisation(self, variant, kw):
        dc = from_ratios(variant, 1.7, **kw)
        assert dc.omega_s == pytest.approx(1.0, rel=1e-14)
        assert dc.z_s == pytest.approx(1.7, rel=1e-14)
        assert dc.z0 == 1.0 and dc.v == 1.0

    def test_missing_ratio(self):
        with pytest.raises(DomainError, match="lc_over_ls"):
            from_ratios("series_lc", 1.0, cc_over_cs=1.0)

    def test_extra_ratio(self):
        with pytest.raises(DomainError, match="not a parameter"):
            from_ratios("capacitive", 1.0, cc_over_cs=1.0, lc_over_ls=1.0)

    def test_unknown_variant(self):
        with pytest.raises(DomainError):
            from_ratios("coaxial", 1.0)

    def test_negative_ratio(self):
        with pytest.raises(DomainError):
            from_ratios("capacitive", 1.0, cc_over_cs=-0.1)


class TestPumpSpec:
    """Pump detunings and the ladder's auxiliary detuning."""

    def test_ladder_auxiliary_detuning(self):
        dc = ladder_circuit()
        pump = PumpSpec.for_ladder(-0.36, 0.0, dc)
        assert pump.delta_pa == pytest.approx(-0.36 + 1.0 - dc.omega_a, rel=1e-14)
        assert pump.delta_pa == pytest.approx(-0.308363, abs=1e-6)

    def test_for_ladder_needs_ladder(self):
        with pytest.raises(DomainError):
            PumpSpec.for_ladder(0.0, 0.0, from_ratios("capacitive", 1.0, cc_over_cs=1.0))

    def test_with_epsilon_keeps_detunings(self):
        pump = PumpSpec(0.1, 0.0, -0.2).with_epsilon(0.3j)
        assert (pump.delta_p, pump.delta_pa, pump.epsilon_p) == (0.1, -0.2, 0.3j)
        assert pump.delta_ps == 0.1

    def test_omega_ref(self):
        dc = from_ratios("capacitive", 1.0, cc_over_cs=1.0)
        assert PumpSpec(-0.25).omega_ref(dc) == pytest.approx(0.75)

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            PumpSpec(math.nan)

    def test_ladder_kind(self):
        assert ladder_circuit().kind == LADDER


class TestFluxPump:
    """Conversion of a flux modulation into pump strength and Kerr term."""

    def test_phase_and_scaling(self):
        dc = from_ratios("series_lc", 1.0, cc_over_cs=1.0, lc_over_ls=1.0)
        eps1, kerr1 = pump_from_flux(FluxPumpSpec(1e-6, 1e-8, 0.0), dc)
        eps2, kerr2 = pump_from_flux(FluxPumpSpec(1e-6, 2e-8, math.pi / 2), dc)
        assert abs(eps2) == pytest.approx(2 * abs(eps1))
        assert np.angle(eps2) == pytest.approx(math.pi / 2)
        assert kerr1 == pytest.approx(kerr2)

    def test_modulation_smaller_than_bias(self):
        with pytest.raises(DomainError):
            FluxPumpSpec(1e-6, 2e-6)
