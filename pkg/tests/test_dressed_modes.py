import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jpa_selfenergy.circuit_model import from_ratios
from jpa_selfenergy.dressed_modes import (
    SQRT_2_OVER_PI,
    boundary_residual,
    coupling_coefficient,
    coupling_squared,
    mode_function,
    mode_point,
)
from jpa_selfenergy.errors import DomainError
from jpa_selfenergy.self_energy import im_sigma, SelfEnergyModel, resonances

K_GRID = np.geomspace(1e-3, 1e3, 301)

CIRCUITS = {
    "capacitive": from_ratios("capacitive", 0.8, cc_over_cs=1.0),
    "inductive": from_ratios("inductive", 0.8, lc_over_ls=2.0),
    "series_lc": from_ratios("series_lc", 0.8, cc_over_cs=1.0, lc_over_ls=1.5),
    "parallel_lc": from_ratios("parallel_lc", 1.0, cc_over_cs=2.0, lc_over_ls=3.0),
    "ladder": from_ratios("ladder", 0.7, cc_over_cs=1.12, lc_over_ls=4.0, cg_over_cs=120.0, lg_over_ls=0.002),
}


def _term_scale(k, dc):
    """Size of the largest term of the boundary condition, for a relative residual."""
    mp = mode_point(k, dc)
    u0 = np.abs(mp.amp0)
    du0 = np.abs(k * SQRT_2_OVER_PI * np.sin(mp.phase))
    scale = du0.copy()
    if dc.alpha is not None:
        scale = np.maximum(scale, dc.alpha * k**2 * u0)
    if dc.beta is not None:
        scale = np.maximum(scale, u0 / dc.beta)
        if dc.kind == "series_lc":
            scale = np.maximum(scale, dc.alpha * dc.beta * k**2 * du0)
    return scale


class TestModePoint:
    """Phases and boundary amplitudes of the dressed modes."""

    def test_frozen_series_values(self):
        dc = from_ratios("series_lc", 0.8, cc_over_cs=1.0, lc_over_ls=1.5)
        k = np.array([0.5, 1.0, 2.0])
        mp = mode_point(k, dc)
        np.testing.assert_allclose(mp.phase, [-2.77441882, -1.9513027, -0.55859932], atol=1e-8)
        np.testing.assert_allclose(mp.amp0, [-0.74470205, -0.29632689, 0.67660475], atol=1e-8)
        np.testing.assert_allclose(
            coupling_coefficient(k, dc), [-0.18115036, -0.33130353, -0.13372576], atol=1e-8
        )

    def test_amp0_is_mode_at_origin(self):
        dc = CIRCUITS["parallel_lc"]
        mp = mode_point(K_GRID, dc)
        np.testing.assert_allclose(mode_function(K_GRID, 0.0, dc), mp.amp0, rtol=1e-14, atol=1e-16)

    def test_phase_continuous_through_pole(self):
        """The atan2 form has no jump where alpha*beta*k**2 = 1."""
        dc = CIRCUITS["series_lc"]
        kp = 1.0 / np.sqrt(dc.alpha * dc.beta)
        k = kp * np.array([1 - 1e-9, 1.0, 1 + 1e-9])
        phase = mode_point(k, dc).phase
        assert np.max(np.abs(np.diff(phase))) < 1e-6

    def test_rejects_nonpositive_k(self):
        with pytest.raises(DomainError):
            mode_point(np.array([0.0, 1.0]), CIRCUITS["ladder"])

    def test_negative_position(self):
        with pytest.raises(DomainError):
            mode_function(1.0, -1.0, CIRCUITS["ladder"])


class TestBoundaryCondition:
    """Every dressed mode satisfies the network's boundary condition."""

    @pytest.mark.parametrize("name", sorted(CIRCUITS))
    def test_residual_on_grid(self, name):
        dc = CIRCUITS[name]
        res = np.abs(boundary_residual(K_GRID, dc))
        assert np.all(res <= 1e-10 * _term_scale(K_GRID, dc))

    @settings(max_examples=60, deadline=None)
    @given(
        zs=st.floats(0.2, 5.0),
        cc=st.floats(0.05, 20.0),
        lc=st.floats(0.05, 20.0),
        k=st.floats(1e-2, 1e2),
        variant=st.sampled_from(["series_lc", "parallel_lc"]),
    )
    def test_residual_random(self, zs, cc, lc, k, variant):
        dc = from_ratios(variant, zs, cc_over_cs=cc, lc_over_ls=lc)
        k = np.array([k])
        assert abs(boundary_residual(k, dc)[0]) <= 1e-10 * _term_scale(k, dc)[0]


class TestCoupling:
    """Coupling coefficients and their relation to the self-energy."""

    @pytest.mark.parametrize("name", sorted(CIRCUITS))
    def test_square_matches_rational_form(self, name):
        dc = CIRCUITS[name]
        np.testing.assert_allclose(coupling_coefficient(K_GRID, dc) ** 2, coupling_squared(K_GRID, dc), rtol=1e-12)

    @pytest.mark.parametrize("name", sorted(CIRCUITS))
    def test_im_sigma_relation(self, name):
        dc = CIRCUITS[name]
        omega = dc.v * K_GRID
        expected = -np.pi / dc.v * coupling_coefficient(K_GRID, dc) ** 2
        np.testing.assert_allclose(im_sigma(omega, SelfEnergyModel(dc)), expected, rtol=1e-12)

    def test_sign_conventions(self):
        """f_k is negative for series-LC; for the ladder it follows u_k(0) with a positive factor."""
        assert np.all(coupling_coefficient(K_GRID, CIRCUITS["series_lc"]) < 0)
        lad = CIRCUITS["ladder"]
        assert np.all(coupling_coefficient(K_GRID, lad) * mode_point(K_GRID, lad).amp0 >= 0)

    def test_parallel_sign_change_at_omega_zero(self):
        dc = from_ratios("parallel_lc", 0.01, cc_over_cs=0.5, lc_over_ls=1.0)
        w0 = resonances(dc).omega_zero
        assert w0 is not None
        k0 = w0 / dc.v
        f = coupling_coefficient(np.array([k0 * (1 - 1e-6), k0 * (1 + 1e-6)]), dc)
        assert f[0] * f[1] < 0
        reference = abs(coupling_coefficient(np.array([1.0]), dc)[0])
        assert abs(coupling_coefficient(np.array([k0]), dc)[0]) < 1e-12 * reference
