"""Parametric gain of the pumped resonator in the rotating frame.

All quantities live in the frame rotating at ``omega_ref = omega_p/2``.  A
signal at ``omega_ref + delta`` mixes with the idler at ``omega_ref - delta``
and the output field is

    B_out(delta) = u(delta) B_in(delta) + v(delta) B_in^+(-delta).

The self-energy enters through two independent evaluations,
``Sigma_E(omega_ref + delta)`` and ``Sigma_E(omega_ref - delta)``; it is never
symmetrised.  Gains are returned in :class:`GainPoint` records whose array
fields share the shape of ``delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_nonnegative, check_positive
from .circuit_model import LADDER, DerivedCircuit, PumpSpec
from .errors import DomainError, SingularGainError, ThresholdNotFoundError, UnsupportedVariantError
from .self_energy import MARKOV, ConstantSelfEnergy, SelfEnergyModel

# Relative size of |D| (compared with its two products) below which the gain
# is treated as singular.
SINGULAR_TOL = 1e-15

DETERMINANT_ROOT = "determinant-root"
EIGENVALUE_CROSSING = "eigenvalue-crossing"


@dataclass(frozen=True)
class GainPoint:
    """Gain coefficients and susceptibility at detuning(s) ``delta``.

    ``chi`` has shape ``delta.shape + (2, 2)`` and maps
    ``(B_in(delta), B_in^+(-delta))`` onto ``(A_s(delta), A_s^+(-delta))``.
    ``im_sigma_e`` is ``Im Sigma_E(delta)``, kept so that the unitarity
    relations can be checked from a pair of points alone.  For the ladder
    filter ``aux`` holds the two coefficients that map the same input pair
    onto the auxiliary amplitude ``A_a(delta)``.
    """

    delta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    d: np.ndarray
    chi: np.ndarray
    im_sigma_e: np.ndarray
    gamma_e: float
    unstable: bool = False
    aux: Optional[np.ndarray] = None

    @property
    def signal_gain(self) -> np.ndarray:
        return np.abs(self.u) ** 2

    @property
    def idler_gain(self) -> np.ndarray:
        return np.abs(self.v) ** 2


@dataclass(frozen=True)
class ThresholdResult:
    """Pump strength at which the trivial state turns unstable.

    ``eigenvalues`` (ladder only) are the four eigenvalues of the dynamical
    matrix at threshold.  ``crossings`` lists every sign change of the largest
    real part found by a full scan, when one was requested.
    """

    epsilon_th: float
    mechanism: str
    eigenvalues: Optional[np.ndarray] = None
    crossings: tuple = ()


# ---------------------------------------------------------------------------
# helpers


def _as_delta(delta) -> np.ndarray:
    d = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(d)):
        raise DomainError("delta must be finite")
    return d


def _pumped_model(model, pump: PumpSpec):
    """Return ``(model referenced to omega_p/2, omega_ref)``."""
    if isinstance(model, ConstantSelfEnergy):
        return model, model.omega_ref
    ref = pump.omega_ref(model.dc)
    if ref <= 0.0:
        raise DomainError("half the pump frequency must be positive")
    if not math.isclose(model.omega_ref, ref, rel_tol=0.0, abs_tol=0.0):
        model = model.with_reference(ref)
    return model, ref


def _sigma_e_pair(delta: np.ndarray, model, omega_ref: float):
    if np.any(np.abs(delta) >= omega_ref):
        raise DomainError(
            f"|delta| must stay below omega_ref = {omega_ref!r}; "
            "the idler frequency omega_ref - delta would not be positive"
        )
    return model.sigma_e(omega_ref + delta), model.sigma_e(omega_ref - delta)


def _check_determinant(d, a, b, eps2, delta):
    scale = np.maximum(np.abs(a) * np.abs(b), eps2)
    scale = np.where(scale > 0.0, scale, 1.0)
    bad = np.abs(d) <= SINGULAR_TOL * scale
    if np.any(bad):
        where = np.asarray(delta)[bad] if np.ndim(delta) else delta
        first = float(np.ravel(where)[0])
        raise SingularGainError(f"parametric determinant vanishes at delta = {first!r}", delta=first)


def _gamma_e_of(model, omega_ref: float) -> float:
    if isinstance(model, ConstantSelfEnergy):
        return model.gamma_e
    if model.mode == MARKOV:
        return model.gamma_e
    return float(-np.imag(model.sigma_e(np.array([omega_ref]))[0]))


def _single_mode(delta, delta_p, eps, sig_plus, sig_minus, gamma_i, gamma_e, unstable):
    """Gain of a single pumped mode given ``Sigma_E`` at the signal and idler."""
    sigma_plus = sig_plus - 1j * gamma_i
    sigma_minus = sig_minus - 1j * gamma_i
    a = delta_p + delta - sigma_plus
    b = delta_p - delta - np.conj(sigma_minus)
    eps2 = abs(eps) ** 2
    d = a * b - eps2
    _check_determinant(d, a, b, eps2, delta)
    im_plus = np.imag(sig_plus)
    u = 1.0 + 2j * im_plus * b / d
    v = 2j * eps * im_plus / d
    pref = 1j * math.sqrt(2.0 * max(gamma_e, 0.0)) / d
    chi = np.empty(np.shape(delta) + (2, 2), dtype=complex)
    chi[..., 0, 0] = pref * b
    chi[..., 0, 1] = pref * eps
    chi[..., 1, 0] = -pref * np.conj(eps)
    chi[..., 1, 1] = -pref * a
    return GainPoint(
        delta=delta, u=u, v=v, d=d, chi=chi, im_sigma_e=im_plus, gamma_e=gamma_e, unstable=unstable
    )


# ---------------------------------------------------------------------------
# single-mode gains


def markov_threshold(delta_p: float, gamma_e: float, gamma_i: float = 0.0) -> float:
    """``|eps_th| = sqrt(delta_p**2 + Gamma**2)`` with ``Gamma = Gamma_E + Gamma_I``."""
    return math.hypot(delta_p, gamma_e + gamma_i)


def markov_gain(delta, pump: PumpSpec, gamma_e: float, gamma_i: float = 0.0) -> GainPoint:
    """Gain for a frequency-independent coupling rate ``gamma_e``."""
    gamma_e = check_positive(gamma_e, "gamma_e")
    gamma_i = check_nonnegative(gamma_i, "gamma_i")
    delta = _as_delta(delta)
    const = np.full(delta.shape, -1j * gamma_e)
    unstable = abs(pump.epsilon_p) > markov_threshold(pump.delta_p, gamma_e, gamma_i)
    return _single_mode(
        delta, pump.delta_p, pump.epsilon_p, const, const, gamma_i, gamma_e, unstable
    )


def nonmarkov_threshold(pump: PumpSpec, model, gamma_i: float = 0.0) -> float:
    """``|eps_th| = |delta_p - Sigma(0)|`` with ``Sigma(0)`` taken at half the pump frequency."""
    model, ref = _pumped_model(model, pump)
    s0 = complex(model.sigma_e(np.array([ref]))[0]) - 1j * gamma_i
    return abs(pump.delta_p - s0)


def nonmarkov_gain(delta, pump: PumpSpec, model, gamma_i: float = 0.0) -> GainPoint:
    """Gain for a frequency-dependent coupling self-energy ``model``.

    ``model`` is a :class:`SelfEnergyModel` (its reference is moved to half the
    pump frequency) or a :class:`ConstantSelfEnergy`.
    """
    gamma_i = check_nonnegative(gamma_i, "gamma_i")
    delta = _as_delta(delta)
    model, ref = _pumped_model(model, pump)
    sig_plus, sig_minus = _sigma_e_pair(delta, model, ref)
    s0 = complex(model.sigma_e(np.array([ref]))[0]) - 1j * gamma_i
    unstable = abs(pump.epsilon_p) > abs(pump.delta_p - s0)
    return _single_mode(
        delta,
        pump.delta_p,
        pump.epsilon_p,
        sig_plus,
        sig_minus,
        gamma_i,
        _gamma_e_of(model, ref),
        unstable,
    )


def signal_gain_expanded(delta, pump: PumpSpec, model, gamma_i: float = 0.0) -> np.ndarray:
    """``|u|**2`` from its expanded real form rather than from ``u`` itself.

    Used as an independent check of :func:`nonmarkov_gain`.
    """
    delta = _as_delta(delta)
    model, ref = _pumped_model(model, pump)
    sig_plus, sig_minus = _sigma_e_pair(delta, model, ref)
    eps2 = abs(pump.epsilon_p) ** 2
    a = pump.delta_p + delta - (sig_plus - 1j * gamma_i)
    b_mod2 = np.abs(pump.delta_p - delta - (sig_minus - 1j * gamma_i)) ** 2
    d2 = np.abs(a * (pump.delta_p - delta - np.conj(sig_minus - 1j * gamma_i)) - eps2) ** 2
    im_p = np.imag(sig_plus)
    im_m = np.imag(sig_minus)
    return 1.0 + 4.0 * eps2 * im_p * im_m / d2 - 4.0 * gamma_i * im_p / d2 * (eps2 - b_mod2)


def unitarity_residuals(plus: GainPoint, minus: GainPoint):
    """Residuals of the two generalised Bogoliubov relations.

    ``plus`` and ``minus`` are evaluated at ``delta`` and ``-delta`` from the
    same model and pump.  Returns ``(r1, r2)`` with ``r1`` real and ``r2``
    complex; both vanish identically without internal loss.
    """
    if not np.allclose(plus.delta, -minus.delta, rtol=0.0, atol=0.0):
        raise DomainError("the two gain points must sit at opposite detunings")
    im_p = np.asarray(plus.im_sigma_e)
    im_m = np.asarray(minus.im_sigma_e)
    if np.any(im_p == 0.0):
        raise DomainError("Im Sigma_E(delta) vanishes; the unitarity ratio is undefined")
    ratio = im_m / im_p
    r1 = np.abs(plus.u) ** 2 - np.abs(plus.v) ** 2 * ratio - 1.0
    r2 = plus.u * minus.v - plus.v * minus.u * ratio
    return r1, r2


def system_response(delta, pump: PumpSpec, model, gamma_i: float = 0.0, b_in=(1.0, 0.0)):
    """Resonator amplitudes and output field for a given input pair.

    ``b_in`` is ``(B_in(delta), B_in^+(-delta))``.  Returns
    ``(A_s(delta), A_s^+(-delta), B_out(delta))``.  For the ladder filter pass
    a ladder model; the auxiliary mode is then eliminated as in
    :func:`ladder_gain`.
    """
    b_plus, b_minus = (np.asarray(x, dtype=complex) for x in b_in)
    dc = getattr(model, "dc", None)
    if dc is not None and dc.kind == LADDER:
        point = ladder_gain(delta, pump, model, gamma_i)
        a_a = point.aux[..., 0] * b_plus + point.aux[..., 1] * b_minus
        gain_factor = 2.0 * point.im_sigma_e / math.sqrt(2.0 * point.gamma_e)
        b_out = b_plus + gain_factor * a_a
    else:
        point = nonmarkov_gain(delta, pump, model, gamma_i)
        if not point.gamma_e > 0.0:
            raise DomainError("the coupling rate at half the pump frequency vanishes")
        gain_factor = 2.0 * point.im_sigma_e / math.sqrt(2.0 * point.gamma_e)
        a_s = point.chi[..., 0, 0] * b_plus + point.chi[..., 0, 1] * b_minus
        b_out = b_plus + gain_factor * a_s
    a_s = point.chi[..., 0, 0] * b_plus + point.chi[..., 0, 1] * b_minus
    a_s_idler = point.chi[..., 1, 0] * b_plus + point.chi[..., 1, 1] * b_minus
    return a_s, a_s_idler, b_out


# ---------------------------------------------------------------------------
# ladder filter


def _require_ladder(model) -> DerivedCircuit:
    dc = getattr(model, "dc", None)
    if dc is None or dc.kind != LADDER:
        raise UnsupportedVariantError("this operation needs a ladder-filter self-energy model")
    return dc


def _ladder_pump(pump: PumpSpec, dc: DerivedCircuit) -> PumpSpec:
    if pump.delta_pa is None:
        return PumpSpec.for_ladder(pump.delta_ps, pump.epsilon_p, dc)
    return pump


def ladder_gain(
    delta, pump: PumpSpec, model, gamma_i: float = 0.0, g: Optional[float] = None
) -> GainPoint:
    """Gain of the resonator behind a ladder filter.

    The auxiliary filter mode (detuning ``delta_pa``) couples to the line
    through ``model`` and to the resonator through ``g``, which defaults to
    the circuit value.  ``g = 0`` decouples the resonator.
    """
    dc = _require_ladder(model)
    gamma_i = check_nonnegative(gamma_i, "gamma_i")
    g = dc.g if g is None else check_nonnegative(g, "g")
    pump = _ladder_pump(pump, dc)
    delta = _as_delta(delta)
    model, ref = _pumped_model(model, pump)
    sig_plus, sig_minus = _sigma_e_pair(delta, model, ref)
    dps, dpa, eps = pump.delta_ps, pump.delta_pa, pump.epsilon_p
    eps2 = abs(eps) ** 2

    da_plus = dpa + delta - sig_plus
    da_minus = dpa - delta - sig_minus
    if np.any(np.abs(da_plus) <= SINGULAR_TOL * (abs(dpa) + np.abs(delta) + np.abs(sig_plus))):
        raise SingularGainError("auxiliary-mode denominator vanishes", delta=float(np.ravel(delta)[0]))

    sigma_plus = g * g / da_plus - 1j * gamma_i
    sigma_minus = g * g / da_minus - 1j * gamma_i
    a = dps + delta - sigma_plus
    b = dps - delta - np.conj(sigma_minus)
    d = a * b - eps2
    _check_determinant(d, a, b, eps2, delta)

    im_plus = np.imag(sig_plus)
    u = 1.0 + 2j * im_plus / da_plus * (1.0 + g * g * b / (d * da_plus))
    v = 2j * eps * g * g * im_plus / (d * da_plus * np.conj(da_minus))

    gamma_e = _gamma_e_of(model, ref)
    root = math.sqrt(2.0 * max(gamma_e, 0.0))
    pref = -1j * g * root / d
    chi = np.empty(delta.shape + (2, 2), dtype=complex)
    chi[..., 0, 0] = pref * b / da_plus
    chi[..., 0, 1] = pref * eps / np.conj(da_minus)
    chi[..., 1, 0] = -pref * np.conj(eps) / da_plus
    chi[..., 1, 1] = pref * a / np.conj(da_minus)

    aux = np.empty(delta.shape + (2,), dtype=complex)
    aux[..., 0] = (-g * chi[..., 0, 0] + 1j * root) / da_plus
    aux[..., 1] = -g * chi[..., 0, 1] / da_plus

    eigs, _det = stability_eigs(dps, abs(eps), model, gamma_i, g=g, delta_pa=dpa)
    unstable = bool(np.max(eigs.real) > 0.0)
    return GainPoint(
        delta=delta,
        u=u,
        v=v,
        d=d,
        chi=chi,
        im_sigma_e=im_plus,
        gamma_e=gamma_e,
        unstable=unstable,
        aux=aux,
    )


def ladder_u_bracket_form(delta, pump: PumpSpec, model, gamma_i: float = 0.0) -> np.ndarray:
    """``u(delta)`` of the ladder filter from the expanded bracket expression.

    Algebraically equal to :func:`ladder_gain`'s ``u``; kept as a cross-check.
    """
    dc = _require_ladder(model)
    pump = _ladder_pump(pump, dc)
    delta = _as_delta(delta)
    model, ref = _pumped_model(model, pump)
    sig_plus, sig_minus = _sigma_e_pair(delta, model, ref)
    g2 = dc.g**2
    dps, eps2 = pump.delta_ps, abs(pump.epsilon_p) ** 2
    da_plus = pump.delta_pa + delta - sig_plus
    da_minus = pump.delta_pa - delta - sig_minus
    b = dps - delta - np.conj(g2 / da_minus - 1j * gamma_i)
    d = (dps + delta - g2 / da_plus + 1j * gamma_i) * b - eps2
    bracket = b * (dps + delta + 1j * gamma_i) - eps2
    return 1.0 + 2j * np.imag(sig_plus) / (d * da_plus) * bracket


def dynamical_matrix(
    delta_ps: float,
    epsilon_p: float,
    g: float,
    delta_pa_prime: float,
    gamma_e: float,
    gamma_i: float = 0.0,
) -> np.ndarray:
    """Real 4x4 matrix of the linearised dynamics in (Re A_s, Im A_s, Re A_a, Im A_a).

    ``epsilon_p`` may be complex; the pump phase only rotates the quadratures.
    """
    eps = complex(epsilon_p)
    er, ei = eps.real, eps.imag
    return np.array(
        [
            [-gamma_i - ei, er - delta_ps, 0.0, -g],
            [er + delta_ps, -gamma_i + ei, g, 0.0],
            [0.0, -g, -gamma_e, -delta_pa_prime],
            [g, 0.0, delta_pa_prime, -gamma_e],
        ]
    )


def _ladder_static(delta_ps, model, delta_pa=None):
    """``(delta_pa', Gamma_E, Sigma_E(0))`` at half the pump frequency for a ladder."""
    dc = _require_ladder(model)
    if delta_pa is None:
        delta_pa = delta_ps + dc.omega_s - dc.omega_a
    ref = dc.omega_s + delta_ps
    if isinstance(model, SelfEnergyModel):
        model = model.with_reference(ref)
    s0 = complex(model.sigma_e(np.array([ref]))[0])
    return delta_pa - s0.real, -s0.imag, s0


def stability_eigs(
    delta_ps: float,
    epsilon_p: float,
    model,
    gamma_i: float = 0.0,
    g: Optional[float] = None,
    delta_pa: Optional[float] = None,
):
    """Eigenvalues and determinant of the ladder dynamical matrix.

    ``Sigma_E`` is frozen at half the pump frequency.  Returns
    ``(eigenvalues, det)``.
    """
    dc = _require_ladder(model)
    g = dc.g if g is None else g
    dpa_prime, gamma_e, _ = _ladder_static(delta_ps, model, delta_pa)
    m = dynamical_matrix(delta_ps, epsilon_p, g, dpa_prime, gamma_e, gamma_i)
    return np.linalg.eigvals(m), float(np.linalg.det(m))


def ladder_d0(
    delta_ps: float,
    epsilon_p: float,
    model,
    gamma_i: float = 0.0,
    g: Optional[float] = None,
    delta_pa: Optional[float] = None,
) -> float:
    """Signed ``D(0)`` of the ladder filter with ``Sigma_E`` frozen at half the pump."""
    dc = _require_ladder(model)
    g = dc.g if g is None else g
    dpa_prime, gamma_e, _ = _ladder_static(delta_ps, model, delta_pa)
    sigma0 = g * g / complex(dpa_prime, gamma_e) - 1j * gamma_i
    return abs(delta_ps - sigma0) ** 2 - abs(epsilon_p) ** 2


def _max_real(delta_ps, eps, g, dpa_prime, gamma_e, gamma_i):
    m = dynamical_matrix(delta_ps, eps, g, dpa_prime, gamma_e, gamma_i)
    return float(np.max(np.linalg.eigvals(m).real))


def threshold(
    pump: PumpSpec,
    model,
    gamma_i: float = 0.0,
    eps_max: Optional[float] = None,
    full_scan: bool = False,
    scan_points: int = 400,
    rtol: float = 1e-8,
) -> ThresholdResult:
    """Instability threshold ``|eps_th|`` for the pump detuning in ``pump``.

    Single-mode couplings use the closed form ``|delta_p - Sigma(0)|`` (or its
    Markov counterpart when ``model`` is in Markov mode).  For the ladder the
    largest real part of the dynamical-matrix eigenvalues is scanned on
    ``(0, eps_max]`` and the first crossing of zero is refined by bisection.
    """
    gamma_i = check_nonnegative(gamma_i, "gamma_i")
    dc = getattr(model, "dc", None)
    if dc is None or dc.kind != LADDER:
        return ThresholdResult(nonmarkov_threshold(pump, model, gamma_i), DETERMINANT_ROOT)

    g = dc.g
    dps = pump.delta_ps
    dpa_prime, gamma_e, _ = _ladder_static(dps, model, pump.delta_pa)
    if eps_max is None:
        eps_max = 5.0 * (gamma_e + gamma_i + abs(dps) + g)

    def f(eps):
        return _max_real(dps, eps, g, dpa_prime, gamma_e, gamma_i)

    grid = np.linspace(0.0, eps_max, scan_points + 1)
    vals = np.array([f(e) for e in grid])
    ups = np.flatnonzero((vals[:-1] <= 0.0) & (vals[1:] > 0.0))
    if ups.size == 0:
        raise ThresholdNotFoundError(
            f"no instability for |eps_p| <= {eps_max!r}", curve=np.column_stack([grid, vals])
        )

    def refine(i):
        # Bisect on the sign change inside grid cell i; returns the unstable side.
        lo, hi = float(grid[i]), float(grid[i + 1])
        rising = vals[i + 1] > 0.0
        while hi - lo > rtol * hi:
            mid = 0.5 * (lo + hi)
            if (f(mid) > 0.0) == rising:
                hi = mid
            else:
                lo = mid
        return hi if rising else lo

    eps_th = refine(int(ups[0]))
    m = dynamical_matrix(dps, eps_th, g, dpa_prime, gamma_e, gamma_i)
    eigs = np.linalg.eigvals(m)
    lead = eigs[np.argmax(eigs.real)]
    # A real eigenvalue crossing zero flips the sign of det; a complex pair
    # crossing together leaves it unchanged.
    scale = max(abs(lead), gamma_e + gamma_i + abs(dps) + g)
    mechanism = DETERMINANT_ROOT if abs(lead.imag) <= 1e-6 * scale else EIGENVALUE_CROSSING
    crossings = ()
    if full_scan:
        downs = np.flatnonzero((vals[:-1] > 0.0) & (vals[1:] <= 0.0))
        crossings = tuple(sorted(refine(int(i)) for i in np.concatenate([ups, downs])))
    return ThresholdResult(eps_th, mechanism, eigs, crossings)
