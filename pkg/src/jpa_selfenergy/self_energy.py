"""Coupling self-energy of the resonator for every coupling network.

``Sigma_E(omega)`` is the retarded line integral of ``f_k**2/(omega - v k + i0)``.
Its imaginary part is ``-(pi/v) f_{omega/v}**2`` and its real part is a
principal-value integral evaluated here in closed form, with
:func:`quadrature_oracle` as an independent numerical check.

All functions accept scalars or arrays of absolute angular frequency and
return values in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import positive_array
from .circuit_model import (
    CAPACITIVE,
    INDUCTIVE,
    LADDER,
    PARALLEL_LC,
    RESONANT_VARIANTS,
    SERIES_LC,
    DerivedCircuit,
)
from .dressed_modes import coupling_squared
from .errors import DomainError, UnsupportedVariantError
from .pv_quadrature import principal_value

EXACT = "exact"
RESONANT = "res"
RESONANT_EXACT = "res0"
MARKOV = "markov"
MODES = (EXACT, RESONANT, RESONANT_EXACT, MARKOV)

# Within this distance of the root-regime boundary the closed forms lose
# digits to cancellation and the quadrature oracle is used instead.
BRANCH_GUARD = 1e-12


@dataclass(frozen=True)
class ResonanceInfo:
    omega_sigma: float
    omega_sigma0: float
    width: float
    omega_zero: Optional[float] = None


@dataclass(frozen=True)
class SelfEnergyModel:
    """Evaluator of ``Sigma_E`` in one of the modes exact, res, res0, markov.

    ``omega_ref`` is the rotating-frame reference (half the pump frequency in
    pumped problems) and defaults to ``omega_s``.  In Markov mode the model
    stores ``gamma_e = -Im Sigma_E(omega_ref)`` of the exact self-energy and
    returns the constant ``-i gamma_e``.
    """

    dc: DerivedCircuit
    mode: str = EXACT
    omega_ref: Optional[float] = None
    gamma_e: float = field(init=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode in (RESONANT, RESONANT_EXACT) and self.dc.kind not in RESONANT_VARIANTS:
            raise UnsupportedVariantError(
                f"resonant approximations are not defined for {self.dc.kind} coupling"
            )
        ref = self.dc.omega_s if self.omega_ref is None else float(self.omega_ref)
        if not ref > 0.0:
            raise DomainError("omega_ref must be positive")
        object.__setattr__(self, "omega_ref", ref)
        object.__setattr__(self, "gamma_e", float(-_im_exact(np.array([ref]), self.dc)[0]))

    def with_reference(self, omega_ref: float) -> "SelfEnergyModel":
        return SelfEnergyModel(self.dc, self.mode, omega_ref)

    def sigma_e(self, omega) -> np.ndarray:
        """Complex ``Sigma_E`` at absolute frequency ``omega`` (without internal loss)."""
        omega = positive_array(omega, "omega")
        if self.mode == MARKOV:
            return np.full(omega.shape, -1j * self.gamma_e)
        if self.mode == EXACT:
            return re_sigma_exact(omega, self.dc) + 1j * _im_exact(omega, self.dc)
        which = "Res" if self.mode == RESONANT else "Res0"
        return resonant_sigma(omega, self.dc, which)


@dataclass(frozen=True)
class ConstantSelfEnergy:
    """A frequency-independent ``Sigma_E``, useful for reductions and tests."""

    value: complex
    omega_ref: float = 1.0

    @property
    def gamma_e(self) -> float:
        return -complex(self.value).imag

    def sigma_e(self, omega) -> np.ndarray:
        omega = positive_array(omega, "omega")
        return np.full(omega.shape, complex(self.value))


# ---------------------------------------------------------------------------
# imaginary part


def _im_exact(omega: np.ndarray, dc: DerivedCircuit) -> np.ndarray:
    v, ws = dc.v, dc.omega_s
    kind = dc.kind
    if kind == SERIES_LC:
        t = dc.beta * omega / v - v / (dc.alpha * omega)
        return -(dc.z_s / (2.0 * dc.z0)) * ws * ws / omega / (1.0 + t * t)
    if kind == LADDER:
        s = dc.alpha * omega / v - v / (dc.beta * omega)
        return -(dc.z0 / (2.0 * dc.z_a)) * omega / (1.0 + s * s)
    if kind == CAPACITIVE:
        a = dc.alpha * omega / v
        return -dc.gamma_c * omega / ws / (1.0 + a * a)
    if kind == INDUCTIVE:
        b = v / (dc.beta * omega)
        return -dc.gamma_l * ws / omega / (1.0 + b * b)
    s = dc.alpha * omega / v - v / (dc.beta * omega)
    amp = math.sqrt(2.0 * dc.gamma_c) * np.sqrt(omega / ws) - math.sqrt(
        2.0 * dc.gamma_l
    ) * np.sqrt(ws / omega)
    return -0.5 * amp * amp / (1.0 + s * s)


def im_sigma(omega, model) -> np.ndarray:
    """Imaginary part of ``Sigma_E``; never positive."""
    return np.imag(model.sigma_e(omega))


# ---------------------------------------------------------------------------
# real part, closed forms


def _log_log_pair(omega, dc, width_param, ratio):
    """Moduli ``|x_1|, |x_3|`` of the imaginary roots of the denominator polynomial.

    ``width_param`` is the length multiplying ``x**2`` in the polynomial
    (beta for series coupling, alpha otherwise); ``ratio`` is the
    discriminant parameter (4 beta/alpha or 4 alpha/beta).
    """
    w = width_param * omega / dc.v
    half = ratio / 2.0
    big = (1.0 - half) + math.sqrt(1.0 - ratio)
    # (1 - h) - sqrt(1 - 2h) == h**2 / ((1 - h) + sqrt(1 - 2h)) without cancellation.
    small = half * half / big
    x1 = math.sqrt(small) / (math.sqrt(2.0) * w)
    x3 = math.sqrt(big) / (math.sqrt(2.0) * w)
    return x1, x3, w


def _polar_roots(omega, dc, ratio):
    """Modulus ``r`` and angle ``phi_1`` of the complex roots (regime ratio > 1)."""
    r = dc.v / (math.sqrt(dc.alpha * dc.beta) * omega)
    two_phi = math.atan2(math.sqrt(ratio - 1.0), ratio / 2.0 - 1.0)
    return r, 0.5 * two_phi


def _re_series(omega, dc):
    ratio = 4.0 * dc.beta / dc.alpha
    g2 = dc.z_s / dc.z0 * dc.omega_s / omega
    if ratio < 1.0:
        x1, x3, bw = _log_log_pair(omega, dc, dc.beta, ratio)
        n1 = (1.0 + x1 * x1) * (1.0 + x3 * x3)
        term1 = -(g2 / (4.0 * bw * bw)) * (-(1.0 - x1 * x3)) / ((x3 + x1) * n1)
        term2 = -(g2 / (2.0 * math.pi * bw * bw)) * (
            (1.0 + x3 * x3) * np.log(x1) - (1.0 + x1 * x1) * np.log(x3)
        ) / ((x3 * x3 - x1 * x1) * n1)
        return term1 + term2
    bw = dc.beta * omega / dc.v
    r, p1 = _polar_roots(omega, dc, ratio)
    c2, s2 = math.cos(2 * p1), math.sin(2 * p1)
    num = (
        (math.pi - 2 * p1) * (1.0 - r * r * c2)
        - math.pi * r * (r * r - 1.0) * math.cos(p1)
        - 2.0 * r * r * np.log(r) * s2
    )
    den = r * r * s2 * (1.0 + r**4 - 2.0 * r * r * c2)
    return g2 / (4.0 * math.pi * bw * bw) * num / den


def _re_parallel_family(omega, dc, gc, gl):
    """Closed form shared by parallel-LC (gc, gl) and, with extra factors, the ladder."""
    ratio = 4.0 * dc.alpha / dc.beta
    if ratio < 1.0:
        x1, x3, aw = _log_log_pair(omega, dc, dc.alpha, ratio)
        n1 = (1.0 + x1 * x1) * (1.0 + x3 * x3)
        p = x1 * x3
        num1 = (
            gc * gc * (x1 * x1 + x3 * x3 + p + p * p)
            - gl * gl * (1.0 - p)
            + 2.0 * gc * gl * (1.0 - p)
        )
        term1 = -(1.0 / (4.0 * aw * aw)) * num1 / ((x3 + x1) * n1)
        c = gc * (gc - 2.0 * gl)
        num2 = (gl * gl - c * x1 * x1) * (1.0 + x3 * x3) * np.log(x1) - (
            gl * gl - c * x3 * x3
        ) * (1.0 + x1 * x1) * np.log(x3)
        term2 = -(1.0 / (2.0 * math.pi * aw * aw)) * num2 / ((x3 * x3 - x1 * x1) * n1)
        return term1 + term2
    aw = dc.alpha * omega / dc.v
    r, p1 = _polar_roots(omega, dc, ratio)
    c1, c2, c3, s2 = math.cos(p1), math.cos(2 * p1), math.cos(3 * p1), math.sin(2 * p1)
    r2 = r * r
    lead = math.pi - 2.0 * p1
    body = (
        (gl * gl - gc * (gc - 2.0 * gl) * r2 * r2) * lead
        - math.pi * r * c1 * (gc * gc * r2 * r2 + gl * (gl - 2.0 * gc) * (r2 - 1.0))
        + (gc * gc - 2.0 * gc * gl - gl * gl) * r2 * c2 * lead
        + math.pi * gc * gc * r2 * r * c3
        - 2.0 * (gc - gl) ** 2 * r2 * np.log(r) * s2
    )
    den = r2 * s2 * (1.0 + r2 * r2 - 2.0 * r2 * c2)
    return body / (4.0 * math.pi * aw * aw * den)


def _re_parallel(omega, dc):
    ws = dc.omega_s
    gc = math.sqrt(2.0 * dc.gamma_c / ws) * np.sqrt(omega / ws)
    gl = math.sqrt(2.0 * dc.gamma_l / ws) * np.sqrt(ws / omega)
    return _re_parallel_family(omega, dc, gc, gl)


def _re_ladder(omega, dc):
    g2 = omega * dc.z0 / (dc.omega_s * dc.z_a)
    ratio = 4.0 * dc.alpha / dc.beta
    if ratio < 1.0:
        x1, x3, aw = _log_log_pair(omega, dc, dc.alpha, ratio)
        n1 = (1.0 + x1 * x1) * (1.0 + x3 * x3)
        term1 = -(g2 / (4.0 * aw * aw)) * (
            x1 * x1 + x3 * x3 + x1 * x3 + x1 * x1 * x3 * x3
        ) / ((x3 + x1) * n1)
        term2 = (g2 / (2.0 * math.pi * aw * aw)) * (
            x1 * x1 * (1.0 + x3 * x3) * np.log(x1) - x3 * x3 * (1.0 + x1 * x1) * np.log(x3)
        ) / ((x3 * x3 - x1 * x1) * n1)
        return term1 + term2
    aw = dc.alpha * omega / dc.v
    r, p1 = _polar_roots(omega, dc, ratio)
    c1, c2, c3, s2 = math.cos(p1), math.cos(2 * p1), math.cos(3 * p1), math.sin(2 * p1)
    r2 = r * r
    num = (
        r2 * (math.pi - 2.0 * p1) * (r2 - c2)
        + math.pi * r2 * r2 * r * c1
        - math.pi * r2 * r * c3
        + 2.0 * r2 * np.log(r) * s2
    )
    den = r2 * s2 * (1.0 + r2 * r2 - 2.0 * r2 * c2)
    return -(g2 / (4.0 * math.pi * aw * aw)) * num / den


def _lorentz_log(a):
    return (1.0 - 2.0 * a / math.pi * np.log(a)) / (1.0 + a * a)


def _re_capacitive(omega, dc):
    cc, cs = dc.network.cc, dc.cs
    return -cc / (4.0 * (cs + cc)) * _lorentz_log(dc.alpha * omega / dc.v)


def _re_inductive(omega, dc):
    lc, ls = dc.network.lc, dc.resonator.ls
    return -ls / (4.0 * (ls + lc)) * _lorentz_log(dc.beta * omega / dc.v)


_RE_FORMS = {
    SERIES_LC: _re_series,
    PARALLEL_LC: _re_parallel,
    LADDER: _re_ladder,
    CAPACITIVE: _re_capacitive,
    INDUCTIVE: _re_inductive,
}


def discriminant_ratio(dc: DerivedCircuit) -> Optional[float]:
    """``4 beta/alpha`` (series-LC) or ``4 alpha/beta`` (parallel-LC, ladder)."""
    if dc.kind == SERIES_LC:
        return 4.0 * dc.beta / dc.alpha
    if dc.kind in (PARALLEL_LC, LADDER):
        return 4.0 * dc.alpha / dc.beta
    return None


def re_sigma_exact(omega, dc: DerivedCircuit) -> np.ndarray:
    """Closed-form real part of the exact self-energy (rad/s)."""
    omega = positive_array(omega, "omega")
    ratio = discriminant_ratio(dc)
    if ratio is not None and abs(ratio - 1.0) <= BRANCH_GUARD:
        flat = [quadrature_oracle(w, dc).real for w in np.ravel(omega)]
        return np.reshape(np.array(flat), omega.shape)
    return dc.omega_s * _RE_FORMS[dc.kind](omega, dc)


def re_sigma(omega, model) -> np.ndarray:
    """Real part of ``Sigma_E`` in the model's mode."""
    return np.real(model.sigma_e(omega))


def sigma(omega, model, gamma_i: Optional[float] = None) -> np.ndarray:
    """Total self-energy ``Sigma_E - i Gamma_I``.

    ``gamma_i`` defaults to the internal loss stored with the resonator.
    """
    if gamma_i is None:
        gamma_i = model.dc.gamma_i if hasattr(model, "dc") else 0.0
    return model.sigma_e(omega) - 1j * gamma_i


# ---------------------------------------------------------------------------
# resonances and Lorentzian approximations


def _parallel_sigma0(dc: DerivedCircuit) -> float:
    ws = dc.omega_s
    rho = dc.v**2 / (dc.alpha * dc.beta * ws * ws)
    b = dc.beta / dc.alpha - 2.0
    # Stationarity condition of |f_k| in y = k v / omega_s, expanded in powers of y.
    coeffs = [-1.0 / rho, 3.0, b, rho * b, 3.0 * rho, -rho * rho]
    roots = np.roots(coeffs)
    cand = [z.real for z in roots if abs(z.imag) <= 1e-9 * max(1.0, abs(z)) and z.real > 0.0]
    cand = [y for y in cand if abs(y - rho) > 1e-9 * rho]
    if not cand:
        raise DomainError("no maximum of the damping rate found")
    omegas = np.sort(np.array(cand) * ws)
    depth = -_im_exact(omegas, dc)
    # Ties (symmetric double maxima) resolve to the lower frequency.
    best = np.flatnonzero(depth >= depth.max() * (1.0 - 1e-9))[0]
    return float(omegas[best])


def resonances(model_or_dc) -> ResonanceInfo:
    """Approximate and exact resonance of ``-Im Sigma_E`` plus the Lorentzian width."""
    dc = getattr(model_or_dc, "dc", model_or_dc)
    kind = dc.kind
    if kind not in RESONANT_VARIANTS:
        raise UnsupportedVariantError(f"{kind} coupling has no coupling resonance")
    a, b, v = dc.alpha, dc.beta, dc.v
    omega_sigma = dc.omega_sigma
    if kind == SERIES_LC:
        q = b / a
        k0 = math.sqrt(2 * q - 1 + math.sqrt(1 - 4 * q + 16 * q * q)) / (math.sqrt(6.0) * b)
        return ResonanceInfo(omega_sigma, v * k0, dc.z0 / (2.0 * dc.network.lc))
    if kind == LADDER:
        q = a / b
        k0 = math.sqrt(1 - 2 * q + math.sqrt(1 - 4 * q + 16 * q * q)) / (math.sqrt(2.0) * a)
        return ResonanceInfo(omega_sigma, v * k0, 1.0 / (2.0 * dc.z0 * dc.network.cc))
    omega_zero = omega_sigma**2 / dc.omega_s
    return ResonanceInfo(omega_sigma, _parallel_sigma0(dc), v / (2.0 * a), omega_zero)


def _a_param(length, k_sigma, k0):
    return (1.0 - 1j * length * (k_sigma**2 - k0**2) / k0) / (1.0 + 2j * length * k0)


def resonant_sigma(omega, dc_or_model, which: str = "Res") -> np.ndarray:
    """Single-pole Lorentzian approximation of ``Sigma_E``.

    ``which="Res"`` expands around ``omega_sigma``; ``which="Res0"`` expands
    around the exact maximum ``omega_sigma0`` with a complex pole shift.
    """
    dc = getattr(dc_or_model, "dc", dc_or_model)
    if dc.kind not in RESONANT_VARIANTS:
        raise UnsupportedVariantError(f"{dc.kind} coupling has no resonant approximation")
    if which not in ("Res", "Res0"):
        raise DomainError("which must be 'Res' or 'Res0'")
    omega = np.asarray(omega, dtype=float)
    info = resonances(dc)
    ws, v = dc.omega_s, dc.v
    wsig = info.omega_sigma
    kind = dc.kind
    if which == "Res":
        denom = omega - wsig + 1j * info.width
        if kind == SERIES_LC:
            return ws * ws / (4.0 * dc.cs * dc.network.lc * ws * wsig) / denom
        if kind == LADDER:
            return wsig / (4.0 * dc.network.cc * dc.z_a) / denom
        amp = math.sqrt(2 * dc.gamma_c) * math.sqrt(wsig / ws) - math.sqrt(
            2 * dc.gamma_l
        ) * math.sqrt(ws / wsig)
        return v / (4.0 * dc.alpha) * amp * amp / denom

    w0 = info.omega_sigma0
    k0 = w0 / v
    ksig = wsig / v
    length = dc.beta if kind == SERIES_LC else dc.alpha
    a = _a_param(length, ksig, k0)
    pole = omega - w0 + w0 * np.conj(a)
    if kind == SERIES_LC:
        pref = dc.z_s * ws * ws / (2.0 * dc.z0)
    elif kind == LADDER:
        pref = dc.z0 * w0 * w0 / (2.0 * dc.z_a)
    else:
        amp = math.sqrt(2 * dc.gamma_c / ws) * (w0 / ws) - math.sqrt(2 * dc.gamma_l / ws)
        pref = 0.5 * amp * amp * ws * ws
    return -1j * pref / ((1.0 - 2j * length * k0) * pole)


# ---------------------------------------------------------------------------
# numerical oracle


def _breakpoints(dc: DerivedCircuit):
    """Wavenumbers where ``f_k**2`` changes character."""
    pts = []
    for w in (dc.omega_sigma, dc.omega_s):
        if w is not None:
            pts.append(w / dc.v)
    if dc.alpha:
        pts.append(1.0 / dc.alpha)
    if dc.beta:
        pts.append(1.0 / dc.beta)
    return pts


def quadrature_oracle(omega: float, dc_or_model, tol: float = 1e-8) -> complex:
    """``Sigma_E(omega)`` by direct principal-value quadrature of ``f_k**2``.

    Only the real part is integrated numerically; the imaginary part is the
    delta-function contribution ``-(pi/v) f_{omega/v}**2``.
    ``tol`` is the absolute error target in units of ``omega_s``.
    """
    dc = getattr(dc_or_model, "dc", dc_or_model)
    omega = float(omega)
    if not omega > 0.0:
        raise DomainError("omega must be positive")
    v = dc.v
    kstar = omega / v

    def fsq(k):
        return float(coupling_squared(np.array([k]), dc)[0])

    pts = _breakpoints(dc)
    val, _err = principal_value(
        fsq, kstar, tol=tol * dc.omega_s * v, points=pts, scale=max(pts)
    )
    return complex(val / v, -math.pi / v * fsq(kstar))
