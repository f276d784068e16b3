"""Dressed transmission-line modes and the system-line coupling coefficients.

The line occupies ``x >= 0`` and its modes are ``sqrt(2/pi) cos(k x + phi_k)``.
The phase ``phi_k`` follows from the boundary condition imposed by the
coupling network at ``x = 0``:

* series-LC:  ``tan(phi_k) = -1/(beta k - 1/(alpha k))``
* parallel-LC and ladder:  ``tan(phi_k) = alpha k - 1/(beta k)``

Purely capacitive and purely inductive coupling are the ``beta -> inf`` and
``alpha -> 0`` members of the parallel family.

Sign conventions follow the closed forms: ``f_k < 0`` for series-LC coupling,
``f_k > 0`` for the ladder, and for parallel-LC ``f_k`` changes sign where
its capacitive and inductive parts cancel.  Only ``f_k**2`` enters the
self-energy, so these signs never affect gains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import positive_array
from .circuit_model import (
    CAPACITIVE,
    INDUCTIVE,
    LADDER,
    PARALLEL_LC,
    SERIES_LC,
    DerivedCircuit,
)
from .errors import DomainError

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


@dataclass(frozen=True)
class ModePoint:
    """Phase and boundary amplitudes of the dressed mode with wavenumber ``k``.

    ``w0`` is ``u_k(0) - beta u_k'(0)``, the combination that couples to the
    resonator through a series-LC branch; for the other variants it equals
    ``amp0``.
    """

    k: np.ndarray
    phase: np.ndarray
    amp0: np.ndarray
    w0: np.ndarray


def _phase(k: np.ndarray, dc: DerivedCircuit) -> np.ndarray:
    # Each branch feeds atan2 with a (numerator, denominator) pair scaled by a
    # positive factor, so the k = 1/sqrt(alpha beta) pole needs no special case.
    kind = dc.kind
    if kind == SERIES_LC:
        a, b = dc.alpha, dc.beta
        return np.arctan2(-a * k, a * b * k * k - 1.0)
    if kind in (PARALLEL_LC, LADDER):
        a, b = dc.alpha, dc.beta
        return np.arctan2(a * b * k * k - 1.0, b * k)
    if kind == CAPACITIVE:
        return np.arctan2(dc.alpha * k, np.ones_like(k))
    if kind == INDUCTIVE:
        return np.arctan2(-np.ones_like(k), dc.beta * k)
    raise DomainError(f"unknown variant {kind!r}")


def mode_point(k, dc: DerivedCircuit) -> ModePoint:
    """Phase ``phi_k``, ``u_k(0)`` and ``u_k(0) - beta u_k'(0)`` for wavenumber(s) ``k``."""
    k = positive_array(k, "k")
    phase = _phase(k, dc)
    amp0 = SQRT_2_OVER_PI * np.cos(phase)
    if dc.kind == SERIES_LC:
        # u'(0) = -k sqrt(2/pi) sin(phi), so u(0) - beta u'(0) is
        # sqrt(2/pi) (cos(phi) + beta k sin(phi)); with the atan2 pair above the
        # two large terms cancel exactly, leaving -sqrt(2/pi)/hypot(...).
        a, b = dc.alpha, dc.beta
        w0 = -SQRT_2_OVER_PI / np.hypot(a * k, a * b * k * k - 1.0)
    else:
        w0 = amp0
    return ModePoint(k=k, phase=phase, amp0=amp0, w0=w0)


def mode_function(k, x, dc: DerivedCircuit) -> np.ndarray:
    """Dressed mode profile ``u_k(x)`` at position(s) ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or not np.all(np.isfinite(x)):
        raise DomainError("x must be finite and non-negative")
    mp = mode_point(k, dc)
    return SQRT_2_OVER_PI * np.cos(mp.k * x + mp.phase)


def boundary_residual(k, dc: DerivedCircuit) -> np.ndarray:
    """Left-hand side of the network boundary condition at ``x = 0``.

    It vanishes for every dressed mode; the value is returned unscaled so
    callers can compare it with the size of the individual terms.
    """
    mp = mode_point(k, dc)
    k = mp.k
    u0 = mp.amp0
    du0 = -k * SQRT_2_OVER_PI * np.sin(mp.phase)
    kind = dc.kind
    if kind == SERIES_LC:
        return du0 + dc.alpha * k**2 * u0 - dc.alpha * dc.beta * k**2 * du0
    if kind == CAPACITIVE:
        return dc.alpha * k**2 * u0 + du0
    if kind == INDUCTIVE:
        return du0 - u0 / dc.beta
    return dc.alpha * k**2 * u0 + du0 - u0 / dc.beta


def coupling_coefficient(k, dc: DerivedCircuit) -> np.ndarray:
    """Coupling coefficient ``f_k`` between the resonator and line mode ``k``."""
    mp = mode_point(k, dc)
    k = mp.k
    c0 = dc.line.c0
    l0 = dc.line.l0
    omega_k = dc.v * k
    kind = dc.kind
    if kind == SERIES_LC:
        return np.sqrt(omega_k * c0 / dc.z_s) * dc.alpha / (2.0 * dc.cs) * mp.w0
    if kind == LADDER:
        return np.sqrt(omega_k * c0 / dc.z_a) * dc.alpha / (2.0 * dc.network.cc) * mp.amp0
    f = np.zeros_like(k)
    if kind in (CAPACITIVE, PARALLEL_LC):
        f = f + np.sqrt(omega_k * c0 / dc.z_s) * dc.alpha / (2.0 * dc.cs) * mp.amp0
    if kind in (INDUCTIVE, PARALLEL_LC):
        f = f - np.sqrt(dc.z_s / (omega_k * c0)) / (2.0 * dc.beta * l0) * mp.amp0
    return f


def coupling_squared(k, dc: DerivedCircuit) -> np.ndarray:
    """``f_k**2`` from its rational closed form (no trigonometry).

    This is the kernel of the self-energy; it agrees with
    ``coupling_coefficient(k, dc)**2`` to rounding.
    """
    k = positive_array(k, "k")
    v = dc.v
    kind = dc.kind
    if kind == SERIES_LC:
        t = dc.beta * k - 1.0 / (dc.alpha * k)
        return dc.omega_s / (dc.cs * dc.z0) / (2.0 * np.pi * k) / (1.0 + t * t)
    if kind == LADDER:
        s = dc.alpha * k - 1.0 / (dc.beta * k)
        return v * dc.z0 / (2.0 * np.pi * dc.z_a) * v * k / (1.0 + s * s)
    if kind == CAPACITIVE:
        return 2.0 * dc.gamma_c * v**2 * k / (2.0 * np.pi * dc.omega_s) / (1.0 + (dc.alpha * k) ** 2)
    if kind == INDUCTIVE:
        return 2.0 * dc.gamma_l * dc.omega_s / (2.0 * np.pi * k) / (1.0 + 1.0 / (dc.beta * k) ** 2)
    s = dc.alpha * k - 1.0 / (dc.beta * k)
    y = k * v / dc.omega_s
    amp = np.sqrt(2.0 * dc.gamma_c) * np.sqrt(y) - np.sqrt(2.0 * dc.gamma_l) / np.sqrt(y)
    return v / (2.0 * np.pi) * amp * amp / (1.0 + s * s)
