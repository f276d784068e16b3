"""Cauchy principal-value integrals on finite and semi-infinite ranges.

The singular point is removed by subtracting ``f(pole)/(pole - k)`` on a
window that is symmetric about the pole; the principal value of that term
over a symmetric window is exactly zero, and what remains is a smooth
integrand handled by adaptive Gauss-Kronrod quadrature.  The pole is always an
interval end point, so the removable 0/0 there is never evaluated.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError

_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-12, limit=400)


def _quad(func, a, b, points=None):
    if b <= a:
        return 0.0, 0.0
    inner = None
    if points is not None:
        # Break points within rounding of an end point would create a
        # sub-interval whose nodes collapse onto that end point (the pole).
        margin = 1e-9 * (b - a)
        inner = sorted(p for p in points if a + margin < p < b - margin)
        if not inner:
            inner = None
    val, err = integrate.quad(func, a, b, points=inner, **_QUAD_OPTS)
    return val, err


def pv_finite(
    func: Callable[[float], float],
    pole: float,
    a: float,
    b: float,
    points: Optional[Iterable[float]] = None,
) -> tuple[float, float]:
    """Return ``(PV integral of func(k)/(pole - k) over [a, b], error estimate)``."""
    if not (a < pole < b):
        raise DomainError("the pole must lie strictly inside the integration range")
    h = min(pole - a, b - pole)
    f0 = func(pole)

    def regular(k):
        if k == pole:
            return 0.0
        return (func(k) - f0) / (pole - k)

    def plain(k):
        return func(k) / (pole - k)

    pts = list(points or [])
    total = 0.0
    err = 0.0
    for lo, hi, fn in (
        (pole - h, pole, regular),
        (pole, pole + h, regular),
        (a, pole - h, plain),
        (pole + h, b, plain),
    ):
        v, e = _quad(fn, lo, hi, pts)
        total += v
        err += e
    return total, err


def _tail(func, pole, kmax, exponent=None, terms=8):
    """Integral of func(k)/(pole - k) from kmax to infinity for a power-law tail."""
    f1 = func(kmax)
    if f1 == 0.0:
        return 0.0, 0.0
    if exponent is None:
        f2 = func(2.0 * kmax)
        exponent = -math.log(abs(f2 / f1)) / math.log(2.0)
    p = exponent
    if p <= 0.0:
        raise DomainError("integrand does not decay; the principal value diverges")
    c = f1 * kmax**p
    ratio = pole / kmax
    total = 0.0
    for n in range(terms):
        total -= c * ratio**n / (p + n) * kmax ** (-p)
    # The first omitted term doubles as an error estimate.
    err = abs(c * ratio**terms / (p + terms) * kmax ** (-p))
    return total, err


def pv_semi_infinite(
    func: Callable[[float], float],
    pole: float,
    kmax_factor: float = 1.0e4,
    points: Optional[Iterable[float]] = None,
    tail_exponent: Optional[float] = None,
    scale: Optional[float] = None,
) -> tuple[float, float]:
    """PV of ``func(k)/(pole - k)`` over ``(0, inf)``.

    The range ``(0, kmax]`` with ``kmax = kmax_factor * max(pole, scale)`` is
    integrated numerically (split by decades so the adaptive rule sees every
    scale), the rest analytically from the large-``k`` power law of ``func``.
    ``scale`` should be the largest wavenumber at which ``func`` still has
    structure.
    """
    if pole <= 0.0:
        raise DomainError("pole must be positive")
    kmax = kmax_factor * max(pole, scale or 0.0)
    pts = list(points or [])
    core, err = pv_finite(func, pole, 0.0, 1.5 * pole, pts)

    def plain(k):
        return func(k) / (pole - k)

    edges = [1.5 * pole]
    while edges[-1] * 10.0 < kmax:
        edges.append(edges[-1] * 10.0)
    edges.append(kmax)
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = _quad(plain, lo, hi, pts)
        core += v
        err += e
    tail, terr = _tail(func, pole, kmax, tail_exponent)
    return core + tail, err + terr


def principal_value(
    func: Callable[[float], float],
    pole: float,
    tol: float = 1e-8,
    **kwargs,
) -> tuple[float, float]:
    """Like :func:`pv_semi_infinite` but raise when the error exceeds ``tol``."""
    val, err = pv_semi_infinite(func, pole, **kwargs)
    if not np.isfinite(val) or err > tol:
        raise AccuracyError(
            f"principal value did not converge: estimate {val!r}, error {err:.3g} > {tol:.3g}",
            estimate=val,
            error=err,
        )
    return val, err
