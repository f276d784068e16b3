"""Amplifier figures of merit and single-parameter sweeps.

A gain profile is sampled on a symmetric detuning grid.  The bandwidth is
the full width at half of ``G_s(0)`` (not of the largest side peak), found by
scanning outward from ``delta = 0`` and refining each crossing by bisection on
the analytic gain.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.signal import find_peaks

from .circuit_model import LADDER, PumpSpec, from_ratios
from .errors import BandwidthError, DomainError, JPAError
from .parametric_response import ladder_gain, nonmarkov_gain, threshold
from .self_energy import EXACT, MARKOV, ConstantSelfEnergy, SelfEnergyModel, resonances

RIPPLE_LIMIT = 0.2
PROMINENCE_FLOOR = 1e-6
GRID_POINTS = 2001
MAX_WIDENINGS = 3


@dataclass(frozen=True)
class GainProfile:
    """Signal and idler gain sampled on a strictly increasing detuning grid.

    ``g0`` is the signal gain evaluated exactly at ``delta = 0``.
    ``gain_fn`` re-evaluates the signal gain anywhere inside the grid and is
    used to refine the half-maximum crossings.
    """

    delta: np.ndarray
    gs: np.ndarray
    gi: np.ndarray
    g0: float
    gain_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    label: str = ""


@dataclass(frozen=True)
class Metrics:
    g_max: float
    sigma: float
    ripple_ratio: float
    gbp: float

    @property
    def g_max_db(self) -> float:
        return 10.0 * math.log10(self.g_max)


@dataclass(frozen=True)
class SweepRow:
    """Figures of merit for one value of the swept parameter.

    When the evaluation failed, ``error`` carries the message and the numeric
    fields that could not be computed are NaN.
    """

    value: float
    g_max: float = math.nan
    g_max_db: float = math.nan
    sigma: float = math.nan
    ripple_ratio: float = math.nan
    gbp: float = math.nan
    epsilon_th: float = math.nan
    epsilon_p: float = math.nan
    omega_sigma: float = math.nan
    re_sigma0: float = math.nan
    im_sigma0: float = math.nan
    slope: float = math.nan
    ripple_flag: bool = False
    unstable: bool = False
    error: str = ""

    @property
    def acceptable(self) -> bool:
        return not self.error and not self.ripple_flag and not self.unstable


@dataclass(frozen=True)
class SweepResult:
    """Rows in input order plus the two diagnostic picks.

    ``best`` is the acceptable row with the largest gain-bandwidth product.
    ``resonance_value`` is where ``omega_sigma`` crosses ``omega_s``
    (linearly interpolated between rows) and ``resonance_slope`` the slope
    ``d Re Sigma/d delta`` interpolated to that point.
    """

    param: str
    rows: tuple
    best: Optional[SweepRow]
    resonance_value: Optional[float]
    resonance_slope: Optional[float]


# ---------------------------------------------------------------------------
# profiles


def gain_callable(pump: PumpSpec, model, gamma_i: float = 0.0):
    """Return ``delta -> (G_s, G_i)`` for the given pump and self-energy model."""
    dc = getattr(model, "dc", None)
    if dc is not None and dc.kind == LADDER:

        def point(d):
            return ladder_gain(d, pump, model, gamma_i)

    else:

        def point(d):
            return nonmarkov_gain(d, pump, model, gamma_i)

    def fn(delta):
        delta = np.asarray(delta, dtype=float)
        p = point(delta)
        idler = point(-delta)
        return p.signal_gain, idler.idler_gain

    return fn


def _default_half_width(pump: PumpSpec, model) -> float:
    dc = getattr(model, "dc", None)
    gamma_e = model.gamma_e if isinstance(model, ConstantSelfEnergy) else None
    width = 0.0
    if dc is not None:
        ref = pump.omega_ref(dc)
        gamma_e = float(-np.imag(model.with_reference(ref).sigma_e(np.array([ref]))[0]))
        if getattr(model, "mode", EXACT) != MARKOV and dc.omega_sigma is not None:
            width = resonances(dc).width
    return 2.0 * max(gamma_e, abs(pump.delta_p), width)


def _reference(pump: PumpSpec, model) -> float:
    dc = getattr(model, "dc", None)
    return model.omega_ref if dc is None else pump.omega_ref(dc)


def gain_profile(
    pump: PumpSpec,
    model,
    gamma_i: float = 0.0,
    half_width: Optional[float] = None,
    points: int = GRID_POINTS,
    label: str = "",
) -> GainProfile:
    """Sample ``G_s`` and ``G_i`` on ``points`` detunings in ``[-half_width, half_width]``.

    The grid is capped just inside half the pump frequency so the idler stays
    at positive frequency.
    """
    if points < 3 or points % 2 == 0:
        raise DomainError("points must be an odd integer >= 3 so that delta = 0 is sampled")
    fn = gain_callable(pump, model, gamma_i)
    w = _default_half_width(pump, model) if half_width is None else float(half_width)
    w = min(w, (1.0 - 1e-9) * _reference(pump, model))
    if not w > 0.0:
        raise DomainError("profile half-width must be positive")
    half = np.linspace(0.0, w, points // 2 + 1)[1:]
    delta = np.concatenate([-half[::-1], [0.0], half])
    gs, gi = fn(delta)
    g0 = float(gs[points // 2])

    def signal(d):
        return fn(d)[0]

    return GainProfile(delta=delta, gs=gs, gi=gi, g0=g0, gain_fn=signal, label=label)


def _crossings_bracketed(profile: GainProfile) -> bool:
    half = 0.5 * profile.g0
    mid = len(profile.delta) // 2
    return bool(np.any(profile.gs[mid:] < half) and np.any(profile.gs[: mid + 1] < half))


def adaptive_profile(
    pump: PumpSpec, model, gamma_i: float = 0.0, points: int = GRID_POINTS, label: str = ""
) -> GainProfile:
    """:func:`gain_profile` on the default grid, doubled up to three times until
    both half-maximum crossings are inside."""
    w = _default_half_width(pump, model)
    prof = gain_profile(pump, model, gamma_i, w, points, label)
    for _ in range(MAX_WIDENINGS):
        if _crossings_bracketed(prof):
            break
        w *= 2.0
        prof = gain_profile(pump, model, gamma_i, w, points, label)
    return prof


# ---------------------------------------------------------------------------
# metrics


def _side_crossing(profile: GainProfile, direction: int) -> float:
    half = 0.5 * profile.g0
    mid = len(profile.delta) // 2
    idx = np.arange(mid, len(profile.delta)) if direction > 0 else np.arange(mid, -1, -1)
    below = np.flatnonzero(profile.gs[idx] < half)
    if below.size == 0:
        raise BandwidthError("gain never drops below half of G_s(0) inside the grid; widen it")
    j = below[0]
    inner, outer = profile.delta[idx[j - 1]], profile.delta[idx[j]]
    if profile.gain_fn is None:
        g_in, g_out = profile.gs[idx[j - 1]], profile.gs[idx[j]]
        return float(inner + (half - g_in) * (outer - inner) / (g_out - g_in))

    def h(d):
        return float(profile.gain_fn(np.array([d]))[0]) - half

    return brentq(h, inner, outer, xtol=1e-14 * max(1.0, abs(outer)), rtol=1e-15)


def metrics(profile: GainProfile) -> Metrics:
    """``G_max = G_s(0)``, FWHM bandwidth, ripple ratio and ``sigma sqrt(G_max)``."""
    d = profile.delta
    if np.any(np.diff(d) <= 0.0):
        raise DomainError("profile grid must be strictly increasing")
    g0 = profile.g0
    if not g0 > 0.0:
        raise DomainError("G_s(0) must be positive")
    sigma = _side_crossing(profile, +1) - _side_crossing(profile, -1)
    ripple = max(float(np.max(profile.gs)) - g0, 0.0) / g0
    return Metrics(g_max=g0, sigma=sigma, ripple_ratio=ripple, gbp=sigma * math.sqrt(g0))


def tradeoff_reference(gamma_e: float, gamma_i: float, epsilon_p: complex, g_max: float) -> float:
    """Markov gain-bandwidth product ``|Gamma(Gamma_E - Gamma_I) + |eps|^2| / sqrt(Gamma^2 - 2 Gamma_I^2/G_max)``."""
    gamma = gamma_e + gamma_i
    denom = gamma * gamma - 2.0 * gamma_i * gamma_i / g_max
    if not denom > 0.0:
        raise DomainError("G_max too small for the gain-bandwidth relation (denominator <= 0)")
    return abs(gamma * (gamma_e - gamma_i) + abs(epsilon_p) ** 2) / math.sqrt(denom)


def count_peaks(values: Sequence[float], prominence: float = PROMINENCE_FLOOR) -> int:
    """Number of strict local maxima whose prominence exceeds ``prominence * max``."""
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return 0
    floor = prominence * float(np.max(np.abs(values)))
    peaks, _ = find_peaks(values, prominence=floor)
    return int(peaks.size)


def peak_positions(profile: GainProfile, prominence: float = PROMINENCE_FLOOR) -> np.ndarray:
    floor = prominence * float(np.max(np.abs(profile.gs)))
    peaks, _ = find_peaks(profile.gs, prominence=floor)
    return profile.delta[peaks]


def re_sigma_slope(pump: PumpSpec, model, step: Optional[float] = None) -> float:
    """``d Re Sigma_E / d delta`` at ``delta = 0`` by a central difference."""
    ref = _reference(pump, model)
    h = 1e-5 * ref if step is None else step
    vals = model.sigma_e(np.array([ref - h, ref + h]))
    return float((vals[1].real - vals[0].real) / (2.0 * h))


def matched_markov_sigma(
    g0: float, gamma_e: float, gamma_i: float = 0.0, delta_p: float = 0.0
) -> float:
    """FWHM of the Markov profile whose ``G_s(0)`` equals ``g0``.

    The pump strength is found by root search on ``G_s(0)``.
    """
    model = ConstantSelfEnergy(-1j * gamma_e)
    eps_th = math.hypot(delta_p, gamma_e + gamma_i)

    def g_at(eps):
        p = nonmarkov_gain(np.array([0.0]), PumpSpec(delta_p, eps), model, gamma_i)
        return float(p.signal_gain[0])

    lo, hi = 0.0, eps_th * (1.0 - 1e-12)
    if not g_at(lo) <= g0 <= g_at(hi):
        raise DomainError("requested gain is not reachable below the Markov threshold")
    eps = brentq(lambda e: g_at(e) - g0, lo, hi, xtol=1e-15, rtol=1e-15)
    return metrics(adaptive_profile(PumpSpec(delta_p, eps), model, gamma_i)).sigma


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepBase:
    """Fixed part of a sweep: circuit ratios, pump detuning, loss and mode."""

    variant: str
    ratios: dict
    delta_p: float = 0.0
    gamma_i: float = 0.0
    mode: str = EXACT


SWEEPABLE = ("zs_over_z0", "cc_over_cs", "lc_over_ls", "cg_over_cs", "lg_over_ls")
PARAM_ALIASES = {"zs": "zs_over_z0", "cc": "cc_over_cs", "lc": "lc_over_ls", "cg": "cg_over_cs", "lg": "lg_over_ls"}


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("JPA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"JPA_THREADS must be an integer, got {env!r}") from None
    return 1


def evaluate_row(param: str, value: float, base: SweepBase, r: float) -> SweepRow:
    """Compute one sweep row; computation errors are captured in ``error``."""
    ratios = dict(base.ratios)
    ratios[param] = value
    try:
        dc = from_ratios(base.variant, gamma_i=base.gamma_i, **ratios)
        model = SelfEnergyModel(dc, base.mode)
        if dc.kind == LADDER:
            pump0 = PumpSpec.for_ladder(base.delta_p, 0.0, dc)
        else:
            pump0 = PumpSpec(base.delta_p, 0.0)
        th = threshold(pump0, model, base.gamma_i)
        eps = r * th.epsilon_th
        pump = pump0.with_epsilon(eps)
        ref = pump.omega_ref(dc)
        s0 = complex(model.with_reference(ref).sigma_e(np.array([ref]))[0])
        prof = adaptive_profile(pump, model, base.gamma_i)
        m = metrics(prof)
        return SweepRow(
            value=value,
            g_max=m.g_max,
            g_max_db=m.g_max_db,
            sigma=m.sigma,
            ripple_ratio=m.ripple_ratio,
            gbp=m.gbp,
            epsilon_th=th.epsilon_th,
            epsilon_p=eps,
            omega_sigma=dc.omega_sigma if dc.omega_sigma is not None else math.nan,
            re_sigma0=s0.real,
            im_sigma0=s0.imag,
            slope=re_sigma_slope(pump, model),
            ripple_flag=m.ripple_ratio > RIPPLE_LIMIT,
            unstable=r >= 1.0,
        )
    except JPAError as exc:
        return SweepRow(value=value, error=f"{type(exc).__name__}: {exc}")


def sweep(
    param: str,
    values: Sequence[float],
    base: SweepBase,
    r: float = 0.98,
    threads: Optional[int] = None,
) -> SweepResult:
    """Evaluate one row per value of ``param`` with the pump at ``r`` times threshold.

    Rows are independent and may run on several threads (``threads`` or the
    ``JPA_THREADS`` environment variable); the output order always follows
    ``values``.
    """
    param = PARAM_ALIASES.get(param, param)
    if param not in SWEEPABLE:
        raise DomainError(f"cannot sweep {param!r}; choose one of {SWEEPABLE}")
    if not 0.0 < r:
        raise DomainError("r must be positive")
    values = [float(x) for x in values]
    n = _thread_count(threads)
    if n == 1:
        rows = [evaluate_row(param, x, base, r) for x in values]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(lambda x: evaluate_row(param, x, base, r), values))

    ok = [row for row in rows if row.acceptable]
    best = max(ok, key=lambda row: row.gbp) if ok else None

    res_value = res_slope = None
    for a, b in zip(rows, rows[1:]):
        if a.error or b.error or math.isnan(a.omega_sigma) or math.isnan(b.omega_sigma):
            continue
        fa, fb = a.omega_sigma - 1.0, b.omega_sigma - 1.0
        if fa == 0.0 or fa * fb < 0.0:
            t = 0.0 if fa == 0.0 else fa / (fa - fb)
            res_value = a.value + t * (b.value - a.value)
            res_slope = a.slope + t * (b.slope - a.slope)
            break
    return SweepResult(param, tuple(rows), best, res_value, res_slope)


def with_value(base: SweepBase, **ratios) -> SweepBase:
    merged = dict(base.ratios)
    merged.update(ratios)
    return replace(base, ratios=merged)


# ---------------------------------------------------------------------------
# threshold scans


@dataclass(frozen=True)
class ThresholdScan:
    """Threshold pump strength over a grid of pump detunings.

    ``lobes`` counts the pieces of the threshold curve separated by upward
    cusps (interior local maxima); a single smooth dip gives one lobe.
    Points where no instability was found hold NaN and mechanism ``"none"``.
    """

    delta_p: np.ndarray
    epsilon_th: np.ndarray
    epsilon_th_markov: np.ndarray
    mechanism: tuple
    re_sigma0: np.ndarray
    im_sigma0: np.ndarray
    lobes: int


def count_lobes(values: Sequence[float]) -> int:
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return 0
    inner = (finite[1:-1] > finite[:-2]) & (finite[1:-1] > finite[2:])
    return 1 + int(np.count_nonzero(inner))


def threshold_scan(delta_p: Sequence[float], model, gamma_i: float = 0.0) -> ThresholdScan:
    """Exact and Markov thresholds at every detuning in ``delta_p``.

    For the ladder filter the detunings are ``delta_ps``.  The Markov
    threshold freezes ``Sigma_E`` to ``-i Gamma_E`` at half the pump frequency.
    """
    dc = model.dc
    markov = SelfEnergyModel(dc, MARKOV)
    eth, eth_m, mech, re0, im0 = [], [], [], [], []
    for x in np.asarray(delta_p, dtype=float):
        pump = PumpSpec.for_ladder(x, 0.0, dc) if dc.kind == LADDER else PumpSpec(x, 0.0)
        ref = pump.omega_ref(dc)
        s0 = complex(model.with_reference(ref).sigma_e(np.array([ref]))[0])
        re0.append(s0.real)
        im0.append(s0.imag)
        try:
            t = threshold(pump, model, gamma_i)
            eth.append(t.epsilon_th)
            mech.append(t.mechanism)
        except JPAError:
            eth.append(math.nan)
            mech.append("none")
        try:
            eth_m.append(threshold(pump, markov, gamma_i).epsilon_th)
        except JPAError:
            eth_m.append(math.nan)
    eth = np.array(eth)
    return ThresholdScan(
        delta_p=np.asarray(delta_p, dtype=float),
        epsilon_th=eth,
        epsilon_th_markov=np.array(eth_m),
        mechanism=tuple(mech),
        re_sigma0=np.array(re0),
        im_sigma0=np.array(im0),
        lobes=count_lobes(eth),
    )
