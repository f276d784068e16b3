"""Built-in acceptance checks, shared by ``jpa-selfenergy verify`` and the test suite.

Each check returns a :class:`CheckResult` with a one-line detail string that
reports the measured value next to its tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .circuit_model import (
    Capacitive,
    Inductive,
    ParallelLC,
    PumpSpec,
    Resonator,
    SeriesLC,
    TransmissionLine,
    derive,
    from_ratios,
)
from .metrics_sweep import (
    SweepBase,
    adaptive_profile,
    count_peaks,
    metrics,
    sweep,
    threshold_scan,
    tradeoff_reference,
)
from .parametric_response import (
    dynamical_matrix,
    ladder_d0,
    ladder_gain,
    markov_gain,
    nonmarkov_gain,
    stability_eigs,
    threshold,
    unitarity_residuals,
)
from .self_energy import (
    MARKOV,
    ConstantSelfEnergy,
    SelfEnergyModel,
    quadrature_oracle,
    re_sigma_exact,
)

DEFAULT_SEED = 20240611

# Pump ratios for the two ladder profiles, chosen on the two sides of the
# transition where the two gain peaks merge into one.
LADDER_MEDIUM_R = 0.9
LADDER_LARGE_R = 0.99


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _strong_series_circuit():
    return from_ratios("series_lc", 2.0, cc_over_cs=10.0, lc_over_ls=0.4)


def _ladder_circuit():
    return from_ratios(
        "ladder", 0.7, cc_over_cs=1.12, lc_over_ls=4.0, cg_over_cs=120.0, lg_over_ls=0.002
    )


def check_series_anchor():
    s = complex(SelfEnergyModel(_strong_series_circuit()).sigma_e(np.array([1.0]))[0])
    ok = abs(s.real + 0.36) <= 0.01 and abs(s.imag + 0.34) <= 0.01
    return ok, f"Sigma(0) = {s.real:+.4f} {s.imag:+.4f}i (target -0.36 -0.34i, tol 0.01)"


def check_threshold_ratio():
    dc = _strong_series_circuit()
    pump = PumpSpec(0.0, 0.0)
    exact = threshold(pump, SelfEnergyModel(dc)).epsilon_th
    markov = threshold(pump, SelfEnergyModel(dc, MARKOV)).epsilon_th
    ratio = markov / exact
    return abs(ratio - 0.70) <= 0.03, f"eps_th^M/eps_th = {ratio:.4f} (target 0.70 +- 0.03)"


def check_ladder_anchors():
    dc = _ladder_circuit()
    pump = PumpSpec.for_ladder(-0.36, 0.0, dc)
    ref = pump.omega_ref(dc)
    s0 = complex(SelfEnergyModel(dc, omega_ref=ref).sigma_e(np.array([ref]))[0])
    width = 2.0 * abs(s0.imag)
    ok = abs(pump.delta_pa + 0.31) <= 0.01 and abs(width - 0.47) <= 0.01
    return ok, (
        f"delta_pa = {pump.delta_pa:+.4f} (target -0.31), "
        f"2|Im Sigma_E(0)| = {width:.4f} (target 0.47), tol 0.01"
    )


def _lc_sweep(zs, cc):
    base = SweepBase("series_lc", {"zs_over_z0": zs, "cc_over_cs": cc, "lc_over_ls": 1.0})
    return sweep("lc", np.linspace(0.2, 2.0, 200), base, 0.98)


def check_sweep_optima():
    parts = []
    ok = True
    res = _lc_sweep(1.0, 10.0)
    best = res.best.value if res.best else math.nan
    slope = res.resonance_slope if res.resonance_slope is not None else math.nan
    good = abs(best - 0.84) <= 0.05 and abs(slope - 1.0) <= 0.05
    ok &= good
    parts.append(f"(1,10) optimum {best:.3f} [0.84+-0.05], slope at omega_Sigma=omega_s {slope:.4f} [1+-0.05]")
    for zs, cc, target, tol in ((2.0, 10.0, 0.41, 0.05), (0.75, 4.9, 1.66, 0.08)):
        res = _lc_sweep(zs, cc)
        best = res.best.value if res.best else math.nan
        good = abs(best - target) <= tol
        ok &= good
        parts.append(f"({zs:g},{cc:g}) optimum {best:.3f} [{target}+-{tol}]")
    return ok, "; ".join(parts)


def oracle_cases():
    """Circuits covering every variant and both root regimes of the LC variants."""
    return {
        "capacitive": from_ratios("capacitive", 0.8, cc_over_cs=1.0),
        "inductive": from_ratios("inductive", 0.8, lc_over_ls=2.0),
        "series complex roots": from_ratios("series_lc", 0.8, cc_over_cs=1.0, lc_over_ls=0.1),
        "series real roots": from_ratios("series_lc", 0.8, cc_over_cs=1.0, lc_over_ls=1.5),
        "parallel real roots": from_ratios("parallel_lc", 0.01, cc_over_cs=0.5, lc_over_ls=1.0),
        "parallel complex roots": from_ratios("parallel_lc", 2.0, cc_over_cs=5.0, lc_over_ls=0.05),
        "ladder complex roots": from_ratios(
            "ladder", 1.0, cg_over_cs=0.5, lg_over_ls=2.0, cc_over_cs=5.0, lc_over_ls=30.0
        ),
        "ladder real roots": from_ratios(
            "ladder", 1.0, cg_over_cs=0.5, lg_over_ls=2.0, cc_over_cs=5.0, lc_over_ls=1.0
        ),
    }


def check_oracle_equivalence():
    start = time.perf_counter()
    omega = np.geomspace(0.1, 10.0, 50)
    worst = 0.0
    worst_name = ""
    for name, dc in oracle_cases().items():
        closed = re_sigma_exact(omega, dc)
        oracle = np.array([quadrature_oracle(w, dc).real for w in omega])
        rel = float(np.max(np.abs(closed - oracle) / np.abs(oracle)))
        if rel > worst:
            worst, worst_name = rel, name
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 60.0
    return ok, f"max relative deviation {worst:.2e} ({worst_name}) [1e-6], runtime {elapsed:.1f}s [60s]"


def _random_single_mode(rng):
    variant = rng.choice(["capacitive", "inductive", "series_lc", "parallel_lc"])
    zs = float(rng.uniform(0.3, 3.0))
    kw = {}
    if variant in ("capacitive", "series_lc", "parallel_lc"):
        kw["cc_over_cs"] = float(rng.uniform(0.2, 10.0))
    if variant in ("inductive", "series_lc", "parallel_lc"):
        kw["lc_over_ls"] = float(rng.uniform(0.05, 3.0))
    return from_ratios(str(variant), zs, **kw)


def _random_ladder(rng):
    return from_ratios(
        "ladder",
        float(rng.uniform(0.3, 2.0)),
        cc_over_cs=float(rng.uniform(0.5, 5.0)),
        lc_over_ls=float(rng.uniform(0.2, 5.0)),
        cg_over_cs=float(rng.uniform(0.5, 150.0)),
        lg_over_ls=float(rng.uniform(0.001, 2.0)),
    )


def check_unitarity(seed=DEFAULT_SEED, draws=1000):
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < draws:
        ladder = done % 2 == 1
        dc = _random_ladder(rng) if ladder else _random_single_mode(rng)
        model = SelfEnergyModel(dc)
        delta_p = float(rng.uniform(-0.3, 0.3))
        if ladder:
            pump0 = PumpSpec.for_ladder(delta_p, 0.0, dc)
        else:
            pump0 = PumpSpec(delta_p, 0.0)
        eps = float(rng.uniform(0.0, 0.95)) * threshold(pump0, model).epsilon_th
        pump = pump0.with_epsilon(eps * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        delta = float(rng.uniform(-0.9, 0.9)) * pump.omega_ref(dc)
        gain = ladder_gain if ladder else nonmarkov_gain
        plus = gain(np.array([delta]), pump, model)
        minus = gain(np.array([-delta]), pump, model)
        if plus.im_sigma_e[0] == 0.0:
            continue
        r1, r2 = unitarity_residuals(plus, minus)
        worst = max(worst, float(abs(r1[0])), float(abs(r2[0])))
        done += 1
    return worst <= 1e-10, f"max residual {worst:.2e} over {draws} draws [1e-10]"


def check_markov_reduction():
    gamma_e = 0.37
    worst = 0.0
    delta = np.linspace(-0.9, 0.9, 181)
    for delta_p, eps, gamma_i in ((0.0, 0.2, 0.0), (0.1, 0.3, 0.05), (-0.2, 0.1 + 0.2j, 0.1)):
        pump = PumpSpec(delta_p, eps)
        a = markov_gain(delta, pump, gamma_e, gamma_i)
        b = nonmarkov_gain(delta, pump, ConstantSelfEnergy(-1j * gamma_e), gamma_i)
        for x, y in ((a.u, b.u), (a.v, b.v), (a.d, b.d)):
            denom = np.maximum(np.abs(x), 1e-300)
            worst = max(worst, float(np.max(np.abs(x - y) / denom)))
    return worst <= 1e-12, f"max relative difference {worst:.2e} [1e-12]"


def limit_pairs():
    """(label, limiting circuit, target circuit) triples for the limit reductions."""
    tl = TransmissionLine(1.0, 1.0)
    res = Resonator(1.0, 1.0)
    cap = derive(Capacitive(0.7), res, tl)
    ind = derive(Inductive(0.7), res, tl)
    return [
        ("parallel L_c -> inf", derive(ParallelLC(0.7, 1e10), res, tl), cap),
        ("parallel C_c -> 0", derive(ParallelLC(1e-10, 0.7), res, tl), ind),
        ("series beta -> 0", derive(SeriesLC(0.7, 1e-10), res, tl), cap),
    ]


def check_limits():
    omega = np.geomspace(0.1, 10.0, 50)
    parts = []
    ok = True
    for label, lim, target in limit_pairs():
        a = SelfEnergyModel(lim).sigma_e(omega)
        b = SelfEnergyModel(target).sigma_e(omega)
        rel = float(max(np.max(np.abs(a.real / b.real - 1)), np.max(np.abs(a.imag / b.imag - 1))))
        ok &= rel <= 1e-6
        parts.append(f"{label} {rel:.1e}")
    return ok, ", ".join(parts) + " [1e-6]"


def check_stability(seed=DEFAULT_SEED, draws=1000):
    rng = np.random.default_rng(seed + 1)
    worst_det = worst_tr = 0.0
    for _ in range(draws):
        dc = _random_ladder(rng)
        model = SelfEnergyModel(dc)
        dps = float(rng.uniform(-0.5, 0.5))
        eps = float(rng.uniform(0.0, 1.0))
        gamma_i = float(rng.uniform(0.0, 0.2))
        pump = PumpSpec.for_ladder(dps, 0.0, dc)
        ref = pump.omega_ref(dc)
        s0 = complex(model.with_reference(ref).sigma_e(np.array([ref]))[0])
        dpa_prime = pump.delta_pa - s0.real
        gamma_e = -s0.imag
        _, det = stability_eigs(dps, eps, model, gamma_i)
        expected = ladder_d0(dps, eps, model, gamma_i) * (dpa_prime**2 + gamma_e**2)
        worst_det = max(worst_det, abs(det - expected) / max(abs(expected), 1e-300))
        m = dynamical_matrix(dps, eps, dc.g, dpa_prime, gamma_e, gamma_i)
        tr = np.trace(m)
        worst_tr = max(worst_tr, abs(tr + 2 * (gamma_i + gamma_e)) / (2 * (gamma_i + gamma_e)))
    scan = threshold_scan(np.linspace(-0.6, 0.4, 201), SelfEnergyModel(_ladder_circuit()))
    ok = worst_det <= 1e-10 and worst_tr <= 1e-10 and scan.lobes >= 2
    return ok, (
        f"det rel {worst_det:.1e}, trace rel {worst_tr:.1e} [1e-10]; "
        f"threshold lobes {scan.lobes} [>=2]"
    )


def _markov_pump_for_gain(target, gamma_e, gamma_i):
    def g0(eps):
        return float(markov_gain(np.array([0.0]), PumpSpec(0.0, eps), gamma_e, gamma_i).signal_gain[0])

    return brentq(lambda e: g0(e) - target, 0.0, (gamma_e + gamma_i) * (1 - 1e-12), xtol=1e-15, rtol=1e-15)


def check_gain_bandwidth():
    gamma_e = 1.0
    parts = []
    ok = True
    for gamma_i in (0.0, 0.2 * gamma_e):
        eps = _markov_pump_for_gain(100.0, gamma_e, gamma_i)
        model = ConstantSelfEnergy(-1j * gamma_e, omega_ref=1e3)
        m = metrics(adaptive_profile(PumpSpec(0.0, eps), model, gamma_i))
        ref = tradeoff_reference(gamma_e, gamma_i, eps, m.g_max)
        rel = m.gbp / ref - 1.0
        ok &= abs(rel) <= 0.01
        parts.append(f"Gamma_I={gamma_i:g}: measured {m.gbp:.4f} vs formula {ref:.4f} ({rel:+.2%})")
    return ok, "; ".join(parts) + " [1%]"


def check_peak_structure():
    dc = from_ratios("series_lc", 1.0, cc_over_cs=10.0, lc_over_ls=0.9)
    pump0 = PumpSpec(0.0, 0.0)
    exact = SelfEnergyModel(dc)
    markov = SelfEnergyModel(dc, MARKOV)
    n_exact = count_peaks(
        adaptive_profile(pump0.with_epsilon(0.9 * threshold(pump0, exact).epsilon_th), exact).gs
    )
    n_markov = count_peaks(
        adaptive_profile(pump0.with_epsilon(0.9 * threshold(pump0, markov).epsilon_th), markov).gs
    )
    lad = _ladder_circuit()
    lmodel = SelfEnergyModel(lad)
    lpump = PumpSpec.for_ladder(-0.36, 0.0, lad)
    eth = threshold(lpump, lmodel).epsilon_th
    n_med = count_peaks(adaptive_profile(lpump.with_epsilon(LADDER_MEDIUM_R * eth), lmodel).gs)
    n_large = count_peaks(adaptive_profile(lpump.with_epsilon(LADDER_LARGE_R * eth), lmodel).gs)
    ok = n_exact == 2 and n_markov == 1 and n_med == 2 and n_large == 1
    return ok, (
        f"series exact {n_exact} [2], Markov {n_markov} [1]; "
        f"ladder r={LADDER_MEDIUM_R} {n_med} [2], r={LADDER_LARGE_R} {n_large} [1]"
    )


CRITERIA: list[tuple[int, str, Callable[[], tuple]]] = [
    (1, "series-LC self-energy anchor", check_series_anchor),
    (2, "Markov/non-Markov threshold ratio", check_threshold_ratio),
    (3, "ladder detuning and width anchors", check_ladder_anchors),
    (4, "series-LC sweep optima", check_sweep_optima),
    (5, "closed form vs quadrature oracle", check_oracle_equivalence),
    (6, "generalised unitarity", check_unitarity),
    (7, "Markov reduction", check_markov_reduction),
    (8, "limit reductions", check_limits),
    (9, "stability identities and lobes", check_stability),
    (10, "gain-bandwidth law", check_gain_bandwidth),
    (11, "gain peak structure", check_peak_structure),
]


# Checks that draw random parameters and therefore take the seed.
SEEDED = {6, 9}


def run_check(number: int, seed: int = DEFAULT_SEED) -> CheckResult:
    for num, name, fn in CRITERIA:
        if num == number:
            start = time.perf_counter()
            try:
                ok, detail = fn(seed=seed) if num in SEEDED else fn()
            except Exception as exc:  # a crash is reported as a failure, not raised
                ok, detail = False, f"error: {type(exc).__name__}: {exc}"
            return CheckResult(num, name, bool(ok), detail, time.perf_counter() - start)
    raise KeyError(number)


def run_all(seed: int = DEFAULT_SEED) -> list[CheckResult]:
    return [run_check(num, seed) for num, _, _ in CRITERIA]
