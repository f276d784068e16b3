"""Command-line entry point ``jpa-selfenergy``.

Every subcommand reads an optional JSON configuration file (see
:mod:`jpa_selfenergy.config`), applies ``--set section.key=value`` overrides
and the dedicated flags, then writes a CSV table (to ``--out``, the
configured path, or stdout) and optionally an SVG plot.

Exit codes: 0 success, 1 computation error, 2 configuration error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .circuit_model import LADDER, PumpSpec
from .config import (
    COMMANDS,
    RunConfig,
    apply_override,
    config_from_dict,
    default_document,
    load_document,
    parse_assignment,
    parse_grid,
)
from .dressed_modes import coupling_coefficient, mode_point
from .errors import ConfigError, JPAError
from .metrics_sweep import (
    PARAM_ALIASES,
    SWEEPABLE,
    SweepBase,
    SweepRow,
    adaptive_profile,
    sweep,
    threshold_scan,
)
from .parametric_response import ladder_gain, nonmarkov_gain, threshold
from .self_energy import MODES, SelfEnergyModel, quadrature_oracle
from .svgplot import Panel, render
from .verification import run_all, run_check

EXIT_OK = 0
EXIT_COMPUTATION = 1
EXIT_CONFIG = 2
EXIT_VERIFY = 3

DEFAULT_SWEEP_R = 0.98
DEFAULT_GRIDS = {
    "selfenergy": (0.05, 3.0, 300),
    "modes": (0.05, 3.0, 300),
    "threshold": (-0.5, 0.5, 101),
}


# ---------------------------------------------------------------------------
# output helpers


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def format_csv(header: Sequence[str], rows) -> str:
    """RFC 4180 text: CRLF line endings, 17 significant digits, '.' decimal point."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _emit_csv(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_svg(panels, xlabel: str, title: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render(panels, xlabel=xlabel, title=title))


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _info(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# shared setup


def _scale(cfg: RunConfig, dc) -> float:
    """Frequency unit of pump, loss and grid values (``omega_s``)."""
    return 1.0 if cfg.form == "ratio" else dc.omega_s


def _grid_values(cfg: RunConfig, command: str) -> np.ndarray:
    grid = cfg.grid
    if grid is None:
        start, stop, n = DEFAULT_GRIDS[command]
        return np.linspace(start, stop, n)
    return np.linspace(grid.start, grid.stop, grid.n)


def _pump(cfg: RunConfig, dc, model, scale: float, require_strength: bool = True):
    """Pump from the config: ``r`` times threshold, or an explicit ``epsilon_p``."""
    delta = cfg.delta_p * scale
    base = PumpSpec.for_ladder(delta, 0.0, dc) if dc.kind == LADDER else PumpSpec(delta, 0.0)
    th = threshold(base, model, cfg.gamma_i * scale)
    if cfg.epsilon_p is not None:
        eps = cfg.epsilon_p * scale * complex(math.cos(cfg.theta_p), math.sin(cfg.theta_p))
    elif cfg.r is not None:
        eps = cfg.r * th.epsilon_th * complex(math.cos(cfg.theta_p), math.sin(cfg.theta_p))
    elif require_strength:
        raise ConfigError("pump strength missing: set pump.r or pump.epsilon_p")
    else:
        eps = 0.0
    return base.with_epsilon(eps), th


# ---------------------------------------------------------------------------
# subcommands


def cmd_selfenergy(cfg: RunConfig, args) -> int:
    dc = cfg.circuit()
    model = SelfEnergyModel(dc, cfg.mode)
    w = _grid_values(cfg, "selfenergy")
    omega = w * dc.omega_s
    if args.oracle:
        sig = np.array([quadrature_oracle(x, dc) for x in omega])
    else:
        sig = model.sigma_e(omega)
    sig = sig / dc.omega_s
    header = ["omega/omega_s", "re_sigma/omega_s", "im_sigma/omega_s"]
    _emit_csv(format_csv(header, zip(w, sig.real, sig.imag)), args.out or cfg.csv)
    label = "oracle" if args.oracle else cfg.mode
    panel = Panel(ylabel="Sigma_E / omega_s")
    panel.add(w, sig.real, f"Re ({label})").add(w, sig.imag, f"Im ({label})", dashed=True)
    _emit_svg([panel], "omega / omega_s", f"self-energy, {dc.kind}", args.svg or cfg.svg)
    return EXIT_OK


def cmd_modes(cfg: RunConfig, args) -> int:
    dc = cfg.circuit()
    kn = _grid_values(cfg, "modes")
    k = kn * dc.omega_s / dc.v
    mp = mode_point(k, dc)
    f = coupling_coefficient(k, dc) / math.sqrt(dc.omega_s * dc.v)
    header = ["k*v/omega_s", "phi_k", "u_k(0)", "f_k/sqrt(omega_s*v)"]
    _emit_csv(format_csv(header, zip(kn, mp.phase, mp.amp0, f)), args.out or cfg.csv)
    panel = Panel(ylabel="value").add(kn, mp.phase, "phi_k").add(kn, f, "f_k", dashed=True)
    _emit_svg([panel], "k v / omega_s", f"dressed modes, {dc.kind}", args.svg or cfg.svg)
    return EXIT_OK


def cmd_gain(cfg: RunConfig, args) -> int:
    dc = cfg.circuit()
    scale = _scale(cfg, dc)
    model = SelfEnergyModel(dc, cfg.mode)
    gamma_i = cfg.gamma_i * scale
    pump, th = _pump(cfg, dc, model, scale)
    above = abs(pump.epsilon_p) >= th.epsilon_th
    if above:
        _warn(
            f"|epsilon_p| = {abs(pump.epsilon_p) / scale:.6g} is at or above the threshold "
            f"{th.epsilon_th / scale:.6g}; the linear gain is not physical and rows are flagged unstable"
        )
    if cfg.grid is None:
        delta = adaptive_profile(pump, model, gamma_i).delta
    else:
        delta = _grid_values(cfg, "gain") * scale
    gain = ladder_gain if dc.kind == LADDER else nonmarkov_gain
    plus = gain(delta, pump, model, gamma_i)
    minus = gain(-delta, pump, model, gamma_i)
    unstable = bool(plus.unstable or above)
    dn = delta / scale
    header = ["delta/omega_s", "gs", "gi", "re_u", "im_u", "re_v", "im_v", "abs_d", "unstable"]
    rows = zip(
        dn,
        plus.signal_gain,
        minus.idler_gain,
        plus.u.real,
        plus.u.imag,
        plus.v.real,
        plus.v.imag,
        np.abs(plus.d) / scale**2,
        [unstable] * len(dn),
    )
    _emit_csv(format_csv(header, rows), args.out or cfg.csv)
    panel = Panel(ylabel="gain", logy=True)
    panel.add(dn, plus.signal_gain, "G_s").add(dn, minus.idler_gain, "G_i", dashed=True)
    _emit_svg([panel], "delta / omega_s", f"gain, {dc.kind}, mode {cfg.mode}", args.svg or cfg.svg)
    return EXIT_OK


def cmd_threshold(cfg: RunConfig, args) -> int:
    dc = cfg.circuit()
    scale = _scale(cfg, dc)
    model = SelfEnergyModel(dc, cfg.mode)
    dp = _grid_values(cfg, "threshold")
    scan = threshold_scan(dp * scale, model, cfg.gamma_i * scale)
    name = "delta_ps/omega_s" if dc.kind == LADDER else "delta_p/omega_s"
    header = [name, "epsilon_th/omega_s", "epsilon_th_markov/omega_s", "mechanism", "re_sigma0/omega_s", "im_sigma0/omega_s"]
    rows = zip(
        dp,
        scan.epsilon_th / scale,
        scan.epsilon_th_markov / scale,
        scan.mechanism,
        scan.re_sigma0 / scale,
        scan.im_sigma0 / scale,
    )
    _emit_csv(format_csv(header, rows), args.out or cfg.csv)
    _info(f"threshold lobes: {scan.lobes}")
    top = Panel(ylabel="|epsilon_th| / omega_s")
    top.add(dp, scan.epsilon_th / scale, "exact").add(dp, scan.epsilon_th_markov / scale, "Markov", dashed=True)
    bottom = Panel(ylabel="Sigma(0) / omega_s")
    bottom.add(dp, scan.re_sigma0 / scale, "Re").add(dp, scan.im_sigma0 / scale, "Im", dashed=True)
    _emit_svg([top, bottom], name, f"instability threshold, {dc.kind}", args.svg or cfg.svg)
    return EXIT_OK


SWEEP_COLUMNS = (
    "value",
    "g_max",
    "g_max_db",
    "sigma",
    "ripple_ratio",
    "gbp",
    "epsilon_th",
    "epsilon_p",
    "omega_sigma",
    "re_sigma0",
    "im_sigma0",
    "slope",
    "ripple_flag",
    "unstable",
    "error",
)


def cmd_sweep(cfg: RunConfig, args) -> int:
    if cfg.form != "ratio":
        raise ConfigError("sweep works on the ratio form of the circuit; give circuit ratios")
    if cfg.sweep_param is None:
        raise ConfigError("sweep needs a parameter and range (sweep section, or --param and --range)")
    param = PARAM_ALIASES.get(cfg.sweep_param, cfg.sweep_param)
    if param not in SWEEPABLE:
        raise ConfigError(f"sweep.param must be one of {SWEEPABLE} or {tuple(PARAM_ALIASES)}")
    if cfg.epsilon_p is not None:
        raise ConfigError("sweep sets the pump relative to threshold; use pump.r, not pump.epsilon_p")
    r = DEFAULT_SWEEP_R if cfg.r is None else cfg.r
    if r >= 1.0:
        _warn(f"r = {r:g} puts every row at or above threshold; rows are flagged unstable")
    ratios = {k: v for k, v in cfg.elements.items() if k != param}
    ratios[param] = float("nan")
    base = SweepBase(cfg.variant, ratios, cfg.delta_p, cfg.gamma_i, cfg.mode)
    values = np.linspace(cfg.sweep_grid.start, cfg.sweep_grid.stop, cfg.sweep_grid.n)
    result = sweep(param, values, base, r=r)
    rows = [[getattr(row, c) for c in SWEEP_COLUMNS] for row in result.rows]
    _emit_csv(format_csv(SWEEP_COLUMNS, rows), args.out or cfg.csv)

    failed = [row for row in result.rows if row.error]
    if failed:
        _warn(f"{len(failed)} of {len(result.rows)} rows failed; see the error column")
    if result.best is not None:
        _info(f"best acceptable {param} = {result.best.value:.6g} (gbp {result.best.gbp:.6g})")
    else:
        _info("no acceptable row (every row is rippled, unstable or failed)")
    if result.resonance_value is not None:
        _info(
            f"omega_Sigma = omega_s at {param} = {result.resonance_value:.6g}, "
            f"dRe Sigma/d delta = {result.resonance_slope:.6g}"
        )
    _emit_svg(_sweep_panels(result.rows), param, f"sweep of {param}, r = {r:g}", args.svg or cfg.svg)
    return EXIT_OK


def _sweep_panels(rows: Sequence[SweepRow]):
    x = [row.value for row in rows]

    def col(name):
        return [getattr(row, name) for row in rows]

    return [
        Panel(ylabel="G_max [dB]").add(x, col("g_max_db"), "G_max"),
        Panel(ylabel="sigma / omega_s").add(x, col("sigma"), "bandwidth"),
        Panel(ylabel="ripple ratio").add(x, col("ripple_ratio"), "(G_peak - G0)/G0"),
        Panel(ylabel="sigma sqrt(G)").add(x, col("gbp"), "gain-bandwidth"),
        Panel(ylabel="Sigma(0) / omega_s")
        .add(x, col("re_sigma0"), "Re")
        .add(x, col("im_sigma0"), "Im", dashed=True),
    ]


def cmd_verify(cfg: Optional[RunConfig], args) -> int:
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else None)
    kwargs = {} if seed is None else {"seed": seed}
    if args.only:
        results = [run_check(n, **kwargs) for n in args.only]
    else:
        results = run_all(**kwargs)
    for res in results:
        print(res.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_VERIFY


HANDLERS = {
    "selfenergy": cmd_selfenergy,
    "modes": cmd_modes,
    "gain": cmd_gain,
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jpa-selfenergy",
        description="Self-energy, gain, threshold and bandwidth of a parametric amplifier behind a coupling network.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p):
        p.add_argument("config", nargs="?", help="JSON configuration file")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one configuration entry (repeatable)")
        p.add_argument("--variant", help="coupling network variant")
        p.add_argument("--mode", choices=MODES, help="self-energy evaluation mode")
        p.add_argument("--grid", metavar="START:STOP:N", help="evaluation grid in units of omega_s (write --grid=-a:b:n when start is negative)")
        p.add_argument("--out", help="CSV output path (default: configured path or stdout)")
        p.add_argument("--svg", help="SVG plot output path")
        return p

    common(sub.add_parser("selfenergy", help="Sigma_E(omega) on a frequency grid")).add_argument(
        "--oracle", action="store_true", help="use the principal-value quadrature oracle"
    )
    common(sub.add_parser("modes", help="dressed-mode phase, amplitude and coupling"))
    p = common(sub.add_parser("gain", help="signal and idler gain profile"))
    p.add_argument("--r", type=float, help="pump strength relative to threshold")
    common(sub.add_parser("threshold", help="instability threshold over the pump detuning"))
    p = common(sub.add_parser("sweep", help="figures of merit over one circuit ratio"))
    p.add_argument("--param", help="ratio to sweep, e.g. lc or lc_over_ls")
    p.add_argument("--range", metavar="START:STOP:N", help="sweep values")
    p.add_argument("--r", type=float, help="pump strength relative to threshold (default 0.98)")
    p = sub.add_parser("verify", help="run the built-in acceptance checks")
    p.add_argument("config", nargs="?", help="optional configuration file (only its seed is used)")
    p.add_argument("--seed", type=int, help="seed for the randomised checks")
    p.add_argument("--only", type=int, action="append", metavar="N", help="run only check N (repeatable)")
    sub.add_parser("run", help="run the command named in the configuration file").add_argument(
        "config", help="JSON configuration file with a 'command' entry"
    )
    return parser


def _build_config(args) -> RunConfig:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
        doc = load_document(text)
    else:
        text, doc = "", default_document()
    for item in getattr(args, "set", []) or []:
        path, value = parse_assignment(item)
        apply_override(doc, path, value)
    if getattr(args, "variant", None):
        apply_override(doc, ["circuit", "variant"], args.variant)
    if getattr(args, "mode", None):
        apply_override(doc, ["mode"], args.mode)
    if getattr(args, "grid", None):
        g = parse_grid(args.grid, "--grid")
        apply_override(doc, ["grid"], {"start": g.start, "stop": g.stop, "n": g.n})
    if getattr(args, "r", None) is not None:
        pump = doc.setdefault("pump", {})
        if isinstance(pump, dict):
            pump.pop("epsilon_p", None)
        apply_override(doc, ["pump", "r"], args.r)
    if getattr(args, "param", None) or getattr(args, "range", None):
        sw = doc.get("sweep", {}) if isinstance(doc.get("sweep"), dict) else {}
        if getattr(args, "param", None):
            sw["param"] = args.param
        if getattr(args, "range", None):
            g = parse_grid(args.range, "--range")
            sw.update(start=g.start, stop=g.stop, n=g.n)
        doc["sweep"] = sw
    return config_from_dict(doc, text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "verify":
            cfg = _build_config(args) if args.config else None
            return cmd_verify(cfg, args)
        cfg = _build_config(args)
        command = args.command
        if command == "run":
            if cfg.command is None:
                raise ConfigError("the configuration has no 'command' entry")
            command = cfg.command
            if command == "verify":
                args.seed, args.only = None, None
                return cmd_verify(cfg, args)
            for name in ("oracle", "out", "svg"):
                setattr(args, name, getattr(args, name, None))
        return HANDLERS[command](cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except JPAError as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


__all__ = ["COMMANDS", "build_parser", "format_csv", "main"]
