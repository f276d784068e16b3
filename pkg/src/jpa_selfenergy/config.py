"""Run configuration: a flat JSON document with one level of sections.

Example::

    {
      "command": "gain",
      "mode": "exact",
      "circuit": {"variant": "series_lc", "zs_over_z0": 1, "cc_over_cs": 10, "lc_over_ls": 0.9},
      "pump": {"delta_p": 0.0, "r": 0.9, "gamma_i": 0.0},
      "grid": {"start": -0.5, "stop": 0.5, "n": 1001},
      "output": {"csv": "gain.csv", "svg": "gain.svg"},
      "seed": 1
    }

The circuit is given either by dimensionless ratios (``zs_over_z0`` ...) or
by element values (``z0``, ``v``, ``cs``, ``ls``, ``cc`` ...), never both.
Pump detunings, pump strengths, losses and grids are always in units of the
resonator frequency ``omega_s``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass
from typing import Optional

from .circuit_model import (
    VARIANTS,
    Capacitive,
    DerivedCircuit,
    Inductive,
    ParallelLC,
    Resonator,
    SeriesLC,
    SimpleLadder,
    TransmissionLine,
    derive,
    from_ratios,
)
from .errors import ConfigError, JPAError
from .self_energy import EXACT, MODES
from .verification import DEFAULT_SEED

COMMANDS = ("selfenergy", "modes", "gain", "threshold", "sweep", "verify")

RATIO_KEYS = ("zs_over_z0", "cc_over_cs", "lc_over_ls", "cg_over_cs", "lg_over_ls")
SI_KEYS = ("z0", "v", "cs", "ls", "cc", "lc", "cg", "lg")
SI_NEEDS = {
    "capacitive": ("cc",),
    "inductive": ("lc",),
    "series_lc": ("cc", "lc"),
    "parallel_lc": ("cc", "lc"),
    "ladder": ("cg", "lg", "cc", "lc"),
}

SECTIONS = {
    "circuit": ("variant",) + RATIO_KEYS + SI_KEYS,
    "pump": ("delta_p", "delta_ps", "r", "epsilon_p", "theta_p", "gamma_i"),
    "grid": ("start", "stop", "n"),
    "sweep": ("param", "start", "stop", "n"),
    "output": ("csv", "svg"),
}
TOP_LEVEL = ("command", "mode", "seed") + tuple(SECTIONS)


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    n: int


@dataclass(frozen=True)
class RunConfig:
    variant: str
    form: str  # "ratio" or "si"
    elements: dict
    command: Optional[str] = None
    mode: str = EXACT
    delta_p: float = 0.0
    r: Optional[float] = None
    epsilon_p: Optional[float] = None
    theta_p: float = 0.0
    gamma_i: float = 0.0
    grid: Optional[GridSpec] = None
    sweep_param: Optional[str] = None
    sweep_grid: Optional[GridSpec] = None
    csv: Optional[str] = None
    svg: Optional[str] = None
    seed: int = DEFAULT_SEED

    def circuit(self) -> DerivedCircuit:
        """Build the derived circuit; raises :class:`ConfigError` on bad element values."""
        try:
            if self.form == "ratio":
                return from_ratios(self.variant, gamma_i=0.0, **self.elements)
            e = self.elements
            nets = {
                "capacitive": lambda: Capacitive(e["cc"]),
                "inductive": lambda: Inductive(e["lc"]),
                "series_lc": lambda: SeriesLC(e["cc"], e["lc"]),
                "parallel_lc": lambda: ParallelLC(e["cc"], e["lc"]),
                "ladder": lambda: SimpleLadder(e["cg"], e["lg"], e["cc"], e["lc"]),
            }
            net = nets[self.variant]()
            return derive(net, Resonator(e["cs"], e["ls"]), TransmissionLine(e["z0"], e["v"]))
        except JPAError as exc:
            raise ConfigError(f"circuit: {exc}") from exc

    def to_dict(self) -> dict:
        """Normalised document with every default written out."""
        circuit = {"variant": self.variant}
        circuit.update(self.elements)
        pump = {"delta_p": self.delta_p, "theta_p": self.theta_p, "gamma_i": self.gamma_i}
        if self.r is not None:
            pump["r"] = self.r
        if self.epsilon_p is not None:
            pump["epsilon_p"] = self.epsilon_p
        doc = {"mode": self.mode, "seed": self.seed, "circuit": circuit, "pump": pump}
        if self.command is not None:
            doc["command"] = self.command
        if self.grid is not None:
            doc["grid"] = asdict(self.grid)
        if self.sweep_param is not None:
            doc["sweep"] = {"param": self.sweep_param, **asdict(self.sweep_grid)}
        out = {k: v for k, v in (("csv", self.csv), ("svg", self.svg)) if v is not None}
        if out:
            doc["output"] = out
        return doc


def serialize(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"


def normalize(text: str) -> str:
    return serialize(parse_config(text))


def _line_of(text: str, key: str) -> Optional[int]:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(text: str, key: str) -> str:
    line = _line_of(text, key) if text else None
    return f" (line {line})" if line else ""


def _no_duplicates(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ConfigError(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def load_document(text: str) -> dict:
    """Parse JSON text, reporting syntax errors with line and column."""
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object at the top level")
    return doc


def _number(value, name, text, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number{_where(text, name.split('.')[-1])}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{name} must be an integer{_where(text, name.split('.')[-1])}")
        return int(value)
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(f"{name} must be finite")
    return x


def _grid(section: dict, name: str, text: str) -> GridSpec:
    missing = [k for k in ("start", "stop", "n") if k not in section]
    if missing:
        raise ConfigError(f"{name} needs {', '.join(missing)}{_where(text, name)}")
    start = _number(section["start"], f"{name}.start", text)
    stop = _number(section["stop"], f"{name}.stop", text)
    n = _number(section["n"], f"{name}.n", text, integer=True)
    if n < 2:
        raise ConfigError(f"{name}.n must be at least 2")
    if not stop > start:
        raise ConfigError(f"{name}.stop must exceed {name}.start")
    return GridSpec(start, stop, n)


def config_from_dict(doc: dict, text: str = "") -> RunConfig:
    """Validate a parsed document and fill in defaults."""
    for key in doc:
        if key not in TOP_LEVEL:
            raise ConfigError(f"unknown key {key!r}{_where(text, key)}")
    for sec, allowed in SECTIONS.items():
        body = doc.get(sec, {})
        if not isinstance(body, dict):
            raise ConfigError(f"section {sec!r} must be an object{_where(text, sec)}")
        for key in body:
            if key not in allowed:
                raise ConfigError(f"unknown key '{sec}.{key}'{_where(text, key)}")

    command = doc.get("command")
    if command is not None and command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}{_where(text, 'command')}")
    mode = doc.get("mode", EXACT)
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}{_where(text, 'mode')}")
    seed = _number(doc.get("seed", DEFAULT_SEED), "seed", text, integer=True)

    circuit = doc.get("circuit", {})
    variant = circuit.get("variant")
    if variant not in VARIANTS:
        raise ConfigError(f"circuit.variant must be one of {VARIANTS}{_where(text, 'variant')}")
    ratio = {k: _number(circuit[k], f"circuit.{k}", text) for k in RATIO_KEYS if k in circuit}
    si = {k: _number(circuit[k], f"circuit.{k}", text) for k in SI_KEYS if k in circuit}
    if ratio and si:
        raise ConfigError(
            "circuit mixes ratio keys "
            f"({', '.join(sorted(ratio))}) with element values ({', '.join(sorted(si))}); use one form"
        )
    if not ratio and not si:
        raise ConfigError("circuit needs either ratio keys or element values")
    if ratio:
        form, elements = "ratio", ratio
        if "zs_over_z0" not in ratio:
            raise ConfigError("circuit.zs_over_z0 is required in the ratio form")
    else:
        form, elements = "si", si
        needed = ("z0", "v", "cs", "ls") + SI_NEEDS[variant]
        missing = [k for k in needed if k not in si]
        extra = [k for k in si if k not in needed]
        if missing:
            raise ConfigError(f"circuit is missing {', '.join('circuit.' + k for k in missing)}")
        if extra:
            raise ConfigError(f"{', '.join('circuit.' + k for k in extra)} not used by variant {variant}")

    pump = doc.get("pump", {})
    if "delta_p" in pump and "delta_ps" in pump:
        raise ConfigError("give pump.delta_p or pump.delta_ps, not both")
    delta_key = "delta_ps" if "delta_ps" in pump else "delta_p"
    delta_p = _number(pump.get(delta_key, 0.0), f"pump.{delta_key}", text)
    if "r" in pump and "epsilon_p" in pump:
        raise ConfigError("give pump.r or pump.epsilon_p, not both")
    r = _number(pump["r"], "pump.r", text) if "r" in pump else None
    if r is not None and not r > 0.0:
        raise ConfigError(f"pump.r must be positive{_where(text, 'r')}")
    eps = _number(pump["epsilon_p"], "pump.epsilon_p", text) if "epsilon_p" in pump else None
    if eps is not None and eps < 0.0:
        raise ConfigError("pump.epsilon_p is a magnitude and must be >= 0; use theta_p for the phase")
    theta = _number(pump.get("theta_p", 0.0), "pump.theta_p", text)
    gamma_i = _number(pump.get("gamma_i", 0.0), "pump.gamma_i", text)
    if gamma_i < 0.0:
        raise ConfigError(f"pump.gamma_i must be >= 0{_where(text, 'gamma_i')}")

    grid = _grid(doc["grid"], "grid", text) if "grid" in doc else None
    sweep_param = sweep_grid = None
    if "sweep" in doc:
        sw = doc["sweep"]
        sweep_param = sw.get("param")
        if not isinstance(sweep_param, str):
            raise ConfigError("sweep.param must be a string")
        sweep_grid = _grid(sw, "sweep", text)

    output = doc.get("output", {})
    for key in ("csv", "svg"):
        if key in output and not isinstance(output[key], str):
            raise ConfigError(f"output.{key} must be a path string")

    return RunConfig(
        variant=variant,
        form=form,
        elements=elements,
        command=command,
        mode=mode,
        delta_p=delta_p,
        r=r,
        epsilon_p=eps,
        theta_p=theta,
        gamma_i=gamma_i,
        grid=grid,
        sweep_param=sweep_param,
        sweep_grid=sweep_grid,
        csv=output.get("csv"),
        svg=output.get("svg"),
        seed=seed,
    )


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    return config_from_dict(load_document(text), text)


def parse_grid(spec: str, name: str = "grid") -> GridSpec:
    """Parse ``start:stop:n``."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name} must look like start:stop:n, got {spec!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        n = int(parts[2])
    except ValueError:
        raise ConfigError(f"{name} must look like start:stop:n, got {spec!r}") from None
    return _grid({"start": start, "stop": stop, "n": n}, name, "")


def parse_assignment(text: str):
    """Split ``section.key=value`` and decode the value as JSON (falling back to a string)."""
    if "=" not in text:
        raise ConfigError(f"--set expects section.key=value, got {text!r}")
    path, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path.strip().split("."), value


def apply_override(doc: dict, path, value) -> None:
    target = doc
    for part in path[:-1]:
        target = target.setdefault(part, {})
        if not isinstance(target, dict):
            raise ConfigError(f"cannot set {'.'.join(path)}: {part} is not a section")
    target[path[-1]] = value


def default_document() -> dict:
    return {"circuit": {}}


__all__ = [
    "COMMANDS",
    "GridSpec",
    "RunConfig",
    "apply_override",
    "config_from_dict",
    "default_document",
    "load_document",
    "normalize",
    "parse_assignment",
    "parse_config",
    "parse_grid",
    "serialize",
]
