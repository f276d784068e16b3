"""Circuit parameters and every quantity derived from raw element values.

All values are SI (farad, henry, ohm, m/s, rad/s).  The helper
:func:`from_ratios` builds a circuit from dimensionless ratios in the
normalisation ``omega_s = Z_0 = v = 1`` so that frequencies come out in units
of ``omega_s`` and lengths in units of ``v/omega_s``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Union

from scipy.constants import hbar, physical_constants

from ._validation import check_nonnegative, check_positive
from .errors import DomainError

PHI0 = physical_constants["mag. flux quantum"][0]

CAPACITIVE = "capacitive"
INDUCTIVE = "inductive"
SERIES_LC = "series_lc"
PARALLEL_LC = "parallel_lc"
LADDER = "ladder"

VARIANTS = (CAPACITIVE, INDUCTIVE, SERIES_LC, PARALLEL_LC, LADDER)
RESONANT_VARIANTS = (SERIES_LC, PARALLEL_LC, LADDER)


@dataclass(frozen=True)
class TransmissionLine:
    """Semi-infinite transmission line with impedance ``z0`` and velocity ``v``."""

    z0: float = 1.0
    v: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "z0", check_positive(self.z0, "z0"))
        object.__setattr__(self, "v", check_positive(self.v, "v"))

    @property
    def c0(self) -> float:
        """Capacitance per unit length."""
        return 1.0 / (self.z0 * self.v)

    @property
    def l0(self) -> float:
        """Inductance per unit length."""
        return self.z0 / self.v


@dataclass(frozen=True)
class Resonator:
    """Lumped resonator: shunt capacitance, (junction) inductance, internal loss."""

    cs: float
    ls: float
    gamma_i: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "cs", check_positive(self.cs, "cs"))
        object.__setattr__(self, "ls", check_positive(self.ls, "ls"))
        object.__setattr__(self, "gamma_i", check_nonnegative(self.gamma_i, "gamma_i"))


def _positive_fields(obj, names):
    for name in names:
        object.__setattr__(obj, name, check_positive(getattr(obj, name), name))


@dataclass(frozen=True)
class Capacitive:
    cc: float
    kind = CAPACITIVE

    def __post_init__(self):
        _positive_fields(self, ("cc",))


@dataclass(frozen=True)
class Inductive:
    lc: float
    kind = INDUCTIVE

    def __post_init__(self):
        _positive_fields(self, ("lc",))


@dataclass(frozen=True)
class SeriesLC:
    cc: float
    lc: float
    kind = SERIES_LC

    def __post_init__(self):
        _positive_fields(self, ("cc", "lc"))


@dataclass(frozen=True)
class ParallelLC:
    cc: float
    lc: float
    kind = PARALLEL_LC

    def __post_init__(self):
        _positive_fields(self, ("cc", "lc"))


@dataclass(frozen=True)
class SimpleLadder:
    """Series ``cg``-``lg`` branch next to the resonator, then a parallel ``cc``-``lc`` branch."""

    cg: float
    lg: float
    cc: float
    lc: float
    kind = LADDER

    def __post_init__(self):
        _positive_fields(self, ("cg", "lg", "cc", "lc"))


CouplingNetwork = Union[Capacitive, Inductive, SeriesLC, ParallelLC, SimpleLadder]


@dataclass(frozen=True)
class DerivedCircuit:
    """Every secondary quantity of a coupled circuit.

    ``alpha`` is ``None`` for purely inductive coupling and ``beta`` is
    ``None`` for purely capacitive coupling.  ``omega_a``, ``z_a`` and ``g``
    are only set for the ladder filter.
    """

    network: CouplingNetwork
    resonator: Resonator
    line: TransmissionLine
    alpha: Optional[float]
    beta: Optional[float]
    omega_s: float
    z_s: float
    omega_sigma: Optional[float]
    omega_c: Optional[float]
    gamma_e_eff: float
    gamma_c: Optional[float] = None
    gamma_l: Optional[float] = None
    omega_a: Optional[float] = None
    z_a: Optional[float] = None
    g: Optional[float] = None

    @property
    def kind(self) -> str:
        return self.network.kind

    @property
    def v(self) -> float:
        return self.line.v

    @property
    def z0(self) -> float:
        return self.line.z0

    @property
    def cs(self) -> float:
        return self.resonator.cs

    @property
    def gamma_i(self) -> float:
        return self.resonator.gamma_i


def derive(network: CouplingNetwork, res: Resonator, tl: TransmissionLine) -> DerivedCircuit:
    """Compute coupling lengths, frequencies, impedances and rates."""
    kind = getattr(network, "kind", None)
    if kind not in VARIANTS:
        raise DomainError(f"unknown coupling network {network!r}")
    cs, ls, c0, l0, v, z0 = res.cs, res.ls, tl.c0, tl.l0, tl.v, tl.z0

    alpha = beta = omega_sigma = omega_c = None
    gamma_c = gamma_l = None
    extra = {}

    if kind in (CAPACITIVE, SERIES_LC, PARALLEL_LC):
        alpha = network.cc * cs / (c0 * (network.cc + cs))
    if kind == LADDER:
        alpha = network.cc / c0
    if kind != CAPACITIVE:
        beta = network.lc / l0

    if kind in (CAPACITIVE, SERIES_LC):
        l_eff = ls
    elif kind in (INDUCTIVE, PARALLEL_LC):
        l_eff = ls * network.lc / (ls + network.lc)
    else:
        l_eff = ls * network.lg / (ls + network.lg)
    omega_s = 1.0 / math.sqrt(cs * l_eff)
    z_s = math.sqrt(l_eff / cs)

    if kind in RESONANT_VARIANTS:
        omega_sigma = v / math.sqrt(alpha * beta)
        omega_c = 1.0 / math.sqrt(network.lc * network.cc)

    if kind in (CAPACITIVE, PARALLEL_LC):
        gamma_c = 0.5 * z_s * omega_s**3 * alpha**2 / (z0 * v**2)
    if kind in (INDUCTIVE, PARALLEL_LC):
        gamma_l = 0.5 * z_s * v**2 / (omega_s * z0 * beta**2)

    if kind == CAPACITIVE:
        gamma_eff = gamma_c
    elif kind == INDUCTIVE:
        gamma_eff = gamma_l
    elif kind == PARALLEL_LC:
        gamma_eff = 0.5 * (math.sqrt(2 * gamma_c) - math.sqrt(2 * gamma_l)) ** 2
    elif kind == SERIES_LC:
        t = beta * omega_s / v - v / (alpha * omega_s)
        gamma_eff = omega_s * z_s / (2.0 * z0 * t * t) if t != 0.0 else math.inf
    else:
        cc, cg, lg = network.cc, network.cg, network.lg
        omega_a = math.sqrt((cc + cg) / (cc * cg * lg))
        z_a = math.sqrt(lg * (cc + cg) / (cc * cg))
        g = math.sqrt(z_s * z_a) / (2.0 * lg)
        gamma_eff = 0.5 * omega_s * z0 / z_a
        extra = {"omega_a": omega_a, "z_a": z_a, "g": g}

    return DerivedCircuit(
        network=network,
        resonator=res,
        line=tl,
        alpha=alpha,
        beta=beta,
        omega_s=omega_s,
        z_s=z_s,
        omega_sigma=omega_sigma,
        omega_c=omega_c,
        gamma_e_eff=gamma_eff,
        gamma_c=gamma_c,
        gamma_l=gamma_l,
        **extra,
    )


def ladder_g_quarter_power(dc: DerivedCircuit) -> float:
    """Second closed form of the ladder s-a coupling, written with element values only."""
    net, cs, ls = dc.network, dc.cs, dc.resonator.ls
    lg, cc, cg = net.lg, net.cc, net.cg
    return 0.5 * (ls / ((ls + lg) * lg**2) * (cc + cg) / (cs * cc * cg)) ** 0.25


def from_ratios(
    variant: str,
    zs_over_z0: float,
    cc_over_cs: Optional[float] = None,
    lc_over_ls: Optional[float] = None,
    cg_over_cs: Optional[float] = None,
    lg_over_ls: Optional[float] = None,
    gamma_i: float = 0.0,
) -> DerivedCircuit:
    """Build a circuit from dimensionless ratios with ``omega_s = Z_0 = v = 1``.

    ``zs_over_z0`` refers to the variant's own (possibly coupling-shifted)
    system impedance, so that e.g. for the parallel-LC circuit the shunt
    inductance ``L_c`` is already folded into ``Z_s`` and ``omega_s``.
    """
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    z_s = check_positive(zs_over_z0, "zs_over_z0")
    needs = {
        CAPACITIVE: ("cc_over_cs",),
        INDUCTIVE: ("lc_over_ls",),
        SERIES_LC: ("cc_over_cs", "lc_over_ls"),
        PARALLEL_LC: ("cc_over_cs", "lc_over_ls"),
        LADDER: ("cg_over_cs", "lg_over_ls", "cc_over_cs", "lc_over_ls"),
    }[variant]
    given = {
        "cc_over_cs": cc_over_cs,
        "lc_over_ls": lc_over_ls,
        "cg_over_cs": cg_over_cs,
        "lg_over_ls": lg_over_ls,
    }
    for name, value in given.items():
        if name in needs:
            if value is None:
                raise DomainError(f"variant {variant} requires {name}")
            check_positive(value, name)
        elif value is not None:
            raise DomainError(f"{name} is not a parameter of variant {variant}")

    cs = 1.0 / z_s
    l_eff = z_s
    if variant in (CAPACITIVE, SERIES_LC):
        ls = l_eff
    elif variant in (INDUCTIVE, PARALLEL_LC):
        lam = lc_over_ls
        ls = l_eff * (1.0 + lam) / lam
    else:
        lam = lg_over_ls
        ls = l_eff * (1.0 + lam) / lam

    if variant == CAPACITIVE:
        net = Capacitive(cc=cc_over_cs * cs)
    elif variant == INDUCTIVE:
        net = Inductive(lc=lc_over_ls * ls)
    elif variant == SERIES_LC:
        net = SeriesLC(cc=cc_over_cs * cs, lc=lc_over_ls * ls)
    elif variant == PARALLEL_LC:
        net = ParallelLC(cc=cc_over_cs * cs, lc=lc_over_ls * ls)
    else:
        net = SimpleLadder(
            cg=cg_over_cs * cs, lg=lg_over_ls * ls, cc=cc_over_cs * cs, lc=lc_over_ls * ls
        )
    return derive(net, Resonator(cs=cs, ls=ls, gamma_i=gamma_i), TransmissionLine(1.0, 1.0))


@dataclass(frozen=True)
class PumpSpec:
    """Pump detuning ``delta_p = omega_p/2 - omega_s`` and complex strength.

    For the ladder filter ``delta_pa`` is the detuning from the auxiliary
    mode; build it with :meth:`for_ladder` to keep it consistent.
    """

    delta_p: float
    epsilon_p: complex = 0.0
    delta_pa: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "delta_p", float(self.delta_p))
        object.__setattr__(self, "epsilon_p", complex(self.epsilon_p))
        if not cmath.isfinite(self.epsilon_p) or not math.isfinite(self.delta_p):
            raise DomainError("pump parameters must be finite")

    @property
    def delta_ps(self) -> float:
        return self.delta_p

    @classmethod
    def for_ladder(cls, delta_ps: float, epsilon_p: complex, dc: DerivedCircuit) -> "PumpSpec":
        if dc.kind != LADDER:
            raise DomainError("auxiliary detuning only exists for the ladder filter")
        return cls(delta_ps, epsilon_p, float(delta_ps) + dc.omega_s - dc.omega_a)

    def omega_ref(self, dc: DerivedCircuit) -> float:
        """Half the pump frequency."""
        return dc.omega_s + self.delta_p

    def with_epsilon(self, epsilon_p: complex) -> "PumpSpec":
        return PumpSpec(self.delta_p, epsilon_p, self.delta_pa)


@dataclass(frozen=True)
class FluxPumpSpec:
    """Flux pumping of the effective critical current ``i_c_bar + delta_ic_hat cos(...)``."""

    i_c_bar: float
    delta_ic_hat: float
    theta_p: float = 0.0
    phi0: float = field(default=PHI0)

    def __post_init__(self):
        check_positive(self.i_c_bar, "i_c_bar")
        check_nonnegative(self.delta_ic_hat, "delta_ic_hat")
        if self.delta_ic_hat >= self.i_c_bar:
            raise DomainError("delta_ic_hat must be smaller than i_c_bar")


def pump_from_flux(spec: FluxPumpSpec, dc: DerivedCircuit) -> tuple[complex, float]:
    """Return the pump strength and the Kerr coefficient (both rad/s)."""
    k = 2.0 * math.pi / spec.phi0
    epsilon_p = k * dc.z_s / 4.0 * spec.delta_ic_hat * cmath.exp(1j * spec.theta_p)
    alpha_nlin = k**3 * hbar * dc.z_s**2 * spec.i_c_bar / 8.0
    return epsilon_p, alpha_nlin
