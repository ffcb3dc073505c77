"""Physical parameter records, scenarios and derived quantities.

All frequencies and rates stored here are angular (rad/s). Conversion from
ordinary Hz happens once, in :mod:`gravprobe.config`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Optional

from .errors import ValidationError

AXES = ("x", "y")


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values (SI)."""

    G: float = 6.67430e-11
    hbar: float = 1.054571817e-34
    kB: float = 1.380649e-23


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class Geometry:
    d_x: float
    d_y: float
    x2_bar: float = 0.0
    farfield_ratio: float = 1e3

    @property
    def d(self) -> float:
        return math.hypot(self.d_x, self.d_y)

    def farfield_ok(self) -> bool:
        return self.d_x >= self.farfield_ratio * abs(self.x2_bar)


@dataclass(frozen=True)
class MechanicalAxis:
    omega: float
    gamma: float
    r_osc: float = 0.0


@dataclass(frozen=True)
class CavityAxis:
    """One optical cavity.

    Exactly one of ``drive`` (input rate E, 1/s) and ``power`` (W) is set;
    the other is derived via ``E = sqrt(2 kappa P / (hbar omega_0))``.
    """

    omega_c: float
    detuning: float
    kappa: float
    length: float
    drive: Optional[float] = None
    power: Optional[float] = None

    @property
    def omega_0(self) -> float:
        return self.omega_c - self.detuning

    @property
    def chi(self) -> float:
        return self.omega_c / self.length

    def drive_rate(self, hbar: float = CONSTANTS.hbar) -> float:
        if self.drive is not None:
            return self.drive
        return drive_from_power(self.kappa, self.power, self.omega_0, hbar)

    def laser_power(self, hbar: float = CONSTANTS.hbar) -> float:
        if self.power is not None:
            return self.power
        return power_from_drive(self.kappa, self.drive, self.omega_0, hbar)


def drive_from_power(kappa, power, omega_0, hbar=CONSTANTS.hbar):
    return math.sqrt(2.0 * kappa * power / (hbar * omega_0))


def power_from_drive(kappa, drive, omega_0, hbar=CONSTANTS.hbar):
    return drive * drive * hbar * omega_0 / (2.0 * kappa)


@dataclass(frozen=True)
class SystemParameters:
    m1: float
    m2: float
    geometry: Geometry
    mech_x: MechanicalAxis
    mech_y: MechanicalAxis
    cav_x: CavityAxis
    cav_y: CavityAxis
    temperature: float
    constants: PhysicalConstants = field(default=CONSTANTS)

    def mech(self, axis: str) -> MechanicalAxis:
        return {"x": self.mech_x, "y": self.mech_y}[axis]

    def cav(self, axis: str) -> CavityAxis:
        return {"x": self.cav_x, "y": self.cav_y}[axis]

    def as_dict(self) -> dict:
        """Nested plain-dict view (SI, angular frequencies)."""
        return _to_dict(self)


def _to_dict(obj):
    if is_dataclass(obj):
        return {f.name: _to_dict(getattr(obj, f.name)) for f in fields(obj)}
    return obj


class Scenario(enum.Enum):
    QUANTUM_ALPHA = "quantum_alpha"
    QUANTUM_BETA = "quantum_beta"
    CLASSICAL = "classical"

    @property
    def is_quantum(self) -> bool:
        return self is not Scenario.CLASSICAL

    @property
    def s_gamma(self) -> Optional[int]:
        """Branch sign: +1 for alpha, -1 for beta, None for the classical average."""
        return {Scenario.QUANTUM_ALPHA: 1, Scenario.QUANTUM_BETA: -1}.get(self)

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        aliases = {
            "quantum": cls.QUANTUM_ALPHA,
            "alpha": cls.QUANTUM_ALPHA,
            "beta": cls.QUANTUM_BETA,
            "classical": cls.CLASSICAL,
            "cl": cls.CLASSICAL,
        }
        key = text.strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class DerivedQuantities:
    d: float
    chi: dict
    drive: dict
    detuning: dict
    omega_0: dict
    power: dict


def _check_finite(obj, path, problems):
    if is_dataclass(obj):
        for f in fields(obj):
            _check_finite(getattr(obj, f.name), f"{path}.{f.name}" if path else f.name, problems)
    elif isinstance(obj, float) or isinstance(obj, int):
        if not math.isfinite(obj):
            problems.append((path, "must be finite"))


def validate(params: SystemParameters) -> SystemParameters:
    """Return ``params`` unchanged if every invariant holds.

    Raises
    ------
    ValidationError
        Listing every violated invariant with its field path.
    """
    problems = []
    _check_finite(params, "", problems)
    bad = {p for p, _ in problems}

    def positive(path, value):
        if path not in bad and not value > 0:
            problems.append((path, "must be positive"))

    positive("m1", params.m1)
    positive("m2", params.m2)
    positive("temperature", params.temperature)
    g = params.geometry
    positive("geometry.d_x", g.d_x)
    positive("geometry.d_y", g.d_y)
    positive("geometry.farfield_ratio", g.farfield_ratio)
    for axis in AXES:
        mech = params.mech(axis)
        positive(f"mech_{axis}.omega", mech.omega)
        positive(f"mech_{axis}.gamma", mech.gamma)
        cav = params.cav(axis)
        pre = f"cav_{axis}"
        positive(f"{pre}.omega_c", cav.omega_c)
        positive(f"{pre}.kappa", cav.kappa)
        positive(f"{pre}.length", cav.length)
        if (cav.drive is None) == (cav.power is None):
            problems.append((f"{pre}.drive", "exactly one of drive and power must be given"))
        else:
            key, value = ("drive", cav.drive) if cav.drive is not None else ("power", cav.power)
            if f"{pre}.{key}" not in bad and not value >= 0:
                problems.append((f"{pre}.{key}", "must be non-negative"))
        if f"{pre}.omega_c" not in bad and f"{pre}.detuning" not in bad and not cav.omega_0 > 0:
            problems.append((f"{pre}.detuning", "laser frequency omega_c - detuning must be positive"))
    if problems:
        raise ValidationError(problems)
    return params


def derive(params: SystemParameters) -> DerivedQuantities:
    hbar = params.constants.hbar
    cavs = {a: params.cav(a) for a in AXES}
    return DerivedQuantities(
        d=params.geometry.d,
        chi={a: c.chi for a, c in cavs.items()},
        drive={a: c.drive_rate(hbar) for a, c in cavs.items()},
        detuning={a: c.detuning for a, c in cavs.items()},
        omega_0={a: c.omega_0 for a, c in cavs.items()},
        power={a: c.laser_power(hbar) for a, c in cavs.items()},
    )


def bose_occupation(omega: float, temperature: float, constants: PhysicalConstants = CONSTANTS) -> float:
    x = constants.hbar * omega / (constants.kB * temperature)
    return 1.0 / math.expm1(x)
