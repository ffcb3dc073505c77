"""Force-expansion coefficients of the source-probe gravitational pull.

The force on the probe, expanded to first order in its displacement
fluctuations, reads ``F_i = c0_i + c1_i * delta_i + c2 * delta_j`` (j != i).
The cross term is identical for both axes and is stored once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .core import Scenario, SystemParameters
from .errors import ConfigError, FarFieldError, SingularConfigurationError


@dataclass(frozen=True)
class GravityCoefficients:
    c0_x: float
    c0_y: float
    c1_x: float
    c1_y: float
    c2: float
    scenario: Scenario
    # (G m1 m2, d_x, d_y, x2_bar, mode) of the configuration the values came from
    source: tuple = ()

    def c0(self, axis):
        return self.c0_x if axis == "x" else self.c0_y

    def c1(self, axis):
        return self.c1_x if axis == "x" else self.c1_y

    def scaled(self, factor: float) -> "GravityCoefficients":
        """All coefficients are proportional to m1*m2; rescale them together."""
        src = self.source
        if src:
            src = (src[0] * factor,) + tuple(src[1:])
        return replace(
            self,
            c0_x=self.c0_x * factor,
            c0_y=self.c0_y * factor,
            c1_x=self.c1_x * factor,
            c1_y=self.c1_y * factor,
            c2=self.c2 * factor,
            source=src,
        )

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario.value,
            "c0_x": self.c0_x,
            "c0_y": self.c0_y,
            "c1_x": self.c1_x,
            "c1_y": self.c1_y,
            "c2": self.c2,
        }


def _gm1m2(params):
    return params.constants.G * params.m1 * params.m2


def _branch_sign(scenario):
    if not scenario.is_quantum:
        raise ValueError("a quantum branch (alpha or beta) is required")
    return scenario.s_gamma


def _table(gm, d_x, d_y, x2, s):
    h2 = (x2 - s * d_x) ** 2 + d_y**2
    if h2 == 0.0:
        raise SingularConfigurationError("source branch and probe coincide (h = 0)")
    h = math.sqrt(h2)
    big_g = gm / (h2 * h)
    lever = s * d_x - x2
    return dict(
        c0_x=big_g * lever,
        c0_y=big_g * d_y,
        c1_x=big_g / h2 * (3.0 * lever**2 - h2),
        c1_y=big_g / h2 * (3.0 * d_y**2 - h2),
        c2=-3.0 * big_g / h2 * lever * d_y,
    )


def exact_coefficients(params: SystemParameters, scenario: Scenario) -> GravityCoefficients:
    """Coefficients at the probe's actual mean offset ``x2_bar`` for one branch."""
    s = _branch_sign(scenario)
    g = params.geometry
    gm = _gm1m2(params)
    vals = _table(gm, g.d_x, g.d_y, g.x2_bar, s)
    return GravityCoefficients(scenario=scenario, source=(gm, g.d_x, g.d_y, g.x2_bar, "exact"), **vals)


def farfield_coefficients(params: SystemParameters, scenario: Scenario) -> GravityCoefficients:
    """Coefficients in the limit ``d_x >> x2_bar``.

    For the classical scenario the two branches are averaged, which cancels
    the cross term exactly.
    """
    g = params.geometry
    if not g.farfield_ok():
        raise FarFieldError(
            f"far-field regime needs d_x >= {g.farfield_ratio:g} * |x2_bar| "
            f"(d_x={g.d_x:g}, x2_bar={g.x2_bar:g}); use exact_coefficients instead"
        )
    if not scenario.is_quantum:
        return classical_average(
            farfield_coefficients(params, Scenario.QUANTUM_ALPHA),
            farfield_coefficients(params, Scenario.QUANTUM_BETA),
        )
    s = scenario.s_gamma
    gm = _gm1m2(params)
    d2 = g.d_x**2 + g.d_y**2
    d5 = d2 * d2 * math.sqrt(d2)
    c0 = _table(gm, g.d_x, g.d_y, 0.0, s)
    return GravityCoefficients(
        c0_x=c0["c0_x"],
        c0_y=c0["c0_y"],
        c1_x=gm * (2.0 * g.d_x**2 - g.d_y**2) / d5,
        c1_y=gm * (2.0 * g.d_y**2 - g.d_x**2) / d5,
        c2=-3.0 * gm * g.d_x * g.d_y * s / d5,
        scenario=scenario,
        source=(gm, g.d_x, g.d_y, g.x2_bar, "farfield"),
    )


def classical_average(alpha: GravityCoefficients, beta: GravityCoefficients) -> GravityCoefficients:
    if alpha.source != beta.source:
        raise ConfigError("branches were computed from different source configurations")
    return GravityCoefficients(
        c0_x=0.5 * (alpha.c0_x + beta.c0_x),
        c0_y=0.5 * (alpha.c0_y + beta.c0_y),
        c1_x=0.5 * (alpha.c1_x + beta.c1_x),
        c1_y=0.5 * (alpha.c1_y + beta.c1_y),
        c2=0.5 * (alpha.c2 + beta.c2),
        scenario=Scenario.CLASSICAL,
        source=alpha.source,
    )


def coefficients(params: SystemParameters, scenario: Scenario, exact: bool = False) -> GravityCoefficients:
    """Coefficients for any scenario; far-field unless ``exact`` is set."""
    if not exact:
        return farfield_coefficients(params, scenario)
    if scenario.is_quantum:
        return exact_coefficients(params, scenario)
    return classical_average(
        exact_coefficients(params, Scenario.QUANTUM_ALPHA),
        exact_coefficients(params, Scenario.QUANTUM_BETA),
    )


def steady_displacement(params: SystemParameters, scenario: Scenario):
    """Mean probe offsets ``(x2_bar, y2_bar)`` in m for a recentred trap (far field)."""
    g = params.geometry
    d3 = g.d**3
    gm1 = params.constants.G * params.m1
    y_bar = gm1 * g.d_y / (params.mech_y.omega**2 * d3)
    if not scenario.is_quantum:
        return 0.0, y_bar
    x_bar = gm1 * g.d_x * scenario.s_gamma / (params.mech_x.omega**2 * d3)
    return x_bar, y_bar


def trap_recenter(params: SystemParameters, mean_photon: float, axis: str) -> float:
    """Trap centre that cancels the static radiation-pressure displacement."""
    cav = params.cav(axis)
    omega = params.mech(axis).omega
    return -params.constants.hbar * cav.chi * mean_photon / (params.m2 * omega**2)
