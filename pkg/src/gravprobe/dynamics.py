"""Linearised fluctuation dynamics of the two-axis probe and its cavities.

State vector (fixed order)::

    0 x    1 p_x   2 y    3 p_y     mechanical, dimensionless
    4 X_x  5 Y_x   6 X_y  7 Y_y     cavity quadratures

Mechanical coordinates are ``x = delta / (sqrt(2) x_zpf)`` and
``p = delta_p / (sqrt(2) p_zpf)`` with ``x_zpf = sqrt(hbar / (2 m2 omega))``,
so that ``[x, p] = i`` and the vacuum variance of every coordinate is 1/2,
matching the cavity quadratures ``X = (a + a^dag)/sqrt(2)``,
``Y = (a - a^dag)/(i sqrt(2))``. In this frame the linearised
optomechanical rate is ``G = 2 chi |a_bar| x_zpf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .coefficients import GravityCoefficients
from .core import AXES, CONSTANTS, CavityAxis, SystemParameters
from .errors import NumericError, SingularConfigurationError

BASIS = ("x", "p_x", "y", "p_y", "X_x", "Y_x", "X_y", "Y_y")
POS = {"x": 0, "y": 2}
MOM = {"x": 1, "y": 3}
QX = {"x": 4, "y": 6}
QY = {"x": 5, "y": 7}
MODE_X = (0, 1, 4, 5)  # everything attached to the x axis
MODE_Y = (2, 3, 6, 7)
OPTICAL = (4, 5, 6, 7)


@dataclass(frozen=True)
class MeanField:
    a_bar: complex
    delta: float
    n_photon: float


def mean_field(cavity: CavityAxis, hbar: float = CONSTANTS.hbar) -> MeanField:
    """Steady intracavity amplitude ``E / (kappa + i Delta)``.

    The small self-consistent shift of the detuning by the mean displacement
    is neglected, so the effective detuning equals the bare one.
    """
    denom = complex(cavity.kappa, cavity.detuning)
    if denom == 0:
        raise SingularConfigurationError("kappa = 0 and detuning = 0: drive is singular")
    a_bar = cavity.drive_rate(hbar) / denom
    return MeanField(a_bar=a_bar, delta=cavity.detuning, n_photon=abs(a_bar) ** 2)


def x_zpf(params: SystemParameters, axis: str) -> float:
    return math.sqrt(params.constants.hbar / (2.0 * params.m2 * params.mech(axis).omega))


def omega_coth(omega, temperature, hbar, kB):
    """``omega * coth(hbar omega / 2 kB T)`` with the analytic value at omega = 0."""
    omega = np.asarray(omega, dtype=float)
    x = hbar * omega / (2.0 * kB * temperature)
    safe = np.where(x == 0.0, 1.0, x)
    return np.where(x == 0.0, 2.0 * kB * temperature / hbar, omega / np.tanh(safe))


@dataclass(frozen=True, eq=False)
class LinearDynamics:
    drift: np.ndarray
    diffusion: np.ndarray
    basis: tuple
    x_zpf: dict
    coupling: dict
    mean: dict
    coeffs: GravityCoefficients

    @property
    def length_scale(self) -> dict:
        """Metres per unit of dimensionless position, ``sqrt(2) x_zpf``."""
        return {a: math.sqrt(2.0) * v for a, v in self.x_zpf.items()}


def optomechanical_rate(params: SystemParameters, axis: str, mean: MeanField) -> float:
    return 2.0 * params.cav(axis).chi * math.sqrt(mean.n_photon) * x_zpf(params, axis)


def cross_coupling(params: SystemParameters, c2: float) -> float:
    """Drift entry linking p_x to y (and p_y to x) for a cross coefficient ``c2``."""
    return c2 / (params.m2 * math.sqrt(params.mech_x.omega * params.mech_y.omega))


def thermal_diffusion(params: SystemParameters, axis: str) -> float:
    """``gamma (2 n + 1)``: momentum diffusion of a Markovian thermal bath."""
    c = params.constants
    mech = params.mech(axis)
    return mech.gamma / math.tanh(c.hbar * mech.omega / (2.0 * c.kB * params.temperature))


def build_dynamics(
    params: SystemParameters, coeffs: GravityCoefficients, rotate_phase: bool = True
) -> LinearDynamics:
    """Drift and diffusion matrices of the fluctuation equations.

    With ``rotate_phase`` (default) each cavity frame is rotated so that the
    mean amplitude is real and positive. Passing ``False`` keeps the phase of
    ``a_bar`` explicit; spectra and discord are unchanged by this choice.
    """
    hbar = params.constants.hbar
    A = np.zeros((8, 8))
    D = np.zeros((8, 8))
    zpf, rates, means = {}, {}, {}
    for axis in AXES:
        mech = params.mech(axis)
        cav = params.cav(axis)
        mf = mean_field(cav, hbar)
        g = optomechanical_rate(params, axis, mf)
        phi = 0.0 if rotate_phase else float(np.angle(mf.a_bar))
        q, p, X, Y = POS[axis], MOM[axis], QX[axis], QY[axis]

        A[q, p] = mech.omega
        A[p, q] = -(mech.omega - coeffs.c1(axis) / (params.m2 * mech.omega))
        A[p, p] = -mech.gamma
        A[p, X] = g * math.cos(phi)
        A[p, Y] = g * math.sin(phi)
        A[X, X] = -cav.kappa
        A[X, Y] = mf.delta
        A[Y, Y] = -cav.kappa
        A[Y, X] = -mf.delta
        A[X, q] = -g * math.sin(phi)
        A[Y, q] = g * math.cos(phi)

        D[p, p] = thermal_diffusion(params, axis)
        D[X, X] = cav.kappa
        D[Y, Y] = cav.kappa

        zpf[axis] = x_zpf(params, axis)
        rates[axis] = g
        means[axis] = mf

    cross = cross_coupling(params, coeffs.c2)
    A[MOM["x"], POS["y"]] = cross
    A[MOM["y"], POS["x"]] = cross

    if not np.all(np.isfinite(A)):
        raise NumericError("drift matrix has non-finite entries")
    eig = np.linalg.eigvalsh(D)
    if eig.min() < -1e-12 * np.linalg.norm(D):
        raise NumericError(f"diffusion matrix is not positive semidefinite (min eigenvalue {eig.min():g})")

    A.setflags(write=False)
    D.setflags(write=False)
    return LinearDynamics(
        drift=A, diffusion=D, basis=BASIS, x_zpf=zpf, coupling=rates, mean=means, coeffs=coeffs
    )


class StabilityReport(NamedTuple):
    stable: bool
    max_real_part: float


def stability(dyn: LinearDynamics) -> StabilityReport:
    try:
        ev = np.linalg.eigvals(dyn.drift)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue computation failed: {exc}") from exc
    worst = float(ev.real.max())
    return StabilityReport(stable=worst < 0.0, max_real_part=worst)


def mechanical_noise_psd(omega, params: SystemParameters, axis: str):
    """Symmetrised thermal force PSD in dimensionless momentum units.

    Equals ``gamma (omega / omega_i) coth(hbar omega / 2 kB T)``, which at the
    mechanical resonance coincides with :func:`thermal_diffusion`.
    """
    c = params.constants
    mech = params.mech(axis)
    return mech.gamma / mech.omega * omega_coth(omega, params.temperature, c.hbar, c.kB)


@dataclass(frozen=True)
class EffectiveResponse:
    """Optical-spring-modified frequency and damping of one mechanical axis."""

    omega_i: float
    gamma_i: float
    m2: float
    hbar: float
    chi: float
    n_photon: float
    delta: float
    kappa: float
    c1: float

    def _denominator(self, omega):
        w2 = np.asarray(omega, dtype=float) ** 2
        s = self.kappa**2 + self.delta**2 + w2
        den = s * s - 4.0 * self.delta**2 * w2
        if np.any(den == 0.0):
            raise SingularConfigurationError("effective-response denominator vanishes (kappa = 0?)")
        return den

    def omega_eff_sq(self, omega):
        w2 = np.asarray(omega, dtype=float) ** 2
        k = self.hbar * self.chi**2 * self.n_photon * self.delta / self.m2
        spring = 2.0 * k * (w2 - self.kappa**2 - self.delta**2) / self._denominator(omega)
        return self.omega_i**2 + spring - self.c1 / self.m2

    def gamma_eff(self, omega):
        k = self.hbar * self.chi**2 * self.n_photon * self.delta / self.m2
        return self.gamma_i + 4.0 * k * self.kappa / self._denominator(omega)

    def resonance(self, omega_min: float, omega_max: float, n: int = 20001) -> float:
        """Frequency in ``[omega_min, omega_max]`` minimising ``|omega_eff^2(w) - w^2|``."""
        grid = np.linspace(omega_min, omega_max, n)
        i = int(np.argmin(np.abs(self.omega_eff_sq(grid) - grid**2)))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
        f = lambda w: float(self.omega_eff_sq(w) - w * w)
        if f(lo) * f(hi) < 0:
            from scipy.optimize import brentq

            return brentq(f, lo, hi, xtol=1e-12 * hi, rtol=1e-15)
        return float(grid[i])


def effective_response(
    params: SystemParameters, mean: MeanField, coeffs: GravityCoefficients, axis: str
) -> EffectiveResponse:
    mech = params.mech(axis)
    cav = params.cav(axis)
    return EffectiveResponse(
        omega_i=mech.omega,
        gamma_i=mech.gamma,
        m2=params.m2,
        hbar=params.constants.hbar,
        chi=cav.chi,
        n_photon=mean.n_photon,
        delta=mean.delta,
        kappa=cav.kappa,
        c1=coeffs.c1(axis),
    )
