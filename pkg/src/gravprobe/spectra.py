"""Displacement noise spectrum of the probe's x motion.

Two independent routes are provided: the closed form built from the
effective susceptibilities of each axis, and a direct solve of the full
8x8 frequency-domain system. Spectra are two-sided and symmetrised, in
m^2/Hz (m^2 s), as functions of angular frequency.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import signal

from .coefficients import GravityCoefficients, coefficients
from .core import SystemParameters, Scenario
from .dynamics import (
    MOM,
    POS,
    QX,
    QY,
    build_dynamics,
    effective_response,
    mean_field,
    mechanical_noise_psd,
    omega_coth,
    stability,
)
from .errors import ConfigError, InstabilityError, NumericError


def _axis_terms(omega, params, axis, coeffs):
    c = params.constants
    cav = params.cav(axis)
    mech = params.mech(axis)
    mf = mean_field(cav, c.hbar)
    resp = effective_response(params, mf, coeffs, axis)
    w2 = omega**2
    k2d2 = cav.kappa**2 + mf.delta**2
    den = (k2d2 + w2) ** 2 - 4.0 * mf.delta**2 * w2
    detune = resp.omega_eff_sq(omega) - w2
    damp = resp.gamma_eff(omega)
    g = detune**2 + damp**2 * w2
    thermal = c.hbar * params.m2 * mech.gamma * omega_coth(omega, params.temperature, c.hbar, c.kB)
    laser = 2.0 * c.hbar**2 * cav.chi**2 * cav.kappa * mf.n_photon * (k2d2 + w2) / den
    return detune, damp, g, thermal + laser


def dns_closed_form(
    omega, params: SystemParameters, scenario: Scenario, coeffs: Optional[GravityCoefficients] = None
):
    """Closed-form x-displacement spectrum.

    ``S = m^2 g_y [F_x + c2^2 F_y / (m^2 g_y)] / (m^4 g_x g_y - 2 m^2 c2^2 f + c2^4)``
    where ``F_i`` is the total (thermal + radiation-pressure) force PSD,
    ``g_i = (w_eff^2 - w^2)^2 + gamma_eff^2 w^2`` and
    ``f = (w_x,eff^2 - w^2)(w_y,eff^2 - w^2) - gamma_x,eff gamma_y,eff w^2``.
    Terms are kept grouped; the ``c2^4`` term is retained even though it is
    negligible at realistic couplings.
    """
    scalar = np.ndim(omega) == 0
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if coeffs is None:
        coeffs = coefficients(params, scenario)
    m = params.m2
    c2 = coeffs.c2
    ax, dx, gx, fx = _axis_terms(omega, params, "x", coeffs)
    ay, dy, gy, fy = _axis_terms(omega, params, "y", coeffs)
    f = ax * ay - dx * dy * omega**2
    num = m**2 * gy * (fx + c2**2 / (m**2 * gy) * fy)
    den = m**4 * gx * gy - 2.0 * m**2 * c2**2 * f + c2**4
    out = num / den
    return float(out[0]) if scalar else out


def dns_matrix_oracle(
    omega,
    params: SystemParameters,
    scenario: Scenario,
    coeffs: Optional[GravityCoefficients] = None,
    rotate_phase: bool = True,
):
    """x-displacement spectrum from the full resolvent ``(-i w I - A)^-1``.

    Input noises: thermal force on each momentum (coloured, ``omega coth``
    weight) and vacuum fluctuations on every cavity quadrature (white,
    symmetrised intensity ``kappa``).
    """
    scalar = np.ndim(omega) == 0
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if coeffs is None:
        coeffs = coefficients(params, scenario)
    dyn = build_dynamics(params, coeffs, rotate_phase=rotate_phase)
    A = dyn.drift
    M = -1j * omega[:, None, None] * np.eye(8)[None] - A[None]
    rhs = np.zeros((omega.size, 8, 1), dtype=complex)
    rhs[:, POS["x"], 0] = 1.0
    try:
        # row x of M^-1, obtained from M^T h = e_x
        h = np.linalg.solve(np.swapaxes(M, 1, 2), rhs)[..., 0]
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"resolvent is singular: {exc}") from exc
    noise = np.zeros((omega.size, 8))
    for axis in ("x", "y"):
        noise[:, MOM[axis]] = mechanical_noise_psd(omega, params, axis)
        noise[:, QX[axis]] = params.cav(axis).kappa
        noise[:, QY[axis]] = params.cav(axis).kappa
    out = dyn.length_scale["x"] ** 2 * np.sum(np.abs(h) ** 2 * noise, axis=1)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class FrequencyGrid:
    omega_min: float
    omega_max: float
    n_points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"grid spacing must be 'linear' or 'log', got {self.spacing!r}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ConfigError("grid needs n_points >= 2")
        if not self.omega_min < self.omega_max:
            raise ConfigError("grid needs omega_min < omega_max")
        if self.spacing == "log" and not self.omega_min > 0:
            raise ConfigError("log grid needs omega_min > 0")

    @classmethod
    def parse(cls, text: str, unit_hz: bool = True) -> "FrequencyGrid":
        """Parse ``"min,max,n[,lin|log]"``; bounds in Hz unless ``unit_hz`` is False."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) not in (3, 4):
            raise ConfigError(f"grid must be 'min,max,n[,lin|log]', got {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}: {exc}") from None
        spacing = {"lin": "linear", "linear": "linear", "log": "log"}.get(
            parts[3].lower() if len(parts) == 4 else "lin"
        )
        if spacing is None:
            raise ConfigError(f"grid spacing must be lin or log, got {parts[3]!r}")
        scale = 2.0 * math.pi if unit_hz else 1.0
        return cls(lo * scale, hi * scale, n, spacing)

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.omega_min, self.omega_max, self.n_points)
        return np.linspace(self.omega_min, self.omega_max, self.n_points)


@dataclass(frozen=True, eq=False)
class Spectrum:
    frequencies: np.ndarray
    values: np.ndarray
    scenario: Scenario
    metadata: dict = field(default_factory=dict)


def scan(
    params: SystemParameters,
    scenario: Scenario,
    grid: FrequencyGrid,
    workers: int = 1,
    coeffs: Optional[GravityCoefficients] = None,
) -> Spectrum:
    """Sample the closed-form spectrum on ``grid``.

    With ``workers > 1`` the grid is split into contiguous chunks evaluated
    concurrently and reassembled in order; every point is computed
    independently so the result does not depend on the worker count.
    """
    w = grid.points()
    if coeffs is None:
        coeffs = coefficients(params, scenario)
    st = stability(build_dynamics(params, coeffs))
    if not st.stable:
        raise InstabilityError(f"no steady state: drift eigenvalue with real part {st.max_real_part:.6g}")
    if workers > 1 and w.size >= 2 * workers:
        chunks = np.array_split(w, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: dns_closed_form(c, params, scenario, coeffs), chunks))
        values = np.concatenate(parts)
    else:
        values = dns_closed_form(w, params, scenario, coeffs)
    return Spectrum(
        frequencies=w,
        values=values,
        scenario=scenario,
        metadata={"grid": [grid.omega_min, grid.omega_max, grid.n_points, grid.spacing]},
    )


@dataclass(frozen=True)
class Peak:
    center: float
    height: float
    width: float


@dataclass(frozen=True)
class PeakSet:
    peaks: List[Peak]

    def __len__(self):
        return len(self.peaks)

    @property
    def centers(self):
        return [p.center for p in self.peaks]


def find_peaks(spec: Spectrum, prominence_rel: float = 1e-3) -> PeakSet:
    """Local maxima whose prominence exceeds ``prominence_rel * max(values)``.

    Widths are full widths at half prominence, interpolated in frequency.
    """
    v = np.asarray(spec.values, dtype=float)
    if v.size < 3:
        raise ValueError("peak search needs at least 3 samples")
    top = float(v.max())
    if top <= 0:
        return PeakSet([])
    idx, props = signal.find_peaks(v, prominence=prominence_rel * top)
    if idx.size == 0:
        return PeakSet([])
    widths = signal.peak_widths(
        v, idx, rel_height=0.5, prominence_data=(props["prominences"], props["left_bases"], props["right_bases"])
    )
    pos = np.arange(v.size)
    left = np.interp(widths[2], pos, spec.frequencies)
    right = np.interp(widths[3], pos, spec.frequencies)
    peaks = [
        Peak(center=float(spec.frequencies[i]), height=float(v[i]), width=float(r - l))
        for i, l, r in zip(idx, left, right)
    ]
    return PeakSet(peaks)
