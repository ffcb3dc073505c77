import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravprobe.coefficients import coefficients
from gravprobe.config import preset_params
from gravprobe.core import CONSTANTS, Scenario, bose_occupation
from gravprobe.correlations import lyapunov_steady_state
from gravprobe.dynamics import (
    MOM,
    POS,
    build_dynamics,
    effective_response,
    mean_field,
    mechanical_noise_psd,
    omega_coth,
    stability,
    thermal_diffusion,
    x_zpf,
)
from conftest import dark

FIG4 = preset_params("fig4")


def _zero(params):
    return coefficients(params, Scenario.QUANTUM_ALPHA).scaled(0.0)


def test_matrices_are_read_only(fig4):
    dyn = build_dynamics(fig4, coefficients(fig4, Scenario.QUANTUM_ALPHA))
    with pytest.raises(ValueError):
        dyn.drift[0, 0] = 1.0


def test_bare_oscillator_eigenvalues(fig4):
    p = dark(fig4)
    dyn = build_dynamics(p, _zero(p))
    w, g = p.mech_x.omega, p.mech_x.gamma
    ev = np.linalg.eigvals(dyn.drift[:2, :2])
    expected = np.roots([1.0, g, w * w])
    assert np.sort_complex(ev) == pytest.approx(np.sort_complex(expected), rel=1e-12)


def test_cross_coupling_is_symmetric(fig3):
    c = coefficients(fig3, Scenario.QUANTUM_ALPHA)
    A = build_dynamics(fig3, c).drift
    assert A[MOM["x"], POS["y"]] == A[MOM["y"], POS["x"]] != 0.0
    cl = build_dynamics(fig3, coefficients(fig3, Scenario.CLASSICAL)).drift
    assert cl[MOM["x"], POS["y"]] == 0.0


def test_mean_field_amplitude(fig3):
    mf = mean_field(fig3.cav_x)
    cav = fig3.cav_x
    assert mf.a_bar == pytest.approx(cav.drive / complex(cav.kappa, cav.detuning), rel=1e-15)
    assert mf.n_photon == pytest.approx(abs(mf.a_bar) ** 2)


def test_presets_are_stable(fig3, fig4):
    for p in (fig3, fig4):
        for sc in Scenario:
            assert stability(build_dynamics(p, coefficients(p, sc))).stable


def test_blue_detuning_can_destabilise(fig3):
    p = replace(fig3, cav_y=replace(fig3.cav_y, detuning=fig3.mech_y.omega))
    st_ = stability(build_dynamics(p, coefficients(p, Scenario.QUANTUM_ALPHA)))
    assert not st_.stable and st_.max_real_part > 0


def test_noise_psd_matches_diffusion_on_resonance(fig4):
    for axis in ("x", "y"):
        w = fig4.mech(axis).omega
        assert mechanical_noise_psd(w, fig4, axis) == pytest.approx(thermal_diffusion(fig4, axis), rel=1e-14)


def test_omega_coth_zero_limit():
    T = 1e-3
    lim = omega_coth(0.0, T, CONSTANTS.hbar, CONSTANTS.kB)
    assert lim == pytest.approx(2 * CONSTANTS.kB * T / CONSTANTS.hbar, rel=1e-15)
    tiny = omega_coth(1e-3, T, CONSTANTS.hbar, CONSTANTS.kB)
    assert tiny == pytest.approx(lim, rel=1e-12)


def test_effective_response_without_light(fig4):
    p = dark(fig4)
    c = coefficients(p, Scenario.QUANTUM_ALPHA)
    r = effective_response(p, mean_field(p.cav_x), c, "x")
    w = np.array([1e6, 6e7])
    assert r.omega_eff_sq(w) == pytest.approx(p.mech_x.omega**2 - c.c1_x / p.m2, rel=1e-15)
    assert r.gamma_eff(w) == pytest.approx(p.mech_x.gamma, rel=1e-15)


def test_red_detuning_cools(fig4):
    c = coefficients(fig4, Scenario.QUANTUM_ALPHA)
    r = effective_response(fig4, mean_field(fig4.cav_x), c, "x")
    assert r.gamma_eff(fig4.mech_x.omega) > fig4.mech_x.gamma


def test_equipartition_classical_limit():
    # hbar w / kB T = 0.005 for an uncoupled oscillator
    p = dark(FIG4)
    T = CONSTANTS.hbar * p.mech_x.omega / (CONSTANTS.kB * 0.005)
    p = replace(p, temperature=T)
    dyn = build_dynamics(p, _zero(p))
    sigma = lyapunov_steady_state(dyn)
    var = dyn.length_scale["x"] ** 2 * sigma[POS["x"], POS["x"]]
    assert p.m2 * p.mech_x.omega**2 * var == pytest.approx(CONSTANTS.kB * T, rel=1e-2)


@settings(max_examples=40, deadline=None)
@given(T=st.floats(1e-6, 1e4))
def test_thermal_momentum_variance(T):
    p = replace(dark(FIG4), temperature=T)
    sigma = lyapunov_steady_state(build_dynamics(p, _zero(p)))
    n = bose_occupation(p.mech_x.omega, T)
    assert sigma[MOM["x"], MOM["x"]] == pytest.approx(n + 0.5, rel=1e-6)
    assert sigma[MOM["y"], MOM["y"]] == pytest.approx(bose_occupation(p.mech_y.omega, T) + 0.5, rel=1e-6)


def test_zero_point_length(fig4):
    assert x_zpf(fig4, "x") == pytest.approx(math.sqrt(CONSTANTS.hbar / (2 * fig4.m2 * fig4.mech_x.omega)))
