"""Steady-state covariances, all-optical correlations and the C1 sweep."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .coefficients import GravityCoefficients, coefficients
from .core import Scenario, SystemParameters
from .dynamics import MODE_X, MODE_Y, OPTICAL, LinearDynamics, build_dynamics, stability
from .errors import ConfigError, InstabilityError, NumericError
from .gaussian import gaussian_discord, symplectic_eigenvalues

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10


class LyapunovAccuracyWarning(RuntimeWarning):
    pass


def lyapunov_residual(A, sigma, D) -> float:
    """Relative residual ``||A s + s A^T + D||_F / ||D||_F``."""
    R = A @ sigma + sigma @ A.T + D
    return float(np.linalg.norm(R) / np.linalg.norm(D))


def _solve_direct(A, D):
    return linalg.solve_continuous_lyapunov(A, -D)


def _solve_blocks(A, D, blocks, max_iter=100, rtol=1e-15):
    """Block Gauss-Seidel on a weakly coupled two-block system.

    Each diagonal block is a Lyapunov equation and the off-diagonal block a
    Sylvester equation whose right-hand side is proportional to the
    coupling, so tiny cross-covariances come out with full relative
    precision instead of being buried under round-off of the large entries.
    Returns None if the iteration does not converge.
    """
    I, J = (np.asarray(b) for b in blocks)
    Axx, Axy = A[np.ix_(I, I)], A[np.ix_(I, J)]
    Ayx, Ayy = A[np.ix_(J, I)], A[np.ix_(J, J)]
    Dxx, Dxy, Dyy = D[np.ix_(I, I)], D[np.ix_(I, J)], D[np.ix_(J, J)]
    K = np.zeros((I.size, J.size))
    Sxx = Syy = None
    for _ in range(max_iter):
        Sxx_new = linalg.solve_continuous_lyapunov(Axx, -(Dxx + Axy @ K.T + K @ Axy.T))
        Syy_new = linalg.solve_continuous_lyapunov(Ayy, -(Dyy + Ayx @ K + K.T @ Ayx.T))
        Sxx_new = 0.5 * (Sxx_new + Sxx_new.T)
        Syy_new = 0.5 * (Syy_new + Syy_new.T)
        K_new = linalg.solve_sylvester(Axx, Ayy.T, -(Dxy + Axy @ Syy_new + Sxx_new @ Ayx.T))
        done = Sxx is not None and (
            np.linalg.norm(Sxx_new - Sxx) <= rtol * np.linalg.norm(Sxx_new)
            and np.linalg.norm(Syy_new - Syy) <= rtol * np.linalg.norm(Syy_new)
            and np.linalg.norm(K_new - K) <= rtol * max(np.linalg.norm(K_new), 1e-300)
        )
        Sxx, Syy, K = Sxx_new, Syy_new, K_new
        if done or not (np.any(Axy) or np.any(Ayx) or np.any(Dxy)):
            break
    else:
        return None
    n = A.shape[0]
    S = np.zeros((n, n))
    S[np.ix_(I, I)] = Sxx
    S[np.ix_(J, J)] = Syy
    S[np.ix_(I, J)] = K
    S[np.ix_(J, I)] = K.T
    return S


def _balance(A):
    """Diagonal scaling ``t`` with ``A = T A_b T^-1``, ``T = diag(t)``, powers of two only."""
    # the unused permutation output triggers a harmless cast warning in scipy
    with np.errstate(invalid="ignore"):
        _, (t, _) = linalg.matrix_balance(A, permute=False, separate=True)
    return t


def solve_lyapunov(A, D, blocks: Optional[Sequence[Sequence[int]]] = None) -> np.ndarray:
    """Solve ``A s + s A^T + D = 0`` for a stable ``A``.

    The system is first balanced by an exact diagonal similarity, which
    matters when entries span many decades. If ``blocks`` (two
    complementary index sets) is given the blockwise solver is tried;
    otherwise, or if it fails to converge, a direct Bartels-Stewart solve.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    t = _balance(A)
    Ab = A * (1.0 / t)[:, None] * t[None, :]
    Db = D / np.outer(t, t)
    sigma = None
    if blocks is not None:
        sigma = _solve_blocks(Ab, Db, blocks)
        if sigma is None:
            log.debug("block iteration did not converge; using direct solve")
    if sigma is None:
        sigma = _solve_direct(Ab, Db)
    sigma = 0.5 * (sigma + sigma.T) * np.outer(t, t)
    res = lyapunov_residual(A, sigma, D)
    if not res <= RESIDUAL_TOL:
        warnings.warn(
            f"Lyapunov residual {res:.3e} exceeds {RESIDUAL_TOL:g} of ||D||",
            LyapunovAccuracyWarning,
            stacklevel=2,
        )
    return sigma


def lyapunov_steady_state(dyn: LinearDynamics) -> np.ndarray:
    """Steady-state covariance of the fluctuation system (vacuum = I/2)."""
    st = stability(dyn)
    if not st.stable:
        raise InstabilityError(f"drift has an eigenvalue with real part {st.max_real_part:.6g} >= 0")
    return solve_lyapunov(dyn.drift, dyn.diffusion, blocks=(MODE_X, MODE_Y))


def integrate_covariance(A, D, t_final: float) -> np.ndarray:
    """Covariance at time >= ``t_final`` from ``ds/dt = A s + s A^T + D``, ``s(0) = 0``.

    The flow is integrated exactly over a short step ``h`` (Van Loan's
    block exponential), then propagated by repeated doubling
    ``s(2t) = s(t) + F(t) s(t) F(t)^T``. The final time is ``h * 2^k``.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    t = _balance(A)
    A = A * (1.0 / t)[:, None] * t[None, :]
    D = D / np.outer(t, t)
    n = A.shape[0]
    norm = np.linalg.norm(A, 1)
    k = max(0, math.ceil(math.log2(max(t_final * norm / 0.5, 1.0))))
    h = t_final / 2.0**k
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = -A
    big[:n, n:] = D
    big[n:, n:] = A.T
    E = linalg.expm(big * h)
    F = E[n:, n:].T
    S = F @ E[:n, n:]
    S = 0.5 * (S + S.T)
    for _ in range(k):
        S = S + F @ S @ F.T
        S = 0.5 * (S + S.T)
        F = F @ F
    return S * np.outer(t, t)


def optical_block(sigma_full) -> np.ndarray:
    sigma_full = np.asarray(sigma_full)
    return sigma_full[np.ix_(OPTICAL, OPTICAL)].copy()


def sigma_tot(sigma_optical) -> float:
    """Entrywise 1-norm of the 2x2 block coupling the two cavity modes."""
    s = np.asarray(sigma_optical)
    return float(np.abs(s[0:2, 2:4]).sum())


def sigma_offdiag_all(sigma_optical) -> float:
    """1-norm of every off-diagonal entry above the diagonal, within-mode ones included."""
    s = np.asarray(sigma_optical)
    return float(np.abs(np.triu(s, k=1)).sum())


@dataclass(frozen=True, eq=False)
class CovarianceReport:
    sigma_full: np.ndarray
    sigma_optical: np.ndarray
    sigma_tot: float
    sigma_offdiag_all: float
    discord: float  # measurement on the y cavity, nats
    discord_yx: float  # measurement on the x cavity, nats
    stable: bool
    scenario: Scenario
    residual: float
    min_symplectic_eigenvalue: float


def covariance_report(
    params: SystemParameters,
    scenario: Scenario,
    coeffs: Optional[GravityCoefficients] = None,
    base: str = "e",
) -> CovarianceReport:
    if coeffs is None:
        coeffs = coefficients(params, scenario)
    dyn = build_dynamics(params, coeffs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LyapunovAccuracyWarning)
        sigma = lyapunov_steady_state(dyn)
    opt = optical_block(sigma)
    return CovarianceReport(
        sigma_full=sigma,
        sigma_optical=opt,
        sigma_tot=sigma_tot(opt),
        sigma_offdiag_all=sigma_offdiag_all(opt),
        discord=gaussian_discord(opt, measured=2, base=base),
        discord_yx=gaussian_discord(opt, measured=1, base=base),
        stable=True,
        scenario=scenario,
        residual=lyapunov_residual(dyn.drift, sigma, dyn.diffusion),
        min_symplectic_eigenvalue=float(symplectic_eigenvalues(sigma).min()),
    )


@dataclass(frozen=True, eq=False)
class SweepResult:
    control: np.ndarray
    sigma_tot: np.ndarray
    discord: np.ndarray
    discord_yx: np.ndarray
    stability: np.ndarray
    scenario: Scenario


def sweep_c1(
    params_template: SystemParameters,
    control: Sequence[float],
    scenario: Scenario,
    workers: int = 1,
    base: str = "e",
) -> SweepResult:
    """sigma_tot and discord as functions of the linear coefficient C1,x.

    The geometry is held fixed with d_x = d_y, so C1,x = C1,y throughout;
    the control value is reached by rescaling the source mass m1, which
    scales every gravity coefficient (and hence m1*m2) by the same factor.
    Unstable points are flagged and carry NaN values.
    """
    g = params_template.geometry
    if not math.isclose(g.d_x, g.d_y, rel_tol=1e-12):
        raise ConfigError("the C1 sweep needs d_x = d_y so that C1,x = C1,y")
    control = np.asarray(control, dtype=float)
    if control.ndim != 1 or control.size == 0 or np.any(np.diff(control) <= 0):
        raise ConfigError("control values must be a non-empty, strictly increasing sequence")
    base_coeffs = coefficients(params_template, scenario)
    ref = base_coeffs.c1_x

    def point(c1x):
        factor = c1x / ref
        p = replace(params_template, m1=params_template.m1 * factor)
        cf = base_coeffs.scaled(factor)
        try:
            rep = covariance_report(p, scenario, coeffs=cf, base=base)
        except InstabilityError:
            return math.nan, math.nan, math.nan, False
        return rep.sigma_tot, rep.discord, rep.discord_yx, True

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(point, control))
    else:
        rows = [point(c) for c in control]
    st, dxy, dyx, ok = (np.array(col) for col in zip(*rows))
    if not ok.any():
        raise InstabilityError("no stable point in the requested control range")
    return SweepResult(
        control=control,
        sigma_tot=st.astype(float),
        discord=dxy.astype(float),
        discord_yx=dyx.astype(float),
        stability=ok.astype(bool),
        scenario=scenario,
    )
