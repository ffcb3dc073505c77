"""Gaussian-state utilities: symplectic spectra, physicality, two-mode discord.

Covariance matrices use the ``(x1, p1, x2, p2, ...)`` ordering and the
convention ``sigma = <{dR, dR^T}>/2``, so the vacuum is ``I/2`` and a state
is physical iff every symplectic eigenvalue is at least 1/2.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from .errors import UnphysicalStateError

# Working precision for discord: weakly correlated states give discord many
# orders of magnitude below the O(1) entropies it is assembled from.
DISCORD_DPS = 100


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(sigma) -> np.ndarray:
    """Sorted symplectic eigenvalues (each listed once)."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] // 2
    ev = np.linalg.eigvals(1j * symplectic_form(n) @ sigma)
    return np.sort(np.abs(ev.real))[::2]


def is_physical(sigma, tol: float = 1e-9) -> bool:
    return bool(symplectic_eigenvalues(sigma).min() >= 0.5 - tol)


def _entropy_term(x):
    """Von Neumann entropy (nats) of a mode with symplectic eigenvalue ``x`` (vacuum = 1)."""
    if x <= 1:
        return mpmath.mpf(0)
    a = (x + 1) / 2
    b = (x - 1) / 2
    return a * mpmath.log(a) - b * mpmath.log(b)


def _invariants(sigma):
    s = mpmath.matrix([[mpmath.mpf(float(v)) * 2 for v in row] for row in np.asarray(sigma)])
    alpha = s[0:2, 0:2]
    beta = s[2:4, 2:4]
    gamma = s[0:2, 2:4]
    return mpmath.det(alpha), mpmath.det(beta), mpmath.det(gamma), mpmath.det(s)


def _symplectic_pair(A, B, C, D):
    delta = A + B + 2 * C
    disc = delta * delta - 4 * D
    if disc < 0:
        disc = mpmath.mpf(0)
    root = mpmath.sqrt(disc)
    nu_m = mpmath.sqrt((delta - root) / 2)
    nu_p = mpmath.sqrt((delta + root) / 2)
    return nu_m, nu_p


def _min_conditional_det(A, B, C, D):
    """Smallest conditional determinant of mode 1 after a Gaussian measurement on mode 2."""
    if (D - A * B) ** 2 <= (1 + B) * C * C * (A + D):
        x = C * C + (B - 1) * (D - A)
        return (2 * C * C + (B - 1) * (D - A) + 2 * abs(C) * mpmath.sqrt(x)) / (B - 1) ** 2
    root = mpmath.sqrt(C**4 + (D - A * B) ** 2 - 2 * C * C * (A * B + D))
    return (A * B - C * C + D - root) / (2 * B)


def gaussian_discord(sigma, measured: int = 2, base: str = "e", tol: float = 1e-9) -> float:
    """Gaussian quantum discord of a two-mode state, measurement on one mode.

    Uses the closed-form optimum over Gaussian measurements, expressed in
    the local symplectic invariants ``det alpha, det beta, det gamma,
    det sigma``. Evaluated in extended precision so that discord of very
    weakly correlated states is resolved rather than lost to cancellation.

    Parameters
    ----------
    sigma : (4, 4) array_like
        Covariance matrix, vacuum = I/2.
    measured : {1, 2}
        Which mode is measured.
    base : {"e", "2"}
        Logarithm base of the result (nats or bits).

    Returns
    -------
    float
        Discord, non-negative.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (4, 4):
        raise ValueError("two-mode covariance matrix (4x4) required")
    if measured == 1:
        perm = [2, 3, 0, 1]
        sigma = sigma[np.ix_(perm, perm)]
    elif measured != 2:
        raise ValueError("measured must be 1 or 2")
    if not np.any(sigma[0:2, 2:4]):
        return 0.0
    nu_min = symplectic_eigenvalues(sigma).min()
    if nu_min < 0.5 - tol:
        raise UnphysicalStateError("covariance matrix is not a physical Gaussian state", nu_min)

    with mpmath.workdps(DISCORD_DPS):
        A, B, C, D = _invariants(sigma)
        nu_m, nu_p = _symplectic_pair(A, B, C, D)
        e_min = _min_conditional_det(A, B, C, D)
        value = (
            _entropy_term(mpmath.sqrt(B))
            - _entropy_term(nu_m)
            - _entropy_term(nu_p)
            + _entropy_term(mpmath.sqrt(e_min))
        )
        result = float(value)
    result = max(result, 0.0)
    if base == "2":
        result /= math.log(2.0)
    elif base != "e":
        raise ValueError("base must be 'e' or '2'")
    return result


def two_mode_squeezed_vacuum(r: float) -> np.ndarray:
    c, s = math.cosh(2 * r) / 2, math.sinh(2 * r) / 2
    return np.array(
        [
            [c, 0, s, 0],
            [0, c, 0, -s],
            [s, 0, c, 0],
            [0, -s, 0, c],
        ]
    )
