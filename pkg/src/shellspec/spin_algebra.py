"""2x2 spin matrices: Pauli algebra, the coupling matrix and the jump matrices.

Every function accepts scalar or batched input; batched matrices carry the
spin indices in the last two axes.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfiningCouplingError, ShellSpecError

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

SMALL_NU = 1e-4
EXCEPTIONAL_TOL = 1e-6


class ExceptionalCouplingError(ShellSpecError):
    """d lies on (or numerically at) the exceptional set (2k+1)^2 pi^2."""


def sigma_dot(v) -> np.ndarray:
    """sigma . v = sigma1 v1 + sigma2 v2 for v of shape (..., 2)."""
    v = np.asarray(v)
    out = np.zeros(v.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 1] = v[..., 0] - 1j * v[..., 1]
    out[..., 1, 0] = v[..., 0] + 1j * v[..., 1]
    return out


def _bcast(x):
    return np.asarray(x)[..., None, None]


def exp2x2(a) -> np.ndarray:
    """Closed-form exponential of 2x2 matrices.

    exp(A) = e^{tr/2} (cos nu I + sin(nu)/nu (A - tr/2 I)), nu^2 = det A - (tr/2)^2.
    A short Taylor expansion of cos and sinc replaces the ratio when |nu| is small.
    """
    a = np.asarray(a, dtype=complex)
    half = 0.5 * (a[..., 0, 0] + a[..., 1, 1])
    shifted = a - _bcast(half) * IDENTITY
    det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    nu2 = det - half * half
    nu = np.sqrt(nu2)
    small = np.abs(nu) < SMALL_NU
    safe_nu = np.where(small, 1.0, nu)
    cos_nu = np.where(small, 1 - nu2 / 2 + nu2 * nu2 / 24, np.cos(safe_nu))
    sinc_nu = np.where(small, 1 - nu2 / 6 + nu2 * nu2 / 120, np.sin(safe_nu) / safe_nu)
    return _bcast(np.exp(half)) * (_bcast(cos_nu) * IDENTITY + _bcast(sinc_nu) * shifted)


def coupling_matrix_B(eta, tau, lam, t) -> np.ndarray:
    """B = eta I + tau sigma3 + lam sigma.t; the anomalous magnetic term is not part of B."""
    eta, tau, lam = (np.asarray(v, dtype=float) for v in (eta, tau, lam))
    return _bcast(eta) * IDENTITY + _bcast(tau) * SIGMA3 + _bcast(lam) * sigma_dot(t)


def boundary_matrices_M(eta, tau, lam, omega, n, t):
    """Return (M_plus, M_minus, Mt_plus, Mt_minus).

    M_pm = +-i sigma.n + (eta I + tau sigma3 + lam sigma.t + omega sigma.n)/2
    Mt_pm = -+i sigma.n + (eta I - tau sigma3 - lam sigma.t - omega sigma.n)/2
    """
    sn = sigma_dot(n)
    st = sigma_dot(t)
    eta, tau, lam, omega = (_bcast(np.asarray(v, dtype=float)) for v in (eta, tau, lam, omega))
    plus_part = 0.5 * (eta * IDENTITY + tau * SIGMA3 + lam * st + omega * sn)
    tilde_part = 0.5 * (eta * IDENTITY - tau * SIGMA3 - lam * st - omega * sn)
    return (
        1j * sn + plus_part,
        -1j * sn + plus_part,
        -1j * sn + tilde_part,
        1j * sn + tilde_part,
    )


def invariant_d(eta, tau, lam):
    return np.asarray(eta) ** 2 - np.asarray(tau) ** 2 - np.asarray(lam) ** 2


def transmission_matrix_R(eta, tau, lam, n, t) -> np.ndarray:
    """Jump matrix mapping the exterior trace to the interior trace.

    R = 4/(4+d) ((4-d)/4 I + i eta sigma.n + tau sigma.t - lam sigma3).
    """
    d = invariant_d(eta, tau, lam)
    if np.any(np.abs(d + 4.0) < 1e-12):
        raise ConfiningCouplingError("d = -4: the interior and exterior decouple")
    eta, tau, lam, d = (_bcast(np.asarray(v, dtype=float)) for v in (eta, tau, lam, d))
    body = (4 - d) / 4 * IDENTITY + 1j * eta * sigma_dot(n) + tau * sigma_dot(t) - lam * SIGMA3
    return 4 / (4 + d) * body


def exp_shell(eta, tau, lam, n, t) -> np.ndarray:
    """exp(i sigma.n B), the jump accumulated across a thin layer carrying B."""
    a = 1j * np.einsum("...ij,...jk->...ik", sigma_dot(n), coupling_matrix_B(eta, tau, lam, t))
    return exp2x2(a)


def nearest_odd_half_pi(d: float) -> float:
    """Distance of sqrt(d)/2 from the set {(k + 1/2) pi}; infinite for d <= 0."""
    if d <= 0:
        return np.inf
    x = np.sqrt(d) / 2
    k = np.floor(x / np.pi)
    return float(abs(x - (k + 0.5) * np.pi))


def check_not_exceptional(d) -> None:
    for value in np.atleast_1d(d):
        if nearest_odd_half_pi(float(value)) < EXCEPTIONAL_TOL:
            raise ExceptionalCouplingError(f"d = {value} lies on the exceptional set")
