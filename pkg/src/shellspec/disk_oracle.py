"""Separation of variables on the disk of radius R: exact references for the numerics.

In polar coordinates the free Dirac equation preserves the angular channels

    psi = (F(r) e^{i n theta}, G(r) e^{i (n+1) theta}),   n in Z,

and its solutions regular at the origin and decaying at infinity are

    inside:  F = I_n(w r),  G = -i w I_{n+1}(w r) / (m + z)
    outside: F = K_n(w r),  G =  i w K_{n+1}(w r) / (m + z)

with w = sqrt(m^2 - z^2). On the circle sigma.n and sigma.t act on the
channel amplitudes (F, G) as [[0, 1], [1, 0]] and [[0, -i], [i, 0]], so the
jump matrix R and the coupling matrix B become constant 2x2 matrices.
"""

from __future__ import annotations

import numpy as np
import scipy.special as sp
from scipy.optimize import brentq

from .couplings import Couplings
from .errors import ConfiningCouplingError, NumericalFailure

MAX_CHANNEL = 40
SIGMA_N = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_T = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.diag([1.0, -1.0]).astype(complex)


def channel_R(eta: float, tau: float, lam: float) -> np.ndarray:
    d = eta * eta - tau * tau - lam * lam
    if abs(d + 4) < 1e-12:
        raise ConfiningCouplingError("d = -4")
    return 4 / (4 + d) * ((4 - d) / 4 * np.eye(2) + 1j * eta * SIGMA_N + tau * SIGMA_T - lam * SIGMA_3)


def channel_B(eta: float, tau: float, lam: float) -> np.ndarray:
    return eta * np.eye(2) + tau * SIGMA_3 + lam * SIGMA_T


def _ratios(n: int, x: float):
    """I_{n+1}/I_n and K_{n+1}/K_n at x > 0 using exponentially scaled functions."""
    i_ratio = sp.ive(n + 1, x) / sp.ive(n, x)
    k_ratio = sp.kve(n + 1, x) / sp.kve(n, x)
    return i_ratio, k_ratio


def interior_spinor(n: int, z: float, m: float, R: float, r):
    """Channel amplitudes (F, G) of the regular solution, normalised by I_n(w R)."""
    w = np.sqrt(m * m - z * z)
    r = np.asarray(r, dtype=float)
    scale = sp.ive(n, w * R) * np.exp(w * R)
    F = sp.iv(n, w * r) / scale
    G = -1j * w * sp.iv(n + 1, w * r) / ((m + z) * scale)
    return F, G


def exterior_spinor(n: int, z: float, m: float, R: float, r):
    """Channel amplitudes (F, G) of the decaying solution, normalised by K_n(w R)."""
    w = np.sqrt(m * m - z * z)
    r = np.asarray(r, dtype=float)
    F = sp.kve(n, w * r) * np.exp(-w * (r - R)) / sp.kve(n, w * R)
    G = 1j * w * sp.kve(n + 1, w * r) * np.exp(-w * (r - R)) / ((m + z) * sp.kve(n, w * R))
    return F, G


def boundary_values(n: int, z, m: float, R: float):
    """(inside, outside) channel vectors at r = R, each normalised to F = 1.

    ``z`` may be an array of real points in the gap; vectors then carry a
    trailing axis of length 2.
    """
    z = np.asarray(z, dtype=float)
    w = np.sqrt(m * m - z * z)
    i_ratio, k_ratio = _ratios(n, w * R)
    a = w / (m + z)
    ones = np.ones_like(z)
    inside = np.stack([ones, -1j * a * i_ratio], axis=-1)
    outside = np.stack([ones, 1j * a * k_ratio], axis=-1)
    return inside, outside


def mode_dispersion(n: int, z, m: float, R: float, c: Couplings):
    """Real matching function for channel n; its zeros in the gap are eigenvalues.

    det[u_in(R), R_c u_out(R)] / i with both solutions normalised at r = R.
    Accepts a scalar or an array of z.
    """
    eta, tau, lam = c.as_tuple()
    inside, outside = boundary_values(n, z, m, R)
    right = outside @ channel_R(eta, tau, lam).T
    det = inside[..., 0] * right[..., 1] - inside[..., 1] * right[..., 0]
    val = (det / 1j).real
    return float(val) if np.ndim(val) == 0 else val


def circle_mode_Cz(n: int, z: complex, m: float, R: float) -> np.ndarray:
    """2x2 action of C_z on densities (a e^{i n theta}, b e^{i (n+1) theta}) on the circle.

    Phi_z rho equals alpha u_in inside and beta u_out outside; the jump relation
    T_+ - T_- = -i sigma.n rho fixes alpha and beta, and C_z rho is the mean trace.
    """
    w = np.sqrt(m * m - z * z + 0j)
    x = w * R
    a = w / (m + z)
    u_in = np.array([1.0, -1j * a * sp.iv(n + 1, x) / sp.iv(n, x)])
    u_out = np.array([1.0, 1j * a * sp.kv(n + 1, x) / sp.kv(n, x)])
    out = np.empty((2, 2), dtype=complex)
    for col, rho in enumerate(np.eye(2)):
        jump = -1j * SIGMA_N @ rho
        alpha, beta = np.linalg.solve(np.stack([u_in, -u_out], axis=1), jump)
        out[:, col] = 0.5 * (alpha * u_in + beta * u_out)
    return out


def _sign_change_roots(func, lo: float, hi: float, samples: int, xtol: float = 1e-15):
    grid = np.linspace(lo, hi, samples)
    vals = func(grid)
    roots = []
    for k in range(samples - 1):
        if vals[k] == 0.0:
            roots.append(grid[k])
        elif vals[k] * vals[k + 1] < 0:
            roots.append(brentq(lambda z: float(func(z)), grid[k], grid[k + 1], xtol=xtol, rtol=1e-15, maxiter=200))
    return roots


def disk_eigenvalues(
    c: Couplings, m: float = 1.0, R: float = 1.0, max_channel: int = MAX_CHANNEL, samples: int = 2000
) -> list[tuple[float, int]]:
    """Sorted (eigenvalue, channel) pairs in the gap over channels |n| <= max_channel."""
    gap = abs(m)
    lo, hi = -gap * (1 - 1e-9), gap * (1 - 1e-9)
    found = []
    for n in range(-max_channel, max_channel + 1):
        for z in _sign_change_roots(lambda zz: mode_dispersion(n, zz, m, R, c), lo, hi, samples):
            found.append((float(z), n))
    return sorted(found)


def bessel_j_zeros(n: int, count: int, tol: float = 1e-13) -> np.ndarray:
    """First ``count`` positive zeros of J_n by bracketing, bisection and Newton polishing."""
    n = abs(n)
    zeros = []
    # zeros of J_n interlace with spacing close to pi; start above the first turning point
    x = max(n, 1e-3)
    step = 0.25
    prev = sp.jv(n, x)
    while len(zeros) < count:
        nxt = x + step
        val = sp.jv(n, nxt)
        if prev == 0.0 or prev * val < 0:
            a, b = x, nxt
            fa = prev
            for _ in range(60):
                mid = 0.5 * (a + b)
                fm = sp.jv(n, mid)
                if fa * fm <= 0:
                    b = mid
                else:
                    a, fa = mid, fm
                if b - a < 1e-6:
                    break
            root = 0.5 * (a + b)
            for _ in range(20):
                f = sp.jv(n, root)
                df = 0.5 * (sp.jv(n - 1, root) - sp.jv(n + 1, root))
                delta = f / df
                root -= delta
                if abs(delta) < 1e-16 * root:
                    break
            if abs(sp.jv(n, root)) > tol:
                raise NumericalFailure(f"Bessel zero polishing failed for J_{n}")
            zeros.append(root)
        x, prev = nxt, val
    return np.array(zeros)


def _dirichlet_modes(R: float, count: int) -> list[tuple[float, int, int]]:
    """(value, bessel order, zero index) for the lowest modes, one entry per order."""
    cands = []
    n = 0
    while True:
        zs = bessel_j_zeros(n, count)
        cands.extend((z * z / (R * R), n, k + 1) for k, z in enumerate(zs))
        cands.sort()
        if zs[0] ** 2 / R**2 > cands[min(count, len(cands)) - 1][0] and len(cands) >= count:
            break
        n += 1
    # each order n >= 1 carries multiplicity two; keep enough entries to cover count
    out, total = [], 0
    for value, order, index in cands:
        if total >= count:
            break
        out.append((value, order, index))
        total += 1 if order == 0 else 2
    return out


def disk_dirichlet_eigenvalues(R: float, count: int) -> list[tuple[float, int]]:
    """Lowest Dirichlet Laplacian eigenvalues on the disk of radius R as (value, multiplicity).

    Values are listed once; multiplicities are 1 for radial modes and 2 otherwise.
    The list covers at least ``count`` eigenvalues counted with multiplicity.
    """
    return [(v, 1 if n == 0 else 2) for v, n, _ in _dirichlet_modes(R, count)]


def zigzag_spectrum(R: float, m: float, count: int) -> list[tuple[float, int, int, int]]:
    """Positive embedded eigenvalues sqrt(m^2 + lambda_k) for zig-zag couplings on the disk.

    Entries are (value, multiplicity, bessel order, zero index). The negative
    eigenvalues are the mirror image; +-m are eigenvalues of infinite
    multiplicity and are not listed.
    """
    return [
        (float(np.sqrt(m * m + v)), 1 if n == 0 else 2, n, k) for v, n, k in _dirichlet_modes(R, count)
    ]


def _contour_gradient(g, g_conj, orientation: int, z: np.ndarray, radius, nodes: int = 64):
    """Gradient (d1 f, d2 f) of f(x1, x2) = g(x1 + i*orientation*x2).

    Re f and Im f are continued analytically in x1 and in x2 separately
    (g_conj(w) = conj(g(conj(w)))) and each partial derivative is the Cauchy
    integral over a circle of the given radius, summed by the trapezoid rule.
    Nothing about the holomorphy of f in x1 + i x2 is assumed.
    """
    x1, x2 = z.real.astype(complex), z.imag.astype(complex)
    radius = np.broadcast_to(np.asarray(radius, dtype=float), z.shape)

    def parts(a, b):
        f = g(a + 1j * orientation * b)
        fc = g_conj(a - 1j * orientation * b)
        return 0.5 * (f + fc), (f - fc) / 2j

    theta = 2 * np.pi * np.arange(nodes) / nodes
    grads = []
    for axis in range(2):
        d_re = np.zeros(z.shape, dtype=complex)
        d_im = np.zeros(z.shape, dtype=complex)
        for th in theta:
            shift = radius * np.exp(1j * th)
            re, im = parts(x1 + shift, x2) if axis == 0 else parts(x1, x2 + shift)
            d_re += re * np.exp(-1j * th) / radius
            d_im += im * np.exp(-1j * th) / radius
        # derivatives of real-analytic functions are real on the real slice
        grads.append((d_re.real + 1j * d_im.real) / nodes)
    return grads


def antiholomorphic_kernel_check(m: float, k: int, points: int = 100, seed: int = 0) -> float:
    """Largest residual of the zig-zag zero modes at random sample points.

    Interior: f = (0, conj(x)^k) should satisfy D f + m f = 0 in the unit disk.
    Exterior: f = ((x - x0)^(-k), 0), x0 inside and k >= 2, should satisfy
    D f - m f = 0 outside. Here D = [[m, -2i d_z], [-2i d_zbar, -m]] and the
    derivatives are contour integrals of the continued real and imaginary parts.
    Residuals are relative to max(1, |f|).
    """
    if k > 20 or k < 0:
        raise ValueError("k must lie in 0..20")
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0, 2 * np.pi, points)
    zin = np.sqrt(rng.uniform(0, 1, points)) * 0.95 * np.exp(1j * ang)
    f2 = np.conj(zin) ** k
    d1, d2 = _contour_gradient(lambda w: w**k, lambda w: w**k, -1, zin, 0.5)
    dz_f2 = 0.5 * (d1 - 1j * d2)
    inner = np.abs(-2j * dz_f2) / np.maximum(1.0, np.abs(f2))

    x0 = 0.3 + 0.2j
    kk = max(k, 2)
    zout = (1.05 + rng.uniform(0, 2, points)) * np.exp(1j * ang)
    f1 = (zout - x0) ** (-kk)
    reach = 0.4 * np.abs(zout - x0)
    d1, d2 = _contour_gradient(lambda w: (w - x0) ** (-kk), lambda w: (w - np.conj(x0)) ** (-kk), 1, zout, reach)
    dzbar_f1 = 0.5 * (d1 + 1j * d2)
    outer = np.abs(-2j * dzbar_f1) / np.maximum(1.0, np.abs(f1))
    return float(max(np.max(inner), np.max(outer)))
