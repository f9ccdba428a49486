"""Nystrom discretisation of the boundary Cauchy operator C_z and the Birman-Schwinger test.

The kernel of C_z is split, node pair by node pair, into

* a log part L1(s, s') log(4 sin^2((t - t')/2)) integrated with Kress weights,
* an odd Cauchy part A(s, s') cot((t' - t)/2) / 2 integrated with the
  alternating-point rule, which is exact for trigonometric polynomials,
* a smooth remainder integrated with the trapezoid rule,

where t = 2 pi s / length. The splitting coefficients are chosen symmetric so
that the discrete operator satisfies C_z^H = C_{conj z} to rounding error.
Unknowns are ordered node by node, two spin components per node.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .couplings import Couplings, classify, gauge_reduce
from .errors import ConfiningCouplingError, CriticalCouplingError, NumericalFailure
from .geometry import Curve
from .kernels import EULER_GAMMA, SpectralParameter, bessel_ik01, green_phi
from .spin_algebra import coupling_matrix_B, transmission_matrix_R

log = logging.getLogger(__name__)

SCAN_THRESHOLD = 1e-4
REFINE_TOL = 1e-10
NEAR_SINGULAR = 1e-10


class ShellDiscretization:
    """Geometry-dependent quadrature data for N equispaced arc-length nodes."""

    def __init__(self, curve: Curve, n_nodes: int):
        self.curve = curve
        self.nodes = curve.equispaced_nodes(n_nodes)
        N = self.N = n_nodes
        self.length = curve.length
        self.h = 2 * np.pi / N
        self.jac = self.length / (2 * np.pi)
        x = self.nodes.x
        self.zx = x[:, 0] + 1j * x[:, 1]
        tang = self.nodes.t
        self.zt = tang[:, 0] + 1j * tang[:, 1]

        idx = np.arange(N)
        offset = (idx[None, :] - idx[:, None]) % N  # j - i
        diff = self.zx[:, None] - self.zx[None, :]  # x_i - x_j
        self.dz = diff
        off = offset != 0
        self.offdiag = off
        r = np.abs(diff)
        r[~off] = 1.0
        self.r = r

        half = np.pi * np.arange(N) / N  # (t_j - t_i)/2 as a function of the offset
        sin2 = 4 * np.sin(half) ** 2
        logsin = np.zeros(N)
        logsin[1:] = np.log(sin2[1:])
        self.logsin = logsin[offset]

        # Kress weights for the log(4 sin^2) kernel
        n = N // 2
        m = np.arange(1, n)
        tau = 2 * half
        kress = -(2 * np.pi / n) * (np.cos(np.outer(tau, m)) @ (1.0 / m)) - (np.pi / n**2) * np.cos(n * tau)
        self.kress = kress[offset]

        # alternating-point weights for p.v. int cot((t'-t)/2)/2 f(t') dt'
        cot_half = np.zeros(N)
        cot_half[1:] = 0.5 / np.tan(half[1:])
        hil = np.where(np.arange(N) % 2 == 1, 2 * self.h * cot_half, 0.0)
        self.hilbert = hil[offset]
        cot_mat = cot_half[offset]

        # Cauchy part: jac/(x_i - x_j) = A cot/2 + S with symmetric A
        self.cauchy_a = -0.5 * (np.conj(self.zt)[:, None] + np.conj(self.zt)[None, :])
        kern = np.zeros((N, N), dtype=complex)
        kern[off] = self.jac / diff[off]
        rem = kern - self.cauchy_a * cot_mat
        rem[~off] = 0.0
        self.cauchy_s = rem

        self._cache: dict = {}

    # -- single layer with upsampling, for evaluation off the curve --------
    def upsampled(self, count: int):
        if count not in self._cache:
            s = self.length * np.arange(count) / count
            x, t, n, k = _chunked_frames(self.curve, s)
            self._cache[count] = (s, x, t, n)
        return self._cache[count]


def _chunked_frames(curve: Curve, s: np.ndarray, chunk: int = 8192):
    parts = [curve.frames(s[i:i + chunk]) for i in range(0, s.size, chunk)]
    return tuple(np.concatenate(p, axis=0) for p in zip(*parts))


def assemble_Cz(disc: ShellDiscretization, param: SpectralParameter) -> np.ndarray:
    """2N x 2N matrix of C_z acting on node values (weights included)."""
    N = disc.N
    w = param.w
    i0, i1, k0, k1 = bessel_ik01(w * disc.r)
    off = disc.offdiag
    jac, h = disc.jac, disc.h
    lg = disc.logsin

    # scalar log-type kernel from K0: coefficient of log(4 sin^2) and remainder
    l1 = -jac / (4 * np.pi) * i0
    full0 = jac / (2 * np.pi) * k0
    l2 = full0 - l1 * lg
    np.fill_diagonal(l2, jac / (2 * np.pi) * (-EULER_GAMMA - np.log(w * jac / 2)))
    np.fill_diagonal(l1, -jac / (4 * np.pi))
    scal = disc.kress * l1 + h * l2

    # K1 part beyond the Cauchy kernel, multiplied later by sigma.(x_i - x_j)
    r = disc.r
    coeff = 1j * jac / (2 * np.pi)
    q_log = coeff * 0.5 * w * i1 / r
    q_full = coeff * (w * k1 / r - 1.0 / r**2)
    q = disc.kress * q_log + h * (q_full - q_log * lg)
    q[~off] = 0.0

    cauchy = 1j / (2 * np.pi)
    upper = q * np.conj(disc.dz) + cauchy * (disc.hilbert * disc.cauchy_a + h * disc.cauchy_s)
    lower = q * disc.dz + cauchy * (disc.hilbert * np.conj(disc.cauchy_a) + h * np.conj(disc.cauchy_s))

    out = np.empty((N, 2, N, 2), dtype=complex)
    out[:, 0, :, 0] = (param.m + param.z) * scal
    out[:, 1, :, 1] = (param.z - param.m) * scal
    out[:, 0, :, 1] = upper
    out[:, 1, :, 0] = lower
    return out.reshape(2 * N, 2 * N)


def coupling_blocks(disc: ShellDiscretization, c: Couplings) -> np.ndarray:
    eta, tau, lam, _ = c.values(disc.nodes.s)
    return coupling_matrix_B(eta, tau, lam, disc.nodes.t)


def bs_operator(disc: ShellDiscretization, c: Couplings, param: SpectralParameter) -> np.ndarray:
    """I + B C_z as a dense 2N x 2N matrix."""
    N = disc.N
    blocks = coupling_blocks(disc, c)
    cz = assemble_Cz(disc, param).reshape(N, 2, 2 * N)
    out = np.einsum("iab,ibk->iak", blocks, cz).reshape(2 * N, 2 * N)
    out[np.diag_indices(2 * N)] += 1.0
    return out



def _start_vector(size: int) -> np.ndarray:
    rng = np.random.default_rng(size)
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return v / np.linalg.norm(v)


def smallest_singular_value(a: np.ndarray, iterations: int = 60, rtol: float = 1e-13) -> float:
    """sigma_min by inverse iteration on A^H A using one LU factorisation."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(a, check_finite=False)
    except (ValueError, np.linalg.LinAlgError):
        return 0.0
    if np.any(np.diag(lu[0]) == 0):
        return 0.0
    v = _start_vector(a.shape[0])
    est = np.inf
    for _ in range(iterations):
        u = sla.lu_solve(lu, v, check_finite=False)
        nu = np.linalg.norm(u)
        if not np.isfinite(nu) or nu == 0:
            return 0.0
        new = 1.0 / nu
        u /= nu
        v = sla.lu_solve(lu, u, trans=2, check_finite=False)
        v /= np.linalg.norm(v)
        if abs(est - new) <= rtol * new:
            est = new
            break
        est = new
    return float(est)


@dataclass(frozen=True)
class EigenEstimate:
    z: float
    sigma_min: float
    multiplicity: int
    N: int
    curve_kind: str


def _check_admissible(c: Couplings, length: float) -> Couplings:
    report = classify(c, length)
    if report.confining:
        raise ConfiningCouplingError("d = -4: the shell confines, use the interior and exterior problems")
    if report.critical:
        raise CriticalCouplingError("couplings are critical somewhere on the curve")
    eta, tau, lam, omega = c.values(np.linspace(0, length, 64, endpoint=False))
    if np.max(np.abs(omega)) > 0:
        red = gauge_reduce(c, length)
        if not c.is_constant:
            log.warning("gauge reduction with non-constant couplings: results are experimental")
        log.info("anomalous magnetic term removed by gauge reduction, X=%.15g z=%s", red.X, red.z)
        return _check_admissible(red.reduced, length)
    return c


class SigmaMinProfile:
    """sigma_min(I + B C_z) for real z in the gap; counts evaluations."""

    def __init__(self, disc: ShellDiscretization, c: Couplings, m: float):
        self.disc = disc
        self.c = c
        self.m = m
        self.blocks = coupling_blocks(disc, c)
        self.calls = 0

    def matrix(self, z: float) -> np.ndarray:
        N = self.disc.N
        cz = assemble_Cz(self.disc, SpectralParameter(z, self.m)).reshape(N, 2, 2 * N)
        out = np.einsum("iab,ibk->iak", self.blocks, cz).reshape(2 * N, 2 * N)
        out[np.diag_indices(2 * N)] += 1.0
        return out

    def __call__(self, z: float) -> float:
        self.calls += 1
        return smallest_singular_value(self.matrix(z))


def golden_parabolic_minimize(func, a: float, b: float, xtol: float, maxiter: int = 300):
    """Brent's minimiser: golden-section steps with parabolic acceleration.

    Unlike library versions the stopping rule is purely absolute, so the final
    bracket is narrower than ``xtol`` wherever the minimiser lies.
    """
    golden = 0.3819660112501051
    x = w = v = a + golden * (b - a)
    fx = fw = fv = func(x)
    d = e = 0.0
    tol = 0.25 * xtol
    for _ in range(maxiter):
        mid = 0.5 * (a + b)
        if abs(x - mid) <= 2 * tol - 0.5 * (b - a):
            break
        parabolic = False
        if abs(e) > tol:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0:
                p = -p
            q = abs(q)
            if abs(p) < abs(0.5 * q * e) and q * (a - x) < p < q * (b - x):
                e, d = d, p / q
                parabolic = True
                u = x + d
                if u - a < 2 * tol or b - u < 2 * tol:
                    d = tol if mid >= x else -tol
        if not parabolic:
            e = (a - x) if x >= mid else (b - x)
            d = golden * e
        u = x + d if abs(d) >= tol else x + (tol if d >= 0 else -tol)
        fu = func(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    else:
        raise NumericalFailure("minimisation did not reach the requested tolerance")
    return x, fx


def _map_ordered(func, items, threads: int):
    if threads <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def eigenvalue_scan(
    disc: ShellDiscretization,
    c: Couplings,
    m: float,
    grid_size: int = 400,
    threshold: float = SCAN_THRESHOLD,
    refine_tol: float = REFINE_TOL,
    prescan: ShellDiscretization | None = None,
    threads: int = 1,
) -> list[EigenEstimate]:
    """Discrete eigenvalues in the gap (-|m|, |m|) from minima of sigma_min(I + B C_z).

    A grid of ``grid_size`` points is scanned (on ``prescan`` when given, which
    should be a coarser discretisation of the same curve); every interior local
    minimum is refined on ``disc`` by golden-section search with parabolic steps
    applied to sigma_min^2, and kept when the refined sigma_min is below ``threshold``.
    """
    c = _check_admissible(c, disc.length)
    gap = abs(m)
    delta = 1e-3 * gap
    grid = np.linspace(-gap + delta, gap - delta, grid_size)
    coarse = SigmaMinProfile(prescan or disc, c, m)
    fine = coarse if prescan is None else SigmaMinProfile(disc, c, m)
    values = np.array(_map_ordered(coarse, grid, threads))
    idx = [k for k in range(1, grid_size - 1) if values[k] <= values[k - 1] and values[k] < values[k + 1]]
    log.info("scan N=%d: %d candidate minima", (prescan or disc).N, len(idx))

    def refine(k):
        z, _ = golden_parabolic_minimize(lambda zz: fine(zz) ** 2, grid[k - 1], grid[k + 1], refine_tol)
        sv = sla.svdvals(fine.matrix(z), check_finite=False)
        smin = float(sv[-1])
        mult = int(np.sum(sv < 10 * smin)) if smin > 0 else 1
        return EigenEstimate(float(z), smin, mult, disc.N, disc.curve.kind)

    found = _map_ordered(refine, idx, threads)
    return [e for e in found if e.sigma_min < threshold]


# -- layer potentials and the resolvent ----------------------------------------


def single_layer_apply(disc: ShellDiscretization, param: SpectralParameter, density: np.ndarray, points) -> np.ndarray:
    """Phi_z rho(x) = int phi_z(x - y) rho(y) ds(y) at points off the curve.

    The density (node values, shape (N, 2)) is interpolated trigonometrically to
    a grid fine enough that the trapezoid rule stays accurate at the distance of
    the closest target.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    density = np.asarray(density).reshape(disc.N, 2)
    dist = np.min(np.abs((points[:, 0] + 1j * points[:, 1])[:, None] - disc.zx[None, :]), axis=1)
    if np.min(dist) <= 0:
        raise NumericalFailure("target lies on the curve")
    spacing = disc.length / disc.N
    needed = spacing / max(np.min(dist) / 6.0, 1e-12)
    count = disc.N
    while count * 1.0 < disc.N * needed and count < 2**19:
        count *= 2
    s, x, _, _ = disc.upsampled(count) if count != disc.N else (disc.nodes.s, disc.nodes.x, None, None)
    fine = _trig_interpolate(density, count)
    weight = disc.length / count
    out = np.empty((points.shape[0], 2), dtype=complex)
    for i, p in enumerate(points):
        g = green_phi(param, p[None, :] - x)
        out[i] = weight * np.einsum("jab,jb->a", g, fine)
    return out


def _trig_interpolate(values: np.ndarray, count: int) -> np.ndarray:
    N = values.shape[0]
    if count == N:
        return values
    coef = np.fft.fft(values, axis=0)
    padded = np.zeros((count,) + values.shape[1:], dtype=complex)
    half = N // 2
    padded[:half] = coef[:half]
    padded[-half + 1:] = coef[-half + 1:]
    padded[half] = 0.5 * coef[half]
    padded[-half] = 0.5 * coef[half]
    return np.fft.ifft(padded, axis=0) * (count / N)


@dataclass
class SourceField:
    """Spinor source sampled on a quadrature grid: points (Q, 2), weights (Q,), values (Q, 2)."""

    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    center: np.ndarray | None = None
    radius: float | None = None

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(x)
        if self.center is None:
            return np.zeros(x.shape[0], dtype=bool)
        return np.linalg.norm(x - self.center, axis=1) < self.radius


def bump_source(center, radius: float, spinor=(1.0, 0.5j), radial: int = 40, angular: int = 64) -> SourceField:
    """Smooth compactly supported source exp(-1/(1 - r^2/radius^2)) * spinor on a polar grid."""
    xg, wg = np.polynomial.legendre.leggauss(radial)
    rr = 0.5 * radius * (xg + 1)
    wr = 0.5 * radius * wg
    th = 2 * np.pi * np.arange(angular) / angular
    R, TH = np.meshgrid(rr, th, indexing="ij")
    W = (wr[:, None] * rr[:, None]) * np.full_like(TH, 2 * np.pi / angular)
    profile = np.exp(-1.0 / (1.0 - (R / radius) ** 2))
    pts = np.stack([center[0] + R * np.cos(TH), center[1] + R * np.sin(TH)], axis=-1).reshape(-1, 2)
    vals = profile.reshape(-1, 1) * np.asarray(spinor, dtype=complex)[None, :]
    return SourceField(pts, W.ravel(), vals, np.asarray(center, float), float(radius))


def free_resolvent_apply(param: SpectralParameter, source: SourceField, points) -> np.ndarray:
    """(D0 - z)^{-1} f at points away from the support of f."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty((points.shape[0], 2), dtype=complex)
    wf = source.weights[:, None] * source.values
    for i, p in enumerate(points):
        g = green_phi(param, p[None, :] - source.points)
        out[i] = np.einsum("qab,qb->a", g, wf)
    return out


class KreinSolution:
    """u = (D0 - z)^{-1} f - Phi_z (I + B C_z)^{-1} B trace((D0 - z)^{-1} f)."""

    def __init__(self, disc, c, param, source, density, sigma_min):
        self.disc = disc
        self.couplings = c
        self.param = param
        self.source = source
        self.density = density
        self.sigma_min = sigma_min

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return free_resolvent_apply(self.param, self.source, points) - single_layer_apply(
            self.disc, self.param, self.density, points
        )

    def one_sided_traces(self, s, offsets=(1e-3, 5e-4, 2.5e-4)):
        """Richardson-extrapolated interior and exterior traces at arc lengths s."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        x, _, n, _ = self.disc.curve.frames(s)
        traces = []
        for sign in (-1.0, 1.0):
            samples = [self(x + sign * p * n) for p in offsets]
            traces.append(_richardson(samples))
        return traces[0], traces[1]

    def transmission_mismatch(self, s) -> float:
        inner, outer = self.one_sided_traces(s)
        eta, tau, lam, _ = self.couplings.values(np.atleast_1d(s))
        _, t, n, _ = self.disc.curve.frames(np.atleast_1d(s))
        R = transmission_matrix_R(eta, tau, lam, n, t)
        return float(np.max(np.abs(inner - np.einsum("kab,kb->ka", R, outer))))

    def pde_residual(self, points, step: float = 1e-3) -> float:
        """max |(D0 - z)u| at points off the curve and off the support of f."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        grads = []
        for axis in range(2):
            e = np.zeros(2)
            e[axis] = step
            vals = [self(points + k * e) for k in (-2, -1, 1, 2)]
            grads.append((vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step))
        u = self(points)
        m, z = self.param.m, self.param.z
        res = np.empty_like(u)
        # -i sigma . grad u + m sigma3 u - z u
        res[:, 0] = -1j * (grads[0][:, 1] - 1j * grads[1][:, 1]) + (m - z) * u[:, 0]
        res[:, 1] = -1j * (grads[0][:, 0] + 1j * grads[1][:, 0]) - (m + z) * u[:, 1]
        f_here = np.zeros_like(u)
        return float(np.max(np.abs(res - f_here)))


def _richardson(samples):
    """Extrapolate values at offsets p, p/2, p/4 to p = 0 assuming a smooth expansion in p."""
    a, b, c = samples
    first = 2 * b - a
    second = 2 * c - b
    return (4 * second - first) / 3


def krein_resolvent_apply(
    disc: ShellDiscretization, c: Couplings, param: SpectralParameter, source: SourceField
) -> KreinSolution:
    c = _check_admissible(c, disc.length)
    trace = free_resolvent_apply(param, source, disc.nodes.x)
    blocks = coupling_blocks(disc, c)
    rhs = np.einsum("iab,ib->ia", blocks, trace).ravel()
    op = bs_operator(disc, c, param)
    smin = smallest_singular_value(op)
    if smin < NEAR_SINGULAR * max(1.0, np.linalg.norm(op, 1)):
        raise NumericalFailure(f"I + B C_z is numerically singular at z = {param.z}")
    density = np.linalg.solve(op, rhs).reshape(disc.N, 2)
    return KreinSolution(disc, c, param, source, density, smin)


def plemelj_traces(disc: ShellDiscretization, param: SpectralParameter, density: np.ndarray):
    """Interior and exterior traces of Phi_z rho from the jump relation at the nodes."""
    density = np.asarray(density).reshape(disc.N, 2)
    c_rho = (assemble_Cz(disc, param) @ density.ravel()).reshape(disc.N, 2)
    n = disc.nodes.n
    sn = np.stack([n[:, 0] - 1j * n[:, 1], n[:, 0] + 1j * n[:, 1]], axis=1)
    jump = 0.5j * np.stack([sn[:, 0] * density[:, 1], sn[:, 1] * density[:, 0]], axis=1)
    return c_rho - jump, c_rho + jump
