"""Thin-layer potentials B h_eps(p) around the curve and their shell limits.

A profile h is supported in (-1, 1) with unit mass; h_eps(p) = h(p/eps)/eps.
The layer potential, the conjugation field exp(i sigma.n B H_eps(p)), radial
channel eigenvalues on the disk, and the magnetic fields generated by the
tangential vector potential lambda h_eps(p) t all live here.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import disk_oracle
from .couplings import Couplings, renormalize_forward
from .errors import ShellSpecError
from .geometry import Curve, GeometryError, OutsideTubeError
from .spin_algebra import SIGMA1, SIGMA2, SIGMA3, IDENTITY, coupling_matrix_B, exp2x2, sigma_dot

log = logging.getLogger(__name__)

EPS_SEQUENCE = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4)


class ProfileError(ShellSpecError):
    """The profile does not support the requested operation."""


@dataclass(frozen=True)
class Profile:
    """Unit-mass bump on (-1, 1) with its primitive from -1 and, if smooth, its derivative."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    primitive: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray] | None = None
    kinks: tuple[float, ...] = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) < 1, self.value(np.clip(t, -1, 1)), 0.0)

    def cumulative(self, t):
        t = np.clip(np.asarray(t, dtype=float), -1, 1)
        return self.primitive(t)

    def slope(self, t):
        if self.derivative is None:
            raise ProfileError(f"the {self.name} profile has no pointwise derivative")
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) < 1, self.derivative(np.clip(t, -1, 1)), 0.0)


BOX = Profile("box", lambda t: 0.5 * np.ones_like(t), lambda t: 0.5 * (t + 1))
TRIANGLE = Profile(
    "triangle",
    lambda t: 1 - np.abs(t),
    lambda t: np.where(t < 0, 0.5 * (1 + t) ** 2, 1 - 0.5 * (1 - t) ** 2),
    lambda t: -np.sign(t),
    kinks=(0.0,),
)
RAISED_COSINE = Profile(
    "raised-cosine",
    lambda t: 0.5 * (1 + np.cos(np.pi * t)),
    lambda t: 0.5 * (t + 1) + np.sin(np.pi * t) / (2 * np.pi),
    lambda t: -0.5 * np.pi * np.sin(np.pi * t),
)


def _bump_raw(t):
    inside = np.abs(t) < 1
    safe = np.where(inside, t, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe * safe)), 0.0)


_BUMP_NODES, _BUMP_WEIGHTS = np.polynomial.legendre.leggauss(200)
_BUMP_MASS = float(np.sum(_BUMP_WEIGHTS * _bump_raw(_BUMP_NODES)))


def _bump_primitive(t):
    t = np.asarray(t, dtype=float)
    x = 0.5 * (t[..., None] + 1) * (_BUMP_NODES + 1) - 1
    return 0.5 * (t + 1) * np.sum(_BUMP_WEIGHTS * _bump_raw(x), axis=-1) / _BUMP_MASS


def _bump_slope(t):
    inside = np.abs(t) < 1
    safe = np.where(inside, t, 0.0)
    return np.where(inside, _bump_raw(safe) * (-2 * safe / (1 - safe * safe) ** 2), 0.0)


MOLLIFIER = Profile(
    "mollifier",
    lambda t: _bump_raw(t) / _BUMP_MASS,
    _bump_primitive,
    lambda t: _bump_slope(t) / _BUMP_MASS,
)

PROFILES = {p.name: p for p in (BOX, TRIANGLE, RAISED_COSINE, MOLLIFIER)}


def profile_by_name(name: str) -> Profile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ProfileError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


def layer_weight(profile: Profile, eps: float, p):
    """h_eps(p) = h(p / eps) / eps."""
    return profile(np.asarray(p) / eps) / eps


def layer_primitive(profile: Profile, eps: float, p):
    """H_eps(p): int_p^eps h_eps for 0 < p < eps, -int_{-eps}^p h_eps for -eps < p < 0, else 0."""
    p = np.asarray(p, dtype=float)
    g = profile.cumulative(p / eps)
    inside = np.abs(p) < eps
    return np.where(inside, np.where(p > 0, 1 - g, -g), 0.0)


def _layer_chart(curve: Curve, x: np.ndarray, eps: float):
    """Tubular coordinates with a mask for the layer; points off the tube get p = inf."""
    try:
        s, p = curve.cartesian_to_tubular(x)
        return s, p, np.abs(p) < eps
    except GeometryError:
        pass
    s = np.zeros(x.shape[0])
    p = np.full(x.shape[0], np.inf)
    for i, pt in enumerate(x):
        try:
            si, pi = curve.cartesian_to_tubular(pt[None, :])
            s[i], p[i] = si[0], pi[0]
        except GeometryError:
            continue
    return s, p, np.abs(p) < eps


@dataclass
class ShellPotential:
    curve: Curve
    couplings: Couplings
    profile: Profile
    eps: float

    def __post_init__(self):
        if not 0 < self.eps < self.curve.max_tube_halfwidth():
            raise OutsideTubeError("layer half-width must be positive and inside the tube")

    def potential_at(self, x) -> np.ndarray:
        """B(x_Sigma) h_eps(p) inside the layer, zero elsewhere; shape (k, 2, 2)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros((x.shape[0], 2, 2), dtype=complex)
        s, p, near = self._chart(x)
        if np.any(near):
            eta, tau, lam, _ = self.couplings.values(s[near])
            _, t, _, _ = self.curve.frames(s[near])
            B = coupling_matrix_B(eta, tau, lam, t)
            out[near] = B * layer_weight(self.profile, self.eps, p[near])[:, None, None]
        return out

    def _chart(self, x):
        return _layer_chart(self.curve, x, self.eps)

    def pairing(self, test: Callable[[np.ndarray], np.ndarray], n_s: int = 512, n_p: int = 48) -> np.ndarray:
        """int V_eps(x) phi(x) dx over the layer for a scalar test function; 2x2 result."""
        g = _layer_quadrature(self.curve, self.profile, self.eps, n_s, n_p)
        eta, tau, lam, _ = self.couplings.values(g.s)
        B = coupling_matrix_B(eta, tau, lam, g.t)
        weight = g.weights * layer_weight(self.profile, self.eps, g.p) * (1 + g.p * g.kappa) * test(g.points)
        return np.einsum("k,kab->ab", weight, B)


@dataclass
class _LayerGrid:
    s: np.ndarray
    p: np.ndarray
    weights: np.ndarray
    x: np.ndarray
    t: np.ndarray
    n: np.ndarray
    kappa: np.ndarray

    @property
    def points(self):
        return self.x + self.p[:, None] * self.n


def _layer_quadrature(curve: Curve, profile: Profile, eps: float, n_s: int, n_p: int) -> _LayerGrid:
    """Trapezoid in s times Gauss-Legendre on each smooth piece of (-eps, eps)."""
    xg, wg = np.polynomial.legendre.leggauss(n_p)
    breaks = [-1.0, *profile.kinks, 1.0]
    ps, pw = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        ps.append(eps * (0.5 * (b - a) * xg + 0.5 * (a + b)))
        pw.append(eps * 0.5 * (b - a) * wg)
    ps = np.concatenate(ps)
    pw = np.concatenate(pw)
    s = curve.length * np.arange(n_s) / n_s
    x, t, n, k = curve.frames(s)
    rep = ps.size
    w = np.outer(np.full(n_s, curve.length / n_s), pw).ravel()
    return _LayerGrid(
        np.repeat(s, rep), np.tile(ps, n_s), w,
        np.repeat(x, rep, axis=0), np.repeat(t, rep, axis=0), np.repeat(n, rep, axis=0), np.repeat(k, rep),
    )


# -- conjugation field ---------------------------------------------------------


@dataclass
class ConjugationField:
    """U_eps(x) = exp(i sigma.n B H_eps(p)) in the layer, the identity elsewhere."""

    curve: Curve
    couplings: Couplings
    profile: Profile
    eps: float

    def _generator(self, s):
        """i sigma.n B at arc length s; shape (k, 2, 2)."""
        eta, tau, lam, _ = self.couplings.values(s)
        _, t, n, _ = self.curve.frames(s)
        return 1j * np.einsum("kab,kbc->kac", sigma_dot(n), coupling_matrix_B(eta, tau, lam, t))

    def at(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.broadcast_to(IDENTITY, (x.shape[0], 2, 2)).astype(complex)
        s, p, near = _layer_chart(self.curve, x, self.eps)
        if np.any(near):
            H = layer_primitive(self.profile, self.eps, p[near])
            out[near] = exp2x2(self._generator(s[near]) * H[:, None, None])
        return out

    def boundary_limits(self, s):
        """(U_plus, U_minus): limits of U_eps on Sigma from inside and from outside."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        gen = self._generator(s)
        inner_mass = float(self.profile.cumulative(0.0))
        return exp2x2(-inner_mass * gen), exp2x2((1 - inner_mass) * gen)

    def _generator_derivative(self, s, step: float = 1e-4):
        """d/ds of i sigma.n B, by a five-point difference (exact to ~1e-13)."""
        h = step * self.curve.length
        vals = [self._generator(s + k * h) for k in (-2, -1, 1, 2)]
        return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)

    def gradient(self, x, nodes: int = 16):
        """(d1 U, d2 U) from the integral formula for the derivative of a matrix exponential.

        d exp(X) = int_0^1 exp(a X) dX exp((1 - a) X) da, evaluated with Gauss-Legendre.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        s, p = self.curve.cartesian_to_tubular(x)
        if np.any(np.abs(p) >= self.eps):
            raise ProfileError("gradient is evaluated inside the layer only")
        _, t, n, k = self.curve.frames(s)
        gen = self._generator(s)
        dgen = self._generator_derivative(s)
        H = layer_primitive(self.profile, self.eps, p)
        dH = -layer_weight(self.profile, self.eps, p)
        X = gen * H[:, None, None]
        ag, aw = np.polynomial.legendre.leggauss(nodes)
        ag = 0.5 * (ag + 1)
        aw = 0.5 * aw
        grads = []
        for j in range(2):
            # d_j s = t_j / (1 + p kappa), d_j p = n_j
            dX = dgen * (H * t[:, j] / (1 + p * k))[:, None, None] + gen * (dH * n[:, j])[:, None, None]
            acc = np.zeros_like(X)
            for a, wa in zip(ag, aw):
                acc += wa * exp2x2(a * X) @ dX @ exp2x2((1 - a) * X)
            grads.append(acc)
        return grads[0], grads[1]


# -- radial channels on the disk -----------------------------------------------


def _channel_generator(n, z, m, c_vals, r, weight):
    """Real 2x2 generator of (F, g) with G = -i g, vectorised over z."""
    eta, tau, lam = c_vals
    z = np.asarray(z, dtype=float)
    A = np.empty(z.shape + (2, 2))
    A[..., 0, 0] = n / r + weight * lam
    A[..., 0, 1] = m + z - weight * (eta - tau)
    A[..., 1, 0] = m - z + weight * (eta + tau)
    A[..., 1, 1] = -(n + 1) / r - weight * lam
    return A


def _magnus_step(A1, A2, dr):
    omega = 0.5 * dr * (A1 + A2) + (np.sqrt(3) / 12) * dr * dr * (A2 @ A1 - A1 @ A2)
    return exp2x2(omega).real


def layer_transfer(n, z, m, R, c: Couplings, profile: Profile, eps: float, steps: int | None = None):
    """Real transfer matrix of (F, g) from r = R - eps to r = R + eps.

    Fourth-order Magnus steps (two Gauss points, exact 2x2 exponential), step <= eps/200,
    with step boundaries on every kink of the profile.
    """
    c_vals = c.as_tuple()
    z = np.asarray(z, dtype=float)
    breaks = [-1.0, *profile.kinks, 1.0]
    per_piece = steps or max(200, int(np.ceil(400 / (len(breaks) - 1))))
    T = np.broadcast_to(np.eye(2), z.shape + (2, 2)).copy()
    g1, g2 = 0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6
    for a, b in zip(breaks[:-1], breaks[1:]):
        edges = eps * np.linspace(a, b, per_piece + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            dr = hi - lo
            p1, p2 = lo + g1 * dr, lo + g2 * dr
            # evaluate the profile inside the piece so one-sided values are used at jumps
            w1 = profile.value(np.asarray(p1 / eps)) / eps
            w2 = profile.value(np.asarray(p2 / eps)) / eps
            A1 = _channel_generator(n, z, m, c_vals, R + p1, w1)
            A2 = _channel_generator(n, z, m, c_vals, R + p2, w2)
            T = _magnus_step(A1, A2, dr) @ T
    return T


def layer_matching(n, z, m, R, c: Couplings, profile: Profile, eps: float):
    """det[T u_in(R - eps), u_out(R + eps)] in real (F, g) variables; zeros are eigenvalues."""
    z = np.asarray(z, dtype=float)
    w = np.sqrt(m * m - z * z)
    a = w / (m + z)
    i_ratio, _ = disk_oracle._ratios(n, w * (R - eps))
    _, k_ratio = disk_oracle._ratios(n, w * (R + eps))
    u_in = np.stack([np.ones_like(z), a * i_ratio], axis=-1)
    u_out = np.stack([np.ones_like(z), -a * k_ratio], axis=-1)
    T = layer_transfer(n, z, m, R, c, profile, eps)
    y = np.einsum("...ab,...b->...a", T, u_in)
    return y[..., 0] * u_out[..., 1] - y[..., 1] * u_out[..., 0]


def radial_channel_eigenvalues(
    R: float,
    m: float,
    c: Couplings | Callable[[float], Couplings],
    profile: Profile,
    eps: float,
    channel: int,
    samples: int = 400,
) -> list[float]:
    """Eigenvalues in the gap of D0 + B h_eps(r - R) restricted to one angular channel.

    ``c`` may also be a function of eps returning the couplings to use at that
    width, for layers whose strength is tuned as they shrink. No limit is
    asserted for such families.
    """
    if not isinstance(c, Couplings):
        c = c(eps)
    if not 0 < eps < 0.9 * R:
        raise ShellSpecError("layer half-width must lie in (0, 0.9 R)")
    if int(channel) != channel or abs(channel) > disk_oracle.MAX_CHANNEL:
        raise ShellSpecError(f"channel must be an integer with |n| <= {disk_oracle.MAX_CHANNEL}")
    if not c.is_constant or c.omega != 0:
        raise ShellSpecError("radial channels need constant couplings with omega = 0")
    gap = abs(m)
    grid = np.linspace(-gap * (1 - 1e-9), gap * (1 - 1e-9), samples)
    vals = layer_matching(channel, grid, m, R, c, profile, eps)
    roots = []
    for k in range(samples - 1):
        if vals[k] * vals[k + 1] < 0:
            f = lambda zz: float(layer_matching(channel, np.array(zz), m, R, c, profile, eps))
            roots.append(brentq(f, grid[k], grid[k + 1], xtol=1e-13, rtol=1e-15))
    return roots


@dataclass(frozen=True)
class ConvergenceRow:
    epsilon: float
    channel: int
    eigenvalue: float
    oracle_limit: float
    abs_err: float
    profile: str


def _nearest(values, target):
    if not values:
        return np.nan
    values = np.asarray(values)
    return float(values[np.argmin(np.abs(values - target))])


def convergence_table(
    R: float, m: float, c: Couplings, profile: Profile, eps_sequence=EPS_SEQUENCE, max_channel: int = 6
) -> list[ConvergenceRow]:
    """Per-channel eigenvalues of the layer problem against the shell limit with renormalised couplings."""
    limit = renormalize_forward(c)
    rows = []
    for z_star, n in disk_oracle.disk_eigenvalues(limit, m=m, R=R, max_channel=max_channel):
        for eps in eps_sequence:
            e = _nearest(radial_channel_eigenvalues(R, m, c, profile, eps, n), z_star)
            rows.append(ConvergenceRow(eps, n, e, z_star, abs(e - z_star), profile.name))
    return rows


def richardson_limit(eps, values, order: float = 1.0) -> float:
    """Extrapolate the last two entries of an epsilon sequence to eps = 0."""
    e1, e2 = eps[-2], eps[-1]
    v1, v2 = values[-2], values[-1]
    ratio = (e1 / e2) ** order
    return float((ratio * v2 - v1) / (ratio - 1))


@dataclass
class MagneticAlternative:
    lam: float
    lam_hat: float
    eps: float
    commutation_residual: float
    transfer_error: float
    eigenvalues: list
    oracle_eigenvalues: list

    @property
    def max_eigenvalue_error(self) -> float:
        if len(self.eigenvalues) != len(self.oracle_eigenvalues):
            return np.inf
        if not self.eigenvalues:
            return 0.0
        got = np.array(sorted(self.eigenvalues))
        want = np.array(sorted(self.oracle_eigenvalues))
        return float(np.max(np.abs(got - want)))


def magnetic_alternative(
    R: float, m: float, lam_hat: float, eps: float, profile: Profile = MOLLIFIER, max_channel: int = 6
) -> MagneticAlternative:
    """Smoothed gauge field lambda (sigma2, -sigma1).grad chi_eps with chi_eps = g_eps * 1_{r > R}.

    On the disk grad chi_eps = h_eps(r - R) n, so the field is the magnetic layer
    lambda h_eps sigma.t with the mollifier as profile, and lambda = 2 artanh(lam_hat / 2).
    Reports the residual of W sigma_j W = sigma_j (j = 1, 2) for W = exp(-lambda chi sigma3),
    the largest distance of a channel transfer matrix from the shell jump at a probe
    energy, and the layer eigenvalues next to the shell eigenvalues for (0, 0, lam_hat).
    """
    if not abs(lam_hat) < 2:
        raise ShellSpecError("the magnetic shell strength must satisfy |lam_hat| < 2")
    lam = 2 * np.arctanh(lam_hat / 2)
    chi = np.linspace(0, 1, 11)
    W = exp2x2(-lam * chi[:, None, None] * SIGMA3)
    resid = 0.0
    for sig in (SIGMA1, SIGMA2):
        resid = max(resid, float(np.max(np.abs(W @ sig @ W - sig))))
    layer = Couplings(0.0, 0.0, lam)
    shell = Couplings(0.0, 0.0, lam_hat)
    jump = channel_jump_real(shell)
    z_probe = np.array(0.3 * abs(m))
    err = 0.0
    found = []
    for n in range(-max_channel, max_channel + 1):
        T = layer_transfer(n, z_probe, m, R, layer, profile, eps)
        err = max(err, float(np.max(np.abs(T - jump))))
        found.extend(radial_channel_eigenvalues(R, m, layer, profile, eps, n))
    oracle = [z for z, _ in disk_oracle.disk_eigenvalues(shell, m=m, R=R, max_channel=max_channel)]
    return MagneticAlternative(lam, lam_hat, eps, resid, err, sorted(found), oracle)


def channel_jump_real(c_hat: Couplings) -> np.ndarray:
    """Limit of the layer transfer matrix in (F, g) variables: the inverse shell jump.

    The interior trace is R times the exterior trace, so crossing outward applies
    R^{-1}; with G = -i g this is conjugated by diag(1, -i).
    """
    Rch = disk_oracle.channel_R(*c_hat.as_tuple())
    S = np.diag([1.0, -1j])
    out = np.linalg.solve(S, np.linalg.solve(Rch, S))
    return out.real


# -- fields generated by the tangential vector potential (appendix checks) ----


@dataclass
class FieldChecks:
    order_vector_potential: float
    order_magnetic_field: float
    curl_error: float
    errors_vector_potential: list
    errors_magnetic_field: list
    eps: tuple

    @property
    def passed(self) -> bool:
        return min(self.order_vector_potential, self.order_magnetic_field) >= 0.9 and self.curl_error <= 1e-5


def vector_potential(curve: Curve, lam: float, profile: Profile, eps: float, x) -> np.ndarray:
    """A_eps = lam h_eps(p) t(x_Sigma) in the layer, zero elsewhere."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s, p, _ = _layer_chart(curve, x, eps)
    _, t, _, _ = curve.frames(s)
    return lam * layer_weight(profile, eps, p)[:, None] * t


def magnetic_field(curve: Curve, lam: float, profile: Profile, eps: float, x) -> np.ndarray:
    """B_eps = lam h_eps(p) kappa / (1 + p kappa) + lam h_eps'(p); needs a differentiable profile."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s, p, near = _layer_chart(curve, x, eps)
    _, _, _, k = curve.frames(s)
    p = np.where(near, p, eps)
    slope = profile.slope(p / eps) / eps**2
    return lam * (layer_weight(profile, eps, p) * k / (1 + p * k) + slope)


def pair_vector_potential(curve, lam, profile, eps, test, n_s=512, n_p=48) -> np.ndarray:
    g = _layer_quadrature(curve, profile, eps, n_s, n_p)
    weight = g.weights * lam * layer_weight(profile, eps, g.p) * (1 + g.p * g.kappa) * test(g.points)
    return weight @ g.t


def pair_magnetic_field(curve, lam, profile, eps, test_gradient, n_s=512, n_p=48) -> float:
    """<B_eps, phi> after moving the p-derivative onto the test function.

    Valid for every profile, including the box whose derivative is a pair of jumps.
    """
    g = _layer_quadrature(curve, profile, eps, n_s, n_p)
    dn = np.sum(test_gradient(g.points) * g.n, axis=1)
    return float(-lam * np.sum(g.weights * layer_weight(profile, eps, g.p) * dn * (1 + g.p * g.kappa)))


def pair_magnetic_field_direct(curve, lam, profile, eps, test, n_s=512, n_p=48) -> float:
    """<B_eps, phi> straight from the pointwise field; smooth profiles only."""
    g = _layer_quadrature(curve, profile, eps, n_s, n_p)
    p, k = g.p, g.kappa
    field = lam * (layer_weight(profile, eps, p) * k / (1 + p * k) + profile.slope(p / eps) / eps**2)
    return float(np.sum(g.weights * field * (1 + p * k) * test(g.points)))


def _gaussian(x):
    return np.exp(-np.sum((x - np.array([0.2, -0.1])) ** 2, axis=-1))


def _gaussian_gradient(x):
    c = x - np.array([0.2, -0.1])
    return -2 * c * _gaussian(x)[:, None]


def field_checks(
    curve: Curve,
    lam: float = 1.0,
    profile: Profile = RAISED_COSINE,
    eps_sequence=(1e-1, 3e-2, 1e-2, 3e-3, 1e-3),
    test=_gaussian,
    test_gradient=_gaussian_gradient,
    fd_step: float = 1e-3,
) -> FieldChecks:
    """Distributional limits of A_eps and B_eps and a finite-difference check of curl A_eps = B_eps."""
    nodes = curve.equispaced_nodes(2048)
    ref_a = lam * np.sum(nodes.weights[:, None] * nodes.t * test(nodes.x)[:, None], axis=0)
    ref_b = -lam * float(np.sum(nodes.weights * np.sum(test_gradient(nodes.x) * nodes.n, axis=1)))
    err_a, err_b = [], []
    for eps in eps_sequence:
        err_a.append(float(np.linalg.norm(pair_vector_potential(curve, lam, profile, eps, test) - ref_a)))
        err_b.append(abs(pair_magnetic_field(curve, lam, profile, eps, test_gradient) - ref_b))
    order_a = _observed_order(eps_sequence, err_a)
    order_b = _observed_order(eps_sequence, err_b)

    # curl check at interior layer points of the largest epsilon
    eps = eps_sequence[0]
    s = curve.length * (np.arange(7) + 0.3) / 7
    p = eps * np.array([-0.7, -0.4, -0.1, 0.2, 0.5, 0.8, 0.05])
    pts = curve.tubular_to_cartesian(s, p)
    curl_err = 0.0
    for pt in pts:
        d = []
        for axis in range(2):
            e = np.zeros(2)
            e[axis] = fd_step
            vals = [vector_potential(curve, lam, profile, eps, pt + k * e)[0] for k in (-2, -1, 1, 2)]
            d.append((vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * fd_step))
        curl = d[0][1] - d[1][0]
        field = magnetic_field(curve, lam, profile, eps, pt)[0]
        curl_err = max(curl_err, abs(curl - field) / max(1.0, abs(field)))
    return FieldChecks(order_a, order_b, curl_err, err_a, err_b, tuple(eps_sequence))


def _observed_order(eps, errors) -> float:
    """Least-squares slope of log(error) against log(eps)."""
    e = np.log(np.asarray(eps))
    v = np.log(np.maximum(np.asarray(errors), 1e-300))
    return float(np.polyfit(e, v, 1)[0])
