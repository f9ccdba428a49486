"""Modified Bessel functions of orders 0 and 1 and the free Dirac Green function.

All routines are vectorised over numpy arrays and accept complex arguments
with positive real part. K is evaluated from the ascending series for small
arguments and from Steed's continued fraction (Temme's CF2) otherwise; I is
evaluated from its ascending series, switching to the Hankel expansion for
large arguments.
"""

from __future__ import annotations

import numpy as np

from .errors import ShellSpecError

EULER_GAMMA = 0.57721566490153286061

SERIES_RADIUS = 2.0
I_SERIES_RADIUS = 25.0
_EPS = 1e-17
_MAX_CF_ITER = 5000


class InvalidArgumentError(ShellSpecError):
    """Raised for arguments outside the supported domain."""


def _as_complex_array(x):
    arr = np.asarray(x)
    return arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64)


def _small_series(x):
    """Ascending series; returns I0, I1, K0, K1 for |x| <= SERIES_RADIUS."""
    q = 0.25 * x * x
    logh = np.log(0.5 * x)
    term0 = np.ones_like(x)  # (x^2/4)^k / (k!)^2
    term1 = np.ones_like(x)  # (x^2/4)^k / (k!(k+1)!)
    i0 = term0.copy()
    i1 = term1.copy()
    psi_k = -EULER_GAMMA  # psi(k+1)
    psi_k1 = 1.0 - EULER_GAMMA  # psi(k+2)
    k0_tail = psi_k * term0
    k1_tail = (psi_k + psi_k1) * term1
    for k in range(1, 40):
        term0 = term0 * q / (k * k)
        term1 = term1 * q / (k * (k + 1))
        psi_k = psi_k1
        psi_k1 = psi_k1 + 1.0 / (k + 1)
        i0 = i0 + term0
        i1 = i1 + term1
        k0_tail = k0_tail + psi_k * term0
        k1_tail = k1_tail + (psi_k + psi_k1) * term1
        if np.all(np.abs(term0) * (1.0 + abs(psi_k1)) <= _EPS * np.abs(i0)):
            break
    i1 = 0.5 * x * i1
    k0 = -logh * i0 + k0_tail
    k1 = 1.0 / x + logh * i1 - 0.25 * x * k1_tail
    return i0, i1, k0, k1


def _steed_k(x):
    """K0 and K1 from the Thompson-Barnett continued fraction (|x| > 2)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAX_CF_ITER):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) <= 1e-16 * np.abs(s)):
            break
    else:
        raise InvalidArgumentError("continued fraction for K did not converge")
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _hankel_i(order, x):
    """Large-argument expansion of I_order, valid for Re x > 0.

    The subdominant exp(-x) branch matters close to the imaginary axis.
    """
    mu = 4.0 * order * order
    term = np.ones_like(x)
    dominant = term.copy()
    recessive = term.copy()
    for k in range(1, 30):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        dominant = dominant + (-1) ** k * term
        recessive = recessive + term
        if np.all(np.abs(term) <= _EPS * np.abs(dominant)):
            break
    side = np.where(np.imag(x) >= 0.0, 1.0, -1.0)
    phase = np.exp(side * 1j * (order + 0.5) * np.pi)
    scale = 1.0 / np.sqrt(2.0 * np.pi * x)
    return scale * (np.exp(x) * dominant + phase * np.exp(-x) * recessive)


def _check_domain(x):
    if np.any(np.real(x) <= 0.0):
        raise InvalidArgumentError("argument must have positive real part")


def _evaluate(x):
    """I0, I1, K0, K1 on an array with Re x > 0."""
    shape = x.shape
    flat = x.ravel()
    out = [np.empty_like(flat) for _ in range(4)]
    small = np.abs(flat) <= SERIES_RADIUS
    if np.any(small):
        vals = _small_series(flat[small])
        for o, v in zip(out, vals):
            o[small] = v
    big = ~small
    if np.any(big):
        xb = flat[big]
        k0, k1 = _steed_k(xb)
        out[2][big] = k0
        out[3][big] = k1
        mid = np.abs(xb) <= I_SERIES_RADIUS
        i0 = np.empty_like(xb)
        i1 = np.empty_like(xb)
        if np.any(mid):
            i0[mid], i1[mid] = _i_series(xb[mid])
        if np.any(~mid):
            part = (lambda v: v) if np.iscomplexobj(xb) else np.real
            i0[~mid] = part(_hankel_i(0, xb[~mid]))
            i1[~mid] = part(_hankel_i(1, xb[~mid]))
        out[0][big] = i0
        out[1][big] = i1
    return tuple(o.reshape(shape) for o in out)


def _i_series(x):
    q = 0.25 * x * x
    term0 = np.ones_like(x)
    term1 = np.ones_like(x)
    i0 = term0.copy()
    i1 = term1.copy()
    for k in range(1, 200):
        term0 = term0 * q / (k * k)
        term1 = term1 * q / (k * (k + 1))
        i0 = i0 + term0
        i1 = i1 + term1
        if np.all(np.abs(term0) <= _EPS * np.abs(i0)):
            break
    return i0, 0.5 * x * i1


def bessel_k(order: int, x):
    """Modified Bessel function of the second kind, order 0 or 1."""
    if order not in (0, 1):
        raise InvalidArgumentError("order must be 0 or 1")
    arr = _as_complex_array(x)
    _check_domain(arr)
    vals = _evaluate(np.atleast_1d(arr))
    res = vals[2 + order].reshape(arr.shape)
    return res[()] if res.ndim == 0 else res


def bessel_i(order: int, x):
    """Modified Bessel function of the first kind, order 0 or 1."""
    if order not in (0, 1):
        raise InvalidArgumentError("order must be 0 or 1")
    arr = _as_complex_array(x)
    _check_domain(arr)
    vals = _evaluate(np.atleast_1d(arr))
    res = vals[order].reshape(arr.shape)
    return res[()] if res.ndim == 0 else res


def bessel_ik01(x):
    """Return (I0, I1, K0, K1) evaluated on one array in a single pass."""
    arr = _as_complex_array(x)
    _check_domain(arr)
    return _evaluate(np.atleast_1d(arr))


class SpectralParameter:
    """Spectral parameter z together with the mass and the decay rate.

    The decay rate is sqrt(m^2 - z^2) on the principal branch, so it has
    positive real part for every z off the two half-lines |Re z| >= |m|.
    """

    def __init__(self, z: complex, m: float):
        z = complex(z)
        m = float(m)
        rate2 = m * m - z * z
        if rate2.imag == 0.0 and rate2.real <= 0.0:
            raise InvalidArgumentError(f"z={z} lies in the essential spectrum for m={m}")
        self.z = z
        self.m = m
        self.w = np.sqrt(rate2)

    def conjugate(self) -> "SpectralParameter":
        return SpectralParameter(self.z.conjugate(), self.m)

    def __repr__(self):
        return f"SpectralParameter(z={self.z!r}, m={self.m!r})"


def green_phi(param: SpectralParameter, dx):
    """Free Green function at displacement dx; dx has shape (..., 2).

    Returns an array of shape (..., 2, 2).
    """
    dx = np.asarray(dx, dtype=float)
    r = np.hypot(dx[..., 0], dx[..., 1])
    if np.any(r == 0.0):
        raise InvalidArgumentError("Green function is singular at zero displacement")
    w = param.w
    _, _, k0, k1 = bessel_ik01(w * r)
    k0 = k0.reshape(r.shape)
    k1 = k1.reshape(r.shape)
    scal = k0 / (2 * np.pi)
    rad = 1j * w * k1 / (2 * np.pi * r)
    out = np.empty(r.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = scal * (param.m + param.z)
    out[..., 1, 1] = scal * (param.z - param.m)
    # sigma . dx = [[0, dx1 - i dx2], [dx1 + i dx2, 0]]
    out[..., 0, 1] = rad * (dx[..., 0] - 1j * dx[..., 1])
    out[..., 1, 0] = rad * (dx[..., 0] + 1j * dx[..., 1])
    return out
