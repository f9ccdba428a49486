"""Smooth closed curves, their Frenet frames and the tubular chart around them.

Orientation: the curve runs counter-clockwise, ``t`` is the unit tangent,
``n = (t2, -t1)`` is the outward normal and the Frenet relations read
``t' = -kappa n``, ``n' = kappa t`` so that kappa > 0 on convex curves.
A point near the curve is written ``x = gamma(s) + p n(s)`` with p < 0 inside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .errors import ShellSpecError

ARC_GRID = 4096
_NEWTON_TOL = 1e-10
_NEWTON_ITERS = 50


class GeometryError(ShellSpecError):
    """Invalid curve, node count or tubular coordinate."""


class OutsideTubeError(GeometryError):
    """Point or offset lies outside the admissible tubular neighbourhood."""


@dataclass(frozen=True)
class FramePoint:
    s: float
    x: np.ndarray
    t: np.ndarray
    n: np.ndarray
    kappa: float


@dataclass(frozen=True)
class CurveNodes:
    """Equispaced arc-length nodes with their frames and trapezoid weights."""

    s: np.ndarray
    x: np.ndarray
    t: np.ndarray
    n: np.ndarray
    kappa: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.s.size

    def __getitem__(self, j: int) -> FramePoint:
        return FramePoint(float(self.s[j]), self.x[j], self.t[j], self.n[j], float(self.kappa[j]))

    def __iter__(self) -> Iterator[FramePoint]:
        return (self[j] for j in range(len(self)))


class Curve:
    """A smooth closed curve given by a 2*pi-periodic counter-clockwise map.

    ``position``, ``first`` and ``second`` return gamma(theta) and its first two
    derivatives for an array of parameters. The curve is reparametrised by arc
    length once, at construction.
    """

    def __init__(
        self,
        position: Callable[[np.ndarray], np.ndarray],
        first: Callable[[np.ndarray], np.ndarray],
        second: Callable[[np.ndarray], np.ndarray],
        kind: str = "custom",
        arclength_parametrized: bool = False,
    ):
        self._pos = position
        self._d1 = first
        self._d2 = second
        self.kind = kind
        self._identity = arclength_parametrized
        theta = 2 * np.pi * np.arange(ARC_GRID) / ARC_GRID
        speed = np.hypot(*self._d1(theta))
        if np.min(speed) <= 0.0:
            raise GeometryError("parametrisation must be regular")
        coeffs = np.fft.rfft(speed) / ARC_GRID
        self.length = float(2 * np.pi * coeffs[0].real)
        # s(theta) = mean*theta + periodic part, integrated term by term
        k = np.arange(1, coeffs.size)
        c = coeffs[1:].copy()
        c[-1] *= 0.5  # Nyquist term is counted once
        keep = np.abs(c) > 1e-16 * abs(coeffs[0])  # the rest is FFT round-off
        self._speed_coeffs = c[keep]
        self._speed_k = k[keep]
        self._speed_mean = float(coeffs[0].real)
        self.max_curvature = float(np.max(np.abs(self._curvature_theta(theta))))

    # -- parameter maps ---------------------------------------------------
    def _arc_of_theta(self, theta):
        k = self._speed_k
        c = self._speed_coeffs
        phase = np.exp(1j * np.multiply.outer(theta, k))
        periodic = 2.0 * np.real(phase @ (c / (1j * k))) - 2.0 * np.real(np.sum(c / (1j * k)))
        return self._speed_mean * theta + periodic

    def _theta_of_arc(self, s):
        s = np.asarray(s, dtype=float)
        if self._identity:
            return s * (2 * np.pi / self.length)
        theta = s * (2 * np.pi / self.length)
        for _ in range(_NEWTON_ITERS):
            resid = self._arc_of_theta(theta) - s
            theta = theta - resid / np.hypot(*self._d1(theta))
            if np.max(np.abs(resid), initial=0.0) < 1e-14 * max(self.length, 1.0):
                break
        return theta

    def _curvature_theta(self, theta):
        d1 = self._d1(theta)
        d2 = self._d2(theta)
        cross = d1[0] * d2[1] - d1[1] * d2[0]
        return cross / np.hypot(*d1) ** 3

    # -- frame evaluation ---------------------------------------------------
    def frames(self, s):
        """Vectorised frame: returns (x, t, n, kappa) with x, t, n of shape (..., 2)."""
        s = np.mod(np.asarray(s, dtype=float), self.length)
        theta = self._theta_of_arc(s)
        pos = np.moveaxis(self._pos(theta), 0, -1)
        d1 = self._d1(theta)
        t = np.moveaxis(d1 / np.hypot(*d1), 0, -1)
        n = np.stack([t[..., 1], -t[..., 0]], axis=-1)
        return pos, t, n, self._curvature_theta(theta)

    def frame_at(self, s: float) -> FramePoint:
        x, t, n, k = self.frames(np.array([s]))
        return FramePoint(float(np.mod(s, self.length)), x[0], t[0], n[0], float(k[0]))

    def max_tube_halfwidth(self) -> float:
        return 0.9 / self.max_curvature

    def tubular_to_cartesian(self, s, p):
        s = np.asarray(s, dtype=float)
        p = np.asarray(p, dtype=float)
        if np.any(np.abs(p) >= self.max_tube_halfwidth()):
            raise OutsideTubeError("normal offset exceeds the tube half-width")
        x, _, n, _ = self.frames(s)
        return x + p[..., None] * n

    def cartesian_to_tubular(self, x, seeds: int = 512):
        """Invert the tubular chart by Newton iteration from the nearest node."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        grid = self.length * np.arange(seeds) / seeds
        gx = self.frames(grid)[0]
        d2 = np.sum((x[:, None, :] - gx[None, :, :]) ** 2, axis=-1)
        s = grid[np.argmin(d2, axis=1)]
        for _ in range(_NEWTON_ITERS):
            pos, t, n, k = self.frames(s)
            diff = x - pos
            p = np.sum(diff * n, axis=-1)
            g = np.sum(diff * t, axis=-1)
            step = g / (1.0 + p * k)
            s = s + step
            if np.max(np.abs(step)) < _NEWTON_TOL:
                break
        else:
            raise GeometryError("tubular inversion did not converge")
        s = np.mod(s, self.length)
        pos, _, n, _ = self.frames(s)
        p = np.sum((x - pos) * n, axis=-1)
        if np.any(np.abs(p) >= self.max_tube_halfwidth()):
            raise OutsideTubeError("point lies outside the tubular neighbourhood")
        return s, p

    def equispaced_nodes(self, count: int) -> CurveNodes:
        if count < 8 or count % 2:
            raise GeometryError("node count must be even and at least 8")
        s = self.length * np.arange(count) / count
        x, t, n, k = self.frames(s)
        return CurveNodes(s, x, t, n, k, np.full(count, self.length / count))

    def contains(self, x) -> np.ndarray:
        """True for points strictly inside the curve (winding number test)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        nodes = self.equispaced_nodes(2048)
        rel = nodes.x[None, :, :] - x[:, None, :]
        ang = np.arctan2(rel[..., 1], rel[..., 0])
        turn = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
        turn = (turn + np.pi) % (2 * np.pi) - np.pi
        return np.abs(np.sum(turn, axis=1)) > np.pi


def circle(radius: float = 1.0) -> Curve:
    if radius <= 0:
        raise GeometryError("radius must be positive")
    r = float(radius)
    return Curve(
        lambda th: r * np.array([np.cos(th), np.sin(th)]),
        lambda th: r * np.array([-np.sin(th), np.cos(th)]),
        lambda th: -r * np.array([np.cos(th), np.sin(th)]),
        kind="circle",
        arclength_parametrized=True,
    )


def ellipse(a: float, b: float) -> Curve:
    if a <= 0 or b <= 0:
        raise GeometryError("semi-axes must be positive")
    return Curve(
        lambda th: np.array([a * np.cos(th), b * np.sin(th)]),
        lambda th: np.array([-a * np.sin(th), b * np.cos(th)]),
        lambda th: np.array([-a * np.cos(th), -b * np.sin(th)]),
        kind="ellipse",
    )


def star(radius: float, amplitude: float, lobes: int) -> Curve:
    """Polar curve r = radius * (1 + amplitude * cos(lobes * theta))."""
    R, a, k = float(radius), float(amplitude), int(lobes)

    def rad(th):
        return R * (1 + a * np.cos(k * th)), -R * a * k * np.sin(k * th), -R * a * k * k * np.cos(k * th)

    def pos(th):
        r, _, _ = rad(th)
        return np.array([r * np.cos(th), r * np.sin(th)])

    def d1(th):
        r, dr, _ = rad(th)
        c, s = np.cos(th), np.sin(th)
        return np.array([dr * c - r * s, dr * s + r * c])

    def d2(th):
        r, dr, ddr = rad(th)
        c, s = np.cos(th), np.sin(th)
        return np.array([ddr * c - 2 * dr * s - r * c, ddr * s + 2 * dr * c - r * s])

    return Curve(pos, d1, d2, kind="star")


def curve_from_config(cfg: dict) -> Curve:
    kind = cfg.get("curve.kind", "circle")
    if kind == "circle":
        return circle(float(cfg.get("curve.radius", 1.0)))
    if kind == "ellipse":
        return ellipse(float(cfg.get("curve.a", 2.0)), float(cfg.get("curve.b", 1.0)))
    if kind == "star":
        return star(
            float(cfg.get("curve.radius", 1.0)),
            float(cfg.get("curve.amplitude", 0.1)),
            int(cfg.get("curve.lobes", 5)),
        )
    raise GeometryError(f"unknown curve kind {kind!r}")
