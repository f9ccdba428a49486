"""Shell couplings (eta, tau, lambda, omega), their invariants and the maps between them."""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ShellSpecError
from .spin_algebra import EXCEPTIONAL_TOL, check_not_exceptional

SAMPLES = 1024
CONST_TOL = 1e-10
CRITICAL_TOL = 1e-10

Profile = Union[float, Callable[[np.ndarray], np.ndarray]]


class CouplingError(ShellSpecError):
    """Couplings outside the domain of a requested transformation."""


class NonConstantInvariantError(CouplingError):
    """An operation needs d (or omega) to be constant along the curve."""


class ExpressionError(CouplingError):
    """A coupling expression uses syntax outside the supported grammar."""


_FUNCS = {"cos": np.cos, "sin": np.sin}
_CONSTS = {"pi": math.pi}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}


class CouplingExpression:
    """Periodic coupling written as a string in ``s`` and the curve length ``L``.

    Allowed: numbers, ``pi``, ``s``, ``L``, + - * /, integer powers, cos and sin.
    """

    def __init__(self, text: str, length: float):
        self.text = text
        self.length = float(length)
        try:
            self._tree = ast.parse(text, mode="eval").body
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {text!r}") from exc
        self._check(self._tree)

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ExpressionError("only numeric literals are allowed")
        elif isinstance(node, ast.Name):
            if node.id not in ("s", "L") and node.id not in _CONSTS:
                raise ExpressionError(f"unknown name {node.id!r}")
        elif isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    raise ExpressionError("powers must have integer literal exponents")
            elif type(node.op) not in _BINOPS:
                raise ExpressionError("unsupported operator")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS) or len(node.args) != 1:
                raise ExpressionError("only cos(.) and sin(.) calls are allowed")
            self._check(node.args[0])
        else:
            raise ExpressionError(f"unsupported syntax in {self.text!r}")

    def _eval(self, node, s):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "s":
                return s
            if node.id == "L":
                return self.length
            return _CONSTS[node.id]
        if isinstance(node, ast.BinOp):
            left = self._eval(node.left, s)
            right = self._eval(node.right, s)
            if isinstance(node.op, ast.Pow):
                return left ** right
            return _BINOPS[type(node.op)](left, right)
        if isinstance(node, ast.UnaryOp):
            val = self._eval(node.operand, s)
            return -val if isinstance(node.op, ast.USub) else val
        return _FUNCS[node.func.id](self._eval(node.args[0], s))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(np.asarray(self._eval(self._tree, s), dtype=float), s.shape).copy()

    def __repr__(self):
        return f"CouplingExpression({self.text!r})"


def _eval_profile(prof: Profile, s: np.ndarray) -> np.ndarray:
    if callable(prof):
        return np.asarray(prof(s), dtype=float) * np.ones_like(s)
    return np.full(s.shape, float(prof))


def _scaled(prof: Profile, factor: Union[float, Callable]) -> Profile:
    if not callable(prof) and not callable(factor):
        return float(factor) * float(prof)
    return lambda s: _eval_profile(factor, np.asarray(s, dtype=float)) * _eval_profile(prof, np.asarray(s, dtype=float))


@dataclass(frozen=True)
class Couplings:
    """Electrostatic, Lorentz scalar, magnetic and anomalous magnetic strengths.

    Each entry is a constant or a function of arc length, periodic in the curve length.
    """

    eta: Profile = 0.0
    tau: Profile = 0.0
    lam: Profile = 0.0
    omega: Profile = 0.0

    @property
    def is_constant(self) -> bool:
        return not any(callable(v) for v in (self.eta, self.tau, self.lam, self.omega))

    def values(self, s=None):
        """(eta, tau, lam, omega) as arrays sampled at ``s`` (floats when constant and s is None)."""
        if s is None:
            if not self.is_constant:
                raise CouplingError("arc-length samples are needed for non-constant couplings")
            return float(self.eta), float(self.tau), float(self.lam), float(self.omega)
        s = np.asarray(s, dtype=float)
        return tuple(_eval_profile(v, s) for v in (self.eta, self.tau, self.lam, self.omega))

    def scaled(self, factor) -> "Couplings":
        """Multiply eta, tau and lambda by a constant or an arc-length function; omega is dropped."""
        return Couplings(_scaled(self.eta, factor), _scaled(self.tau, factor), _scaled(self.lam, factor), 0.0)

    def d(self, s=None):
        eta, tau, lam, _ = self.values(s)
        return eta * eta - tau * tau - lam * lam

    def as_tuple(self):
        return self.values()[:3]

    def __str__(self):
        def fmt(v):
            return repr(v.text) if isinstance(v, CouplingExpression) else ("<fn>" if callable(v) else f"{v:g}")

        return f"(eta={fmt(self.eta)}, tau={fmt(self.tau)}, lambda={fmt(self.lam)}, omega={fmt(self.omega)})"


def criticality(d, lam):
    """(d/4 - 1)^2 - lambda^2; the couplings are critical where this vanishes."""
    return (np.asarray(d) / 4 - 1) ** 2 - np.asarray(lam) ** 2


def _sample_grid(length: float) -> np.ndarray:
    return length * np.arange(SAMPLES) / SAMPLES


@dataclass
class ClassificationReport:
    s: np.ndarray
    d: np.ndarray
    criticality: np.ndarray
    confining: bool
    critical: bool
    zigzag: bool
    d_constant: bool
    theta: np.ndarray | None = None
    hints: list[str] = field(default_factory=list)

    def summary_lines(self) -> list[str]:
        def rng(a):
            return f"{np.min(a):.15g} {np.max(a):.15g}"

        lines = [
            f"d_min_max {rng(self.d)}",
            f"criticality_min_max {rng(self.criticality)}",
            f"confining {int(self.confining)}",
            f"critical {int(self.critical)}",
            f"zigzag {int(self.zigzag)}",
            f"d_constant {int(self.d_constant)}",
        ]
        if self.theta is not None:
            lines.append(f"theta_min_max {rng(self.theta)}")
        lines.extend(f"hint {h}" for h in self.hints)
        return lines


def classify(c: Couplings, length: float = 2 * np.pi) -> ClassificationReport:
    s = _sample_grid(length)
    eta, tau, lam, omega = c.values(s)
    d = eta * eta - tau * tau - lam * lam
    crit = criticality(d, lam)
    d_constant = bool(np.ptp(d) < CONST_TOL)
    confining = bool(np.max(np.abs(d + 4)) < CONST_TOL)
    sign_change = bool(np.any(np.sign(crit) != np.sign(crit[0])))
    critical = bool(np.min(np.abs(crit)) < CRITICAL_TOL or sign_change)
    zero_eta_tau = np.max(np.abs(eta)) < CONST_TOL and np.max(np.abs(tau)) < CONST_TOL
    zigzag = bool(zero_eta_tau and np.ptp(lam) < CONST_TOL and abs(abs(lam[0]) - 2) < CONST_TOL)
    theta = None
    if confining and np.max(np.abs(eta)) < CONST_TOL:
        theta = np.arctan2(-lam / 2, tau / 2)
    hints = []
    omega_const = np.ptp(omega) < CONST_TOL
    if np.max(np.abs(omega)) > 0 and d_constant and omega_const:
        hints.append("gauge_reduce")
    if np.max(np.abs(omega)) == 0 and not confining and np.all(np.abs(d) > CONST_TOL):
        hints.append("isospectral_partner")
    if not confining:
        dd = d[d > 0]
        exceptional = dd.size and np.min(np.abs(np.sqrt(dd) / 2 - (np.floor(np.sqrt(dd) / 2 / np.pi) + 0.5) * np.pi)) < EXCEPTIONAL_TOL
        if not exceptional:
            hints.append("renormalize_forward")
    if np.min(d) > -4:
        hints.append("renormalize_backward")
    return ClassificationReport(s, d, crit, confining, critical, zigzag, d_constant, theta, hints)


def _require_constant_d(c: Couplings, length: float) -> float:
    d = c.d(_sample_grid(length))
    if np.ptp(d) >= CONST_TOL:
        raise NonConstantInvariantError("d must be constant along the curve")
    return float(d[0])


@dataclass(frozen=True)
class GaugeReduction:
    """Scale factor X, unimodular constant z and the reduced couplings (X eta, X tau, X lam, 0)."""

    X: float
    z: complex
    reduced: Couplings
    quadratic_residual: float


def _gauge_roots(d: float, omega: float) -> list[float]:
    # d X^2 + (4 + omega^2 - d) X - 4 = 0
    b = 4 + omega * omega - d
    if d == 0.0:
        return [4 / b]
    disc = b * b + 16 * d
    if disc < 0:
        return []
    root = math.sqrt(disc)
    # stable pair: one root from the formula, the other from the product -4/d
    q = -0.5 * (b + math.copysign(root, b))
    roots = [q / d, -4 / q] if q != 0 else [math.sqrt(4 / d)]
    if disc == 0.0:
        roots = roots[:1]
    return sorted(roots, key=lambda x: (abs(x - 1), x))


def gauge_reductions(c: Couplings, length: float = 2 * np.pi) -> list[GaugeReduction]:
    """All admissible reductions of the anomalous magnetic term; closest to X = 1 first."""
    s = _sample_grid(length)
    omega_vals = c.values(s)[3]
    if np.ptp(omega_vals) >= CONST_TOL:
        raise NonConstantInvariantError("omega must be constant along the curve")
    omega = float(omega_vals[0])
    if omega == 0.0 and not np.ptp(c.d(s)) < CONST_TOL:
        return [GaugeReduction(1.0, 1.0 + 0j, c.scaled(1.0), 0.0)]
    d = _require_constant_d(c, length)
    out = []
    for X in _gauge_roots(d, omega):
        denom = X * complex(4 + d - omega * omega, 4 * omega)
        if denom == 0:
            if omega != 0.0 or X != 1.0:
                continue
            # (d, omega) = (-4, 0): nothing to eliminate, z is 0/0 and taken as 1
            z = 1.0
        else:
            z = (d * X * X + 4) / denom
        resid = abs(d * X * X - 4 + (4 + omega * omega - d) * X)
        out.append(GaugeReduction(X, complex(z), c.scaled(X), resid))
    if not out:
        raise CouplingError("no admissible gauge reduction")
    return out


def gauge_reduce(c: Couplings, length: float = 2 * np.pi) -> GaugeReduction:
    return gauge_reductions(c, length)[0]


def isospectral_partner(c: Couplings, length: float = 2 * np.pi) -> Couplings:
    """(eta, tau, lam) -> -4/d (eta, tau, lam), pointwise in arc length."""
    s = _sample_grid(length)
    if np.max(np.abs(c.values(s)[3])) > 0:
        raise CouplingError("isospectral map requires omega = 0")
    d = c.d(s)
    if np.min(np.abs(d)) < CONST_TOL or np.min(np.abs(d + 4)) < CONST_TOL:
        raise CouplingError("isospectral map requires d outside {0, -4}")
    if c.is_constant:
        return c.scaled(-4.0 / float(d[0]))
    return c.scaled(lambda ss: -4.0 / c.d(ss))


def charge_conjugate(c: Couplings) -> Couplings:
    """(eta, tau, lam) -> (-eta, tau, -lam); the point spectrum is reflected z -> -z."""
    return Couplings(_scaled(c.eta, -1.0), c.tau, _scaled(c.lam, -1.0), c.omega)


def forward_factor(d):
    """tan(sqrt(d)/2)/(sqrt(d)/2), continued through d = 0 by tanh for d < 0."""
    d = np.asarray(d, dtype=float)
    x = np.sqrt(np.abs(d)) / 2
    small = x < 1e-4
    xs = np.where(small, 1.0, x)
    pos = np.tan(xs) / xs
    neg = np.tanh(xs) / xs
    series = np.where(d >= 0, 1 + x * x / 3, 1 - x * x / 3)
    return np.where(small, series, np.where(d > 0, pos, neg))


def backward_factor(dhat, branch: int = 0):
    dhat = np.asarray(dhat, dtype=float)
    x = np.sqrt(np.abs(dhat)) / 2
    small = x < 1e-4
    xs = np.where(small, 1.0, x)
    pos = (np.arctan(xs) + branch * np.pi) / xs
    neg = np.arctanh(np.where(xs < 1, xs, 0.0)) / xs
    series = np.where(dhat >= 0, 1 - x * x / 3, 1 + x * x / 3)
    return np.where(small, series, np.where(dhat > 0, pos, neg))


def renormalize_forward(c: Couplings, length: float = 2 * np.pi) -> Couplings:
    """Couplings of the shell limit of the thin-layer potential carrying c."""
    if np.max(np.abs(c.values(_sample_grid(length))[3])) > 0:
        raise CouplingError("renormalisation applies to omega = 0")
    if c.is_constant:
        d = float(c.d())
        check_not_exceptional(d)
        return c.scaled(float(forward_factor(d)))
    d = c.d(_sample_grid(length))
    check_not_exceptional(d)
    k = np.round(np.sqrt(np.maximum(d, 0)) / np.pi)
    if np.any(np.abs(np.sqrt(np.maximum(d, 0)) - k * np.pi) < EXCEPTIONAL_TOL):
        raise CouplingError("non-constant couplings must avoid d = (k pi)^2")
    return c.scaled(lambda ss: forward_factor(c.d(ss)))


def renormalize_backward(c_hat: Couplings, branch: int = 0, length: float = 2 * np.pi) -> Couplings:
    """Couplings of a thin-layer potential whose shell limit is c_hat.

    ``branch`` selects arctan + branch*pi when dhat > 0. When c_hat vanishes the
    nonzero branches are the electrostatic layers (2 k pi, 0, 0).
    """
    s = _sample_grid(length)
    eta, tau, lam, omega = c_hat.values(s)
    if np.max(np.abs(omega)) > 0:
        raise CouplingError("renormalisation applies to omega = 0")
    dhat = eta * eta - tau * tau - lam * lam
    if np.min(dhat) <= -4:
        raise CouplingError("the thin-layer limit always has d > -4")
    zero = np.max(np.abs(np.concatenate([eta, tau, lam]))) == 0.0
    if zero:
        return Couplings(2 * abs(branch) * np.pi, 0.0, 0.0)
    if branch != 0 and np.min(dhat) <= 0:
        raise CouplingError("branches other than 0 need dhat > 0")
    if c_hat.is_constant:
        return c_hat.scaled(float(backward_factor(float(dhat[0]), branch)))
    return c_hat.scaled(lambda ss: backward_factor(c_hat.d(ss), branch))


def confinement_split(c: Couplings, length: float = 2 * np.pi):
    """Interior and exterior boundary matrices when d = -4.

    Returns callables s -> 2x2 matrices A_plus, A_minus with A_pm T_pm f = 0.
    """
    from .spin_algebra import boundary_matrices_M

    d = c.d(_sample_grid(length))
    if np.max(np.abs(d + 4)) >= CONST_TOL:
        raise CouplingError("confinement requires d = -4 everywhere")

    def make(sign):
        def matrices(s, curve):
            eta, tau, lam, _ = c.values(np.atleast_1d(s))
            _, t, n, _ = curve.frames(np.atleast_1d(s))
            mp, mm, _, _ = boundary_matrices_M(eta, tau, lam, 0.0, n, t)
            return mp if sign > 0 else mm

        return matrices

    return make(1), make(-1)


def couplings_from_config(cfg: dict, length: float) -> Couplings:
    def read(key):
        raw = cfg.get(f"couplings.{key}", "0")
        try:
            return float(raw)
        except ValueError:
            return CouplingExpression(str(raw), length)

    return Couplings(read("eta"), read("tau"), read("lambda"), read("omega"))
