import numpy as np
import pytest

from shellspec.geometry import (
    Curve,
    GeometryError,
    OutsideTubeError,
    circle,
    curve_from_config,
    ellipse,
    star,
)

# complete elliptic integral value 8 E(3/4), evaluated with mpmath at 30 digits
ELLIPSE_2_1_LENGTH = 9.6884482205476761

CURVES = {
    "circle": circle(1.0),
    "circle3": circle(3.0),
    "ellipse": ellipse(2.0, 1.0),
    "star": star(1.0, 0.1, 5),
}


def test_unit_circle_frame_at_zero():
    f = circle(1.0).frame_at(0.0)
    assert np.allclose(f.x, [1, 0], atol=1e-15)
    assert np.allclose(f.t, [0, 1], atol=1e-15)
    assert np.allclose(f.n, [1, 0], atol=1e-15)
    assert f.kappa == pytest.approx(1.0, abs=1e-14)


def test_circle_radius_two_curvature():
    c = circle(2.0)
    _, _, _, k = c.frames(np.linspace(0, c.length, 17))
    assert np.allclose(k, 0.5, atol=1e-14)


def test_ellipse_curvature_at_vertex():
    # second-difference curvature of (2 cos t, sin t) at t = 0: |x' x y''| / |x'|^3 = 2 / 1
    c = ellipse(2.0, 1.0)
    f = c.frame_at(0.0)
    assert np.allclose(f.x, [2, 0], atol=1e-13)
    h = 1e-4
    pts = np.array([[2 * np.cos(t), np.sin(t)] for t in (-h, 0, h)])
    d1 = (pts[2] - pts[0]) / (2 * h)
    d2 = (pts[2] - 2 * pts[1] + pts[0]) / h**2
    oracle = (d1[0] * d2[1] - d1[1] * d2[0]) / np.hypot(*d1) ** 3
    assert f.kappa == pytest.approx(oracle, rel=1e-6)
    assert f.kappa == pytest.approx(2.0, abs=1e-12)


def test_ellipse_length_matches_elliptic_integral():
    assert ellipse(2.0, 1.0).length == pytest.approx(ELLIPSE_2_1_LENGTH, abs=1e-12)


@pytest.mark.parametrize("name", sorted(CURVES))
def test_unit_speed_and_closedness(name):
    c = CURVES[name]
    s = np.linspace(0, c.length, 101)
    h = 1e-3
    x = lambda u: c.frames(u)[0]
    speed = np.linalg.norm((-x(s + 2 * h) + 8 * x(s + h) - 8 * x(s - h) + x(s - 2 * h)) / (12 * h), axis=1)
    assert np.max(np.abs(speed - 1)) < 1e-10
    assert np.allclose(c.frames(s + c.length)[0], c.frames(s)[0], atol=1e-12)


@pytest.mark.parametrize("name", sorted(CURVES))
def test_frenet_relations(name):
    c = CURVES[name]
    s = np.linspace(0, c.length, 64, endpoint=False)
    h = 1e-3
    _, t, n, k = c.frames(s)
    tp = lambda u: c.frames(u)[1]
    np_ = lambda u: c.frames(u)[2]
    dt = (-tp(s + 2 * h) + 8 * tp(s + h) - 8 * tp(s - h) + tp(s - 2 * h)) / (12 * h)
    dn = (-np_(s + 2 * h) + 8 * np_(s + h) - 8 * np_(s - h) + np_(s - 2 * h)) / (12 * h)
    assert np.max(np.abs(dt + k[:, None] * n)) < 1e-6
    assert np.max(np.abs(dn - k[:, None] * t)) < 1e-6
    assert np.max(np.abs(np.sum(t * n, axis=1))) < 1e-14


@pytest.mark.parametrize("name", sorted(CURVES))
def test_normal_points_outward(name):
    c = CURVES[name]
    s = np.linspace(0, c.length, 32, endpoint=False)
    x, _, n, _ = c.frames(s)
    assert np.all(c.contains(x - 0.05 * n))
    assert not np.any(c.contains(x + 0.05 * n))


# trapezoid error of the total curvature of the 2:1 ellipse with 64 arc-length nodes,
# from scipy quad arc lengths inverted by brentq (independent of the spectral map)
ELLIPSE_64_TRAPEZOID_EXCESS = 1.1726758586405595e-07


@pytest.mark.parametrize("name", sorted(CURVES))
@pytest.mark.parametrize("count", [64, 96, 256])
def test_total_curvature_is_two_pi(name, count):
    nodes = CURVES[name].equispaced_nodes(count)
    excess = np.sum(nodes.kappa * nodes.weights) - 2 * np.pi
    if name == "ellipse" and count == 64:
        # the rule itself is only 1e-7 accurate here; check we reproduce it exactly
        assert excess == pytest.approx(ELLIPSE_64_TRAPEZOID_EXCESS, abs=1e-11)
    else:
        assert abs(excess) < 1e-8


def test_tubular_examples():
    c = circle(1.0)
    assert np.allclose(c.tubular_to_cartesian(0.0, 0.1), [1.1, 0])
    s = np.pi / 2
    assert np.allclose(c.tubular_to_cartesian(s, -0.2), 0.8 * np.array([np.cos(s), np.sin(s)]))
    for name, curve in CURVES.items():
        s = np.linspace(0, curve.length, 9)
        assert np.allclose(curve.tubular_to_cartesian(s, np.zeros_like(s)), curve.frames(s)[0])
    s, p = c.cartesian_to_tubular(np.array([[1.3, 0.0]]))
    assert s[0] == pytest.approx(0.0, abs=1e-12) or s[0] == pytest.approx(c.length, abs=1e-12)
    assert p[0] == pytest.approx(0.3, abs=1e-12)


@pytest.mark.parametrize("name", sorted(CURVES))
def test_chart_round_trip(name):
    c = CURVES[name]
    rng = np.random.default_rng(7)
    beta = c.max_tube_halfwidth()
    s = rng.uniform(0, c.length, 1000)
    p = rng.uniform(-0.99 * beta, 0.99 * beta, 1000)
    x = c.tubular_to_cartesian(s, p)
    s2, p2 = c.cartesian_to_tubular(x)
    assert np.max(np.abs(c.tubular_to_cartesian(s2, p2) - x)) < 1e-10
    assert np.max(np.abs(p2 - p)) < 1e-10
    ds = np.abs((s2 - s + c.length / 2) % c.length - c.length / 2)
    assert np.max(ds) < 1e-10
    _, _, _, k = c.frames(s2)
    assert np.all(1 + p2 * k > 0)


def test_star_chart_matches_brute_force_nearest_point():
    c = CURVES["star"]
    rng = np.random.default_rng(3)
    grid = np.linspace(0, c.length, 200001)
    gx = c.frames(grid)[0]
    s_true = rng.uniform(0, c.length, 20)
    x = c.tubular_to_cartesian(s_true, rng.uniform(-0.2, 0.2, 20))
    s, p = c.cartesian_to_tubular(x)
    for xi, si, pi in zip(x, s, p):
        d = np.linalg.norm(gx - xi, axis=1)
        j = np.argmin(d)
        assert abs(d[j] - abs(pi)) < 1e-8
        assert abs((grid[j] - si + c.length / 2) % c.length - c.length / 2) < 2e-4


def test_tube_halfwidths():
    assert circle(1.0).max_tube_halfwidth() == pytest.approx(0.9)
    assert circle(3.0).max_tube_halfwidth() == pytest.approx(2.7)
    assert ellipse(2.0, 1.0).max_tube_halfwidth() == pytest.approx(0.45, rel=1e-10)
    # sampled curvature never exceeds the bound behind the half-width
    c = CURVES["star"]
    _, _, _, k = c.frames(np.linspace(0, c.length, 20001))
    assert c.max_tube_halfwidth() <= 0.9 / np.max(np.abs(k)) + 1e-12


def test_outside_tube_errors():
    c = circle(1.0)
    with pytest.raises(OutsideTubeError):
        c.tubular_to_cartesian(0.0, 0.95)
    with pytest.raises(OutsideTubeError):
        c.cartesian_to_tubular(np.array([[2.5, 0.0]]))


def test_equispaced_nodes():
    c = circle(1.0)
    nodes = c.equispaced_nodes(8)
    ang = np.arctan2(nodes.x[:, 1], nodes.x[:, 0]) % (2 * np.pi)
    assert np.allclose(ang[::2], [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert nodes.weights.sum() == pytest.approx(c.length)
    assert len(list(nodes)) == 8 and nodes[3].s == pytest.approx(3 * c.length / 8)
    for bad in (6, 9):
        with pytest.raises(GeometryError):
            c.equispaced_nodes(bad)


def test_non_arclength_parametrisation_is_reparametrised():
    # circle traversed with non-uniform speed theta -> theta + 0.3 sin(theta)
    def pos(th):
        u = th + 0.3 * np.sin(th)
        return np.array([np.cos(u), np.sin(u)])

    def d1(th):
        u = th + 0.3 * np.sin(th)
        du = 1 + 0.3 * np.cos(th)
        return np.array([-np.sin(u) * du, np.cos(u) * du])

    def d2(th):
        u = th + 0.3 * np.sin(th)
        du = 1 + 0.3 * np.cos(th)
        ddu = -0.3 * np.sin(th)
        return np.array([-np.cos(u) * du**2 - np.sin(u) * ddu, -np.sin(u) * du**2 + np.cos(u) * ddu])

    c = Curve(pos, d1, d2, kind="custom")
    assert c.length == pytest.approx(2 * np.pi, abs=1e-12)
    s = np.linspace(0, c.length, 50)
    x, _, _, k = c.frames(s)
    assert np.allclose(x, np.stack([np.cos(s), np.sin(s)], axis=1), atol=1e-10)
    assert np.allclose(k, 1.0, atol=1e-10)


def test_curve_from_config():
    assert curve_from_config({}).kind == "circle"
    e = curve_from_config({"curve.kind": "ellipse", "curve.a": "2", "curve.b": "1"})
    assert e.length == pytest.approx(ELLIPSE_2_1_LENGTH, abs=1e-12)
    s = curve_from_config({"curve.kind": "star", "curve.lobes": "5"})
    assert s.kind == "star"
    with pytest.raises(GeometryError):
        curve_from_config({"curve.kind": "square"})
