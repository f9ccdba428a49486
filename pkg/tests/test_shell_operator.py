import numpy as np
import pytest

from shellspec.couplings import Couplings
from shellspec.disk_oracle import circle_mode_Cz, disk_eigenvalues
from shellspec.errors import ConfiningCouplingError, CriticalCouplingError, NumericalFailure
from shellspec.geometry import circle, ellipse, star
from shellspec.kernels import SpectralParameter
from shellspec.shell_operator import (
    ShellDiscretization,
    SigmaMinProfile,
    _richardson,
    assemble_Cz,
    bs_operator,
    bump_source,
    eigenvalue_scan,
    free_resolvent_apply,
    golden_parabolic_minimize,
    krein_resolvent_apply,
    plemelj_traces,
    single_layer_apply,
    smallest_singular_value,
)

# gap eigenvalues of (0, -1, 0) on the unit disk at m = 1, mpmath root finding
TAU_MINUS_ONE = 0.634092760625325771


@pytest.fixture(scope="module")
def circle64():
    return ShellDiscretization(circle(1.0), 64)


@pytest.mark.parametrize("curve", [circle(1.0), ellipse(2.0, 1.0), star(1.0, 0.1, 5)], ids=["circle", "ellipse", "star"])
def test_discrete_adjoint(curve):
    disc = ShellDiscretization(curve, 64)
    z = 0.3 + 0.1j
    a = assemble_Cz(disc, SpectralParameter(z, 1.0))
    b = assemble_Cz(disc, SpectralParameter(np.conj(z), 1.0))
    assert np.max(np.abs(a.conj().T - b)) < 1e-12


@pytest.mark.parametrize("n", [-3, -1, 0, 2])
def test_circle_modes_match_separation_of_variables(circle64, n):
    z = 0.3 + 0.1j
    cz = assemble_Cz(circle64, SpectralParameter(z, 1.0))
    th = circle64.nodes.s
    mode = circle_mode_Cz(n, z, 1.0, 1.0)
    for col in range(2):
        ab = np.eye(2)[col]
        rho = np.stack([ab[0] * np.exp(1j * n * th), ab[1] * np.exp(1j * (n + 1) * th)], axis=1)
        out = (cz @ rho.ravel()).reshape(-1, 2)
        ref = np.stack([mode[0, col] * np.exp(1j * n * th), mode[1, col] * np.exp(1j * (n + 1) * th)], axis=1)
        assert np.max(np.abs(out - ref)) < 1e-13


def test_refinement_converges_spectrally_on_the_star():
    curve = star(1.0, 0.1, 5)
    p = SpectralParameter(0.2 + 0.05j, 1.0)
    f = lambda s: np.stack([np.cos(2 * np.pi * s / curve.length), 0.5j * np.sin(4 * np.pi * s / curve.length)], axis=1)
    probe = {}
    for N in (64, 128, 256, 512):
        disc = ShellDiscretization(curve, N)
        out = (assemble_Cz(disc, p) @ f(disc.nodes.s).ravel()).reshape(N, 2)
        probe[N] = out[:: N // 16]
    err = [np.max(np.abs(probe[N] - probe[512])) for N in (64, 128, 256)]
    assert err[2] < 1e-10
    assert err[1] < 1e-2 * err[0] and err[2] < 1e-2 * err[1]


def test_zero_coupling_gives_identity(circle64):
    op = bs_operator(circle64, Couplings(), SpectralParameter(0.4, 1.0))
    assert np.array_equal(op, np.eye(op.shape[0]))


def test_sigma_min_vanishes_only_at_eigenvalues(circle64):
    prof = SigmaMinProfile(circle64, Couplings(0, -1, 0), 1.0)
    assert prof(TAU_MINUS_ONE) < 1e-8
    assert prof(-TAU_MINUS_ONE) < 1e-8
    for z in (-0.9, -0.3, 0.0, 0.3, 0.9):
        assert prof(z) > 0.01
    assert prof.calls == 7


def test_smallest_singular_value_against_svd(rng):
    a = rng.normal(size=(40, 40)) + 1j * rng.normal(size=(40, 40))
    assert smallest_singular_value(a) == pytest.approx(np.linalg.svd(a, compute_uv=False)[-1], rel=1e-10)
    assert smallest_singular_value(np.zeros((3, 3))) == 0.0


def test_minimiser_reaches_absolute_tolerance():
    z, f = golden_parabolic_minimize(lambda x: (x - 0.123456789) ** 2 + 1e-3 * (x - 0.123456789) ** 4, -1, 1, 1e-12)
    assert abs(z - 0.123456789) < 1e-9
    assert f < 1e-17


def test_log_weights_integrate_the_log_kernel():
    # int_0^{2 pi} log(4 sin^2((t - t')/2)) cos(k t') dt' = -2 pi cos(k t) / |k| for k != 0, 0 for k = 0
    disc = ShellDiscretization(circle(1.0), 64)
    t = 2 * np.pi * np.arange(64) / 64
    for k in (0, 1, 5, 20):
        exact = 0.0 if k == 0 else -2 * np.pi * np.cos(k * t) / k
        assert np.allclose(disc.kress @ np.cos(k * t), exact, atol=1e-12)


def test_plemelj_jump_matches_layer_limits():
    disc = ShellDiscretization(star(1.0, 0.1, 5), 128)
    p = SpectralParameter(0.2, 1.0)
    s = disc.nodes.s
    w = 2 * np.pi * s / disc.length
    rho = np.stack([np.cos(w), np.sin(2 * w) + 0.3j], axis=1)
    inner, outer = plemelj_traces(disc, p, rho)
    pick = [0, 17, 40, 101]
    x, _, n, _ = disc.curve.frames(s[pick])
    for sign, trace in ((-1, inner), (1, outer)):
        samples = [single_layer_apply(disc, p, rho, x + sign * h * n) for h in (1e-3, 5e-4, 2.5e-4)]
        assert np.max(np.abs(_richardson(samples) - trace[pick])) < 1e-4
    assert np.max(np.abs(outer - inner)) > 0.1


def test_krein_without_coupling_is_the_free_resolvent():
    disc = ShellDiscretization(circle(1.0), 64)
    p = SpectralParameter(0.3 + 0.2j, 1.0)
    src = bump_source((0.15, 0.05), 0.2)
    sol = krein_resolvent_apply(disc, Couplings(), p, src)
    pts = np.array([[0.6, 0.1], [1.4, -0.3], [-0.2, 2.0]])
    assert np.max(np.abs(sol(pts) - free_resolvent_apply(p, src, pts))) < 1e-9


def test_krein_solution_on_the_disk():
    disc = ShellDiscretization(circle(1.0), 128)
    p = SpectralParameter(0.3 + 0.1j, 1.0)
    sol = krein_resolvent_apply(disc, Couplings(1.5, 0.0, 0.0), p, bump_source((0.15, 0.05), 0.2))
    pts = np.array([[0.6, -0.3], [1.5, 0.4], [-0.1, -1.6]])
    assert sol.pde_residual(pts) < 1e-4
    assert sol.transmission_mismatch(np.linspace(0, disc.length, 5, endpoint=False)) < 1e-3
    # the check is not vacuous: a perturbed field violates the equation
    class Perturbed(type(sol)):
        def __call__(self, x):
            bump = np.exp(-np.sum(np.atleast_2d(x) ** 2, axis=1))[:, None]
            return super().__call__(x) + 1e-2 * bump

    bad = Perturbed(sol.disc, sol.couplings, sol.param, sol.source, sol.density, sol.sigma_min)
    assert bad.pde_residual(pts) > 1e-3


def test_krein_rejects_eigenvalues():
    disc = ShellDiscretization(circle(1.0), 64)
    tau = Couplings(0.0, -1.0, 0.0)
    z = eigenvalue_scan(disc, tau, 1.0, grid_size=80)[0].z
    with pytest.raises(NumericalFailure):
        krein_resolvent_apply(disc, tau, SpectralParameter(z, 1.0), bump_source((0.1, 0.0), 0.2))


def test_scan_finds_the_disk_eigenvalues():
    disc = ShellDiscretization(circle(1.0), 128)
    found = eigenvalue_scan(disc, Couplings(0, -1, 0), 1.0, grid_size=120)
    assert [e.z for e in found] == pytest.approx([-TAU_MINUS_ONE, TAU_MINUS_ONE], abs=1e-8)
    assert all(e.multiplicity == 1 and e.N == 128 and e.curve_kind == "circle" for e in found)
    oracle = [z for z, _ in disk_eigenvalues(Couplings(0, -1, 0))]
    assert len(oracle) == len(found)


def test_scan_with_prescan_and_threads_is_identical():
    curve = circle(1.0)
    fine, coarse = ShellDiscretization(curve, 96), ShellDiscretization(curve, 32)
    a = eigenvalue_scan(fine, Couplings(1, 0.5, 0.5), 1.0, grid_size=60, prescan=coarse)
    b = eigenvalue_scan(fine, Couplings(1, 0.5, 0.5), 1.0, grid_size=60, prescan=coarse, threads=4)
    assert a == b and len(a) == 2


def test_scan_applies_gauge_reduction():
    disc = ShellDiscretization(circle(1.0), 64)
    direct = eigenvalue_scan(disc, Couplings(0.8284271247461902, 0, 0), 1.0, grid_size=80)
    gauged = eigenvalue_scan(disc, Couplings(1.0, 0, 0, 1.0), 1.0, grid_size=80)
    assert [e.z for e in gauged] == pytest.approx([e.z for e in direct], abs=1e-9)
    assert len(gauged) == 1 and gauged[0].z == pytest.approx(-0.6465316077045918, abs=1e-8)


def test_scan_rejects_confining_and_critical():
    disc = ShellDiscretization(circle(1.0), 32)
    with pytest.raises(ConfiningCouplingError):
        eigenvalue_scan(disc, Couplings(0, 2, 0), 1.0)
    with pytest.raises(CriticalCouplingError):
        eigenvalue_scan(disc, Couplings(2, 0, 0), 1.0)


def test_gauge_reduction_of_varying_couplings_is_flagged(caplog):
    curve = circle(1.0)
    tau = lambda s: 0.3 * np.cos(s)
    c = Couplings(lambda s: np.sqrt(1 + tau(s) ** 2), tau, 0.0, 0.5)
    with caplog.at_level("WARNING", logger="shellspec"):
        found = eigenvalue_scan(ShellDiscretization(curve, 64), c, 1.0, grid_size=60)
    assert any("experimental" in rec.getMessage() for rec in caplog.records)
    assert all(abs(e.z) < 1 for e in found)
    caplog.clear()
    with caplog.at_level("WARNING", logger="shellspec"):
        eigenvalue_scan(ShellDiscretization(curve, 64), Couplings(1.0, 0, 0, 1.0), 1.0, grid_size=60)
    assert not caplog.records
