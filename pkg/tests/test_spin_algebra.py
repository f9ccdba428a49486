import numpy as np
import pytest

from shellspec.couplings import Couplings, renormalize_forward
from shellspec.errors import ConfiningCouplingError
from shellspec.spin_algebra import (
    IDENTITY,
    SIGMA1,
    SIGMA2,
    SIGMA3,
    ExceptionalCouplingError,
    boundary_matrices_M,
    coupling_matrix_B,
    exp2x2,
    exp_shell,
    invariant_d,
    sigma_dot,
    transmission_matrix_R,
)


def taylor_expm(a, terms=30, squarings=8):
    """Scaling and squaring with a truncated Taylor series."""
    a = a / 2**squarings
    out = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def random_frame(rng):
    th = rng.uniform(0, 2 * np.pi)
    n = np.array([np.cos(th), np.sin(th)])
    return n, np.array([-n[1], n[0]])


def test_pauli_anticommutators():
    paulis = [SIGMA1, SIGMA2, SIGMA3]
    for j, a in enumerate(paulis):
        for k, b in enumerate(paulis):
            assert np.array_equal(a @ b + b @ a, 2 * (j == k) * IDENTITY)


def test_sigma_dot_basics(rng):
    assert np.array_equal(sigma_dot([1, 0]), SIGMA1)
    assert np.array_equal(sigma_dot([0, 1]), SIGMA2)
    for _ in range(20):
        n, t = random_frame(rng)
        assert np.allclose(sigma_dot(n) @ sigma_dot(n), IDENTITY, atol=1e-15)
        assert np.allclose(sigma_dot(n) @ sigma_dot(t), 1j * SIGMA3, atol=1e-15)
        assert np.max(np.abs(1j * sigma_dot(n) @ SIGMA3 - sigma_dot(t))) < 1e-14


def test_sigma_dot_is_batched(rng):
    v = rng.normal(size=(3, 4, 2))
    out = sigma_dot(v)
    assert out.shape == (3, 4, 2, 2)
    assert np.allclose(out[1, 2], v[1, 2, 0] * SIGMA1 + v[1, 2, 1] * SIGMA2)


def test_exp2x2_simple_cases():
    assert np.array_equal(exp2x2(np.zeros((2, 2))), IDENTITY)
    assert np.allclose(exp2x2(0.7 * SIGMA3), np.diag([np.exp(0.7), np.exp(-0.7)]), atol=1e-15)
    # nilpotent: nu = 0 exactly, series branch
    nil = np.array([[0, 3.0], [0, 0]])
    assert np.allclose(exp2x2(nil), [[1, 3], [0, 1]], atol=1e-15)


def test_exp2x2_against_taylor_oracle(rng):
    a = rng.uniform(-2, 2, (100, 2, 2)) + 1j * rng.uniform(-2, 2, (100, 2, 2))
    ours = exp2x2(a)
    for k in range(100):
        ref = taylor_expm(a[k])
        assert np.max(np.abs(ours[k] - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_exp2x2_near_the_series_switch():
    # nu just below and above the switch-over threshold
    for nu in (0.99e-4, 1.01e-4, 1e-7):
        a = 1j * nu * SIGMA1 + 0.3 * IDENTITY
        ref = np.exp(0.3) * (np.cos(nu) * IDENTITY + 1j * np.sin(nu) * SIGMA1)
        assert np.max(np.abs(exp2x2(a) - ref)) < 2e-16 * np.exp(0.3) * 4


def test_exp2x2_inverse(rng):
    for _ in range(200):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        a *= rng.uniform(0, 4) / np.linalg.norm(a, 2)
        assert np.max(np.abs(exp2x2(a) @ exp2x2(-a) - IDENTITY)) < 1e-11


def test_coupling_matrix_B(rng):
    n, t = random_frame(rng)
    assert np.array_equal(coupling_matrix_B(0, 0, 0, t), np.zeros((2, 2)))
    assert np.allclose(coupling_matrix_B(1.7, 0, 0, t), 1.7 * IDENTITY)
    for _ in range(20):
        n, t = random_frame(rng)
        b = coupling_matrix_B(*rng.normal(size=3), t)
        assert np.allclose(b, b.conj().T, atol=1e-15)


def test_boundary_matrices(rng):
    n, t = random_frame(rng)
    mp, mm, _, _ = boundary_matrices_M(0, 0, 0, 0, n, t)
    assert np.allclose(mp, 1j * sigma_dot(n)) and np.allclose(mm, -1j * sigma_dot(n))
    for _ in range(30):
        eta, tau, lam, om = rng.normal(size=4) * 2
        n, t = random_frame(rng)
        d = eta**2 - tau**2 - lam**2
        mp, mm, tp, tm = boundary_matrices_M(eta, tau, lam, om, n, t)
        assert np.allclose(mp @ tp, 0.25 * (4 + d - om**2 - 4j * om) * IDENTITY, atol=1e-12)
        assert np.allclose(mm @ tm, 0.25 * (4 + d - om**2 + 4j * om) * IDENTITY, atol=1e-12)


def test_boundary_matrices_singular_when_confining(rng):
    n, t = random_frame(rng)
    for eta, tau, lam in [(0, 2, 0), (0, 0, 2), (1, np.sqrt(5), 0)]:
        mp, mm, _, _ = boundary_matrices_M(eta, tau, lam, 0.0, n, t)
        assert abs(np.linalg.det(mp)) < 1e-14 and abs(np.linalg.det(mm)) < 1e-14


def test_transmission_matrix_examples(rng):
    n, t = random_frame(rng)
    assert np.allclose(transmission_matrix_R(0, 0, 0, n, t), IDENTITY)
    for lh in (0.5, -1.3, 3.0):
        r = transmission_matrix_R(0, 0, lh, n, t)
        assert np.allclose(r, np.diag([(2 - lh) / (2 + lh), (2 + lh) / (2 - lh)]), atol=1e-14)
    with pytest.raises(ConfiningCouplingError):
        transmission_matrix_R(0, 2, 0, n, t)


def test_transmission_matrix_from_boundary_matrices(rng):
    for _ in range(50):
        eta, tau, lam = rng.normal(size=3) * 1.5
        if abs(invariant_d(eta, tau, lam) + 4) < 0.1:
            continue
        n, t = random_frame(rng)
        m = -0.5j * sigma_dot(n) @ coupling_matrix_B(eta, tau, lam, t)
        oracle = np.linalg.inv(IDENTITY + m) @ (IDENTITY - m)
        r = transmission_matrix_R(eta, tau, lam, n, t)
        assert np.max(np.abs(r - oracle)) < 1e-12 * max(1, np.max(np.abs(oracle)))
        mp, mm, _, _ = boundary_matrices_M(eta, tau, lam, 0.0, n, t)
        assert np.allclose(r, -np.linalg.solve(mp, mm), atol=1e-10)


def test_transmission_matrix_inverse(rng):
    for _ in range(50):
        eta, tau, lam = rng.normal(size=3)
        if abs(invariant_d(eta, tau, lam) + 4) < 0.1:
            continue
        n, t = random_frame(rng)
        r = transmission_matrix_R(eta, tau, lam, n, t)
        assert np.allclose(np.linalg.inv(r), transmission_matrix_R(-eta, -tau, -lam, n, t), atol=1e-10)


def test_exp_shell_examples(rng):
    n, t = random_frame(rng)
    assert np.allclose(exp_shell(0, 0, 0, n, t), IDENTITY)
    ref = taylor_expm(1j * sigma_dot(n) @ coupling_matrix_B(2, 0, 0, t))
    assert np.allclose(exp_shell(2, 0, 0, n, t), ref, atol=1e-13)
    assert np.allclose(ref, transmission_matrix_R(2 * np.tan(1), 0, 0, n, t), atol=1e-12)
    with pytest.raises(ExceptionalCouplingError):
        renormalize_forward(Couplings(np.pi, 0, 0))


def test_exp_shell_batched_over_frames(rng):
    th = rng.uniform(0, 2 * np.pi, 7)
    n = np.stack([np.cos(th), np.sin(th)], axis=1)
    t = np.stack([-n[:, 1], n[:, 0]], axis=1)
    batch = exp_shell(0.4, -0.2, 0.9, n, t)
    for k in range(7):
        assert np.allclose(batch[k], exp_shell(0.4, -0.2, 0.9, n[k], t[k]), atol=1e-15)


def test_exp_shell_matches_renormalised_transmission(rng):
    count = 0
    while count < 200:
        eta, tau, lam = rng.uniform(-3, 3, 3)
        d = eta**2 - tau**2 - lam**2
        if not -9 < d < 9:
            continue
        count += 1
        n, t = random_frame(rng)
        hat = renormalize_forward(Couplings(eta, tau, lam)).as_tuple()
        assert np.max(np.abs(exp_shell(eta, tau, lam, n, t) - transmission_matrix_R(*hat, n, t))) < 1e-10
