import numpy as np
import pytest

from nfsecure.beamforming import (
    euclidean_gradient_f2,
    f2_value,
    hybrid_factorize,
    initial_analog,
    ls_digital,
    mo_analog,
    polak_ribiere,
    retract,
    riemannian_gradient,
    transport,
)
from nfsecure.beamforming.hybrid import on_manifold


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _circle(rng, *shape):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, size=shape))


def _vec(X):
    return X.reshape(-1, order="F")


def test_ls_digital_orthogonal_columns():
    # DFT columns are orthogonal with unit-modulus entries
    M = 4
    W_A = np.exp(-2j * np.pi * np.outer(np.arange(M), np.arange(M)) / M)
    W = np.arange(8, dtype=complex).reshape(4, 2) + 1j
    np.testing.assert_allclose(ls_digital(W_A, W), W_A.conj().T @ W / M, atol=1e-12)


def test_ls_digital_exact_when_in_range(rng):
    W_A = _circle(rng, 6, 3)
    W = W_A @ _crandn(rng, 3, 2)
    W_D = ls_digital(W_A, W)
    assert np.linalg.norm(W - W_A @ W_D) <= 1e-10


def test_ls_digital_normal_equations(rng):
    W_A = _circle(rng, 6, 3)
    W = _crandn(rng, 6, 2)
    W_D = ls_digital(W_A, W)
    np.testing.assert_allclose(W_A.conj().T @ (W - W_A @ W_D), 0.0, atol=1e-9)


def test_riemannian_gradient_projection(rng):
    x = _circle(rng, 8)
    np.testing.assert_allclose(riemannian_gradient(x, x), 0.0, atol=1e-15)
    np.testing.assert_allclose(riemannian_gradient(x, 1j * x), 1j * x, atol=1e-15)
    g = riemannian_gradient(x, _crandn(rng, 8))
    np.testing.assert_allclose(np.real(g * x.conj()), 0.0, atol=1e-12)


def test_transport(rng):
    x = _circle(rng, 8)
    tangent = riemannian_gradient(x, _crandn(rng, 8))
    np.testing.assert_allclose(transport(tangent, x), tangent, atol=1e-15)
    np.testing.assert_allclose(transport(x, x), 0.0, atol=1e-15)
    moved = transport(_crandn(rng, 8), x)
    np.testing.assert_allclose(np.real(moved * x.conj()), 0.0, atol=1e-12)


def test_polak_ribiere(rng):
    g = _crandn(rng, 6)
    assert polak_ribiere(g, g) == 0.0
    assert polak_ribiere(g, np.zeros(6)) == 0.0
    # real-orthogonal pair
    a = np.array([1.0, 0.0, 0.0], dtype=complex)
    b = np.array([0.0, 2.0, 0.0], dtype=complex)
    assert polak_ribiere(b, a) == pytest.approx(4.0)
    new, old = _crandn(rng, 6), _crandn(rng, 6)
    direct = np.real(np.vdot(new, new - old)) / np.real(np.vdot(old, old))
    assert polak_ribiere(new, old) == pytest.approx(max(direct, 0.0))


def test_retract(rng):
    x = _circle(rng, 10)
    same, beta = retract(x, 0.0, _crandn(rng, 10))
    np.testing.assert_allclose(same, x)
    assert beta == 0.0

    rotated, _ = retract(x, 1e-4, 1j * x)
    np.testing.assert_allclose(np.angle(rotated * x.conj()), 1e-4, rtol=1e-6)

    moved, _ = retract(x, 0.7, _crandn(rng, 10))
    np.testing.assert_allclose(np.abs(moved), 1.0, atol=1e-15)


def test_euclidean_gradient_matches_finite_differences(rng):
    for _ in range(50):
        W = _crandn(rng, 5, 2)
        W_D = _crandn(rng, 3, 2)
        x = _vec(_circle(rng, 5, 3))
        g = euclidean_gradient_f2(x, W_D, W)
        d = _crandn(rng, 15)
        h = 1e-6
        fd = (f2_value(x + h * d, W_D, W) - f2_value(x - h * d, W_D, W)) / (2 * h)
        assert fd == pytest.approx(np.real(np.vdot(g, d)), rel=1e-5, abs=1e-8)


def test_mo_stops_immediately_at_exact_factorization(rng):
    W_A = _circle(rng, 4, 2)
    W_D = _crandn(rng, 2, 1)
    W = W_A @ W_D
    result = mo_analog(W, W_D, _vec(W_A))
    assert result.iterations == 0
    assert result.cost_trace[-1] <= 1e-20


def test_mo_trace_is_monotone_and_stays_on_circle(rng):
    W = _crandn(rng, 6, 2)
    W_D = _crandn(rng, 3, 2)
    result = mo_analog(W, W_D, _vec(_circle(rng, 6, 3)), t_max=200)
    trace = np.array(result.cost_trace)
    assert np.all(np.diff(trace) <= 0.0)
    assert on_manifold(result.analog)
    if result.last is not None:
        x = result.last.point
        np.testing.assert_allclose(np.real(result.last.grad * x.conj()), 0.0, atol=1e-9)
        np.testing.assert_allclose(np.real(result.last.direction * x.conj()), 0.0, atol=1e-9)


def test_mo_iterates_do_not_depend_on_digital_scale(rng):
    # the first Armijo trial step is 1 / ||W_D||_2^2, so scaling W and W_D together changes nothing
    W = _crandn(rng, 6, 2)
    W_D = _crandn(rng, 3, 2)
    x0 = _vec(_circle(rng, 6, 3))
    base = mo_analog(W, W_D, x0, eps1=0.0, t_max=10)
    scaled = mo_analog(32.0 * W, 32.0 * W_D, x0, eps1=0.0, t_max=10)
    assert scaled.iterations == base.iterations
    np.testing.assert_allclose(scaled.analog, base.analog, atol=1e-6)
    np.testing.assert_allclose(np.array(scaled.cost_trace) / 1024.0, base.cost_trace, rtol=1e-6, atol=1e-12)


def test_initial_analog_unit_modulus(rng):
    A = initial_analog(_crandn(rng, 8, 2), 4)
    assert A.shape == (8, 4)
    assert on_manifold(A)
    with pytest.raises(ValueError):
        initial_analog(_crandn(rng, 3, 1), 4)


def test_full_rf_factorization_is_near_exact(rng):
    W = _crandn(rng, 4, 2)
    result = hybrid_factorize(W, 4, eps=1e-9)
    assert result.residual_trace[-1] <= 1e-6 * np.linalg.norm(W) ** 2
    assert np.linalg.norm(W - result.analog @ result.digital) ** 2 <= 1e-6 * np.linalg.norm(W) ** 2


def test_factorization_residual_is_monotone(rng):
    W = _crandn(rng, 8, 2)
    result = hybrid_factorize(W, 3, max_outer=20)
    trace = np.array(result.residual_trace)
    assert np.all(np.diff(trace) <= 1e-12 * trace[0])
    assert on_manifold(result.analog)


def test_factorization_power_rescale(rng):
    W = _crandn(rng, 8, 2)
    power = np.linalg.norm(W) ** 2

    loose = hybrid_factorize(W, 3, power_budget=2 * power)
    assert np.linalg.norm(loose.analog @ loose.digital) ** 2 == pytest.approx(power)

    tight = hybrid_factorize(W, 3, power_budget=0.5 * power)
    assert np.linalg.norm(tight.analog @ tight.digital) ** 2 == pytest.approx(0.5 * power)


def test_factorization_needs_enough_rf_chains(rng):
    with pytest.raises(ValueError):
        hybrid_factorize(_crandn(rng, 8, 3), 2)


@pytest.mark.slow
def test_small_instance_beats_random_restarts(rng):
    W = _crandn(rng, 4, 1)
    result = hybrid_factorize(W, 2, eps=1e-10, max_outer=200, t_max=500)
    ours = np.linalg.norm(W - result.analog @ ls_digital(result.analog, W)) ** 2

    best = np.inf
    for _ in range(1000):
        W_A = _circle(rng, 4, 2)
        best = min(best, np.linalg.norm(W - W_A @ ls_digital(W_A, W)) ** 2)
    assert ours <= 1.02 * best + 1e-12
