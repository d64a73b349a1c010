import logging

import numpy as np
import pytest
import scipy.linalg

from nfsecure.beamforming import (
    bisect_mu,
    block_auxiliaries,
    initial_beamformer,
    secrecy_nats,
    solve_w_given_mu,
    wmmse_fully_digital,
    wmmse_objective,
)


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _power(W):
    return float(np.real(np.vdot(W, W)))


def test_objective_equals_secrecy_at_block_optimum(rng):
    for _ in range(100):
        Ht = 3.0 * _crandn(rng, 2, 8)
        Zt = _crandn(rng, 2, 8)
        W = _crandn(rng, 8, 2)
        P, Q_U, Q_E = block_auxiliaries(Ht, Zt, W)
        expected = secrecy_nats(Ht, Zt, W)
        assert wmmse_objective(P, Q_U, Q_E, W, Ht, Zt) == pytest.approx(expected, rel=1e-8, abs=1e-10)


def test_objective_lower_bounds_secrecy_away_from_optimum(rng):
    Ht = _crandn(rng, 2, 4)
    Zt = _crandn(rng, 2, 4)
    W = _crandn(rng, 4, 2)
    P, Q_U, Q_E = block_auxiliaries(Ht, Zt, _crandn(rng, 4, 2))
    assert wmmse_objective(P, Q_U, Q_E, W, Ht, Zt) <= secrecy_nats(Ht, Zt, W) + 1e-10


def test_bisection_meets_budget_when_unconstrained_solution_is_too_loud(rng):
    checked = 0
    for _ in range(100):
        Ht = 5.0 * _crandn(rng, 2, 8)
        Zt = _crandn(rng, 2, 8)
        P, Q_U, Q_E = block_auxiliaries(Ht, Zt, _crandn(rng, 8, 2))
        budget = 1e-3
        mu, W = bisect_mu(P, Q_U, Q_E, Ht, Zt, budget)
        if mu == 0.0:
            assert _power(W) <= budget
            continue
        checked += 1
        assert abs(_power(W) - budget) <= 1e-8 * budget
    assert checked > 0


def test_bisection_returns_zero_mu_for_feasible_solution(rng):
    Ht = _crandn(rng, 2, 2)
    Zt = 0.1 * _crandn(rng, 2, 2)
    P, Q_U, Q_E = block_auxiliaries(Ht, Zt, 0.1 * _crandn(rng, 2, 2))
    W0 = solve_w_given_mu(P, Q_U, Q_E, Ht, Zt, 0.0)
    mu, W = bisect_mu(P, Q_U, Q_E, Ht, Zt, 10.0 * _power(W0))
    assert mu == 0.0
    np.testing.assert_allclose(W, W0)


def test_solve_w_rejects_negative_mu(rng):
    Ht = _crandn(rng, 2, 4)
    Zt = _crandn(rng, 2, 4)
    P, Q_U, Q_E = block_auxiliaries(Ht, Zt, _crandn(rng, 4, 2))
    with pytest.raises(ValueError):
        solve_w_given_mu(P, Q_U, Q_E, Ht, Zt, -1.0)


def test_initial_beamformer_uses_full_budget(rng):
    Ht = _crandn(rng, 2, 6)
    W = initial_beamformer(Ht, 2, 0.1)
    assert W.shape == (6, 2)
    assert _power(W) == pytest.approx(0.1)


def test_wmmse_secrecy_trace_is_monotone(rng):
    Ht = 4.0 * _crandn(rng, 2, 4)
    Zt = _crandn(rng, 2, 4)
    result = wmmse_fully_digital(Ht, Zt, 1.0, num_streams=2, tol=1e-10, max_iters=100)
    trace = np.array(result.secrecy_trace)
    assert np.all(np.diff(trace) >= -1e-9 * np.maximum(1.0, trace[1:]))
    assert _power(result.W) <= 1.0 * (1 + 1e-8)
    assert result.iterations >= 1


def test_wmmse_improves_on_start(rng):
    Ht = 4.0 * _crandn(rng, 2, 4)
    Zt = _crandn(rng, 2, 4)
    start = initial_beamformer(Ht, 2, 1.0)
    result = wmmse_fully_digital(Ht, Zt, 1.0, W0=start)
    assert secrecy_nats(Ht, Zt, result.W) >= secrecy_nats(Ht, Zt, start) - 1e-9


def test_wmmse_requires_start_or_stream_count(rng):
    with pytest.raises(ValueError):
        wmmse_fully_digital(_crandn(rng, 2, 4), _crandn(rng, 2, 4), 1.0)


def test_wmmse_rejects_start_above_budget(rng):
    Ht = _crandn(rng, 2, 4)
    with pytest.raises(ValueError):
        wmmse_fully_digital(Ht, _crandn(rng, 2, 4), 1.0, W0=initial_beamformer(Ht, 2, 2.0))


def test_wmmse_reports_iteration_cap(rng, caplog):
    Ht = 4.0 * _crandn(rng, 2, 4)
    Zt = _crandn(rng, 2, 4)
    with caplog.at_level(logging.WARNING, logger="nfsecure.beamforming.wmmse"):
        result = wmmse_fully_digital(Ht, Zt, 1.0, num_streams=2, tol=1e-12, max_iters=1)
    assert result.iterations == 1
    assert not result.converged
    assert "iteration cap" in caplog.text


def test_wmmse_sets_converged_on_tolerance(rng):
    Ht = 4.0 * _crandn(rng, 2, 4)
    Zt = _crandn(rng, 2, 4)
    result = wmmse_fully_digital(Ht, Zt, 1.0, num_streams=2, tol=1e-3, max_iters=500)
    assert result.converged
    assert result.iterations < 500


def _waterfilling_capacity(Ht, power):
    gains = np.sort(np.linalg.svd(Ht, compute_uv=False) ** 2)[::-1]
    gains = gains[gains > 1e-12]
    for active in range(len(gains), 0, -1):
        level = (power + np.sum(1.0 / gains[:active])) / active
        if level > 1.0 / gains[active - 1]:
            return float(np.sum(np.log(level * gains[:active])))
    return 0.0


@pytest.mark.slow
def test_wmmse_without_eavesdropper_reaches_waterfilling_capacity(rng):
    for _ in range(5):
        Ht = 2.0 * _crandn(rng, 2, 4)
        Zt = np.zeros((1, 4), dtype=complex)
        result = wmmse_fully_digital(Ht, Zt, 1.0, num_streams=2, tol=1e-14, max_iters=5000)
        capacity = _waterfilling_capacity(Ht, 1.0)
        rate = secrecy_nats(Ht, Zt, result.W)
        assert rate <= capacity + 1e-9
        assert rate == pytest.approx(capacity, rel=1e-4)


@pytest.mark.slow
def test_single_stream_wmmse_matches_generalized_eigen_optimum(rng):
    power = 1.0
    for _ in range(5):
        Ht = 3.0 * _crandn(rng, 2, 8)
        Zt = _crandn(rng, 2, 8)
        A = np.eye(8) / power + Ht.conj().T @ Ht
        B = np.eye(8) / power + Zt.conj().T @ Zt
        best = float(np.log(scipy.linalg.eigh(A, B, eigvals_only=True)[-1]))

        result = wmmse_fully_digital(Ht, Zt, power, num_streams=1, tol=1e-14, max_iters=20000)
        secrecy = secrecy_nats(Ht, Zt, result.W)
        assert secrecy <= best + 1e-9
        assert secrecy == pytest.approx(best, rel=1e-3)
