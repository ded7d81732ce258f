import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cimanneal.exceptions import DivergenceError
from cimanneal.graph import GraphGenSpec, IsingProblem, generate_random
from cimanneal.nmfa import NmfaParams, nmfa_run, nmfa_run_batch, nmfa_step
from cimanneal.simcim import PumpSchedule

from conftest import random_symmetric


def plain(alpha=0.1, zeta=1.0, iterations=100, noise=0.0, schedule=None, zeta_auto=False, seed=0):
    return NmfaParams(alpha=alpha, zeta=zeta, noise_amplitude=noise, schedule=schedule,
                      iterations=iterations, seed=seed, zeta_auto=zeta_auto)


def test_zero_couplings_decay_geometrically():
    P = IsingProblem(np.zeros((4, 4)))
    p = plain(alpha=0.25)
    x = np.array([0.8, -0.4, 0.2, 0.1])
    for t in range(10):
        x_new = nmfa_step(P, x, p, t)
        np.testing.assert_allclose(x_new, 0.75 * x, rtol=1e-15)
        x = x_new


def test_alpha_one_is_pure_mean_field():
    J = random_symmetric(8, 1)
    P = IsingProblem(J)
    sched = PumpSchedule.linear(0.5, 2.0, 10)
    p = plain(alpha=1.0, zeta=0.3, iterations=10, schedule=sched)
    x = np.random.default_rng(0).uniform(-1, 1, 8)
    s3 = sched.values()[3]
    np.testing.assert_allclose(nmfa_step(P, x, p, 3), np.tanh(0.3 * s3 * J @ x), rtol=1e-15)


def test_noise_enters_inside_tanh():
    J = random_symmetric(6, 2)
    P = IsingProblem(J)
    p = plain(alpha=0.5, zeta=0.2, noise=0.7, iterations=3)
    x = np.linspace(-0.5, 0.5, 6)
    out = nmfa_step(P, x, p, 0, rng=np.random.default_rng(4))
    eta = 0.7 * np.random.default_rng(4).standard_normal(6)
    np.testing.assert_allclose(out, 0.5 * x + 0.5 * np.tanh(0.2 * (J @ x + eta)), rtol=1e-14)
    with pytest.raises(ValueError):
        nmfa_step(P, x, p, 0)


def test_ferromagnetic_pair_fixed_point(ferro2):
    p = plain(alpha=1.0, zeta=5.0, iterations=200)
    x = np.array([0.1, 0.1])
    for t in range(200):
        x = nmfa_step(ferro2, x, p, t)
    assert np.sign(x[0]) == np.sign(x[1])
    np.testing.assert_allclose(x, np.tanh(5.0 * ferro2.matmul(x)), atol=1e-8)


def test_alpha_one_fixed_point_equation():
    P = IsingProblem(random_symmetric(10, 5))
    p = plain(alpha=1.0, zeta=0.8, iterations=2000, zeta_auto=True)
    from cimanneal.simcim import effective_zeta

    z = effective_zeta(P, 0.8, True)
    x = np.full(10, 0.3)
    for t in range(2000):
        x_new = nmfa_step(P, x, p, t, zeta=z)
        if np.max(np.abs(x_new - x)) < 1e-12:
            break
        x = x_new
    np.testing.assert_allclose(x_new, np.tanh(z * P.matmul(x_new)), atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 1000), alpha=st.floats(0.01, 1.0), noise=st.floats(0.0, 5.0))
def test_amplitudes_stay_in_unit_interval(seed, alpha, noise):
    P = IsingProblem(random_symmetric(10, seed))
    p = plain(alpha=alpha, noise=noise, iterations=20, zeta=0.5)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.99, 0.99, 10)
    for t in range(20):
        x = nmfa_step(P, x, p, t, rng=rng)
        assert np.all(np.abs(x) <= 1.0)


def test_step_errors():
    P = IsingProblem(np.zeros((3, 3)))
    p = plain(iterations=5)
    with pytest.raises(ValueError):
        nmfa_step(P, np.zeros(4), p, 0)
    with pytest.raises(DivergenceError):
        nmfa_step(P, np.array([0.0, np.nan, 0.0]), p, 0)
    with pytest.raises(IndexError):
        nmfa_step(P, np.zeros(3), p, 5)


@pytest.mark.parametrize("kwargs", [dict(alpha=0.0), dict(alpha=1.5), dict(zeta=-1.0), dict(noise_amplitude=-0.1)])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        NmfaParams(**kwargs)


def test_schedule_length_must_match():
    with pytest.raises(ValueError):
        NmfaParams(iterations=10, schedule=PumpSchedule.linear(0, 1, 11))
    assert NmfaParams().with_iterations(10).schedule.duration == 10


def test_zero_couplings_cut_zero():
    P = IsingProblem(np.zeros((5, 5)))
    r = nmfa_run(P, NmfaParams().with_iterations(50))
    assert r.cut == 0.0


def test_run_deterministic(gauss16):
    p = NmfaParams(seed=2).with_iterations(100)
    a, b = nmfa_run(gauss16, p), nmfa_run(gauss16, p)
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)


def test_batch_bit_exact_across_thread_counts():
    P = generate_random(GraphGenSpec(50, "gaussian", seed=8))
    p = NmfaParams(seed=1).with_iterations(150)
    a, _ = nmfa_run_batch(P, p, 70, n_jobs=1)
    b, _ = nmfa_run_batch(P, p, 70, n_jobs=3)
    np.testing.assert_array_equal(a.spins, b.spins)
    np.testing.assert_array_equal(a.cuts, b.cuts)
