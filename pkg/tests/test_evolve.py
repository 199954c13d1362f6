import numpy as np
import pytest

from markov_flow import (
    RELATIVE_GINI,
    RELATIVE_SHANNON,
    SHANNON,
    decompose,
    default_time_grid,
    entropy_trace,
    evolve,
    gini_divergence,
    lambda2,
    probability_vector,
    relative_f_kind,
    rk4_integrate,
)
from markov_flow.errors import StepTooLarge
from markov_flow.instances import shannon_nonmonotone, three_cycle, two_state

from helpers import random_birth_death, random_generator, random_probability


def test_stationary_start_is_fixed_point():
    gen = three_cycle()
    d = decompose(gen)
    traj = evolve(gen, d.pi, np.linspace(0.0, 5.0, 20))
    assert np.abs(traj.states - d.pi.p[np.newaxis, :]).max() <= 1e-12


def test_two_state_closed_form():
    gen = two_state()
    t = np.linspace(0.0, 4.0, 60)
    traj = evolve(gen, probability_vector([1.0, 0.0]), t)
    expected = 2 / 3 + np.exp(-3.0 * t) / 3
    np.testing.assert_allclose(traj.states[:, 0], expected, atol=1e-13)
    np.testing.assert_allclose(traj.states[:, 1], 1.0 - expected, atol=1e-13)


def test_rk4_two_state_closed_form():
    gen = two_state()
    traj = rk4_integrate(gen, probability_vector([1.0, 0.0]), t_end=2.0, h=0.01)
    expected = 2 / 3 + np.exp(-3.0 * traj.times) / 3
    np.testing.assert_allclose(traj.states[:, 0], expected, atol=1e-9)


def test_integrators_agree():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(15):
        n = int(rng.integers(3, 9))
        gen = random_generator(rng, n)
        p0 = random_probability(rng, n)
        rate = np.abs(np.diag(gen.q)).max()
        h = 0.02 / rate
        traj_rk = rk4_integrate(gen, p0, t_end=4.0 / rate, h=h)
        picks = [0, len(traj_rk.times) // 3, -1]
        traj_ex = evolve(gen, p0, traj_rk.times[picks])
        for row, k in zip(traj_ex.states, picks):
            worst = max(worst, np.abs(row - traj_rk.states[k]).max())
    assert worst <= 1e-8, worst


def test_rk4_conserves_probability():
    rng = np.random.default_rng(5)
    gen = random_generator(rng, 5)
    p0 = random_probability(rng, 5)
    h = 0.05 / np.abs(np.diag(gen.q)).max()
    q = gen.q
    # raw steps, before the trajectory cleanup renormalizes
    p = p0.p.copy()
    for _ in range(200):
        k1 = q @ p
        k2 = q @ (p + 0.5 * h * k1)
        k3 = q @ (p + 0.5 * h * k2)
        k4 = q @ (p + h * k3)
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        assert abs(p.sum() - 1.0) <= 1e-12


def test_rk4_fourth_order_convergence():
    gen = from_rates_3state()
    p0 = probability_vector([0.7, 0.2, 0.1])
    t_end = 1.0
    ref = evolve(gen, p0, np.array([t_end])).states[-1]
    err = []
    for h in (0.02, 0.01):
        traj = rk4_integrate(gen, p0, t_end, h)
        err.append(np.abs(traj.states[-1] - ref).max())
    ratio = err[0] / err[1]
    assert 8.0 <= ratio <= 32.0, ratio


def from_rates_3state():
    rng = np.random.default_rng(11)
    return random_generator(rng, 3)


def test_rk4_step_guard():
    gen = two_state()
    with pytest.raises(StepTooLarge):
        rk4_integrate(gen, probability_vector([1.0, 0.0]), t_end=1.0, h=0.2)
    with pytest.raises(ValueError):
        rk4_integrate(gen, probability_vector([1.0, 0.0]), t_end=1.0, h=-0.1)


def test_times_validation():
    gen = two_state()
    p0 = probability_vector([1.0, 0.0])
    with pytest.raises(ValueError):
        evolve(gen, p0, [-1.0, 0.0])
    with pytest.raises(ValueError):
        evolve(gen, p0, [0.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        evolve(gen, p0, [])


def test_states_are_clean_probability_rows():
    rng = np.random.default_rng(7)
    gen = random_generator(rng, 6)
    traj = evolve(gen, random_probability(rng, 6), np.geomspace(1e-3, 50.0, 80))
    assert traj.states.min() >= 0.0
    np.testing.assert_allclose(traj.states.sum(axis=1), 1.0, atol=1e-14)


def test_long_time_limit_reaches_stationarity():
    rng = np.random.default_rng(9)
    for _ in range(10):
        n = int(rng.integers(3, 8))
        gen = random_generator(rng, n)
        d = decompose(gen)
        lam2 = lambda2(d)
        p0 = random_probability(rng, n, concentrated=True)
        t_end = 12.0 / lam2
        traj = evolve(gen, p0, np.array([t_end]))
        gap = np.abs(traj.states[-1] - d.pi.p).max()
        loose = 10.0 * np.exp(-lam2 * t_end) * np.sqrt(
            gini_divergence(p0, d.pi.p)
        ) * np.sqrt(d.pi.p.max())
        assert gap <= max(loose, 1e-13)


def test_default_time_grid():
    gen = two_state()
    grid = default_time_grid(gen, points=50)
    assert grid.shape == (50,)
    assert grid[0] > 0.0
    np.testing.assert_allclose(grid[-1], 10.0 / 1.0)  # min |q_ii| = 1
    grid2 = default_time_grid(gen, points=10, decay_rate=5.0)
    np.testing.assert_allclose(grid2[-1], 2.0)
    grid3 = default_time_grid(gen, points=10, t_max=7.0)
    np.testing.assert_allclose(grid3[-1], 7.0)


def test_traces_detailed_balance_chain_kl_monotone():
    rng = np.random.default_rng(13)
    gen = random_birth_death(rng, 5)
    p0 = random_probability(rng, 5)
    traj = evolve(gen, p0, np.geomspace(1e-3, 40.0, 120))
    traj = entropy_trace(traj, gen, [RELATIVE_SHANNON, RELATIVE_GINI])
    assert traj.monotone_violations["kl"] is None
    assert traj.monotone_violations["gini_divergence"] is None
    assert "gini_production" in traj.traces
    assert traj.traces["gini_production"].max() <= 1e-12


def test_traces_shannon_nonmonotone_instance():
    gen, p0 = shannon_nonmonotone()
    times = np.concatenate([[0.0], np.geomspace(1e-3, 20.0, 200)])
    traj = entropy_trace(evolve(gen, p0, times), gen,
                         [SHANNON, RELATIVE_SHANNON, RELATIVE_GINI])
    shannon = traj.traces["shannon"]
    peak = int(np.argmax(shannon))
    assert shannon[peak] - shannon[0] >= 1e-3
    assert shannon[peak] - shannon[-1] >= 1e-3
    assert traj.monotone_violations["shannon"] is not None
    assert traj.monotone_violations["kl"] is None
    assert traj.monotone_violations["gini_divergence"] is None


def test_traces_gini_monotone_random_sweep():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        gen = random_generator(rng, n, density=float(rng.uniform(0.5, 1.0)))
        p0 = random_probability(rng, n, concentrated=bool(rng.integers(2)))
        grid = default_time_grid(gen, points=40)
        traj = entropy_trace(evolve(gen, p0, grid), gen, [RELATIVE_GINI])
        assert traj.monotone_violations["gini_divergence"] is None


def test_traces_custom_relative_f_kind_monotone():
    rng = np.random.default_rng(19)
    gen = random_generator(rng, 4)
    p0 = random_probability(rng, 4)
    kind = relative_f_kind(lambda x: (x - 1.0) ** 2, name="sq_dist")
    traj = entropy_trace(evolve(gen, p0, np.geomspace(1e-3, 30.0, 80)), gen, [kind])
    assert traj.monotone_violations["sq_dist"] is None
    assert traj.traces["sq_dist"].max() <= 1e-12


def test_trajectory_is_immutable():
    gen = two_state()
    traj = evolve(gen, probability_vector([1.0, 0.0]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        traj.states[0, 0] = 2.0
