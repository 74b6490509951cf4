import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmpvol.basis import make_basis
from dmpvol.dmp import Dmp, Trajectory, critical_damping, desired_forcing, learn_from_demo, rollout
from dmpvol.errors import DivergenceError
from dmpvol.phase import CanonicalSystem


def test_trajectory_validation():
    t = np.linspace(0, 1, 5)
    x = np.zeros((5, 2))
    Trajectory(t, x, x, x)
    with pytest.raises(ValueError):
        Trajectory(t + 0.1, x, x, x)
    with pytest.raises(ValueError):
        Trajectory(t[::-1], x, x, x)
    with pytest.raises(ValueError):
        Trajectory(t, x[:4], x, x)
    with pytest.raises(ValueError):
        Trajectory(t, x, np.zeros((5, 3)), x)


def test_trajectory_is_read_only():
    t = np.linspace(0, 1, 5)
    x = np.zeros((5, 2))
    tr = Trajectory(t, x, x, x)
    with pytest.raises(ValueError):
        tr.positions[0, 0] = 1.0


def test_from_positions_is_exact_on_quadratics():
    t = np.linspace(0, 2, 41)
    tr = Trajectory.from_positions(t, np.column_stack([t ** 2, 3 * t - 1]))
    np.testing.assert_allclose(tr.velocities[:, 0], 2 * t, atol=1e-12)
    np.testing.assert_allclose(tr.accelerations[:, 0], 2.0, atol=1e-9)
    np.testing.assert_allclose(tr.velocities[:, 1], 3.0, atol=1e-12)


def test_dmp_validation():
    bs = make_basis(4, 4.0, 1.0)
    w = np.zeros((2, 5))
    ok = dict(elastic=[10, 10], damping=[2, 2], tau=1.0, alpha=4.0, basis=bs, weights=w,
              demo_duration=1.0, x0=[0, 0], goal=[1, 1])
    Dmp(**ok)
    for key, bad in (("elastic", [-1, 10]), ("damping", [0, 2]), ("tau", 0.0),
                     ("weights", np.zeros((2, 4))), ("goal", [1, 1, 1]),
                     ("weights", np.full((2, 5), np.nan))):
        with pytest.raises(ValueError):
            Dmp(**dict(ok, **{key: bad}))


def test_zero_weight_rollout_converges_to_goal():
    dmp = Dmp.zero([0.0, 0.0], [np.pi, 0.0], 1050.0)
    tr = rollout(dmp, dt=1e-3, horizon=3.0)
    assert np.linalg.norm(tr.positions[-1] - dmp.goal) <= 1e-3


def test_rollout_starts_at_rest_and_records_pre_step_state():
    dmp = Dmp.zero([0.0, 1.0], [1.0, -1.0], 100.0)
    tr = rollout(dmp, dt=0.01)
    assert len(tr) == 101
    np.testing.assert_array_equal(tr.positions[0], [0.0, 1.0])
    np.testing.assert_array_equal(tr.velocities[0], [0.0, 0.0])
    # Euler: x1 = x0 + dt * xdot0, v1 = v0 + dt * a0 (world time, tau = 1).
    np.testing.assert_array_equal(tr.positions[1], tr.positions[0])
    np.testing.assert_allclose(tr.velocities[1], 0.01 * tr.accelerations[0], rtol=1e-15)


def test_unforced_demo_gives_near_zero_weights():
    # With a fast phase (alpha = 30) the unforced reach ends on its goal
    # to within 1e-10, so the desired forcing vanishes at every sample.
    gen = Dmp.zero([0.2, -0.4], [1.0, 0.5], 1050.0, alpha=30.0)
    demo = rollout(gen, dt=1e-3)
    assert np.linalg.norm(demo.positions[-1] - gen.goal) < 1e-10
    model = learn_from_demo(demo, 1050.0, alpha=30.0)
    assert np.max(np.abs(model.weights)) <= 1e-6


def test_learning_round_trip_recovers_forcing():
    # Weights equal to (g - x0) cancel the shift term exactly; extra
    # weight on early kernels bends the path but dies out long before
    # t = tau, so the demo still ends on its goal.
    x0, g = np.array([0.0, 0.0]), np.array([1.0, 0.5])
    bs = make_basis(50, 4.0, 1.0)
    w = np.tile((g - x0)[:, None], (1, bs.count))
    bump = np.random.default_rng(3).normal(scale=2.0, size=(2, 12))
    w[:, :12] += bump
    gen = Dmp([1050.0] * 2, critical_damping([1050.0] * 2), 1.0, 4.0, bs, w, 1.0, x0, g)
    demo = rollout(gen, dt=1e-3)
    assert np.linalg.norm(demo.positions[-1] - g) < 1e-6
    model = learn_from_demo(demo, 1050.0)
    s = gen.canonical.phase_at(demo.times)
    rms = np.sqrt(np.mean((model.forcing(s) - gen.forcing(s)) ** 2))
    assert rms < 1e-3


def test_desired_forcing_vanishes_on_exact_solution():
    gen = Dmp.zero([0.0], [1.0], 1050.0, alpha=30.0)
    demo = rollout(gen, dt=1e-3)
    _, f = desired_forcing(demo, np.array([1050.0]), critical_damping([1050.0]), 30.0)
    assert np.max(np.abs(f)) < 1e-8


def test_learned_model_defaults(spiral, spiral_model):
    assert spiral_model.tau == spiral.duration
    np.testing.assert_array_equal(spiral_model.x0, spiral.positions[0])
    np.testing.assert_array_equal(spiral_model.goal, spiral.positions[-1])
    np.testing.assert_allclose(spiral_model.damping, 2 * np.sqrt(1050.0))
    assert spiral_model.weights.shape == (2, 51)


def test_learning_is_deterministic(spiral):
    a = learn_from_demo(spiral, 1050.0)
    b = learn_from_demo(spiral, 1050.0)
    np.testing.assert_array_equal(a.weights, b.weights)


def test_learn_rejects_bad_input(spiral):
    with pytest.raises(ValueError):
        learn_from_demo(Trajectory(np.array([0.0, 1.0]), np.zeros((2, 1)), np.zeros((2, 1)),
                                   np.zeros((2, 1))), 100.0)
    with pytest.raises(ValueError), np.errstate(invalid="ignore"):
        learn_from_demo(spiral, -1.0)
    with pytest.raises(ValueError):
        learn_from_demo(spiral, 100.0, regularization=-1.0)


def test_fine_step_self_oracle(spiral_model):
    coarse = rollout(spiral_model, dt=1e-3)
    fine = rollout(spiral_model, dt=1e-5)
    assert np.max(np.linalg.norm(coarse.positions - fine.positions[::100], axis=1)) <= 1e-2


def test_temporal_scaling_is_exact(spiral_model):
    a = rollout(spiral_model, dt=1e-3)
    b = rollout(spiral_model.with_tau(2 * spiral_model.tau), dt=2e-3)
    np.testing.assert_array_equal(a.positions, b.positions)
    np.testing.assert_array_equal(2 * a.times, b.times)
    np.testing.assert_array_equal(a.velocities, 2 * b.velocities)


def test_goal_change(spiral_model):
    goal = np.array([np.pi, 0.5])
    tr = rollout(spiral_model, goal=goal, dt=1e-3, horizon=3 * spiral_model.tau)
    assert np.linalg.norm(tr.positions[-1] - goal) <= 1e-2


def test_field_sees_world_time_velocity(spiral_model):
    seen = []

    def field(x, v, t):
        seen.append((x.copy(), v.copy(), t))
        return np.zeros(2)

    model = spiral_model.with_tau(2.0)
    tr = rollout(model, dt=1e-3, horizon=0.5, field=field)
    assert len(seen) == len(tr)
    for k in (0, 10, 499):
        np.testing.assert_array_equal(seen[k][0], tr.positions[k])
        np.testing.assert_array_equal(seen[k][1], tr.velocities[k])
        assert seen[k][2] == tr.times[k]
    np.testing.assert_array_equal(tr.positions, rollout(model, dt=1e-3, horizon=0.5).positions)


def test_constant_field_shifts_equilibrium():
    dmp = Dmp.zero([0.0], [0.0], 100.0)
    tr = rollout(dmp, dt=1e-3, horizon=5.0, field=lambda x, v, t: np.array([50.0]))
    assert tr.positions[-1, 0] == pytest.approx(0.5, abs=1e-6)


def test_divergence_is_reported():
    dmp = Dmp.zero([0.0], [1.0], 100.0)
    with pytest.raises(DivergenceError):
        rollout(dmp, dt=1e-3, field=lambda x, v, t: np.array([1e12]))
    with pytest.raises(DivergenceError):
        rollout(dmp, dt=1e-3, field=lambda x, v, t: np.array([np.nan]))
    with pytest.raises(DivergenceError):
        rollout(dmp, dt=1e-3, bound=0.5)


def test_rollout_argument_checks():
    dmp = Dmp.zero([0.0, 0.0], [1.0, 1.0], 100.0)
    with pytest.raises(ValueError):
        rollout(dmp, dt=0.0)
    with pytest.raises(ValueError):
        rollout(dmp, dt=1e-2, horizon=1e-3)
    with pytest.raises(ValueError):
        rollout(dmp, goal=[1.0])


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2),
       st.lists(st.floats(-3, 3), min_size=2, max_size=2),
       st.floats(0.5, 3.0))
def test_zero_weights_converge_from_anywhere(x0, g, tau):
    dmp = Dmp.zero(x0, g, 1050.0, tau=tau)
    tr = rollout(dmp, dt=1e-3 * tau, horizon=3 * tau)
    assert np.linalg.norm(tr.positions[-1] - dmp.goal) <= 1e-3 * max(1.0, np.linalg.norm(
        np.subtract(g, x0)))


def test_phase_used_by_rollout_is_closed_form():
    dmp = Dmp.zero([0.0], [1.0], 100.0, tau=2.0)
    s = CanonicalSystem(dmp.alpha, 2.0).phase_at(np.array([0.0, 1.0]))
    assert s[1] == pytest.approx(np.exp(-2.0))
