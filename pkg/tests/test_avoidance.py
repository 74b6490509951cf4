import numpy as np
import pytest

from conftest import central_gradient
from dmpvol import avoidance as av
from dmpvol.errors import InsideObstacleError, SingularityError
from dmpvol.obstacles import PointObstacle, Superquadric, discretize_boundary, isopotential

ELLIPSE = Superquadric([-0.5, 0.7], [0.3, 0.2])
CIRCLE = Superquadric([0.15, 0.4], [0.1, 0.1])
ORIGIN = PointObstacle([0.0, 0.0])


def test_static_point_outside_radius_is_zero():
    m = av.StaticPoint(1.0, 0.1)
    np.testing.assert_array_equal(av.perturbation(m, [0.2, 0.0], [1, 0], ORIGIN), [0, 0])
    np.testing.assert_array_equal(av.perturbation(m, [0.1, 0.0], [1, 0], ORIGIN), [0, 0])


def test_static_point_finite_difference_example():
    m = av.StaticPoint(1.0, 0.1)
    x = np.array([0.05, 0.0])
    phi = av.perturbation(m, x, [0, 0], ORIGIN)
    fd = -central_gradient(lambda y: av.potential(m, y, None, ORIGIN), x)
    np.testing.assert_allclose(phi, fd, rtol=1e-6)
    # Hand value: eta (1/p - 1/p0) / p^2 along x.
    assert phi[0] == pytest.approx((1 / 0.05 - 1 / 0.1) / 0.05 ** 2)


def test_dynamic_point_zero_cases():
    m = av.DynamicPoint(0.2, 2.0)
    moving = PointObstacle([0.0, 0.0], [0.3, -0.1])
    np.testing.assert_array_equal(av.perturbation(m, [0.1, 0.1], [0.3, -0.1], moving), [0, 0])
    np.testing.assert_array_equal(av.perturbation(m, [0.1, 0.0], [1.0, 0.0], ORIGIN), [0, 0])


def test_dynamic_point_finite_difference_example(rng):
    m = av.DynamicPoint(0.2, 2.0)
    x = np.array([0.3, 0.1])
    v = np.array([-1.0, 0.2])
    phi = av.perturbation(m, x, v, ORIGIN)
    fd = -central_gradient(lambda y: av.potential(m, y, v, ORIGIN), x)
    assert np.linalg.norm(phi - fd) <= 1e-5 * np.linalg.norm(phi)


def test_steering_degenerate_cases():
    m = av.SteeringAngle(20.0, 3.0)
    obs = PointObstacle([1.0, 0.0], [0.5, 0.0])
    np.testing.assert_array_equal(av.perturbation(m, [0.0, 0.0], [0.5, 0.0], obs), [0, 0])
    ahead = PointObstacle([1.0, 0.0])
    np.testing.assert_array_equal(av.perturbation(m, [0.0, 0.0], [1.0, 0.0], ahead), [0, 0])


def test_steering_turns_velocity_away_from_obstacle():
    m = av.SteeringAngle(20.0, 3.0)
    obs = PointObstacle([1.0, 0.1])
    v = np.array([1.0, 0.0])
    phi = av.perturbation(m, [0.0, 0.0], v, obs)
    assert phi @ v == pytest.approx(0.0, abs=1e-12)
    assert phi[1] < 0


def test_steering_in_3d_is_perpendicular():
    m = av.SteeringAngle(20.0, 3.0)
    v = np.array([1.0, 0.2, -0.1])
    phi = av.perturbation(m, [0, 0, 0], v, PointObstacle([1.0, 0.3, 0.4]))
    assert phi @ v == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(phi) > 0


def test_steering_has_no_potential():
    with pytest.raises(TypeError):
        av.potential(av.SteeringAngle(), [0, 0], [1, 0], ORIGIN)


def test_angle_conventions_are_opposite(rng):
    for _ in range(20):
        obs = PointObstacle(rng.normal(size=2), rng.normal(size=2))
        x, v = rng.normal(size=2), rng.normal(size=2)
        assert av.point_cos_theta(x, v, obs) == pytest.approx(
            -np.cos(av.steering_angle(x, v, obs)), abs=1e-12)


def test_static_volume_decays_along_ray():
    m = av.StaticVolume(10.0, 1.0)
    d = np.array([0.6, 0.8])
    norms = [np.linalg.norm(av.perturbation(m, ELLIPSE.center + r * d, [0, 0], ELLIPSE))
             for r in np.linspace(0.35, 3.0, 30)]
    assert np.all(np.diff(norms) < 0)


def test_static_volume_is_radial_on_sphere():
    sphere = Superquadric([0.0, 0.0, 0.0], [0.5, 0.5, 0.5])
    x = np.array([0.4, -0.3, 0.6])
    phi = av.perturbation(av.StaticVolume(10.0, 1.0), x, [0, 0, 0], sphere)
    np.testing.assert_allclose(np.cross(phi, x), 0.0, atol=1e-12 * np.linalg.norm(phi))
    assert phi @ x > 0


def test_static_volume_finite_difference_example(rng):
    m = av.StaticVolume(10.0, 1.0)
    x = np.array([-0.1, 0.9])
    phi = av.perturbation(m, x, [0, 0], ELLIPSE)
    fd = -central_gradient(lambda y: av.potential(m, y, None, ELLIPSE), x)
    assert np.linalg.norm(phi - fd) <= 1e-5 * np.linalg.norm(phi)


def test_dynamic_volume_zero_cases():
    m = av.DynamicVolume(10.0, 2.0, 0.5)
    moving = Superquadric([0, 0], [0.3, 0.2], velocity=[0.2, 0.1])
    np.testing.assert_array_equal(av.perturbation(m, [1.0, 0.5], [0.2, 0.1], moving), [0, 0])
    np.testing.assert_array_equal(av.perturbation(m, [-0.1, 0.7], [1.0, 0.0], ELLIPSE), [0, 0])


def test_dynamic_volume_finite_difference_example():
    m = av.DynamicVolume(10.0, 2.0, 0.5)
    x = np.array([-1.0, 0.9])
    v = np.array([1.0, -0.3])
    phi = av.perturbation(m, x, v, ELLIPSE)
    fd = -central_gradient(lambda y: av.potential(m, y, v, ELLIPSE), x)
    assert np.linalg.norm(phi - fd) <= 1e-5 * np.linalg.norm(phi)


def test_dynamic_volume_fd_cos_option_agrees():
    x = np.array([-1.0, 0.9])
    v = np.array([1.0, -0.3])
    exact = av.perturbation(av.DynamicVolume(10.0, 2.0, 0.5), x, v, ELLIPSE)
    approx = av.perturbation(av.DynamicVolume(10.0, 2.0, 0.5, fd_cos_gradient=True), x, v, ELLIPSE)
    np.testing.assert_allclose(approx, exact, rtol=1e-6)


def test_volume_methods_refuse_interior_points():
    for m in (av.StaticVolume(), av.DynamicVolume()):
        with pytest.raises(InsideObstacleError):
            av.perturbation(m, ELLIPSE.center, [1.0, 0.0], ELLIPSE)


def test_point_methods_refuse_coincident_position():
    with pytest.raises(SingularityError):
        av.perturbation(av.DynamicPoint(), [0.0, 0.0], [1.0, 0.0], ORIGIN)


@pytest.mark.parametrize("cls,kwargs", [
    (av.StaticPoint, dict(eta=-1)), (av.StaticPoint, dict(p0=0)),
    (av.DynamicPoint, dict(beta=1.0)), (av.DynamicVolume, dict(beta=0.5)),
    (av.DynamicVolume, dict(lam=-2)), (av.StaticVolume, dict(amplitude=float("inf"))),
    (av.SteeringAngle, dict(gamma=0)),
])
def test_method_gain_validation(cls, kwargs):
    with pytest.raises(ValueError):
        cls(**kwargs)


def test_composed_field_is_additive(rng):
    members = [(av.DynamicVolume(10.0, 2.0, 0.5), ELLIPSE), (av.DynamicVolume(10.0, 2.0, 0.5), CIRCLE),
               (av.StaticVolume(10.0, 1.0), CIRCLE)]
    field = av.compose_field(members)
    assert len(field) == 3
    for _ in range(20):
        x = np.array([0.3, 1.0]) + rng.normal(scale=0.2, size=2)
        if min(isopotential(ELLIPSE, x), isopotential(CIRCLE, x)) <= 0:
            continue
        v = rng.normal(size=2)
        parts = [av.perturbation(m, x, v, o) for m, o in members]
        np.testing.assert_allclose(field(x, v, 0.0), sum(parts), rtol=1e-12, atol=1e-14)


def test_composed_field_with_clouds():
    cloud = discretize_boundary(ELLIPSE, 50)
    x, v = np.array([-0.9, 0.75]), np.array([1.0, 0.0])
    for m in (av.StaticPoint(1.0, 0.1), av.DynamicPoint(0.2, 2.0), av.SteeringAngle(20.0, 3.0)):
        field = av.compose_field([(m, cloud)])
        expected = sum(av.perturbation(m, x, v, p) for p in cloud)
        np.testing.assert_allclose(field(x, v), expected, rtol=1e-12, atol=1e-14)


def test_gated_members_give_zero():
    field = av.compose_field([(av.DynamicVolume(), ELLIPSE), (av.StaticPoint(1.0, 0.1), ORIGIN)])
    np.testing.assert_array_equal(field([2.0, 2.0], [1.0, 1.0]), [0.0, 0.0])


def test_many_matches_single_calls(rng):
    field = av.compose_field([(av.DynamicVolume(10.0, 2.0, 0.5), ELLIPSE),
                              (av.StaticVolume(10.0, 1.0), CIRCLE),
                              (av.DynamicPoint(0.2, 2.0), discretize_boundary(CIRCLE, 8))])
    xs = np.array([[-1.0, 0.9], [0.5, 0.6], [0.0, 0.0]])
    vs = rng.normal(size=(3, 2))
    rows = field.many(xs, vs)
    for r in range(3):
        np.testing.assert_array_equal(rows[r], field(xs[r], vs[r]))


def test_composed_field_reports_member_and_state():
    field = av.compose_field([(av.StaticVolume(), CIRCLE), (av.DynamicVolume(), ELLIPSE)])
    xs = np.array([[2.0, 2.0], ELLIPSE.center])
    with pytest.raises(InsideObstacleError, match="member 1") as info:
        field.many(xs, np.ones((2, 2)), 0.5)
    assert info.value.state == 1


def test_compose_field_rejects_bad_members():
    with pytest.raises(ValueError):
        av.compose_field([])
    with pytest.raises(TypeError):
        av.compose_field([(av.StaticVolume(), ORIGIN)])
    with pytest.raises(TypeError):
        av.compose_field([(av.StaticPoint(), ELLIPSE)])
    with pytest.raises(TypeError):
        av.compose_field([("static_volume", ELLIPSE)])
