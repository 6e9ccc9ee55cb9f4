import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from grasp_energy.contact_solver import (
    ActuationCommand, finger_configuration, proximal_force_case, solve_side,
)
from grasp_energy.energy_map import point_energies
from grasp_energy.equilibrium import cone_edge_array, origin_in_hull
from grasp_energy.kinematics import LEFT, RIGHT, GrasperDesign, ObjectSpec, contact_from_config
from grasp_energy.manipulation import inscribed_radius

FAST = settings(max_examples=60, deadline=None)

designs = st.builds(
    GrasperDesign,
    l1=st.sampled_from([0.8, 1.2, 1.6, 2.0]), l2=st.sampled_from([0.4, 0.8, 1.2, 1.6]),
    r1=st.sampled_from([0.08, 0.12, 0.2]), r2=st.sampled_from([0.06, 0.1, 0.18]),
    w=st.sampled_from([0.0, 0.4, 1.2, 2.0]),
)
objects = st.builds(ObjectSpec, r=st.sampled_from([0.4, 0.8, 1.2, 1.6]),
                    mu_s=st.sampled_from([0.0, 0.1, 0.4, 0.7, 1.0]))
xs = st.floats(-4.0, 4.0, allow_nan=False)
heights = st.floats(0.0, 4.0, allow_nan=False)


def _point(obj, x, h):
    return np.array([x, obj.r + h])


@FAST
@given(designs, objects, xs, heights)
def test_mirror_symmetry_of_finger_solutions(d, o, x, h):
    p = _point(o, x, h)
    right = finger_configuration(d, o, p, 1.0, RIGHT)
    left = finger_configuration(d, o, p * [-1, 1], 1.0, LEFT)
    assert (right is None) == (left is None)
    if right is None:
        return
    assert left.config.theta1 == right.config.theta1
    assert left.config.theta2 == right.config.theta2
    assert left.normal_forces == right.normal_forces
    for a, b in zip(right.contacts, left.contacts):
        np.testing.assert_allclose(b.position, a.position * [-1, 1], atol=1e-12)


@FAST
@given(designs, objects, xs, heights, st.sampled_from([LEFT, RIGHT]))
def test_contact_normals_unit_and_central(d, o, x, h, side):
    p = _point(o, x, h)
    sol = finger_configuration(d, o, p, 1.0, side)
    assume(sol is not None)
    for c in contact_from_config(d, o, p, sol.config):
        assert np.linalg.norm(c.normal) == pytest.approx(1.0, abs=1e-9)
        # the normal line through the contact passes through the centre
        arm = p - c.position
        assert abs(arm[0] * c.normal[1] - arm[1] * c.normal[0]) <= 1e-9
        assert np.linalg.norm(arm) == pytest.approx(o.r, abs=1e-6)


@FAST
@given(designs, objects, st.floats(0.05, np.pi / 2), st.floats(0.05, 2.0), st.floats(0.05, 1.6),
       st.floats(0.01, 100.0))
def test_case_invariant_under_force_scaling(d, o, t2, k1, k2, s):
    c1, (lo1, hi1) = proximal_force_case(d, o, t2, k1, k2, 1.0)
    c2, (lo2, hi2) = proximal_force_case(d, o, t2, k1, k2, s)
    assert c1 == c2
    assert lo2 == pytest.approx(s * lo1, rel=1e-9, abs=1e-12)
    assert hi2 == pytest.approx(s * hi1, rel=1e-9, abs=1e-12)


contact_sets = st.lists(st.tuples(st.floats(0, 2 * np.pi), st.floats(0.1, 3.0)), min_size=1, max_size=5)


def _rows(angles_forces, mu, r=0.5, p=(0.0, 2.0)):
    a = np.array([t for t, _ in angles_forces])
    f = np.array([v for _, v in angles_forces])
    u = np.column_stack([np.cos(a), np.sin(a)])
    return cone_edge_array(np.asarray(p) + r * u, -u, f, mu, r, p)


@FAST
@given(contact_sets, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_equilibrium_nests_in_friction(cs, mu, extra):
    if origin_in_hull(_rows(cs, mu)):
        assert origin_in_hull(_rows(cs, mu + extra))


@FAST
@given(contact_sets, st.floats(0.0, 1.0), st.floats(0.01, 100.0))
def test_equilibrium_scale_invariant(cs, mu, s):
    scaled = [(t, v * s) for t, v in cs]
    assert origin_in_hull(_rows(cs, mu)) == origin_in_hull(_rows(scaled, mu))


@FAST
@given(contact_sets)
def test_frictionless_disk_wrenches_have_no_moment(cs):
    np.testing.assert_allclose(_rows(cs, 0.0)[:, 2], 0.0, atol=1e-12)


@FAST
@given(designs, objects, st.lists(st.tuples(xs, heights), min_size=1, max_size=8))
def test_energy_non_positive(d, o, pts):
    P = np.array([_point(o, x, h) for x, h in pts])
    V, reach, _, _ = point_energies(d, o, ActuationCommand(), P[:, 0], P[:, 1])
    assert np.all(V[reach] <= 1e-12)
    assert np.all(np.isnan(V[~reach]))


@FAST
@given(designs, st.sampled_from([0.4, 0.8, 1.6]), st.lists(st.tuples(xs, heights), min_size=1, max_size=8))
def test_energy_monotone_in_friction(d, r, pts):
    P = np.array([[x, r + h] for x, h in pts])
    prev = None
    for mu in (0.1, 0.4, 0.7, 1.0):
        V, reach, _, _ = point_energies(d, ObjectSpec(r, mu), ActuationCommand(), P[:, 0], P[:, 1])
        if prev is not None:
            both = reach & prev[1]
            assert np.all(V[both] >= prev[0][both] - 1e-9)
        prev = (V, reach)


@FAST
@given(designs, objects, xs, heights)
def test_solver_mirror_batch(d, o, x, h):
    a = solve_side(d, o, np.array([x]), np.array([o.r + h]), RIGHT)
    b = solve_side(d, o, np.array([-x]), np.array([o.r + h]), LEFT)
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)


@FAST
@given(st.lists(st.tuples(*[st.floats(-3, 3)] * 3), min_size=0, max_size=12), st.floats(0.1, 10.0))
def test_inscribed_radius_non_negative_and_homogeneous(pts, s):
    V = np.array(pts, dtype=float).reshape(-1, 3)
    r = inscribed_radius(V)
    assert r >= 0.0
    assert inscribed_radius(s * V) == pytest.approx(s * r, rel=1e-7, abs=1e-9)
