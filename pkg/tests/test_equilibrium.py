from itertools import combinations

import numpy as np
import pytest

from grasp_energy.contact_solver import FingerSolution
from grasp_energy.equilibrium import (
    WrenchSet, cone_edge_wrenches, null_wrench_contained, object_equilibrium, origin_in_hull,
)
from grasp_energy.kinematics import (
    DISTAL, DISTAL_ONLY, LEFT, RIGHT, ContactPoint, FingerConfig, ObjectSpec,
)


def caratheodory_contains(points, tol=1e-9):
    """Origin in conv(points) by checking every simplex of up to four points."""
    P = np.asarray(points, dtype=float)
    for k in range(1, min(4, len(P)) + 1):
        for idx in combinations(range(len(P)), k):
            S = P[list(idx)]
            A = np.vstack([S.T, np.ones(k)])
            b = np.array([0.0, 0.0, 0.0, 1.0])
            lam, *_ = np.linalg.lstsq(A, b, rcond=None)
            if np.linalg.norm(A @ lam - b) <= tol and np.all(lam >= -tol):
                return True
    return False


def contact(p, normal, side=RIGHT):
    n = np.asarray(normal, dtype=float)
    return ContactPoint(np.asarray(p, dtype=float) - 0.4 * n, n, DISTAL, side)


def test_frictionless_edges_coincide():
    o = ObjectSpec(0.4, 0.0)
    p = np.array([0.3, 1.0])
    a, b = cone_edge_wrenches(contact(p, [1.0, 0.0]), 0.2, o.mu_s, o, p)
    np.testing.assert_allclose(a, [0.2, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(b, [0.2, 0.0, 0.0], atol=1e-15)


def test_unit_friction_edges():
    o = ObjectSpec(0.4, 1.0)
    p = np.array([0.0, 1.0])
    f_n = 0.3
    for e in cone_edge_wrenches(contact(p, [0.0, 1.0]), f_n, o.mu_s, o, p):
        assert abs(e[0]) == pytest.approx(f_n / np.sqrt(2))      # tangential part
        assert e[1] == pytest.approx(f_n / np.sqrt(2))           # normal part
        assert abs(e[2]) == pytest.approx(f_n / np.sqrt(2))


def test_edge_mirror_symmetry(rng):
    o = ObjectSpec(0.5, 0.6)
    for _ in range(20):
        p = rng.uniform(-1, 1, 2)
        ang = rng.uniform(0, 2 * np.pi)
        n = np.array([np.cos(ang), np.sin(ang)])
        right = cone_edge_wrenches(contact(p, n), 0.7, o.mu_s, o, p)
        left = cone_edge_wrenches(contact(p * [-1, 1], n * [-1, 1], LEFT), 0.7, o.mu_s, o,
                                  p * [-1, 1])
        got = sorted(tuple(np.round(w, 12)) for w in left)
        want = sorted(tuple(np.round([-w[0], w[1], -w[2]], 12)) for w in right)
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_null_wrench_examples():
    assert null_wrench_contained(WrenchSet([[0.2, 0, 0], [-0.2, 0, 0]]))
    assert not null_wrench_contained(WrenchSet([[0.2, 0, 0], [0.1, 0.05, 0]]))


def test_null_wrench_matches_caratheodory(rng):
    for _ in range(1500):
        n = rng.integers(1, 9)
        pts = rng.uniform(-1, 1, (n, 3))
        assert origin_in_hull(pts) == caratheodory_contains(pts)


def finger(side, p, normal, f):
    c = contact(p, normal, side)
    cfg = FingerConfig(side, 1.0, 0.5, 0.0, 0.5, DISTAL_ONLY)
    return FingerSolution(cfg, [c], (f,), 0.0, "sticking")


def test_symmetric_frictionless_pinch():
    o = ObjectSpec(0.4, 0.0)
    p = np.array([0.0, 2.0])
    left = finger(LEFT, p, [1.0, 0.0], 0.2)
    right = finger(RIGHT, p, [-1.0, 0.0], 0.2)
    assert object_equilibrium(left, right, o, p)
    assert not object_equilibrium(None, right, o, p)


def test_palm_support_balances_downward_push():
    o = ObjectSpec(0.4, 0.0)
    p = np.array([0.0, 0.4])
    top = finger(RIGHT, p, [0.0, -1.0], 0.3)
    assert object_equilibrium(None, top, o, p)
    assert not object_equilibrium(None, top, o, p, palm=False)
