import numpy as np
import pytest
from scipy.optimize import least_squares

from grasp_energy.contact_solver import (
    NOT_APPLICABLE, STICKING, STRICTLY_NEGATIVE, STRICTLY_POSITIVE, TIP_TOL,
    ActuationCommand, DegenerateContact, distal_equilibrium_k2, finger_configuration,
    proximal_force_case, solve_distal_equilibrium, solve_side, solve_two_phalanx,
    two_phalanx_residual,
)
from grasp_energy.kinematics import (
    DISTAL_ONLY, FREE, LEFT, PROXIMAL_ONLY, RIGHT, TWO_PHALANX, GrasperDesign, ObjectSpec,
)

from conftest import random_design


def f1_of_mu(d, theta2, k1, k2, f_a, mu):
    """Proximal normal force from the joint moment balances, written out by hand."""
    f2 = f_a * d.r2 / k2
    return (f_a * d.r1 - (d.l1 * np.cos(theta2) + k2) * f2 + d.l1 * np.sin(theta2) * mu * f2) / k1


def sampled_case(d, mu_s, theta2, k1, k2, f_a, n=1000):
    f = f1_of_mu(d, theta2, k1, k2, f_a, np.linspace(-mu_s, mu_s, n))
    if np.all(f > 0):
        return STRICTLY_POSITIVE
    if np.all(f < 0):
        return STRICTLY_NEGATIVE
    return STICKING


def test_actuation_command_validation():
    with pytest.raises(ValueError):
        ActuationCommand(0.0, 1.0)
    c = ActuationCommand(0.4, 1.6)
    assert c.force(LEFT) == 0.4 and c.force(RIGHT) == 1.6


def test_force_case_collinear_example():
    d = GrasperDesign(2.0, 1.6, 0.2, 0.14, 1.2)
    case, (lo, hi) = proximal_force_case(d, ObjectSpec(0.4, 0.7), 0.0, 1.0, 0.7, 1.0)
    assert case == STRICTLY_NEGATIVE
    assert lo == pytest.approx(-0.34) and hi == pytest.approx(-0.34)


def test_force_case_frictionless_uses_single_value():
    d = GrasperDesign(2.0, 1.6, 0.2, 0.14, 1.2)
    o = ObjectSpec(0.4, 0.0)
    for theta2, k1, k2 in [(0.3, 0.5, 1.2), (1.2, 1.5, 0.2), (0.8, 0.3, 0.9)]:
        f0 = f1_of_mu(d, theta2, k1, k2, 1.0, 0.0)
        case, _ = proximal_force_case(d, o, theta2, k1, k2, 1.0)
        assert case == (STRICTLY_POSITIVE if f0 > 0 else STRICTLY_NEGATIVE)


def test_force_case_degenerate():
    d = GrasperDesign(2.0, 1.6, 0.2, 0.14, 1.2)
    with pytest.raises(DegenerateContact):
        proximal_force_case(d, ObjectSpec(0.4, 0.3), 0.2, 0.0, 0.5, 1.0)


def test_force_case_matches_sampling(rng):
    for _ in range(2000):
        d = random_design(rng)
        o = ObjectSpec(0.5, float(rng.uniform(0, 1.5)))
        theta2 = rng.uniform(*d.theta2_limits)
        k1 = rng.uniform(1e-3, d.l1)
        k2 = rng.uniform(1e-3, d.l2)
        f_a = rng.uniform(0.1, 2.0)
        case, (lo, hi) = proximal_force_case(d, o, theta2, k1, k2, f_a)
        assert case == sampled_case(d, o.mu_s, theta2, k1, k2, f_a)
        ends = f1_of_mu(d, theta2, k1, k2, f_a, np.array([-o.mu_s, o.mu_s]))
        assert lo == pytest.approx(ends.min()) and hi == pytest.approx(ends.max())


def test_distal_equilibrium_closed_form_examples():
    d = GrasperDesign(2.0, 1.6, 0.2, 0.1, 1.2)
    assert distal_equilibrium_k2(d, 0.0, 0.7) == pytest.approx(2.0)
    assert distal_equilibrium_k2(d, 0.0, 0.7) > d.l2      # escapes past the tip
    assert distal_equilibrium_k2(d, np.pi / 2, 0.5) < 0.0


def test_far_object_unreachable():
    d = GrasperDesign(1.6, 1.2, 0.2, 0.1, 0.8)
    o = ObjectSpec(0.4, 0.4)
    p = np.array([0.0, d.reach(o.r) + 0.5])
    assert solve_two_phalanx(d, o, p, RIGHT) is None
    assert finger_configuration(d, o, p, 1.0, RIGHT) is None
    assert finger_configuration(d, o, p, 1.0, LEFT) is None


def test_centerline_solutions_are_mirror_images(rng):
    for _ in range(20):
        d = random_design(rng)
        o = ObjectSpec(0.4, float(rng.choice([0.1, 0.4, 1.0])))
        ys = np.linspace(o.r, d.reach(o.r), 30)
        left = solve_side(d, o, np.zeros_like(ys), ys, LEFT)
        right = solve_side(d, o, np.zeros_like(ys), ys, RIGHT)
        for a, b in zip(left, right):
            np.testing.assert_array_equal(a, b)


def grid_search_two_phalanx(d, o, p, side):
    """Dense (theta1, theta2) scan at 1e-2 with k1, k2 eliminated by projection, then a polish."""
    t1 = np.arange(d.theta1_limits[0], d.theta1_limits[1] + 1e-9, 1e-2)
    t2 = np.arange(d.theta2_limits[0], d.theta2_limits[1] + 1e-9, 1e-2)
    T1, T2 = np.meshgrid(t1, t2, indexing="ij")
    s = 1.0 if side == RIGHT else -1.0
    phi1 = T1 if side == RIGHT else np.pi - T1
    phi2 = phi1 + s * T2
    u1 = np.stack([np.cos(phi1), np.sin(phi1)], -1)
    u2 = np.stack([np.cos(phi2), np.sin(phi2)], -1)
    n1 = s * np.stack([-u1[..., 1], u1[..., 0]], -1)
    n2 = s * np.stack([-u2[..., 1], u2[..., 0]], -1)
    base = np.array([s * d.w / 2, 0.0])
    K1 = np.clip(np.sum((p - base - o.r * n1) * u1, -1), 0, d.l1)
    joint = base + d.l1 * u1
    K2 = np.clip(np.sum((p - joint - o.r * n2) * u2, -1), 0, d.l2)
    r1 = p - (base + K1[..., None] * u1 + o.r * n1)
    r2 = p - (joint + K2[..., None] * u2 + o.r * n2)
    res = np.sqrt(np.sum(r1 ** 2, -1) + np.sum(r2 ** 2, -1))
    i, j = np.unravel_index(np.argmin(res), res.shape)
    x0 = np.array([T1[i, j], T2[i, j], K1[i, j], K2[i, j]])
    lo = [d.theta1_limits[0], d.theta2_limits[0], 0, 0]
    hi = [d.theta1_limits[1], d.theta2_limits[1], d.l1, d.l2]
    sol = least_squares(lambda x: two_phalanx_residual(d, o, p, side, x), x0,
                        bounds=(lo, hi), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return sol.x, np.linalg.norm(sol.fun)


def test_two_phalanx_matches_grid_search(rng):
    checked = 0
    while checked < 8:
        d = random_design(rng)
        o = ObjectSpec(0.4, 0.5)
        # build a closure: disk tangent to both links with equal tangent lengths
        k1 = rng.uniform(0.2, d.l1 - 0.1)
        k2 = d.l1 - k1
        theta2 = np.pi - 2 * np.arctan2(o.r, k2)
        if not 0.05 < k2 < d.l2 - 0.05 or not d.theta2_limits[0] < theta2 < d.theta2_limits[1]:
            continue
        theta1 = rng.uniform(0.2, 2.5)
        u = np.array([np.cos(theta1), np.sin(theta1)])
        n = np.array([-u[1], u[0]])
        p = np.array([d.w / 2, 0.0]) + k1 * u + o.r * n
        if p[1] < o.r:
            continue
        for side, q in ((RIGHT, p), (LEFT, p * [-1, 1])):
            got = solve_two_phalanx(d, o, q, side)
            assert got is not None
            x, res = grid_search_two_phalanx(d, o, q, side)
            assert res < 1e-8
            np.testing.assert_allclose(got, x, atol=1e-6)
            assert np.linalg.norm(two_phalanx_residual(d, o, q, side, np.array(got))) < 1e-8
        checked += 1


def test_finger_solution_invariants(rng):
    modes = set()
    for _ in range(25):
        d = random_design(rng)
        o = ObjectSpec(float(rng.choice([0.4, 0.8, 1.2, 1.6])), float(rng.choice([0.1, 0.4, 0.7, 1.0])))
        R = d.reach(o.r)
        for px, py in zip(rng.uniform(-R, R, 30), rng.uniform(o.r, R, 30)):
            for side in (LEFT, RIGHT):
                sol = finger_configuration(d, o, np.array([px, py]), 1.0, side)
                if sol is None:
                    modes.add(FREE)
                    continue
                modes.add(sol.config.mode)
                assert all(f >= 0 for f in sol.normal_forces)
                if sol.case == STICKING and not sol.limited:
                    assert abs(sol.mu_solved) <= o.mu_s
                if sol.config.mode in (PROXIMAL_ONLY, FREE):
                    assert sol.case == NOT_APPLICABLE
                lo1, hi1 = d.theta1_limits
                lo2, hi2 = d.theta2_limits
                assert lo1 - 1e-9 <= sol.config.theta1 <= hi1 + 1e-9
                assert lo2 - 1e-9 <= sol.config.theta2 <= hi2 + 1e-9
                assert 0 <= sol.config.k1 <= d.l1 and 0 <= sol.config.k2 <= d.l2
    assert {TWO_PHALANX, DISTAL_ONLY, PROXIMAL_ONLY, FREE} <= modes


def test_distal_equilibrium_back_substitution(rng):
    n = 0
    for _ in range(40):
        d = random_design(rng)
        o = ObjectSpec(float(rng.choice([0.4, 0.8, 1.2])), float(rng.choice([0.1, 0.4, 0.7, 1.0])))
        R = d.reach(o.r)
        px, py = rng.uniform(-R, R, 60), rng.uniform(o.r, R, 60)
        b = solve_side(d, o, px, py, RIGHT)
        idx = np.flatnonzero((b.mode == 3) & ~b.limited)
        for i in idx:
            num = f1_of_mu(d, b.theta2[i], 1.0, b.k2[i], 1.0, b.mu[i])
            assert abs(num) <= 1e-6
            assert b.k2[i] == pytest.approx(distal_equilibrium_k2(d, b.theta2[i], b.mu[i]), abs=1e-6)
            assert abs(b.mu[i]) <= o.mu_s + 1e-12
            assert b.k2[i] < d.l2 - TIP_TOL
            n += 1
        # the per-point entry point agrees with the batch
        for i in idx[:3]:
            de = solve_distal_equilibrium(d, o, np.array([px[i], py[i]]), RIGHT)
            if de is not None and not de.limited:
                assert de.k2 == pytest.approx(distal_equilibrium_k2(d, de.theta2, de.mu), abs=1e-6)
    assert n > 20
