"""
Finger configuration at static equilibrium for a tendon-pulley finger
touching a disk.

The solver follows the closing behaviour of the finger: try the
two-phalanx closure of both vector loops, classify the sign of the proximal
contact force over the friction range, and if the proximal link is pulled
off the object, slide the distal contact toward the fingertip until the
proximal moment balance can be met inside the friction cone (or the object
escapes past the tip).

Everything is solved in the right-finger frame on arrays of object
positions; the left finger is the mirror image.  Forces are stored per unit
tendon force: configurations do not depend on the force magnitude.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .kinematics import (
    DISTAL_ONLY, FREE, LEFT, PROXIMAL_ONLY, RIGHT, TWO_PHALANX,
    FingerConfig,
    contact_from_config, distal_loop_jacobian, distal_loop_residual,
    free_config, mirror, proximal_loop_residual,
)

STRICTLY_POSITIVE = "strictly_positive"
STRICTLY_NEGATIVE = "strictly_negative"
STICKING = "sticking"
NOT_APPLICABLE = "not_applicable"
CASES = (NOT_APPLICABLE, STRICTLY_POSITIVE, STRICTLY_NEGATIVE, STICKING)

MODE_CODES = (FREE, TWO_PHALANX, PROXIMAL_ONLY, DISTAL_ONLY)
_FREE, _TWO, _PROX, _DIST = range(4)
_NA, _POS, _NEG, _STICK = range(4)

N_THETA1_SAMPLES = 181
_BISECT_ITERS = 56
_TOL = 1e-9
# a distal equilibrium this close to the fingertip rolls off it
TIP_TOL = 1e-5


class DegenerateContact(ValueError):
    """A contact sits exactly at a joint, so its moment arm vanishes."""


@dataclass(frozen=True)
class ActuationCommand:
    f_left: float = 1.0
    f_right: float = 1.0

    def __post_init__(self):
        if not (self.f_left > 0 and self.f_right > 0):
            raise ValueError("tendon forces must be positive")

    def force(self, side):
        return self.f_left if side == LEFT else self.f_right

    def to_dict(self):
        return {"f_left": self.f_left, "f_right": self.f_right}


@dataclass(frozen=True)
class FingerSolution:
    config: FingerConfig
    contacts: list
    normal_forces: tuple
    mu_solved: float
    case: str
    # equilibrium held by a joint limit or a blocked joint, not by torque balance
    limited: bool = False


class DistalEquilibrium(NamedTuple):
    theta1: float
    theta2: float
    k2: float
    mu: float
    limited: bool


def joint_torques(design, f_a):
    return f_a * design.r1, f_a * design.r2


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


class _Geometry:
    """Flattened scalar parameters, right-finger frame."""

    def __init__(self, design, obj):
        self.l1, self.l2 = design.l1, design.l2
        self.rp1, self.rp2 = design.r1, design.r2
        self.bx = design.w / 2.0
        self.r = obj.r
        self.mu = obj.mu_s
        self.a1, self.b1 = design.theta1_limits
        self.a2, self.b2 = design.theta2_limits
        self.samples = np.linspace(self.a1, self.b1, N_THETA1_SAMPLES)


class _Family(NamedTuple):
    k2: np.ndarray
    th2: np.ndarray
    feasible: np.ndarray
    base_ok: np.ndarray      # disk clear of the proximal link and the joint
    geom_ok: np.ndarray      # base_ok and the contact on the distal segment
    k2_long: np.ndarray
    th2_high: np.ndarray
    n_base: np.ndarray
    n_slope: np.ndarray


def _family(g, px, py, th1):
    """Distal-only contact configurations at proximal angle th1 (broadcasts)."""
    c, s = np.cos(th1), np.sin(th1)
    vx = px - (g.bx + g.l1 * c)
    vy = py - g.l1 * s
    dj2 = vx * vx + vy * vy
    ok_j = dj2 > g.r * g.r * (1.0 + 1e-12)
    k2 = np.sqrt(np.maximum(dj2 - g.r * g.r, 0.0))
    th2 = _wrap(np.arctan2(vy, vx) - np.arctan2(g.r, k2) - th1)
    # proximal segment must stay clear of the disk
    t = np.clip((px - g.bx) * c + py * s, 0.0, g.l1)
    ex = px - g.bx - t * c
    ey = py - t * s
    seg_ok = ex * ex + ey * ey >= (g.r * (1.0 - 1e-13)) ** 2
    k2_long = k2 >= g.l2 - _TOL
    base_ok = ok_j & seg_ok & (k2 > _TOL)
    geom_ok = base_ok & ~k2_long
    th2_high = th2 > g.b2 + _TOL
    feasible = geom_ok & (th2 >= g.a2 - _TOL) & ~th2_high
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(k2 > 0, g.rp2 / np.where(k2 > 0, k2, 1.0), np.inf)
        n_base = g.rp1 - inv * (g.l1 * np.cos(th2) + k2)
        n_slope = inv * g.l1 * np.sin(th2)
    return _Family(k2, th2, feasible, base_ok, geom_ok, k2_long, th2_high, n_base, n_slope)


def _classify(n_base, n_slope, mu):
    """Case code from the affine proximal-force numerator over |mu| <= mu_s."""
    spread = mu * np.abs(n_slope)
    lo, hi = n_base - spread, n_base + spread
    flat_zero = (n_base == 0) & (n_slope == 0)
    return np.where(lo > 0, _POS, np.where(((lo < 0) & (hi > 0)) | flat_zero, _STICK, _NEG))


def _sticking_mu(n_base, n_slope, mu):
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(n_slope != 0, -n_base / np.where(n_slope != 0, n_slope, 1.0), 0.0)
    return np.clip(m, -mu, mu)


def _stop(fam, mu):
    with np.errstate(invalid="ignore"):
        return ~fam.feasible | (fam.n_base + mu * np.abs(fam.n_slope) >= 0)


def _slide(g, px, py, start):
    """Slide the distal contact toward the tip (theta1 decreasing) from `start`.

    Returns (status, theta1) with status 0 = friction equilibrium,
    1 = distal joint locked at its upper limit, 2 = proximal joint at its
    lower limit, 3 = ejected past the fingertip, 4 = lost contact.
    """
    G = g.samples
    fam = _family(g, px[:, None], py[:, None], G[None, :])
    below = G[None, :] < start[:, None] - 1e-12
    cand = _stop(fam, g.mu) & below
    has = cand.any(axis=1)
    M = len(G)
    idx = np.where(has, M - 1 - np.argmax(cand[:, ::-1], axis=1), 0)
    lo = G[idx]
    hi = np.minimum(start, G[np.minimum(idx + 1, M - 1)])
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        st = _stop(_family(g, px, py, mid), g.mu)
        lo = np.where(st, mid, lo)
        hi = np.where(st, hi, mid)
    f_lo = _family(g, px, py, lo)
    status = np.full(len(px), 4)
    status[f_lo.feasible] = 0
    status[~f_lo.feasible & f_lo.th2_high & ~f_lo.k2_long] = 1
    status[~f_lo.feasible & f_lo.k2_long] = 3
    status[(status == 0) & (f_lo.k2 >= g.l2 - TIP_TOL)] = 3
    theta = np.where(status == 0, lo, hi)
    # never hit a stop: the finger opens to its lower proximal limit
    status = np.where(has, status, 2)
    theta = np.where(has, theta, np.minimum(start, G[0]))
    return status, theta


def _distal_entry(g, px, py):
    """First distal-only contact while closing: proximal first with theta2 at
    rest, then the distal link at the proximal upper limit.

    Returns (found, theta1, via_rest) arrays.
    """
    G = g.samples
    fam = _family(g, px[:, None], py[:, None], G[None, :])
    a2 = g.a2
    th = fam.th2
    # the upper sample may already have the distal joint inside the disk, and
    # the tangent foot may enter the link from beyond the tip inside the bracket
    above_s = fam.base_ok & (th >= a2)
    on_link = ~fam.k2_long[:, :-1] | ~fam.k2_long[:, 1:]
    cross = (above_s[:, :-1] & ~above_s[:, 1:] & (th[:, :-1] <= g.b2 + _TOL) & on_link
             & (np.abs(th[:, 1:] - th[:, :-1]) < 1.5))
    has = cross.any(axis=1)
    i = np.argmax(cross, axis=1)
    lo, hi = G[i], G[i + 1]
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        fm = _family(g, px, py, mid)
        above = fm.base_ok & (fm.th2 >= a2)
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    via_rest = has & _family(g, px, py, lo).feasible
    at_limit = ~via_rest & fam.feasible[:, -1]
    theta = np.where(via_rest, lo, G[-1])
    # disk resting on the pivot: the proximal joint cannot leave its lower limit
    pivot = (px - g.bx) ** 2 + py ** 2 <= (g.r * (1.0 + 1e-12)) ** 2
    if pivot.any():
        at_pivot = pivot & fam.feasible[:, 0]
        theta = np.where(pivot, G[0], theta)
        via_rest = np.where(pivot, at_pivot, via_rest)
        at_limit = np.where(pivot, False, at_limit)
    return via_rest | at_limit, theta, via_rest


class BatchSolution(NamedTuple):
    """Right-frame solutions at many object positions (forces per unit tendon force)."""
    mode: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    mu: np.ndarray
    case: np.ndarray
    limited: np.ndarray
    tip: np.ndarray

    @property
    def reached(self):
        return self.mode != _FREE

    def take(self, i):
        return BatchSolution(*(a[i] for a in self))


def two_phalanx_closure(g, px, py):
    """Closed-form two-phalanx contact: the disk is inscribed in the angle at
    the distal joint, so both tangent lengths from that joint equal l1 - k1."""
    dx = px - g.bx
    d2 = dx * dx + py * py
    okd = (py >= g.r - _TOL) & (d2 > g.r * g.r)
    k1 = np.sqrt(np.maximum(d2 - g.r * g.r, 0.0))
    th1 = _wrap(np.arctan2(py, dx) - np.arctan2(g.r, k1))
    lp = okd & (k1 > _TOL) & (k1 < g.l1 - _TOL) & (th1 >= g.a1 - _TOL) & (th1 <= g.b1 + _TOL)
    k2 = g.l1 - k1
    th2 = np.pi - 2.0 * np.arctan2(g.r, k2)
    tp = lp & (k2 > _TOL) & (k2 < g.l2 - _TOL) & (th2 >= g.a2 - _TOL) & (th2 <= g.b2 + _TOL)
    th1 = np.clip(th1, g.a1, g.b1)
    return lp, tp, th1, k1, th2, k2


def solve_batch(design, obj, px, py):
    """Equilibrium configuration of the right finger for each object centre."""
    g = _Geometry(design, obj)
    px = np.asarray(px, dtype=float).ravel()
    py = np.asarray(py, dtype=float).ravel()
    n = len(px)
    mode = np.full(n, _FREE)
    theta1 = np.full(n, g.b1)
    theta2 = np.full(n, g.b2)
    k1 = np.zeros(n)
    k2 = np.zeros(n)
    f1 = np.zeros(n)
    f2 = np.zeros(n)
    mu = np.zeros(n)
    case = np.full(n, _NA)
    limited = np.zeros(n, dtype=bool)
    tip = np.zeros(n, dtype=bool)

    lp, tp, th1p, k1p, th2t, k2t = two_phalanx_closure(g, px, py)

    # two-phalanx closure and the sign of the proximal force
    i2 = np.flatnonzero(tp)
    if len(i2):
        kk2 = k2t[i2]
        t2 = np.clip(th2t[i2], g.a2, g.b2)
        inv = g.rp2 / kk2
        nb = g.rp1 - inv * (g.l1 * np.cos(t2) + kk2)
        ns = inv * g.l1 * np.sin(t2)
        cs = _classify(nb, ns, g.mu)
        keep = cs != _NEG
        j = i2[keep]
        mode[j] = _TWO
        theta1[j] = th1p[j]
        theta2[j] = t2[keep]
        k1[j] = k1p[j]
        k2[j] = kk2[keep]
        f2[j] = inv[keep]
        m = np.where(cs[keep] == _STICK, _sticking_mu(nb[keep], ns[keep], g.mu), 0.0)
        mu[j] = m
        f1[j] = np.maximum((nb[keep] + m * ns[keep]) / k1p[j], 0.0)
        f1[j[cs[keep] == _STICK]] = 0.0
        case[j] = cs[keep]
        slide_from = i2[~keep]
    else:
        slide_from = i2

    # proximal contact only: distal link closes to its limit or onto the disk
    ip = np.flatnonzero(lp & ~tp)
    if len(ip):
        _proximal_only(g, px, py, ip, th1p, k1p, k2t, mode, theta1, theta2, k1, k2, f1, f2,
                       limited, tip)

    # distal contact only: find where the closing finger first touches
    idist = np.flatnonzero(~lp & (py >= g.r - _TOL))
    starts = []
    if len(slide_from):
        case[slide_from] = _NEG
        starts.append((slide_from, th1p[slide_from]))
    if len(idist):
        found, th_e, via_rest = _distal_entry(g, px[idist], py[idist])
        ie = idist[found]
        th_e, via_rest = th_e[found], via_rest[found]
        if len(ie):
            fam = _family(g, px[ie], py[ie], th_e)
            cs = _classify(fam.n_base, fam.n_slope, g.mu)
            case[ie] = cs
            rest = cs != _NEG
            j = ie[rest]
            mode[j] = _DIST
            theta1[j] = th_e[rest]
            theta2[j] = np.clip(fam.th2[rest], g.a2, g.b2)
            k2[j] = fam.k2[rest]
            stick = cs[rest] == _STICK
            mu[j] = np.where(stick, _sticking_mu(fam.n_base[rest], fam.n_slope[rest], g.mu), 0.0)
            # pushing further closed is blocked by a limit at the entry point
            blocked_rest = ~stick & via_rest[rest]
            arm = g.l1 * np.cos(theta2[j]) + k2[j]
            f2[j] = np.where(blocked_rest, g.rp1 / np.where(arm > 0, arm, np.inf), g.rp2 / k2[j])
            limited[j] = ~stick
            starts.append((ie[~rest], th_e[~rest]))

    for idx, th0 in starts:
        if not len(idx):
            continue
        status, th = _slide(g, px[idx], py[idx], th0)
        fam = _family(g, px[idx], py[idx], th)
        good = status <= 2
        j = idx[good]
        mode[j] = _DIST
        theta1[j] = th[good]
        t2 = np.clip(fam.th2[good], g.a2, g.b2)
        theta2[j] = t2
        kk2 = fam.k2[good]
        k2[j] = kk2
        st = status[good]
        eq = st == 0
        mu[j] = np.where(eq, _sticking_mu(fam.n_base[good], fam.n_slope[good], g.mu), 0.0)
        arm = g.l1 * np.cos(t2) + kk2
        f2[j] = np.where(st == 1, g.rp1 / np.where(arm > 0, arm, np.inf), g.rp2 / kk2)
        limited[j] = ~eq
        k1[j] = 0.0
        f1[j] = 0.0

    return BatchSolution(mode, theta1, theta2, k1, k2, f1, f2, mu, case, limited, tip)


def _proximal_only(g, px, py, ip, th1p, k1p, k2t, mode, theta1, theta2, k1, k2, f1, f2,
                   limited, tip):
    t1 = th1p[ip]
    kk1 = k1p[ip]
    c, s = np.cos(t1), np.sin(t1)
    jx, jy = g.bx + g.l1 * c, g.l1 * s
    vx, vy = px[ip] - jx, py[ip] - jy
    D = np.hypot(vx, vy)
    psi = np.arctan2(vy, vx)
    # tangent point past the fingertip: the tip itself may land on the disk
    beyond = (k2t[ip] >= g.l2 - _TOL) | (k2t[ip] <= _TOL)
    reach = D - g.r <= g.l2
    cosang = np.clip((g.l2 ** 2 + D ** 2 - g.r ** 2) / (2.0 * g.l2 * np.maximum(D, 1e-300)), -1, 1)
    th2_touch = _wrap(psi - np.arccos(cosang) - t1)
    blocked = beyond & reach & (th2_touch < g.b2)
    t2 = np.where(blocked, np.maximum(th2_touch, g.a2), g.b2)

    mode[ip] = _PROX
    theta1[ip] = t1
    theta2[ip] = t2
    k1[ip] = kk1
    k2[ip] = np.where(blocked, g.l2, 0.0)
    tip[ip] = blocked
    limited[ip] = ~blocked

    phi2 = t1 + t2
    tx = jx + g.l2 * np.cos(phi2)
    ty = jy + g.l2 * np.sin(phi2)
    nx = (px[ip] - tx) / g.r
    ny = (py[ip] - ty) / g.r
    # exact moment arms of a tip force along the contact normal
    arm2 = g.l2 * (np.cos(phi2) * ny - np.sin(phi2) * nx)
    arm1 = (tx - g.bx) * ny - ty * nx
    ftip = np.where(blocked & (arm2 > _TOL), g.rp2 / np.where(arm2 > _TOL, arm2, 1.0), 0.0)
    f2[ip] = ftip
    f1[ip] = np.maximum((g.rp1 - ftip * arm1) / kk1, 0.0)


def _as_point(p):
    p = np.asarray(p, dtype=float)
    if p.shape != (2,):
        raise ValueError("object position must be a 2-vector")
    return p


def solve_side(design, obj, px, py, side):
    """Batch solve for one side; for the left finger positions are mirrored."""
    px = np.asarray(px, dtype=float)
    return solve_batch(design, obj, -px if side == LEFT else px, py)


def solution_from_batch(design, obj, p, batch, i, side, f_a):
    """FingerSolution (or None when unreached) for entry i of a one-side batch."""
    code = int(batch.mode[i])
    if code == _FREE:
        return None
    cfg = FingerConfig(side, float(batch.theta1[i]), float(batch.theta2[i]),
                       float(batch.k1[i]), float(batch.k2[i]), MODE_CODES[code])
    contacts = contact_from_config(design, obj, p, cfg)
    forces = []
    for c in contacts:
        forces.append(f_a * float(batch.f1[i] if c.link == "proximal" else batch.f2[i]))
    return FingerSolution(cfg, contacts, tuple(forces), float(batch.mu[i]),
                          CASES[int(batch.case[i])], bool(batch.limited[i]))


def finger_configuration(design, obj, p, f_a, side):
    """Equilibrium configuration of one finger, or None when the object is unreachable."""
    if not f_a > 0:
        raise ValueError("tendon force must be positive")
    p = _as_point(p)
    batch = solve_side(design, obj, p[:1], p[1:], side)
    return solution_from_batch(design, obj, p, batch, 0, side, f_a)


def proximal_force_case(design, obj, theta2, k1, k2, f_a):
    """Sign class of the proximal contact force over |mu| <= mu_s and its range.

    f1(mu) is affine in mu, so the endpoints decide.  A root exactly at
    |mu| = mu_s counts as sliding.
    """
    if k1 <= 0 or k2 <= 0:
        raise DegenerateContact("contact at a joint: k1 and k2 must be positive")
    f2 = f_a * design.r2 / k2
    base = (f_a * design.r1 - (design.l1 * np.cos(theta2) + k2) * f2) / k1
    slope = design.l1 * np.sin(theta2) * f2 / k1
    spread = obj.mu_s * abs(slope)
    code = int(_classify(np.float64(base), np.float64(slope), obj.mu_s))
    return CASES[code], (base - spread, base + spread)


def proximal_force(design, theta2, k1, k2, f_a, mu):
    """Proximal normal contact force for a given distal friction ratio."""
    f2 = f_a * design.r2 / k2
    return (f_a * design.r1 - (design.l1 * np.cos(theta2) + k2) * f2
            + design.l1 * np.sin(theta2) * mu * f2) / k1


def distal_equilibrium_k2(design, theta2, mu):
    """Distal contact location that balances the proximal joint with no proximal contact."""
    R = design.transmission_ratio
    return R / (1.0 - R) * design.l1 * (np.cos(theta2) - mu * np.sin(theta2))


def solve_two_phalanx(design, obj, p, side):
    """(theta1, theta2, k1, k2) closing both vector loops, or None."""
    p = _as_point(p)
    q = mirror(p) if side == LEFT else p
    g = _Geometry(design, obj)
    lp, tp, th1, k1, th2, k2 = two_phalanx_closure(g, q[:1], q[1:])
    if not tp[0]:
        return None
    x = np.array([th1[0], np.clip(th2[0], g.a2, g.b2), k1[0], k2[0]])
    x = _polish_two_phalanx(design, obj, p, side, x)
    res = two_phalanx_residual(design, obj, p, side, x)
    if np.linalg.norm(res) >= 1e-8:
        return None
    return tuple(float(v) for v in x)


def two_phalanx_residual(design, obj, p, side, x):
    th1, th2, k1, k2 = x
    return np.concatenate([
        proximal_loop_residual(design, obj, p, th1, k1, side),
        distal_loop_residual(design, obj, p, th1, th2, k2, side),
    ])


def _two_phalanx_jacobian(design, obj, side, x):
    th1, th2, k1, k2 = x
    s = 1.0 if side == RIGHT else -1.0
    phi1 = th1 if side == RIGHT else np.pi - th1
    u1 = np.array([np.cos(phi1), np.sin(phi1)])
    du1 = np.array([-u1[1], u1[0]])
    dn1 = -u1 if side == RIGHT else u1
    jp = np.zeros((2, 4))
    jp[:, 0] = -s * (k1 * du1 + obj.r * dn1)
    jp[:, 2] = -u1
    jd3 = distal_loop_jacobian(design, obj, th1, th2, k2, side)
    jd = np.zeros((2, 4))
    jd[:, 0], jd[:, 1], jd[:, 3] = jd3[:, 0], jd3[:, 1], jd3[:, 2]
    return np.vstack([jp, jd])


def _polish_two_phalanx(design, obj, p, side, x):
    lower = np.array([design.theta1_limits[0], design.theta2_limits[0], 0.0, 0.0])
    upper = np.array([design.theta1_limits[1], design.theta2_limits[1], design.l1, design.l2])
    x, _ = gauss_newton(lambda z: two_phalanx_residual(design, obj, p, side, z),
                        lambda z: _two_phalanx_jacobian(design, obj, side, z),
                        x, lower, upper)
    return x


def gauss_newton(fun, jac, x0, lower, upper, tol=1e-10, step_tol=1e-12, max_iter=50):
    """Damped Gauss-Newton with bound projection.  Returns (x, residual norm)."""
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    r = fun(x)
    nr = np.linalg.norm(r)
    for _ in range(max_iter):
        if nr < tol:
            break
        step = np.linalg.lstsq(jac(x), -r, rcond=None)[0]
        t = 1.0
        while t > 1e-6:
            xn = np.clip(x + t * step, lower, upper)
            rn = fun(xn)
            if np.linalg.norm(rn) < nr:
                break
            t *= 0.5
        else:
            break
        moved = np.linalg.norm(xn - x)
        x, r, nr = xn, rn, np.linalg.norm(rn)
        if moved < step_tol:
            break
    return x, nr


def solve_distal_equilibrium(design, obj, p, side, f_a=1.0, start_theta1=None):
    """Distal-only equilibrium reached by sliding toward the tip.

    Starts from `start_theta1` (default: the two-phalanx closure, else the first
    distal touch while closing).  None when the object escapes past the tip.
    """
    p = _as_point(p)
    q = mirror(p) if side == LEFT else p
    g = _Geometry(design, obj)
    px, py = q[:1], q[1:]
    if start_theta1 is None:
        lp, tp, th1, _, _, _ = two_phalanx_closure(g, px, py)
        if tp[0]:
            start = th1
        else:
            found, th_e, _ = _distal_entry(g, px, py)
            if not found[0]:
                return None
            start = th_e
    else:
        start = np.array([float(start_theta1)])
    status, th = _slide(g, px, py, start)
    if status[0] > 2:
        return None
    fam = _family(g, px, py, th)
    t2 = float(np.clip(fam.th2[0], g.a2, g.b2))
    m = float(_sticking_mu(fam.n_base, fam.n_slope, g.mu)[0]) if status[0] == 0 else 0.0
    return DistalEquilibrium(float(th[0]), t2, float(fam.k2[0]), m, bool(status[0] != 0))


def both_fingers(design, obj, p, command):
    """(left, right) solutions at one object position; None for an unreached finger."""
    return (finger_configuration(design, obj, p, command.f_left, LEFT),
            finger_configuration(design, obj, p, command.f_right, RIGHT))


def pose_of(design, solution, side):
    """Finger configuration, using the free closed pose for an unreached finger."""
    return free_config(design, side) if solution is None else solution.config
