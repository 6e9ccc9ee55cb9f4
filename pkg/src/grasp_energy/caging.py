"""
Trajectories of the object down the energy map and the caging score.

Every reachable grid point is released and follows -grad V (normalized) with
RK4 on the bilinear interpolant until the object is in equilibrium, leaves
the reachable set, or stalls.  Equilibrium endpoints are caged when the
finger-palm polygon contains the object centre and the opening is smaller
than the object.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .contact_solver import ActuationCommand, solve_side
from .energy_map import equilibrium_flags, point_energies
from .kinematics import LEFT, RIGHT, FingerConfig, finger_chain, free_config

EJECTION = "ejection"
STABLE = "stable"
CAGED = "caged"
OUTCOMES = (EJECTION, STABLE, CAGED)

GRAD_TOL = 1e-9
RISE_TOL = 1e-9
MAX_STEPS = 10_000
INSIDE_WEIGHT = 0.5
_WINDOW = 16


class OutsideReachable(ValueError):
    """The interpolation cell has no reachable corner."""


class DegeneratePolygon(ValueError):
    """The finger-palm polygon intersects itself."""


@dataclass
class Trajectory:
    points: np.ndarray
    terminal: np.ndarray
    outcome: str
    l_open_at_terminal: float = None
    steps: int = 0
    max_rise: float = 0.0
    stalled: bool = False

    def to_dict(self):
        return {
            "start": [float(v) for v in self.points[0]],
            "terminal": [float(v) for v in self.terminal],
            "outcome": self.outcome,
            "L_open": None if self.l_open_at_terminal is None else float(self.l_open_at_terminal),
            "steps": int(self.steps),
        }


@dataclass
class CagingScore:
    lambda_: float
    n_caged: int
    n_tip: int
    n_ejected: int
    trajectories: list = field(default_factory=list, repr=False)

    @property
    def n_points(self):
        return self.n_caged + self.n_tip + self.n_ejected

    @property
    def normalized(self):
        """Score per reachable start point, in [0, 1]."""
        return self.lambda_ / self.n_points if self.n_points else 0.0

    def to_dict(self):
        return {"lambda": self.lambda_, "n_caged": self.n_caged, "n_tip": self.n_tip,
                "n_ejected": self.n_ejected}


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------

class _Field:
    """Bilinear interpolant of a map restricted to its reachable nodes."""

    def __init__(self, emap):
        g = emap.grid
        self.x0, self.y0, self.dx, self.dy = g.x0, g.y0, g.dx, g.dy
        self.nx, self.ny = g.nx, g.ny
        self.V = np.where(emap.reachable, emap.V, 0.0)
        self.R = emap.reachable.astype(float)
        self.E = emap.equilibrium

    def _coords(self, P):
        fx = (P[:, 0] - self.x0) / self.dx
        fy = (P[:, 1] - self.y0) / self.dy
        # snap round-off so mirrored node lines are recognised exactly
        fx = np.where(np.abs(fx - np.round(fx)) < 1e-9, np.round(fx), fx)
        fy = np.where(np.abs(fy - np.round(fy)) < 1e-9, np.round(fy), fy)
        return fx, fy

    def _cell(self, P, left=False, below=False):
        fx, fy = self._coords(P)
        # on a node line, pick the cell left of / below it instead
        cx = np.ceil(fx) - 1 if left else np.floor(fx)
        cy = np.ceil(fy) - 1 if below else np.floor(fy)
        i = np.clip(cx.astype(int), 0, max(self.nx - 2, 0))
        j = np.clip(cy.astype(int), 0, max(self.ny - 2, 0))
        tx = np.clip(fx - i, 0.0, 1.0) if self.nx > 1 else np.zeros(len(P))
        ty = np.clip(fy - j, 0.0, 1.0) if self.ny > 1 else np.zeros(len(P))
        i1 = np.minimum(i + 1, self.nx - 1)
        j1 = np.minimum(j + 1, self.ny - 1)
        in_grid = ((fx >= -1e-9) & (fx <= self.nx - 1 + 1e-9)
                   & (fy >= -1e-9) & (fy <= self.ny - 1 + 1e-9))
        return i, j, i1, j1, tx, ty, in_grid

    def eval(self, P):
        """(V, grad, inside, has_eq_corner) at points P (n, 2).

        On a cell edge each gradient component averages the two cells across
        that edge, so the field is mirror symmetric.
        """
        P = np.atleast_2d(np.asarray(P, dtype=float))
        V, g, inside, eqc = self._eval(P, self._cell(P))
        for axis, f in enumerate(self._coords(P)):
            edge = np.flatnonzero(f == np.round(f))
            if len(edge):
                Q = P[edge]
                _, g2, _, eq2 = self._eval(Q, self._cell(Q, left=axis == 0, below=axis == 1))
                g[edge, axis] = 0.5 * (g[edge, axis] + g2[:, axis])
                eqc[edge] |= eq2
        return V, g, inside, eqc

    def _eval(self, P, cell):
        i, j, i1, j1, tx, ty, in_grid = cell
        V, R = self.V, self.R
        v00, v10, v01, v11 = V[j, i], V[j, i1], V[j1, i], V[j1, i1]
        r00, r10, r01, r11 = R[j, i], R[j, i1], R[j1, i], R[j1, i1]
        w00, w10 = (1 - tx) * (1 - ty), tx * (1 - ty)
        w01, w11 = (1 - tx) * ty, tx * ty
        S = w00 * r00 + w10 * r10 + w01 * r01 + w11 * r11
        nz = (r00 + r10 + r01 + r11) > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            val = (w00 * r00 * v00 + w10 * r10 * v10 + w01 * r01 * v01 + w11 * r11 * v11) / S
        # largest reachable corner weight decides when the whole cell is fringe
        val = np.where(S > 0, val, np.where(nz, (r00 * v00 + r10 * v10 + r01 * v01 + r11 * v11)
                                            / np.maximum(r00 + r10 + r01 + r11, 1), np.nan))
        bot, top = (r00 * r10) > 0, (r01 * r11) > 0
        lef, rig = (r00 * r01) > 0, (r10 * r11) > 0
        gx_b = (v10 - v00) / self.dx
        gx_t = (v11 - v01) / self.dx
        gy_l = (v01 - v00) / self.dy
        gy_r = (v11 - v10) / self.dy
        gx = np.where(bot & top, gx_b * (1 - ty) + gx_t * ty,
                      np.where(bot, gx_b, np.where(top, gx_t, 0.0)))
        gy = np.where(lef & rig, gy_l * (1 - tx) + gy_r * tx,
                      np.where(lef, gy_l, np.where(rig, gy_r, 0.0)))
        if self.nx == 1:
            gx = np.zeros(len(P))
        if self.ny == 1:
            gy = np.zeros(len(P))
        inside = in_grid & nz & (S >= INSIDE_WEIGHT - 1e-12)
        E = self.E
        eq_corner = E[j, i] | E[j, i1] | E[j1, i] | E[j1, i1]
        return val, np.column_stack([gx, gy]), inside, eq_corner & in_grid


def interpolated_energy_and_gradient(emap, p):
    """Bilinear energy and gradient at p from the reachable corners of its cell."""
    f = _Field(emap)
    P = np.asarray(p, dtype=float).reshape(1, 2)
    i, j, i1, j1, tx, ty, in_grid = f._cell(P)
    if not in_grid[0]:
        raise OutsideReachable(f"{tuple(P[0])} lies outside the grid")
    V, g, inside, _ = f.eval(P)
    if np.isnan(V[0]):
        raise OutsideReachable(f"no reachable corner around {tuple(P[0])}")
    return float(V[0]), g[0]


# ---------------------------------------------------------------------------
# opening and containment
# ---------------------------------------------------------------------------

def _point_segment(p, a, b):
    ab = b - a
    L = ab @ ab
    t = 0.0 if L == 0 else np.clip((p - a) @ ab / L, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def segments_intersect(a, b, c, d, tol=1e-12):
    d1, d2 = _cross(c, d, a), _cross(c, d, b)
    d3, d4 = _cross(a, b, c), _cross(a, b, d)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and \
            ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)):
        return True
    # touching or collinear overlap
    for p, q, r, s in ((c, d, a, d1), (c, d, b, d2), (a, b, c, d3), (a, b, d, d4)):
        if abs(s) <= tol and _point_segment(r, p, q) <= 1e-12:
            return True
    return False


def _chains(design, left_config, right_config):
    left = np.array(finger_chain(design, left_config))
    right = np.array(finger_chain(design, right_config))
    return left, right


def l_open(design, left_config, right_config):
    """Smallest opening between the two finger chains; 0 when they touch."""
    L, R = _chains(design, left_config, right_config)
    if np.allclose(L[0], R[0]):
        # zero palm width: the shared base is not a crossing
        L, R = L.copy(), R.copy()
        L[0] = L[0] + 1e-9 * (L[1] - L[0])
        R[0] = R[0] + 1e-9 * (R[1] - R[0])
    for a, b in zip(L[:-1], L[1:]):
        for c, d in zip(R[:-1], R[1:]):
            if segments_intersect(a, b, c, d):
                return 0.0
    lt, rt = L[-1], R[-1]
    cands = [float(np.linalg.norm(lt - rt))]
    cands += [_point_segment(lt, a, b) for a, b in zip(R[:-1], R[1:])]
    cands += [_point_segment(rt, a, b) for a, b in zip(L[:-1], L[1:])]
    return min(cands)


def grasp_polygon(design, left_config, right_config):
    """[left base, left joint, left tip, right tip, right joint, right base]."""
    L, R = _chains(design, left_config, right_config)
    return np.array([L[0], L[1], L[2], R[2], R[1], R[0]])


def _self_intersecting(poly):
    n = len(poly)
    for a in range(n):
        for b in range(a + 2, n):
            if a == 0 and b == n - 1:
                continue
            if segments_intersect(poly[a], poly[(a + 1) % n], poly[b], poly[(b + 1) % n]):
                return True
    return False


def _on_boundary(poly, p, tol=1e-12):
    n = len(poly)
    return any(_point_segment(p, poly[k], poly[(k + 1) % n]) <= tol for k in range(n))


def crossing_number(poly, p):
    inside = False
    n = len(poly)
    x, y = p
    for k in range(n):
        (x1, y1), (x2, y2) = poly[k], poly[(k + 1) % n]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xc:
                inside = not inside
    return inside


def winding_number(poly, p):
    w = 0
    n = len(poly)
    for k in range(n):
        a, b = poly[k], poly[(k + 1) % n]
        if a[1] <= p[1]:
            if b[1] > p[1] and _cross(a, b, p) > 0:
                w += 1
        elif b[1] <= p[1] and _cross(a, b, p) < 0:
            w -= 1
    return w


def contained(design, left_config, right_config, p, strict=False):
    """Object centre inside the finger-palm polygon (boundary counts).

    A self-intersecting polygon falls back to the nonzero winding rule, or
    raises DegeneratePolygon when strict.
    """
    p = np.asarray(p, dtype=float)
    if p[1] < 0:
        return False
    poly = grasp_polygon(design, left_config, right_config)
    if _on_boundary(poly, p):
        return True
    if _self_intersecting(poly):
        if strict:
            raise DegeneratePolygon("finger-palm polygon intersects itself")
        return winding_number(poly, p) != 0
    return crossing_number(poly, p)


# ---------------------------------------------------------------------------
# endpoint classification
# ---------------------------------------------------------------------------

def _config(design, batch, i, side):
    if not batch.reached[i]:
        return free_config(design, side)
    return FingerConfig(side, float(batch.theta1[i]), float(batch.theta2[i]))


def _classify_solved(design, obj, P, left, right, eq):
    out, lo = [], []
    for k, p in enumerate(P):
        reach = left.reached[k] or right.reached[k]
        if not reach or not eq[k]:
            out.append(EJECTION)
            lo.append(None)
            continue
        lc, rc = _config(design, left, k, LEFT), _config(design, right, k, RIGHT)
        L = l_open(design, lc, rc)
        caged = L < 2.0 * obj.r and contained(design, lc, rc, p)
        out.append(CAGED if caged else STABLE)
        lo.append(L)
    return out, lo


def _fresh_equilibrium(design, obj, command, P):
    left = solve_side(design, obj, P[:, 0], P[:, 1], LEFT)
    right = solve_side(design, obj, P[:, 0], P[:, 1], RIGHT)
    reach = left.reached | right.reached
    eq = np.zeros(len(P), dtype=bool)
    idx = np.flatnonzero(reach)
    if len(idx):
        eq[idx] = equilibrium_flags(design, obj, command, P[idx, 0], P[idx, 1],
                                    left.take(idx), right.take(idx))
    return eq, left, right


def classify_endpoint(design, obj, command, p_f):
    """Ejection, stable (tip prehension) or caged at a final object position."""
    command = command or ActuationCommand()
    P = np.asarray(p_f, dtype=float).reshape(1, 2)
    eq, left, right = _fresh_equilibrium(design, obj, command, P)
    return _classify_solved(design, obj, P, left, right, eq)[0][0]


# ---------------------------------------------------------------------------
# gradient following
# ---------------------------------------------------------------------------

def _direction(field, P):
    V, g, inside, eqc = field.eval(P)
    n = np.linalg.norm(g, axis=1)
    d = np.where(n[:, None] > GRAD_TOL, -g / np.where(n > GRAD_TOL, n, 1.0)[:, None], 0.0)
    return d, V, n, inside, eqc


def follow_gradients(emap, starts, max_steps=MAX_STEPS, keep_points=False, refine=True):
    """Lockstep RK4 descent from many start points; returns a list of Trajectory.

    The step starts at half a cell, halves whenever the interpolated energy
    would rise and doubles back after each accepted step.  A trajectory that
    stops making headway (net displacement over a window of steps below half
    a step) is stalled.  Stalls in cells flagged for equilibrium get a short
    pattern search on the exact energy before the final equilibrium test.
    """
    design, obj = emap.design, emap.object
    command = emap.command
    field = _Field(emap)
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    P = starts.copy()
    m = len(P)
    y_min = obj.r
    h0 = 0.5 * min(field.dx, field.dy) if (field.nx > 1 or field.ny > 1) else 0.0
    h_min = h0 * 2.0 ** -12
    h = np.full(m, h0)
    steps = np.zeros(m, dtype=int)
    max_rise = np.zeros(m)
    status = np.zeros(m, dtype=int)    # 0 active, 1 equilibrium, 2 left reachable set, 3 stalled
    paths = [[p.copy()] for p in P] if keep_points else None
    ck_pos = P.copy()
    _, V, _, inside, eqc = _direction(field, P)
    status[~inside] = 2

    def check_eq(idx):
        if not len(idx):
            return
        eq, _, _ = _fresh_equilibrium(design, obj, command, P[idx])
        status[idx[eq]] = 1

    check_eq(np.flatnonzero((status == 0) & eqc))
    if h0 == 0.0:
        status[status == 0] = 3
    while True:
        act = np.flatnonzero(status == 0)
        if not len(act):
            break
        p = P[act]
        hh = h[act][:, None]
        k1, v0, gn, _, _ = _direction(field, p)
        flat = gn <= GRAD_TOL
        k2 = _direction(field, _clamp(p + 0.5 * hh * k1, y_min))[0]
        k3 = _direction(field, _clamp(p + 0.5 * hh * k2, y_min))[0]
        k4 = _direction(field, _clamp(p + hh * k3, y_min))[0]
        q = _clamp(p + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), y_min)
        _, vq, _, ins, eqq = _direction(field, q)
        out = ~ins & ~flat
        rise = np.where(ins, vq - v0, 0.0)
        bad = ins & (rise > RISE_TOL) & ~flat
        ok = ins & ~bad & ~flat
        acc = act[ok]
        P[acc] = q[ok]
        steps[acc] += 1
        max_rise[acc] = np.maximum(max_rise[acc], rise[ok])
        h[acc] = np.minimum(2.0 * h[acc], h0)
        # leaving the reachable set ends the trajectory at the exit step
        ex = act[out]
        P[ex] = q[out]
        steps[ex] += 1
        status[ex] = 2
        if keep_points:
            for a in np.concatenate([acc, ex]):
                paths[a].append(P[a].copy())
        rb = act[bad]
        h[rb] *= 0.5
        status[act[flat]] = 3
        status[rb[h[rb] < h_min]] = 3
        check_eq(acc[eqq[ok]])
        win = acc[(steps[acc] % _WINDOW == 0) & (status[acc] == 0)]
        if len(win):
            moved = np.linalg.norm(P[win] - ck_pos[win], axis=1)
            status[win[moved < 0.5 * h0]] = 3
            ck_pos[win] = P[win]
        capped = act[(steps[act] >= max_steps) & (status[act] == 0)]
        status[capped] = 3
    terminal = P.copy()
    st = np.flatnonzero(status == 3)
    if len(st):
        eq, _, _ = _fresh_equilibrium(design, obj, command, P[st])
        status[st[eq]] = 1
        st = st[~eq]
        if refine and len(st):
            near = field.eval(P[st])[3]
            st = st[near]
            if len(st):
                R = _refine(design, obj, command, P[st], field.dx, y_min)
                eq, _, _ = _fresh_equilibrium(design, obj, command, R)
                terminal[st[eq]] = R[eq]
                status[st[eq]] = 1
    outcomes = [EJECTION] * m
    l_opens = [None] * m
    done = np.flatnonzero(status == 1)
    if len(done):
        eq, left, right = _fresh_equilibrium(design, obj, command, terminal[done])
        oc, lo = _classify_solved(design, obj, terminal[done], left, right, eq)
        for k, a in enumerate(done):
            outcomes[a], l_opens[a] = oc[k], lo[k]
    trajs = []
    for a in range(m):
        pts = np.array(paths[a]) if keep_points else np.array([starts[a], P[a]])
        trajs.append(Trajectory(pts, terminal[a].copy(), outcomes[a], l_opens[a], int(steps[a]),
                                float(max_rise[a]), bool(status[a] == 3)))
    return trajs


def _refine(design, obj, command, P, dx, y_min, rounds=6):
    """Batched 5x5 pattern search on the exact energy around each point (within one cell)."""
    off = np.linspace(-1.0, 1.0, 5)
    ox, oy = np.meshgrid(off, off)
    ox, oy = ox.ravel(), oy.ravel()
    best = P.copy()
    origin = P.copy()
    s = 0.5 * dx
    for _ in range(rounds):
        cx = best[:, 0, None] + s * ox[None, :]
        cy = best[:, 1, None] + s * oy[None, :]
        cx = np.clip(cx, origin[:, 0, None] - dx, origin[:, 0, None] + dx)
        cy = np.clip(cy, np.maximum(origin[:, 1, None] - dx, y_min), origin[:, 1, None] + dx)
        V = point_energies(design, obj, command, cx.ravel(), cy.ravel())[0].reshape(cx.shape)
        V = np.where(np.isnan(V), np.inf, V)
        k = np.argmin(V, axis=1)
        best = np.column_stack([cx[np.arange(len(P)), k], cy[np.arange(len(P)), k]])
        s *= 0.5
    return best


def _clamp(P, y_min):
    # the palm line stops the object
    return np.column_stack([P[:, 0], np.maximum(P[:, 1], y_min)])


def follow_gradient(emap, p0, max_steps=MAX_STEPS):
    """Single-start descent with the full point list."""
    return follow_gradients(emap, np.asarray(p0, dtype=float).reshape(1, 2), max_steps,
                            keep_points=True)[0]


def caging_score(emap, keep_trajectories=False):
    """Caging score of a map: sum over caged endpoints of 1 - L_open / 2r."""
    X, Y = emap.grid.points()
    mask = emap.reachable.ravel()
    starts = np.column_stack([X.ravel()[mask], Y.ravel()[mask]])
    if not len(starts):
        return CagingScore(0.0, 0, 0, 0, [])
    trajs = follow_gradients(emap, starts)
    lam = 0.0
    n_c = n_t = n_e = 0
    two_r = 2.0 * emap.object.r
    for t in trajs:
        if t.outcome == CAGED:
            n_c += 1
            lam += 1.0 - t.l_open_at_terminal / two_r
        elif t.outcome == STABLE:
            n_t += 1
        else:
            n_e += 1
    return CagingScore(float(lam), n_c, n_t, n_e, trajs if keep_trajectories else [])


def write_trajectories(trajectories, path):
    with open(path, "w") as fh:
        for t in trajectories:
            fh.write(json.dumps(t.to_dict(), sort_keys=True) + "\n")
