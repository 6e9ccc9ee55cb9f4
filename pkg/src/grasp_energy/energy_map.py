"""
System potential energy of the grasper and energy maps over object positions.

The energy of a finger is the negative actuation work done on its joints
since the rest pose, V = -f (r1 (theta1 - theta1_rest) + r2 (theta2 - theta2_rest)).
Springs are carried by the design but contribute nothing.
"""
import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .contact_solver import (
    MODE_CODES, TIP_TOL, ActuationCommand, FingerSolution, solve_side,
)
from .equilibrium import cone_edge_array, equilibrium_from_rows
from .kinematics import (
    LEFT, RIGHT, FingerConfig, GrasperDesign, ObjectSpec, free_config,
)

SIG_DIGITS = 17
CSV_COLUMNS = ("x", "y", "reachable", "V", "equilibrium", "mode_left", "mode_right")


class EmptyReachableSet(ValueError):
    """No grid point can be reached; the map is attached as `energy_map`."""

    def __init__(self, message, energy_map=None):
        super().__init__(message)
        self.energy_map = energy_map


class Unreachable(ValueError):
    """No finger can touch the object at this position."""


@dataclass(frozen=True)
class RestPose:
    theta1_rest: float
    theta2_rest: float

    @classmethod
    def of(cls, design):
        return cls(design.theta1_limits[0], design.theta2_limits[0])


@dataclass(frozen=True)
class GridSpec:
    x0: float
    y0: float
    dx: float
    dy: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("grid spacing must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one point per axis")
        if self.y0 <= 0:
            raise ValueError("grid must lie above the palm (y > 0)")

    @property
    def xs(self):
        return np.round(self.x0 + self.dx * np.arange(self.nx), 12)

    @property
    def ys(self):
        return np.round(self.y0 + self.dy * np.arange(self.ny), 12)

    @property
    def shape(self):
        return (self.ny, self.nx)

    def points(self):
        X, Y = np.meshgrid(self.xs, self.ys)
        return X, Y

    def coarsened(self, k=2):
        return GridSpec(self.x0, self.y0, self.dx * k, self.dy * k,
                        (self.nx - 1) // k + 1, (self.ny - 1) // k + 1)

    def to_dict(self):
        return {"x0": self.x0, "y0": self.y0, "dx": self.dx, "dy": self.dy,
                "nx": self.nx, "ny": self.ny}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["x0"]), float(d["y0"]), float(d["dx"]), float(d["dy"]),
                   int(d["nx"]), int(d["ny"]))

    @classmethod
    def covering(cls, radius, y_min, dx):
        """Square cells, symmetric in x over [-radius, radius], y in [y_min, radius]."""
        half = int(np.floor(radius / dx + 1e-9))
        ny = int(np.floor((radius - y_min) / dx + 1e-9)) + 1
        return cls(-half * dx, y_min, dx, dx, 2 * half + 1, max(ny, 1))


def default_grid(design, obj, dx=0.05):
    return GridSpec.covering(design.reach(obj.r), obj.r, dx)


def finger_work(design, theta1, theta2):
    """Joint work per unit tendon force from the rest pose."""
    rest = RestPose.of(design)
    return design.r1 * (theta1 - rest.theta1_rest) + design.r2 * (theta2 - rest.theta2_rest)


def _pose(design, finger, side):
    if finger is None:
        return free_config(design, side)
    if isinstance(finger, FingerSolution):
        return finger.config
    if isinstance(finger, FingerConfig):
        return finger
    raise TypeError(f"expected FingerSolution, FingerConfig or None, got {type(finger)!r}")


def system_energy(design, left, right, command=None):
    """Energy of both fingers; an unreached finger (None) sits at its closed free pose."""
    command = command or ActuationCommand()
    total = 0.0
    for side, finger in ((LEFT, left), (RIGHT, right)):
        cfg = _pose(design, finger, side)
        total -= command.force(side) * finger_work(design, cfg.theta1, cfg.theta2)
    return float(total)


class EnergyMap:
    """Energy, reachability and equilibrium flags on a rectangular grid."""

    def __init__(self, design, obj, command, grid, V, reachable, equilibrium,
                 mode_left, mode_right, left=None, right=None):
        self.design = design
        self.object = obj
        self.command = command
        self.grid = grid
        self.V = np.asarray(V, dtype=float)
        self.reachable = np.asarray(reachable, dtype=bool)
        self.equilibrium = np.asarray(equilibrium, dtype=bool)
        self.mode_left = np.asarray(mode_left, dtype=int)
        self.mode_right = np.asarray(mode_right, dtype=int)
        # per-side batch solutions (flattened, row-major); not serialized
        self.left = left
        self.right = right

    @property
    def empty(self):
        return not self.reachable.any()

    @property
    def n_reachable(self):
        return int(self.reachable.sum())

    def header(self):
        return {
            "design": self.design.to_dict(),
            "object": self.object.to_dict(),
            "command": self.command.to_dict(),
            "grid": self.grid.to_dict(),
        }

    def rows(self):
        X, Y = self.grid.points()
        for j in range(self.grid.ny):
            for i in range(self.grid.nx):
                yield (X[j, i], Y[j, i], bool(self.reachable[j, i]),
                       self.V[j, i] if self.reachable[j, i] else None,
                       bool(self.equilibrium[j, i]),
                       MODE_CODES[self.mode_left[j, i]], MODE_CODES[self.mode_right[j, i]])

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for x, y, reach, v, eq, ml, mr in self.rows():
            w.writerow([_fmt(x), _fmt(y), int(reach), "" if v is None else _fmt(v), int(eq), ml, mr])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_json(self, path=None):
        d = self.header()
        d["cells"] = {
            "V": [[None if not r else _round17(v) for v, r in zip(vr, rr)]
                  for vr, rr in zip(self.V, self.reachable)],
            "reachable": self.reachable.astype(int).tolist(),
            "equilibrium": self.equilibrium.astype(int).tolist(),
            "mode_left": self.mode_left.tolist(),
            "mode_right": self.mode_right.tolist(),
        }
        text = json.dumps(d, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        c = d["cells"]
        V = np.array([[np.nan if v is None else v for v in row] for row in c["V"]], dtype=float)
        return cls(GrasperDesign.from_dict(d["design"]), ObjectSpec(**d["object"]),
                   ActuationCommand(**d["command"]), GridSpec.from_dict(d["grid"]), V,
                   np.array(c["reachable"], dtype=bool), np.array(c["equilibrium"], dtype=bool),
                   np.array(c["mode_left"]), np.array(c["mode_right"]))

    @classmethod
    def from_csv(cls, text, design, obj, command, grid):
        rd = csv.DictReader(io.StringIO(text))
        recs = list(rd)
        ny, nx = grid.shape
        if len(recs) != nx * ny:
            raise ValueError("row count does not match the grid")
        code = {m: i for i, m in enumerate(MODE_CODES)}
        V = np.array([float(r["V"]) if r["V"] else np.nan for r in recs]).reshape(ny, nx)
        reach = np.array([r["reachable"] == "1" for r in recs]).reshape(ny, nx)
        eq = np.array([r["equilibrium"] == "1" for r in recs]).reshape(ny, nx)
        ml = np.array([code[r["mode_left"]] for r in recs]).reshape(ny, nx)
        mr = np.array([code[r["mode_right"]] for r in recs]).reshape(ny, nx)
        return cls(design, obj, command, grid, V, reach, eq, ml, mr)


def _fmt(v):
    return format(float(v), f".{SIG_DIGITS}g")


def _round17(v):
    return float(_fmt(v))


def batch_contacts(design, obj, px, py, batch, side):
    """Vectorized contacts of one-side batch solutions.

    Returns a list of (valid, position, normal, force-per-unit-tendon) for the
    proximal and distal slots, in the palm frame.
    """
    bx = design.w / 2.0
    qx = -px if side == LEFT else px
    t1, t2 = batch.theta1, batch.theta2
    c1, s1 = np.cos(t1), np.sin(t1)
    prox = np.column_stack([bx + batch.k1 * c1, batch.k1 * s1])
    jx, jy = bx + design.l1 * c1, design.l1 * s1
    dist = np.column_stack([jx + batch.k2 * np.cos(t1 + t2), jy + batch.k2 * np.sin(t1 + t2)])
    q = np.column_stack([qx, py])
    out = []
    for valid, pos, f in ((batch.k1 > 0, prox, batch.f1), (batch.k2 > 0, dist, batch.f2)):
        valid = valid & batch.reached
        n = (q - pos) / obj.r
        if side == LEFT:
            pos = pos * np.array([-1.0, 1.0])
            n = n * np.array([-1.0, 1.0])
        out.append((valid, pos, n, f))
    return out


def equilibrium_flags(design, obj, command, px, py, left, right, palm=True):
    """Object equilibrium at each position from per-side batch solutions."""
    px = np.asarray(px, dtype=float).ravel()
    py = np.asarray(py, dtype=float).ravel()
    slots = []
    for side, batch in ((LEFT, left), (RIGHT, right)):
        f_a = command.force(side)
        for valid, pos, n, f in batch_contacts(design, obj, px, py, batch, side):
            slots.append((valid & (f > 0), pos, n, f * f_a))
    flags = np.zeros(len(px), dtype=bool)
    on_palm = py <= obj.r + 1e-9
    n_loaded = sum(s[0].astype(int) for s in slots)
    cand = np.flatnonzero((n_loaded + (on_palm & palm)) >= 1)
    up = np.array([0.0, 1.0])
    for i in cand:
        p = np.array([px[i], py[i]])
        rows = [cone_edge_array(pos[i], n[i], f[i], obj.mu_s, obj.r, p)
                for valid, pos, n, f in slots if valid[i]]
        if palm and on_palm[i]:
            rows.append(cone_edge_array(np.array([px[i], 0.0]), up, 1.0, obj.mu_s, obj.r, p))
        flags[i] = equilibrium_from_rows(np.vstack(rows))
    return flags


def point_energies(design, obj, command, px, py):
    """Energy at arbitrary object positions: (V, reachable, left, right); V is NaN where unreachable."""
    px = np.asarray(px, dtype=float).ravel()
    py = np.asarray(py, dtype=float).ravel()
    left = solve_side(design, obj, px, py, LEFT)
    right = solve_side(design, obj, px, py, RIGHT)
    reachable = left.reached | right.reached
    V = -(command.f_left * finger_work(design, left.theta1, left.theta2)
          + command.f_right * finger_work(design, right.theta1, right.theta2))
    return np.where(reachable, V, np.nan), reachable, left, right


def build_energy_map(design, obj, command=None, grid=None, dx=0.05, strict=True):
    """Energy map over `grid` (default: the full reach of the design, spacing dx)."""
    command = command or ActuationCommand()
    grid = grid or default_grid(design, obj, dx)
    X, Y = grid.points()
    px, py = X.ravel(), Y.ravel()
    V, reachable, left, right = point_energies(design, obj, command, px, py)
    eq = np.zeros(len(px), dtype=bool)
    if reachable.any():
        idx = np.flatnonzero(reachable)
        eq[idx] = equilibrium_flags(design, obj, command, px[idx], py[idx],
                                    left.take(idx), right.take(idx))
    emap = EnergyMap(design, obj, command, grid, V.reshape(grid.shape),
                     reachable.reshape(grid.shape), eq.reshape(grid.shape),
                     left.mode.reshape(grid.shape), right.mode.reshape(grid.shape),
                     left, right)
    if strict and emap.empty:
        raise EmptyReachableSet("no grid point is reachable", emap)
    return emap


# ---------------------------------------------------------------------------
# frictionless baseline: direct minimization of the joint energy
# ---------------------------------------------------------------------------

_N_SCAN = 1441


def _edge(f, lo, hi):
    """Root of f on [lo, hi] where f(hi) < 0 <= f(lo); hi when not bracketed."""
    fl, fh = f(lo), f(hi)
    if fh >= 0 or fl < 0:
        return hi
    return brentq(f, lo, hi, xtol=1e-15)


class _Finger:
    """Right-frame finger closing on a fixed disk, described only by geometry."""

    def __init__(self, design, obj, q):
        self.bx = design.w / 2.0
        self.l1, self.l2 = design.l1, design.l2
        self.r1, self.r2 = design.r1, design.r2
        self.r = obj.r
        self.a1, self.b1 = design.theta1_limits
        self.a2, self.b2 = design.theta2_limits
        self.q = np.asarray(q, dtype=float)

    def work(self, t1, t2):
        return self.r1 * (t1 - self.a1) + self.r2 * (t2 - self.a2)

    def _seg(self, ax, ay, ux, uy, length):
        dx, dy = self.q[0] - ax, self.q[1] - ay
        t = np.clip(dx * ux + dy * uy, 0.0, length)
        return np.hypot(dx - t * ux, dy - t * uy) - self.r, t

    def gaps(self, t1, t2):
        """(proximal gap, its foot, distal gap, its foot) for the chain at (t1, t2)."""
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        u1 = np.cos(t1), np.sin(t1)
        gp, sp = self._seg(self.bx, 0.0, *u1, self.l1)
        jx, jy = self.bx + self.l1 * u1[0], self.l1 * u1[1]
        gd, sd = self._seg(jx, jy, np.cos(t1 + t2), np.sin(t1 + t2), self.l2)
        return gp, sp, gd, sd

    def family(self, t1):
        """theta2 and k2 that put the disk tangent to the distal line (interior side)."""
        t1 = np.asarray(t1, dtype=float)
        jx, jy = self.bx + self.l1 * np.cos(t1), self.l1 * np.sin(t1)
        ex, ey = self.q[0] - jx, self.q[1] - jy
        D = np.hypot(ex, ey)
        ok = D > self.r
        s = np.where(ok, self.r / np.where(ok, D, 1.0), 1.0)
        phi2 = np.arctan2(ey, ex) - np.arcsin(s)
        t2 = (phi2 - t1 + np.pi) % (2.0 * np.pi) - np.pi
        k2 = np.sqrt(np.maximum(D * D - self.r * self.r, 0.0))
        gp, _, _, _ = self.gaps(t1, t2)
        return t2, k2, ok, gp

    def _first_root(self, f, lo, hi, n=_N_SCAN):
        """First sign change (from >= 0 to < 0) of f on [lo, hi], refined by brentq."""
        s = np.linspace(lo, hi, n)
        v = f(s)
        bad = np.flatnonzero(v < 0)
        if not len(bad):
            return None
        i = bad[0]
        if i == 0:
            return lo
        return brentq(f, s[i - 1], s[i], xtol=1e-15)

    def _feasible(self, t1):
        t2, k2, ok, gp = self.family(t1)
        return (ok & (k2 > 1e-9) & (k2 < self.l2 - 1e-9) & (t2 >= self.a2 - 1e-12)
                & (t2 <= self.b2 + 1e-12) & (gp >= -1e-12))

    def descend(self, t_start):
        """Follow the distal contact family from t_start with theta1 decreasing
        while the energy drops; None when the disk rolls off the fingertip."""
        a1 = self.a1
        if t_start <= a1:
            return (a1, float(self.family(a1)[0])) if self._feasible(a1) else None
        n = max(int(np.ceil((t_start - a1) / (np.pi / 1440))) + 1, 3)
        T = np.linspace(t_start, a1, n)
        t2, k2, ok, gp = self.family(T)
        if not ok[0] or k2[0] <= 1e-9:
            # disk on the bare joint: the distal link closes onto it and slides
            T, t2, k2, ok, gp = T[1:], t2[1:], k2[1:], ok[1:], gp[1:]
            if not self._feasible(T[0]):
                return None
            n -= 1
        W = self.work(T, t2)
        viol = ~ok | (k2 >= self.l2 - 1e-9) | (t2 > self.b2) | (t2 < self.a2 - 1e-12) | (gp < -1e-12)
        viol[0] = False
        rise = np.zeros(n, dtype=bool)
        rise[1:] = W[1:] < W[:-1]
        stop = np.flatnonzero(viol | rise)
        if not len(stop):
            return self._best_before(a1, T[max(n - 3, 0)], None)
        j = stop[0]
        if rise[j] and not viol[j]:
            lo = T[j]
            hi = T[max(j - 2, 0)]
            res = minimize_scalar(lambda t: -self.work(t, self.family(t)[0]),
                                  bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12})
            t2, k2 = self.family(res.x)[:2]
            return (float(res.x), float(t2)) if k2 < self.l2 - TIP_TOL else None
        # a constraint ends the family between T[j-1] and T[j]
        hi, lo = T[j - 1], T[j]
        if not ok[j]:
            return None
        edges = []
        if k2[j] >= self.l2 - 1e-9:
            edges.append((_edge(lambda t: self.family(t)[1] - self.l2, lo, hi), "tip"))
        if t2[j] > self.b2:
            edges.append((_edge(lambda t: self.family(t)[0] - self.b2, lo, hi), "lock"))
        if not edges:
            return float(hi), float(t2[j - 1])
        # decreasing theta1, the larger edge is met first
        tb, kind = max(edges)
        if kind == "lock" and self.family(tb)[1] >= self.l2 - 1e-9:
            kind = "tip"
        return self._best_before(tb, T[max(j - 2, 0)], kind)

    def _best_before(self, tb, top, kind):
        """Energy minimum on [tb, top] of the family, else the edge outcome at tb."""
        t2b = float(self.family(tb)[0])
        h = 1e-7
        # the energy may still bottom out just before the edge
        if top > tb + h and self.work(tb + h, self.family(tb + h)[0]) > self.work(tb, t2b) + 1e-14:
            res = minimize_scalar(lambda t: -self.work(t, self.family(t)[0]),
                                  bounds=(tb, top), method="bounded", options={"xatol": 1e-12})
            t2, k2 = self.family(res.x)[:2]
            if k2 < self.l2 - TIP_TOL:
                return float(res.x), float(t2)
        if kind == "tip":
            return None
        if kind == "lock":
            return float(tb), self.b2
        return float(tb), t2b

    def solve(self):
        """Frictionless equilibrium (theta1, theta2) or None when the disk is not held."""
        a1, b1, a2, b2 = self.a1, self.b1, self.a2, self.b2
        # rigid closing of the proximal joint with the distal joint at rest
        first = self._first_root(lambda t: np.minimum(*self.gaps(t, a2)[::2]), a1, b1)
        if first is not None:
            gp, sp, gd, sd = self.gaps(first, a2)
            prox_hit = gp <= gd and 1e-9 < sp < self.l1 - 1e-9
            if prox_hit:
                t1 = first
                touch = self._first_root(lambda t: self.gaps(t1, t)[2], a2, b2)
                if touch is None:
                    return t1, b2
                _, _, _, sd = self.gaps(t1, touch)
                if sd >= self.l2 - 1e-9:
                    return t1, float(touch)
                # both links touch: keep the corner unless sliding lowers the energy
                w0 = self.work(t1, touch)
                h = 1e-7
                t2h = self.family(t1 - h)[0]
                if self.work(t1 - h, t2h) <= w0:
                    return t1, float(touch)
                return self.descend(t1)
            if sd >= self.l2 - 1e-9:
                return None
            return self.descend(first)
        # proximal closed to its limit: the distal link closes next
        touch = self._first_root(lambda t: self.gaps(b1, t)[2], a2, b2)
        if touch is None:
            return None
        _, _, _, sd = self.gaps(b1, touch)
        if sd >= self.l2 - 1e-9:
            return None
        return self.descend(b1)


def frictionless_finger_pose(design, obj, p, side):
    """Frictionless equilibrium (theta1, theta2) of one finger, or None."""
    p = np.asarray(p, dtype=float)
    q = p * np.array([-1.0, 1.0]) if side == LEFT else p
    if q[1] < obj.r - 1e-12:
        return None
    return _Finger(design, obj, q).solve()


def frictionless_energy_oracle(design, obj, p, command=None):
    """Minimum joint energy of both fingers at p ignoring friction."""
    command = command or ActuationCommand()
    total = 0.0
    reached = False
    for side in (LEFT, RIGHT):
        pose = frictionless_finger_pose(design, obj, p, side)
        if pose is None:
            pose = (design.theta1_limits[1], design.theta2_limits[1])
        else:
            reached = True
        total -= command.force(side) * finger_work(design, *pose)
    if not reached:
        raise Unreachable(f"no finger reaches {tuple(np.asarray(p, dtype=float))}")
    return float(total)
