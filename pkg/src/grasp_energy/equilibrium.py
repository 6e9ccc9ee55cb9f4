"""
Planar contact wrenches on a disk and the null-wrench hull test.

Wrench coordinates are (fx, fy, tau / r): moments are divided by the object
radius so the three axes share force units.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog, nnls

from .kinematics import ContactPoint

HULL_TOL = 1e-9
PALM = "palm"


class Wrench(NamedTuple):
    fx: float
    fy: float
    tau_scaled: float


@dataclass
class WrenchSet:
    """Stack of wrenches with (contact index, cone edge sign) per row."""
    array: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    provenance: list = field(default_factory=list)

    def __post_init__(self):
        self.array = np.asarray(self.array, dtype=float).reshape(-1, 3)
        if not self.provenance:
            self.provenance = [(k, 0) for k in range(len(self.array))]
        if len(self.provenance) != len(self.array):
            raise ValueError("one provenance entry per wrench is required")

    @property
    def wrenches(self):
        return [Wrench(*map(float, w)) for w in self.array]

    def __len__(self):
        return len(self.array)

    def extend(self, other):
        return WrenchSet(np.vstack([self.array, other.array]), self.provenance + other.provenance)

    def scaled(self, s):
        return WrenchSet(self.array * s, list(self.provenance))


def cone_edge_wrenches(contact, f_n, mu_s, obj, p):
    """The two friction-cone edge wrenches of one contact."""
    if f_n < 0:
        raise ValueError("normal force must be non-negative")
    p = np.asarray(p, dtype=float)
    arm = contact.position - p
    out = []
    for sign in (1.0, -1.0):
        f = f_n * (contact.normal + sign * mu_s * contact.tangent) / np.sqrt(1.0 + mu_s ** 2)
        tau = arm[0] * f[1] - arm[1] * f[0]
        out.append(Wrench(float(f[0]), float(f[1]), float(tau / obj.r)))
    return tuple(out)


def cone_edge_array(pos, normal, f_n, mu_s, r, p):
    """Vectorized cone edges: (n, 2) contacts -> (2n, 3) wrench rows (+ edge then - edge)."""
    pos = np.atleast_2d(pos)
    normal = np.atleast_2d(normal)
    f_n = np.broadcast_to(np.asarray(f_n, dtype=float), (len(pos),))
    tang = np.stack([-normal[:, 1], normal[:, 0]], axis=1)
    arm = pos - np.asarray(p, dtype=float)
    rows = []
    for sign in (1.0, -1.0):
        f = f_n[:, None] * (normal + sign * mu_s * tang) / np.sqrt(1.0 + mu_s ** 2)
        tau = arm[:, 0] * f[:, 1] - arm[:, 1] * f[:, 0]
        rows.append(np.column_stack([f, tau / r]))
    return np.stack(rows, axis=1).reshape(-1, 3)


def origin_in_hull(points, tol=HULL_TOL):
    """True iff the origin lies in the convex hull of the rows of `points`.

    Solved as non-negative least squares on [W^T; 1^T] lam = [0, 0, 0, 1]
    after scaling rows to unit length (containment only depends on
    directions, so this is exact and well conditioned).
    """
    W = np.asarray(points, dtype=float)
    if W.ndim != 2 or len(W) == 0:
        return False
    norms = np.linalg.norm(W, axis=1)
    if np.any(norms <= tol):
        return True
    U = W / norms[:, None]
    A = np.vstack([U.T, np.ones(len(U))])
    b = np.zeros(A.shape[0])
    b[-1] = 1.0
    lam, reported = nnls(A, b)
    res = np.linalg.norm(A @ lam - b)
    if abs(res - reported) > 1e-12:
        # some scipy releases report a residual that lam does not achieve
        lp = linprog(np.zeros(len(U)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        return bool(lp.status == 0)
    return bool(res <= tol)


def null_wrench_contained(ws, tol=HULL_TOL):
    if len(ws) == 0:
        raise ValueError("empty wrench set")
    return origin_in_hull(ws.array, tol)


def palm_contact(obj, p, tol=1e-9):
    """Palm support under an object resting on the palm line, else None."""
    p = np.asarray(p, dtype=float)
    if p[1] > obj.r + tol:
        return None
    return ContactPoint(np.array([p[0], 0.0]), np.array([0.0, 1.0]), PALM, PALM)


def finger_wrench_set(solutions, obj, p, scale=1.0):
    """Cone-edge wrench set of every loaded contact of the given finger solutions."""
    rows, prov = [], []
    k = 0
    for sol in solutions:
        if sol is None:
            continue
        for c, f in zip(sol.contacts, sol.normal_forces):
            if f > 0:
                for e, sign in zip(cone_edge_wrenches(c, f * scale, obj.mu_s, obj, p), (1, -1)):
                    rows.append(e)
                    prov.append((k, sign))
            k += 1
    return WrenchSet(np.array(rows, dtype=float).reshape(-1, 3), prov)


def object_equilibrium(left, right, obj, p, palm=True):
    """Static equilibrium of the object under the finger contacts (and the palm).

    Passive palm support enters with unit magnitude; containment only depends
    on directions.
    """
    if left is None and right is None:
        return False
    ws = finger_wrench_set((left, right), obj, p)
    if palm:
        pc = palm_contact(obj, p)
        if pc is not None:
            e = cone_edge_wrenches(pc, 1.0, obj.mu_s, obj, p)
            ws = ws.extend(WrenchSet(np.array(e), [(-1, 1), (-1, -1)]))
    return equilibrium_from_rows(ws.array)


def equilibrium_from_rows(rows, tol=HULL_TOL):
    rows = np.asarray(rows, dtype=float).reshape(-1, 3)
    rows = rows[np.linalg.norm(rows, axis=1) > tol]
    if len(rows) < 2:
        return False
    dirs = rows / np.linalg.norm(rows, axis=1)[:, None]
    if np.ptp(dirs, axis=0).max() <= tol:
        return False
    return origin_in_hull(rows, tol)
