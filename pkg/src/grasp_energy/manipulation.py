"""
Manipulation metric of a variable grasper.

A grasper family is a set of realizable designs and actuation commands.  At
each object position every (design, command) pair contributes its contact
wrenches, scaled by the design's normalized caging score, unless those
wrenches already hold the object (origin inside their own hull).  The metric
sums, over positions, the radius of the largest origin-centred sphere inside
the aggregate hull.
"""
import json
from dataclasses import dataclass, field, replace
from itertools import combinations

import jsonschema
import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .contact_solver import ActuationCommand, solve_side
from .energy_map import GridSpec, batch_contacts
from .equilibrium import WrenchSet, cone_edge_array, origin_in_hull
from .kinematics import LEFT, RIGHT

SCENARIO_A = "A"
SCENARIO_B = "B"
PARAMETERS = ("l1", "l2", "r1", "r2", "w")
INTERIOR_TOL = 1e-12

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "manipulation metric report",
    "type": "object",
    "required": ["object", "scenario", "metric", "radii", "parameter_ranges", "n_designs",
                 "n_commands"],
    "properties": {
        "object": {
            "type": "object",
            "required": ["r", "mu_s"],
            "properties": {"r": {"type": "number", "exclusiveMinimum": 0},
                           "mu_s": {"type": "number", "minimum": 0}},
        },
        "scenario": {"type": "string", "enum": [SCENARIO_A, SCENARIO_B]},
        "metric": {"type": "number", "minimum": 0},
        "radii": {
            "type": "object",
            "required": ["n_points", "n_positive", "max", "mean"],
            "properties": {
                "n_points": {"type": "integer", "minimum": 0},
                "n_positive": {"type": "integer", "minimum": 0},
                "max": {"type": "number", "minimum": 0},
                "mean": {"type": "number", "minimum": 0},
            },
        },
        "parameter_ranges": {
            "type": "object",
            "additionalProperties": {"type": "number", "minimum": 0, "maximum": 1},
        },
        "n_designs": {"type": "integer", "minimum": 1},
        "n_commands": {"type": "integer", "minimum": 1},
        "base_design": {"type": ["object", "null"]},
    },
}


@dataclass
class GrasperFamily:
    designs: list
    commands: list
    label: str = SCENARIO_B

    def __post_init__(self):
        if not self.designs or not self.commands:
            raise ValueError("a grasper family needs at least one design and one command")
        if self.label == SCENARIO_B:
            if len(self.commands) != 1 or self.commands[0].f_left != self.commands[0].f_right:
                raise ValueError("scenario B uses a single symmetric command")
        self.designs = list(self.designs)
        self.commands = list(self.commands)

    def pairs(self):
        return [(i, k) for i in range(len(self.designs)) for k in range(len(self.commands))]


@dataclass
class PointHull:
    vertices: np.ndarray
    radius: float
    contributing: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# hull geometry
# ---------------------------------------------------------------------------

def inscribed_radius(vertices, tol=INTERIOR_TOL):
    """Radius of the largest origin-centred sphere inside conv(vertices); 0 unless interior."""
    V = np.asarray(vertices, dtype=float).reshape(-1, 3)
    if len(V) < 4 or np.linalg.matrix_rank(V - V[0], tol=1e-12) < 3:
        return 0.0
    try:
        hull = ConvexHull(V)
    except QhullError:
        return 0.0
    # equations: n . x + d <= 0 inside, with unit outward n
    off = -hull.equations[:, -1]
    if np.any(off <= tol):
        return 0.0
    return float(off.min())


def facet_radius_bruteforce(vertices, tol=1e-12):
    """Origin-centred inscribed radius from explicit supporting planes (small inputs)."""
    V = np.asarray(vertices, dtype=float).reshape(-1, 3)
    best = np.inf
    found = False
    for a, b, c in combinations(range(len(V)), 3):
        n = np.cross(V[b] - V[a], V[c] - V[a])
        L = np.linalg.norm(n)
        if L <= tol:
            continue
        n /= L
        s = (V - V[a]) @ n
        if np.all(s <= tol):
            pass
        elif np.all(s >= -tol):
            n = -n
        else:
            continue
        found = True
        d = float(V[a] @ n)
        if d <= tol:
            return 0.0
        best = min(best, d)
    return best if found else 0.0


# ---------------------------------------------------------------------------
# wrench sets
# ---------------------------------------------------------------------------

def _unit_rows(design, obj, P, side_batches):
    """Per point, the unit-tendon cone-edge rows of each side: list of (left, right) arrays."""
    out = []
    per_side = {}
    for side, batch in side_batches:
        slots = batch_contacts(design, obj, P[:, 0], P[:, 1], batch, side)
        per_side[side] = slots
    for i in range(len(P)):
        pair = []
        for side in (LEFT, RIGHT):
            rows = [cone_edge_array(pos[i], n[i], f[i], obj.mu_s, obj.r, P[i])
                    for valid, pos, n, f in per_side[side] if valid[i] and f[i] > 0]
            pair.append(np.vstack(rows) if rows else np.zeros((0, 3)))
        out.append(tuple(pair))
    return out


def command_wrench_set(design, obj, p, command, lambda_hat):
    """Cone-edge wrenches of every loaded finger contact at p, scaled by lambda_hat."""
    command = command or ActuationCommand()
    P = np.asarray(p, dtype=float).reshape(1, 2)
    batches = [(s, solve_side(design, obj, P[:, 0], P[:, 1], s)) for s in (LEFT, RIGHT)]
    left, right = _unit_rows(design, obj, P, batches)[0]
    arr = np.vstack([left * command.f_left, right * command.f_right]) * lambda_hat
    prov = [(LEFT, k) for k in range(len(left))] + [(RIGHT, k) for k in range(len(right))]
    return WrenchSet(arr, prov)


def _moves_object(rows, obj, p):
    """A pair contributes only if its contacts, with the passive palm support
    when the object rests on it, cannot hold the object in equilibrium."""
    if not len(rows):
        return False
    if p[1] <= obj.r + 1e-9:
        up = np.array([0.0, 1.0])
        rows = np.vstack([rows, cone_edge_array(np.array([p[0], 0.0]), up, 1.0, obj.mu_s, obj.r, p)])
    return not origin_in_hull(rows)


def point_hull(family, obj, p, caging_scores):
    """Aggregate hull at one position over the motion-imparting (design, command) pairs."""
    verts, contrib = [], []
    for i, design in enumerate(family.designs):
        lam = caging_scores[design.key()]
        if lam <= 0:
            continue
        for k, cmd in enumerate(family.commands):
            ws = command_wrench_set(design, obj, p, cmd, lam)
            if _moves_object(ws.array, obj, np.asarray(p, dtype=float)):
                verts.append(ws.array)
                contrib.append((i, k))
    V = np.vstack(verts) if verts else np.zeros((0, 3))
    return PointHull(V, inscribed_radius(V) if len(V) else 0.0, contrib)


def common_grid(designs, obj, dx):
    """One grid covering the reach of every design in a family."""
    reach = max(d.reach(obj.r) for d in designs)
    return GridSpec.covering(reach, obj.r, dx)


@dataclass
class MetricResult:
    metric: float
    radii: np.ndarray
    grid: GridSpec
    contributing: list

    def summary(self):
        r = self.radii
        return {"n_points": int(r.size), "n_positive": int((r > 0).sum()),
                "max": float(r.max()) if r.size else 0.0,
                "mean": float(r.mean()) if r.size else 0.0}


def manipulation_metric(family, obj, caging_scores, grid=None, dx=0.2, details=False):
    """Sum of point-hull radii over the common grid of the family."""
    grid = grid or common_grid(family.designs, obj, dx)
    X, Y = grid.points()
    P = np.column_stack([X.ravel(), Y.ravel()])
    n = len(P)
    verts = [[] for _ in range(n)]
    contrib = [[] for _ in range(n)]
    for i, design in enumerate(family.designs):
        lam = caging_scores[design.key()]
        if lam <= 0:
            continue
        batches = [(s, solve_side(design, obj, P[:, 0], P[:, 1], s)) for s in (LEFT, RIGHT)]
        reached = batches[0][1].reached | batches[1][1].reached
        idx = np.flatnonzero(reached)
        if not len(idx):
            continue
        sub = [(s, b.take(idx)) for s, b in batches]
        unit = _unit_rows(design, obj, P[idx], sub)
        for j, (lrows, rrows) in zip(idx, unit):
            if not len(lrows) and not len(rrows):
                continue
            # positive scaling keeps row directions, so the filter is per design
            if not _moves_object(np.vstack([lrows, rrows]), obj, P[j]):
                continue
            for k, cmd in enumerate(family.commands):
                verts[j].append(np.vstack([lrows * cmd.f_left, rrows * cmd.f_right]) * lam)
                contrib[j].append((i, k))
    radii = np.zeros(n)
    for j in range(n):
        if verts[j]:
            radii[j] = inscribed_radius(np.vstack(verts[j]))
    res = MetricResult(float(radii.sum()), radii.reshape(grid.shape), grid, contrib)
    return res if details else res.metric


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

TABLE_W_GRID = (0.0, 0.4, 0.8, 1.2, 1.6, 2.0)


def force_splits(alpha=2.0, step=0.2):
    n = int(round(alpha / step))
    return [ActuationCommand(round(k * step, 12), round(alpha - k * step, 12)) for k in range(1, n)]


def scenario_a_family(base_design, w_grid=TABLE_W_GRID, alpha=2.0, force_step=0.2):
    """Variable palm width and asymmetric tendon forces summing to alpha."""
    designs = [replace(base_design, w=float(w)) for w in w_grid]
    return GrasperFamily(designs, force_splits(alpha, force_step), SCENARIO_A)


def scenario_b_family(designs):
    """Every design of the grid with equal unit tendon forces."""
    return GrasperFamily(list(designs), [ActuationCommand(1.0, 1.0)], SCENARIO_B)


def parameter_range_report(family, obj=None, result=None, bounds=None):
    """Relative range of each parameter among designs contributing to interior hulls.

    bounds maps parameter -> (grid min, grid max); defaults to the family's own spread.
    """
    used = set()
    if result is not None:
        for j, r in enumerate(result.radii.ravel()):
            if r > 0:
                used.update(i for i, _ in result.contributing[j])
    out = {}
    for name in PARAMETERS:
        vals = np.array([getattr(d, name) for d in family.designs])
        lo, hi = bounds[name] if bounds and name in bounds else (vals.min(), vals.max())
        span = hi - lo
        if not used or span <= 0:
            out[name] = 0.0
            continue
        u = vals[sorted(used)]
        out[name] = float(np.clip((u.max() - u.min()) / span, 0.0, 1.0))
    return out


def metric_report(family, obj, result, bounds=None, base_design=None):
    rep = {
        "object": obj.to_dict(),
        "scenario": family.label,
        "metric": float(result.metric),
        "radii": result.summary(),
        "parameter_ranges": parameter_range_report(family, obj, result, bounds),
        "n_designs": len(family.designs),
        "n_commands": len(family.commands),
        "base_design": None if base_design is None else base_design.to_dict(),
    }
    return rep


def validate_report(report):
    jsonschema.validate(report, REPORT_SCHEMA)
    return report


def write_report(report, path):
    validate_report(report)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
