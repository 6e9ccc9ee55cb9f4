"""
Deterministic SVG figures: energy heatmaps, cage-vs-tip scatter, parameter
ranges, best-design gallery and manipulation bars.
"""
import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .kinematics import LEFT, RIGHT, FingerConfig, finger_chain, free_config  # noqa: E402

_RC = {"svg.hashsalt": "grasp-energy", "svg.fonttype": "none", "font.size": 8}


def _save(fig, path=None):
    buf = io.StringIO()
    with plt.rc_context(_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _figure(*args, **kw):
    with plt.rc_context(_RC):
        return plt.subplots(*args, **kw)


def _empty(ax, message):
    ax.text(0.5, 0.5, message, ha="center", va="center", transform=ax.transAxes, color="0.3")
    ax.set_xticks([])
    ax.set_yticks([])


def reference_pose(emap):
    """Finger configurations at the lowest-energy equilibrium cell, else the free pose."""
    ok = emap.reachable & emap.equilibrium
    if not ok.any() or emap.left is None:
        return None, free_config(emap.design, LEFT), free_config(emap.design, RIGHT)
    V = np.where(ok, emap.V, np.inf)
    k = int(np.argmin(V))
    X, Y = emap.grid.points()
    cfgs = []
    for side, b in ((LEFT, emap.left), (RIGHT, emap.right)):
        if b.reached[k]:
            cfgs.append(FingerConfig(side, float(b.theta1[k]), float(b.theta2[k])))
        else:
            cfgs.append(free_config(emap.design, side))
    return (X.ravel()[k], Y.ravel()[k]), cfgs[0], cfgs[1]


def draw_map(ax, emap, outline=True):
    g = emap.grid
    V = np.ma.masked_invalid(emap.V)
    hx, hy = g.dx / 2.0, g.dy / 2.0
    extent = (g.xs[0] - hx, g.xs[-1] + hx, g.ys[0] - hy, g.ys[-1] + hy)
    im = ax.imshow(V, origin="lower", extent=extent, cmap="magma", interpolation="nearest")
    X, Y = g.points()
    eq = emap.equilibrium & emap.reachable
    if eq.any():
        ax.scatter(X[eq], Y[eq], s=6, marker="x", c="cyan", linewidths=0.6, label="equilibrium")
    if outline:
        p, lc, rc = reference_pose(emap)
        for cfg in (lc, rc):
            pts = np.array(finger_chain(emap.design, cfg))
            ax.plot(pts[:, 0], pts[:, 1], "-o", color="white", lw=1.5, ms=2)
        w = emap.design.w / 2.0
        ax.plot([-w, w], [0, 0], color="white", lw=2.5)
        if p is not None:
            ax.add_patch(plt.Circle(p, emap.object.r, fill=False, color="white", lw=0.8, ls="--"))
    ax.set_aspect("equal")
    ax.set_xlim(extent[0], extent[1])
    ax.set_ylim(min(-0.1, extent[2]), extent[3])
    return im


def plot_map(emap, path=None):
    fig, ax = _figure(figsize=(5, 4))
    if emap.empty:
        _empty(ax, "no reachable positions")
    else:
        im = draw_map(ax, emap)
        fig.colorbar(im, ax=ax, label="V")
    d, o = emap.design, emap.object
    ax.set_title(f"l1={d.l1:g} l2={d.l2:g} r1={d.r1:g} r2={d.r2:g} w={d.w:g} | r={o.r:g} mu_s={o.mu_s:g}")
    return _save(fig, path)


def plot_cage_vs_tip(table, path=None):
    """One scatter panel per corner object; one point per design."""
    if not table:
        fig, ax = _figure(figsize=(4, 3))
        _empty(ax, "warning: empty result store")
        return _save(fig, path)
    labels = sorted(table)
    fig, axes = _figure(1, len(labels), figsize=(3 * len(labels), 3), squeeze=False)
    for ax, lab in zip(axes[0], labels):
        rows = table[lab]
        tip = [r[2] for r in rows]
        cage = [r[1] for r in rows]
        ax.scatter(tip, cage, s=8, c="tab:blue")
        ax.set_title(lab)
        ax.set_xlabel("tip prehension points")
        ax.set_ylabel("caging points")
    return _save(fig, path)


def plot_param_ranges(ranges, path=None):
    """Heat grid of relative parameter ranges, rows are objects; values clamped to [0, 1]."""
    if not ranges:
        fig, ax = _figure(figsize=(4, 3))
        _empty(ax, "warning: empty result store")
        return _save(fig, path)
    rows = sorted(ranges)
    cols = list(next(iter(ranges.values())))
    M = np.clip(np.array([[ranges[r][c] for c in cols] for r in rows], dtype=float), 0.0, 1.0)
    fig, ax = _figure(figsize=(1 + 0.8 * len(cols), 1 + 0.35 * len(rows)))
    im = ax.imshow(M, vmin=0.0, vmax=1.0, cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(cols)), cols)
    ax.set_yticks(range(len(rows)), rows)
    for i in range(len(rows)):
        for j in range(len(cols)):
            ax.text(j, i, f"{M[i, j]:.2f}", ha="center", va="center", color="w", fontsize=6)
    fig.colorbar(im, ax=ax)
    return _save(fig, path)


def plot_best_designs(maps, path=None):
    """Gallery of the best design per object with its map underneath."""
    if not maps:
        fig, ax = _figure(figsize=(4, 3))
        _empty(ax, "warning: empty result store")
        return _save(fig, path)
    n = len(maps)
    cols = min(4, n)
    rws = int(np.ceil(n / cols))
    fig, axes = _figure(rws, cols, figsize=(3 * cols, 3 * rws), squeeze=False)
    for ax, emap in zip(axes.ravel(), maps):
        if emap.empty:
            _empty(ax, "no reachable positions")
        else:
            draw_map(ax, emap)
        d, o = emap.design, emap.object
        ax.set_title(f"r={o.r:g} mu_s={o.mu_s:g}\nl1={d.l1:g} l2={d.l2:g} R={d.transmission_ratio:.2f} w={d.w:g}",
                     fontsize=7)
    for ax in axes.ravel()[n:]:
        ax.axis("off")
    return _save(fig, path)


def plot_manipulation(reports, path=None):
    """Grouped bars of the metric per object for each scenario."""
    if not reports:
        fig, ax = _figure(figsize=(4, 3))
        _empty(ax, "warning: empty result store")
        return _save(fig, path)
    objs = sorted({(r["object"]["r"], r["object"]["mu_s"]) for r in reports})
    scen = sorted({r["scenario"] for r in reports})
    val = {(r["object"]["r"], r["object"]["mu_s"], r["scenario"]): r["metric"] for r in reports}
    fig, ax = _figure(figsize=(max(4, 0.6 * len(objs) + 1), 3))
    width = 0.8 / len(scen)
    x = np.arange(len(objs))
    for k, s in enumerate(scen):
        h = [val.get((r, m, s), 0.0) for r, m in objs]
        ax.bar(x + (k - (len(scen) - 1) / 2) * width, h, width, label=f"scenario {s}")
    ax.set_xticks(x, [f"{r:g}/{m:g}" for r, m in objs], rotation=60)
    ax.set_xlabel("object r / mu_s")
    ax.set_ylabel("manipulation metric")
    ax.legend()
    return _save(fig, path)
