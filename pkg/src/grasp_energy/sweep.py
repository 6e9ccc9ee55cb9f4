"""
Design-space sweep: enumerate designs and objects, score every pair, persist.

Result store layout (one directory per sweep):

    config.json      canonical config with its sha256
    results.jsonl    one record per (design, object), sorted by pair index
    rankings.json    designs by descending caging score for each object
    maps/            optional CSV maps
    partial.jsonl    records appended as they finish (resume journal)
"""
import copy
import hashlib
import json
import os
from dataclasses import dataclass, field
from multiprocessing import get_context

import jsonschema
import numpy as np
from sklearn.model_selection import ParameterGrid

from . import __version__
from .caging import caging_score
from .contact_solver import ActuationCommand
from .energy_map import build_energy_map
from .kinematics import GrasperDesign, ObjectSpec

DESIGN_PARAMS = ("l1", "l2", "r1", "r2", "w")
OBJECT_PARAMS = ("r", "mu_s")
ENV_JOBS = "GRASP_ENERGY_JOBS"

_range = {
    "type": "object",
    "properties": {
        "low": {"type": "number"}, "high": {"type": "number"},
        "step": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["low", "high", "step"],
    "additionalProperties": False,
}
_grid = {"oneOf": [_range, {"type": "array", "items": {"type": "number"}, "minItems": 1}]}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "sweep configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "preset": {"type": "string", "enum": ["paper", "desk", "smoke", "custom"]},
        "designs": {
            "type": "object",
            "properties": {k: _grid for k in DESIGN_PARAMS},
            "required": list(DESIGN_PARAMS),
            "additionalProperties": False,
        },
        "objects": {
            "type": "object",
            "properties": {k: _grid for k in OBJECT_PARAMS},
            "required": list(OBJECT_PARAMS),
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {"dx": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["dx"],
            "additionalProperties": False,
        },
        "command": {
            "type": "object",
            "properties": {"f_left": {"type": "number", "exclusiveMinimum": 0},
                           "f_right": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["f_left", "f_right"],
            "additionalProperties": False,
        },
        "manipulation": {
            "type": "object",
            "properties": {
                "top_k": {"type": "integer", "minimum": 1},
                "alpha": {"type": "number", "exclusiveMinimum": 0},
                "force_step": {"type": "number", "exclusiveMinimum": 0},
                "w_grid": _grid,
                "dx": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "jobs": {"type": "integer", "minimum": 1},
        "output": {"type": ["string", "null"]},
        "save_maps": {"type": "boolean"},
    },
    "required": ["designs", "objects", "grid", "command"],
}

_TABLE = {
    "designs": {
        "l1": {"low": 0.4, "high": 2.0, "step": 0.2},
        "l2": {"low": 0.4, "high": 1.6, "step": 0.4},
        "r1": {"low": 0.04, "high": 0.20, "step": 0.04},
        "r2": {"low": 0.02, "high": 0.18, "step": 0.04},
        "w": {"low": 0.0, "high": 2.0, "step": 0.4},
    },
    "objects": {
        "r": {"low": 0.4, "high": 1.6, "step": 0.4},
        "mu_s": {"low": 0.1, "high": 1.0, "step": 0.3},
    },
}

_MANIP = {"top_k": 5, "alpha": 2.0, "force_step": 0.2,
          "w_grid": {"low": 0.0, "high": 2.0, "step": 0.4}}

PRESETS = {
    "paper": {
        "preset": "paper",
        **copy.deepcopy(_TABLE),
        "grid": {"dx": 0.05},
        "command": {"f_left": 1.0, "f_right": 1.0},
        "manipulation": dict(_MANIP, dx=0.05),
    },
    "desk": {
        "preset": "desk",
        "designs": {"l1": [1.2, 2.0], "l2": [0.8, 1.6], "r1": [0.12, 0.20], "r2": [0.06, 0.14],
                    "w": [0.4, 1.2, 2.0]},
        "objects": {"r": [0.4, 1.6], "mu_s": [0.1, 0.4, 0.7, 1.0]},
        "grid": {"dx": 0.2},
        "command": {"f_left": 1.0, "f_right": 1.0},
        "manipulation": dict(_MANIP, dx=0.2),
    },
    "smoke": {
        "preset": "smoke",
        "designs": {"l1": [1.2, 2.0], "l2": [1.2], "r1": [0.2], "r2": [0.1], "w": [0.8]},
        "objects": {"r": [0.8], "mu_s": [0.4]},
        "grid": {"dx": 0.4},
        "command": {"f_left": 1.0, "f_right": 1.0},
        "manipulation": dict(_MANIP, dx=0.4, top_k=1),
    },
}


class ConfigError(ValueError):
    """Invalid sweep configuration or override."""


def grid_values(entry):
    """Explicit values of a grid given as a list or as an inclusive (low, high, step) range."""
    if isinstance(entry, (list, tuple)):
        return [float(v) for v in entry]
    lo, hi, st = entry["low"], entry["high"], entry["step"]
    if hi < lo:
        raise ConfigError(f"grid bounds out of order: {lo} > {hi}")
    n = int(np.floor((hi - lo) / st + 1e-9)) + 1
    return [round(lo + k * st, 10) for k in range(n)]


@dataclass
class SweepConfig:
    designs: dict
    objects: dict
    grid: dict = field(default_factory=lambda: {"dx": 0.05})
    command: dict = field(default_factory=lambda: {"f_left": 1.0, "f_right": 1.0})
    manipulation: dict = field(default_factory=lambda: dict(_MANIP, dx=0.05))
    preset: str = "custom"
    jobs: int = 1
    output: str = None
    save_maps: bool = False

    def __post_init__(self):
        validate_config(self.to_dict(full=True))

    @classmethod
    def from_preset(cls, name, **overrides):
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        d = copy.deepcopy(PRESETS[name])
        d.update(overrides)
        return cls.from_dict(d)

    @classmethod
    def from_dict(cls, d):
        d = copy.deepcopy(d)
        validate_config(d)
        manip = dict(_MANIP, dx=d.get("grid", {}).get("dx", 0.05))
        manip.update(d.pop("manipulation", {}))
        return cls(manipulation=manip, **d)

    def to_dict(self, full=False):
        d = {
            "preset": self.preset,
            "designs": self.designs,
            "objects": self.objects,
            "grid": self.grid,
            "command": self.command,
            "manipulation": self.manipulation,
        }
        if full:
            d.update(jobs=self.jobs, output=self.output, save_maps=self.save_maps)
        return copy.deepcopy(d)

    def canonical(self):
        """Serialization that identifies the results (parallelism and paths excluded)."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    @property
    def dx(self):
        return float(self.grid["dx"])

    @property
    def actuation(self):
        return ActuationCommand(float(self.command["f_left"]), float(self.command["f_right"]))


def validate_config(d):
    try:
        jsonschema.validate(d, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from None
    for group in ("designs", "objects"):
        for name, entry in d[group].items():
            grid_values(entry)
    return d


def _coerce(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(d, overrides):
    """Apply dotted key=value overrides; unknown keys are rejected by the schema check."""
    d = copy.deepcopy(d)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        parts = key.strip().split(".")
        node = d
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
        node[parts[-1]] = _coerce(value)
    validate_config(d)
    return d


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def enumerate_designs(config):
    """Cartesian product of the design grids in lexicographic (l1, l2, r1, r2, w) order, r1 == r2 dropped."""
    grid = ParameterGrid({k: grid_values(config.designs[k]) for k in DESIGN_PARAMS})
    out = []
    for p in grid:
        if np.isclose(p["r1"], p["r2"], rtol=0.0, atol=1e-12):
            continue
        out.append(GrasperDesign(**{k: p[k] for k in DESIGN_PARAMS}))
    out.sort(key=GrasperDesign.key)
    return out


def enumerate_objects(config):
    return [ObjectSpec(r, mu) for r in grid_values(config.objects["r"])
            for mu in grid_values(config.objects["mu_s"])]


def pair_hash(design, obj, dx, command):
    payload = {"design": design.to_dict(), "object": obj.to_dict(), "dx": dx,
               "command": command.to_dict(), "version": __version__}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:24]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate_pair(design, obj, dx, command, map_path=None):
    """Score one (design, object) pair; returns the result record fields."""
    emap = build_energy_map(design, obj, command, dx=dx, strict=False)
    if map_path:
        emap.to_csv(map_path)
    score = caging_score(emap)
    return {
        "lambda": score.lambda_,
        "lambda_hat": score.normalized,
        "n_caged": score.n_caged,
        "n_tip": score.n_tip,
        "n_ejected": score.n_ejected,
        "n_reachable": emap.n_reachable,
        "n_equilibrium": int(emap.equilibrium.sum()),
    }


def _work(task):
    index, design_d, obj_d, dx, cmd_d, map_path = task
    design = GrasperDesign.from_dict(design_d)
    obj = ObjectSpec(**obj_d)
    rec = {"index": index, "design": {k: design_d[k] for k in DESIGN_PARAMS},
           "object": obj_d}
    try:
        rec.update(evaluate_pair(design, obj, dx, ActuationCommand(**cmd_d), map_path))
        rec["status"] = "ok"
    except Exception as exc:  # quarantine, never abort the sweep
        rec.update(status="quarantined", error=f"{type(exc).__name__}: {exc}")
    return rec


@dataclass
class SweepResult:
    config: SweepConfig
    designs: list
    objects: list
    records: list
    rankings: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def quarantined(self):
        return [r for r in self.records if r["status"] != "ok"]

    def record(self, design, obj):
        i = self.designs.index(design) * len(self.objects) + self.objects.index(obj)
        return self.records[i]

    def for_object(self, obj):
        k = self.objects.index(obj)
        n = len(self.objects)
        return [self.records[i * n + k] for i in range(len(self.designs))]

    def scores(self, obj, normalized=True):
        key = "lambda_hat" if normalized else "lambda"
        return {d.key(): (r.get(key) or 0.0) for d, r in zip(self.designs, self.for_object(obj))}

    @classmethod
    def load(cls, path):
        with open(os.path.join(path, "config.json")) as fh:
            meta = json.load(fh)
        config = SweepConfig.from_dict(meta["config"])
        records = _read_jsonl(os.path.join(path, "results.jsonl"))
        designs = enumerate_designs(config)
        objects = enumerate_objects(config)
        rankings = {}
        rp = os.path.join(path, "rankings.json")
        if os.path.exists(rp):
            with open(rp) as fh:
                rankings = json.load(fh)
        return cls(config, designs, objects, records, rankings,
                   {"config_hash": meta["hash"], "version": meta["version"]})


def _read_jsonl(path):
    if not os.path.exists(path):
        return []
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError:
                    # a torn final line from an interrupted run
                    continue
    return out


def _dump(rec):
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def default_jobs():
    try:
        return max(1, int(os.environ.get(ENV_JOBS, "1")))
    except ValueError:
        return 1


def run_sweep(config, jobs=None, output=None, progress=None, limit=None):
    """Score every (design, object) pair; resumable through the store's journal.

    limit stops after that many new pairs (used to simulate interruption).
    """
    jobs = jobs or config.jobs or default_jobs()
    output = output or config.output
    designs = enumerate_designs(config)
    objects = enumerate_objects(config)
    cmd = config.actuation
    n_obj = len(objects)
    hashes = [pair_hash(d, o, config.dx, cmd) for d in designs for o in objects]
    done = {}
    journal = None
    if output:
        os.makedirs(output, exist_ok=True)
        if config.save_maps:
            os.makedirs(os.path.join(output, "maps"), exist_ok=True)
        _write_config(config, output)
        for rec in _read_jsonl(os.path.join(output, "results.jsonl")) + \
                _read_jsonl(os.path.join(output, "partial.jsonl")):
            if rec.get("status") == "ok":
                done[rec["hash"]] = rec
        journal = open(os.path.join(output, "partial.jsonl"), "a")
    tasks = []
    for idx, h in enumerate(hashes):
        if h in done:
            continue
        d, o = designs[idx // n_obj], objects[idx % n_obj]
        mp = os.path.join(output, "maps", f"{h}.csv") if output and config.save_maps else None
        tasks.append((idx, d.to_dict(), o.to_dict(), config.dx, cmd.to_dict(), mp))
    if limit is not None:
        tasks = tasks[:limit]
    results = {}
    try:
        for k, rec in enumerate(_execute(tasks, jobs)):
            rec["hash"] = hashes[rec["index"]]
            results[rec["index"]] = rec
            if journal:
                journal.write(_dump(rec) + "\n")
                journal.flush()
            if progress:
                progress(k + 1, len(tasks), rec)
    finally:
        if journal:
            journal.close()
    records = []
    complete = True
    for idx, h in enumerate(hashes):
        rec = results.get(idx) or done.get(h)
        if rec is None:
            complete = False
            continue
        rec = dict(rec, index=idx)
        records.append(rec)
    result = SweepResult(config, designs, objects, records,
                         provenance={"config_hash": config.config_hash(), "version": __version__})
    if complete:
        result.rankings = {_obj_label(o): [list(d.key()) for d in rank_designs(result, o)]
                           for o in objects}
        if output:
            _persist(result, output)
    return result


def _execute(tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield _work(t)
        return
    with get_context("spawn").Pool(jobs) as pool:
        yield from pool.imap_unordered(_work, tasks, chunksize=1)


def _write_config(config, output):
    meta = {"config": config.to_dict(), "hash": config.config_hash(), "version": __version__}
    with open(os.path.join(output, "config.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _persist(result, output):
    tmp = os.path.join(output, "results.jsonl.tmp")
    with open(tmp, "w") as fh:
        for rec in result.records:
            fh.write(_dump(rec) + "\n")
    os.replace(tmp, os.path.join(output, "results.jsonl"))
    with open(os.path.join(output, "rankings.json"), "w") as fh:
        json.dump(result.rankings, fh, indent=1, sort_keys=True)
        fh.write("\n")
    journal = os.path.join(output, "partial.jsonl")
    if os.path.exists(journal):
        os.remove(journal)


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

def _obj_label(obj):
    return f"r={obj.r:g},mu_s={obj.mu_s:g}"


def rank_designs(result, obj):
    """Designs by descending caging score; ties in lexicographic design order."""
    recs = result.for_object(obj)
    order = sorted(range(len(result.designs)),
                   key=lambda i: (-(recs[i].get("lambda") or 0.0), result.designs[i].key()))
    return [result.designs[i] for i in order]


def corner_objects(objects):
    rs = sorted({o.r for o in objects})
    mus = sorted({o.mu_s for o in objects})
    want = [(r, mu) for r in (rs[0], rs[-1]) for mu in (mus[0], mus[-1])]
    out = []
    for r, mu in want:
        o = ObjectSpec(r, mu)
        if o in objects and o not in out:
            out.append(o)
    return out


def cage_vs_tip_table(result):
    """Per corner object, (design key, n_caged, n_tip, n_ejected) for every design."""
    table = {}
    for o in corner_objects(result.objects):
        table[_obj_label(o)] = [(d.key(), r.get("n_caged", 0), r.get("n_tip", 0),
                                 r.get("n_ejected", 0))
                                for d, r in zip(result.designs, result.for_object(o))]
    return table


def best_design(result, obj):
    return rank_designs(result, obj)[0]


def optimal_parameter(result, obj, name):
    """Parameter value of the top-ranked design; R for transmission_ratio."""
    d = best_design(result, obj)
    return d.transmission_ratio if name == "R" else getattr(d, name)


# ---------------------------------------------------------------------------
# manipulation over a finished sweep
# ---------------------------------------------------------------------------

class ScoreCache:
    """Normalized caging scores by (design, object); misses are computed and journaled."""

    def __init__(self, result, path=None):
        self.result = result
        self.path = path
        self.dx = result.config.dx
        self.command = result.config.actuation
        self._s = {}
        n = len(result.objects)
        for rec in result.records:
            if rec.get("status") == "ok":
                self._s[self._key(result.designs[rec["index"] // n].key(),
                                  result.objects[rec["index"] % n])] = rec["lambda_hat"]
        if path:
            for rec in _read_jsonl(path):
                self._s[self._key(tuple(rec["design"]), ObjectSpec(**rec["object"]))] = rec["lambda_hat"]

    @staticmethod
    def _key(dkey, obj):
        return tuple(float(v) for v in dkey) + (obj.r, obj.mu_s)

    def get(self, design, obj):
        k = self._key(design.key(), obj)
        if k not in self._s:
            rec = evaluate_pair(design, obj, self.dx, self.command)
            self._s[k] = rec["lambda_hat"]
            if self.path:
                with open(self.path, "a") as fh:
                    fh.write(_dump({"design": list(design.key()), "object": obj.to_dict(),
                                    "lambda_hat": rec["lambda_hat"]}) + "\n")
        return self._s[k]

    def scores(self, designs, obj):
        return {d.key(): self.get(d, obj) for d in designs}


def design_bounds(config):
    out = {}
    for k in DESIGN_PARAMS:
        v = grid_values(config.designs[k])
        out[k] = (min(v), max(v))
    return out


def manipulation_for_object(result, obj, scenario, cache=None):
    """(report, MetricResult) for one object; scenario A keeps the best of the top-K bases."""
    from .manipulation import (SCENARIO_A, manipulation_metric, metric_report,
                               scenario_a_family, scenario_b_family)
    cfg = result.config.manipulation
    cache = cache or ScoreCache(result)
    dx = float(cfg.get("dx", result.config.dx))
    bounds = design_bounds(result.config)
    if scenario == SCENARIO_A:
        best = None
        for base in rank_designs(result, obj)[: int(cfg["top_k"])]:
            fam = scenario_a_family(base, grid_values(cfg["w_grid"]), float(cfg["alpha"]),
                                    float(cfg["force_step"]))
            res = manipulation_metric(fam, obj, cache.scores(fam.designs, obj), dx=dx,
                                      details=True)
            if best is None or res.metric > best[1].metric:
                best = (fam, res, base)
        fam, res, base = best
        bounds = dict(bounds, w=(min(grid_values(cfg["w_grid"])), max(grid_values(cfg["w_grid"]))))
        return metric_report(fam, obj, res, bounds, base), res
    fam = scenario_b_family(result.designs)
    res = manipulation_metric(fam, obj, cache.scores(fam.designs, obj), dx=dx, details=True)
    return metric_report(fam, obj, res, bounds), res
