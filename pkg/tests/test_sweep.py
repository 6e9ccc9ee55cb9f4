import json
import os

import pytest

from grasp_energy.kinematics import GrasperDesign, ObjectSpec
from grasp_energy.sweep import (
    PRESETS, ConfigError, ScoreCache, SweepConfig, SweepResult, apply_overrides,
    cage_vs_tip_table, corner_objects, enumerate_designs, enumerate_objects, grid_values,
    manipulation_for_object, pair_hash, rank_designs, run_sweep,
)


def test_grid_values():
    assert grid_values({"low": 0.4, "high": 2.0, "step": 0.2}) == pytest.approx(
        [0.4 + 0.2 * k for k in range(9)])
    assert grid_values([1, 2.5]) == [1.0, 2.5]
    with pytest.raises(ConfigError):
        grid_values({"low": 2.0, "high": 1.0, "step": 0.1})


def test_full_table_counts():
    cfg = SweepConfig.from_preset("paper")
    designs = enumerate_designs(cfg)
    objects = enumerate_objects(cfg)
    assert len(designs) == 9 * 4 * 5 * 5 * 6 == 5400
    assert len(objects) == 16
    assert len(designs) * len(objects) == 86400
    keys = [d.key() for d in designs]
    assert keys == sorted(keys)


def test_equal_radii_are_dropped():
    cfg = SweepConfig.from_dict(dict(PRESETS["smoke"], designs={
        "l1": [1.2], "l2": [1.2], "r1": [0.1, 0.2], "r2": [0.1, 0.2], "w": [0.8]}))
    ds = enumerate_designs(cfg)
    assert [(d.r1, d.r2) for d in ds] == [(0.1, 0.2), (0.2, 0.1)]


def test_desk_preset_size():
    cfg = SweepConfig.from_preset("desk")
    assert len(enumerate_designs(cfg)) == 48
    assert len(enumerate_objects(cfg)) == 8


def test_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig.from_dict({"designs": {}, "objects": {}})
    bad = json.loads(json.dumps(PRESETS["smoke"]))
    bad["grid"]["dx"] = -1
    with pytest.raises(ConfigError):
        SweepConfig.from_dict(bad)
    with pytest.raises(ConfigError):
        SweepConfig.from_preset("nope")


def test_overrides():
    d = apply_overrides(PRESETS["smoke"], ["grid.dx=0.25", "designs.w=[0.4, 0.8]"])
    assert d["grid"]["dx"] == 0.25
    assert d["designs"]["w"] == [0.4, 0.8]
    assert PRESETS["smoke"]["grid"]["dx"] == 0.4
    with pytest.raises(ConfigError):
        apply_overrides(PRESETS["smoke"], ["grid.bogus=1"])
    with pytest.raises(ConfigError):
        apply_overrides(PRESETS["smoke"], ["grid.dx"])


def test_config_hash_ignores_execution_settings():
    a = SweepConfig.from_preset("smoke")
    b = SweepConfig.from_preset("smoke", jobs=4, output="/tmp/x")
    assert a.config_hash() == b.config_hash()
    c = SweepConfig.from_dict(apply_overrides(PRESETS["smoke"], ["grid.dx=0.3"]))
    assert c.config_hash() != a.config_hash()


def test_pair_hash_distinguishes_inputs():
    from grasp_energy.contact_solver import ActuationCommand
    d = GrasperDesign(1.2, 1.2, 0.2, 0.1, 0.8)
    o = ObjectSpec(0.8, 0.4)
    h = pair_hash(d, o, 0.4, ActuationCommand())
    assert h == pair_hash(d, o, 0.4, ActuationCommand())
    assert h != pair_hash(d, ObjectSpec(0.8, 0.5), 0.4, ActuationCommand())
    assert h != pair_hash(d, o, 0.2, ActuationCommand())


@pytest.fixture(scope="module")
def smoke_store(tmp_path_factory):
    out = tmp_path_factory.mktemp("smoke")
    cfg = SweepConfig.from_preset("smoke", save_maps=True)
    return run_sweep(cfg, jobs=1, output=str(out)), out


def test_smoke_store_layout(smoke_store):
    res, out = smoke_store
    assert len(res.records) == 2
    assert all(r["status"] == "ok" for r in res.records)
    for name in ("config.json", "results.jsonl", "rankings.json"):
        assert (out / name).exists()
    assert not (out / "partial.jsonl").exists()
    assert len(os.listdir(out / "maps")) == 2
    for r in res.records:
        assert 0.0 <= r["lambda_hat"] <= 1.0
        assert r["n_caged"] + r["n_tip"] + r["n_ejected"] <= r["n_reachable"]


def test_store_round_trip(smoke_store):
    res, out = smoke_store
    back = SweepResult.load(str(out))
    assert back.records == [json.loads(l) for l in (out / "results.jsonl").read_text().splitlines()]
    assert back.designs == res.designs and back.objects == res.objects
    assert back.provenance["config_hash"] == res.config.config_hash()
    assert back.rankings == json.loads(json.dumps(res.rankings))


def test_rerun_reuses_results(smoke_store, tmp_path):
    res, out = smoke_store
    seen = []
    again = run_sweep(res.config, jobs=1, output=str(out), progress=lambda k, n, r: seen.append(r))
    assert seen == []
    assert again.records == res.records


def test_resume_after_interruption(tmp_path, smoke_store):
    full, _ = smoke_store
    cfg = SweepConfig.from_preset("smoke")
    part = run_sweep(cfg, jobs=1, output=str(tmp_path), limit=1)
    assert len(part.records) == 1
    assert (tmp_path / "partial.jsonl").exists()
    assert not (tmp_path / "results.jsonl").exists()
    done = run_sweep(cfg, jobs=1, output=str(tmp_path))
    assert [r["lambda"] for r in done.records] == [r["lambda"] for r in full.records]
    assert not (tmp_path / "partial.jsonl").exists()


def test_torn_journal_line_is_ignored(tmp_path):
    cfg = SweepConfig.from_preset("smoke")
    run_sweep(cfg, jobs=1, output=str(tmp_path), limit=1)
    with open(tmp_path / "partial.jsonl", "a") as fh:
        fh.write('{"index": 1, "stat')
    done = run_sweep(cfg, jobs=1, output=str(tmp_path))
    assert len(done.records) == 2


def test_parallel_matches_serial(tmp_path, smoke_store):
    _, out = smoke_store
    run_sweep(SweepConfig.from_preset("smoke"), jobs=2, output=str(tmp_path))
    assert (tmp_path / "results.jsonl").read_bytes() == (out / "results.jsonl").read_bytes()
    assert (tmp_path / "rankings.json").read_bytes() == (out / "rankings.json").read_bytes()


def _fake_result(lams):
    cfg = SweepConfig.from_dict(dict(PRESETS["smoke"], designs={
        "l1": [1.2, 1.6, 2.0], "l2": [1.2], "r1": [0.2], "r2": [0.1], "w": [0.8]}))
    ds, os_ = enumerate_designs(cfg), enumerate_objects(cfg)
    recs = [{"index": i, "status": "ok", "lambda": v, "lambda_hat": v / 10, "n_caged": i,
             "n_tip": 2 * i, "n_ejected": 0} for i, v in enumerate(lams)]
    return SweepResult(cfg, ds, os_, recs)


def test_rank_ties_in_lexicographic_order():
    res = _fake_result([1.0, 3.0, 3.0])
    o = res.objects[0]
    assert [d.l1 for d in rank_designs(res, o)] == [1.6, 2.0, 1.2]
    res = _fake_result([2.0, 2.0, 2.0])
    assert [d.l1 for d in rank_designs(res, o)] == [1.2, 1.6, 2.0]


def test_corner_objects_and_table():
    objs = [ObjectSpec(r, mu) for r in (0.4, 0.8, 1.6) for mu in (0.1, 0.4, 1.0)]
    assert [o.key() for o in corner_objects(objs)] == [(0.4, 0.1), (0.4, 1.0), (1.6, 0.1), (1.6, 1.0)]
    res = _fake_result([1.0, 2.0, 3.0])
    tab = cage_vs_tip_table(res)
    assert list(tab) == ["r=0.8,mu_s=0.4"]
    assert [row[1:3] for row in tab["r=0.8,mu_s=0.4"]] == [(0, 0), (1, 2), (2, 4)]


def test_score_cache_journal(tmp_path, smoke_store):
    res, _ = smoke_store
    path = tmp_path / "extra.jsonl"
    cache = ScoreCache(res, str(path))
    o = res.objects[0]
    assert cache.get(res.designs[0], o) == res.records[0]["lambda_hat"]
    extra = GrasperDesign(1.6, 1.2, 0.2, 0.1, 0.8)
    v = cache.get(extra, o)
    assert 0.0 <= v <= 1.0
    assert ScoreCache(res, str(path)).get(extra, o) == v
    assert len(path.read_text().splitlines()) == 1


def test_manipulation_over_smoke_store(smoke_store):
    res, _ = smoke_store
    o = res.objects[0]
    rep_a, ra = manipulation_for_object(res, o, "A")
    rep_b, rb = manipulation_for_object(res, o, "B")
    assert rep_a["n_designs"] == 6 and rep_a["n_commands"] == 9
    assert rep_b["n_designs"] == 2 and rep_b["n_commands"] == 1
    assert rep_a["metric"] == pytest.approx(ra.metric) and rep_a["metric"] >= 0
    assert rep_a["base_design"]["l1"] == rank_designs(res, o)[0].l1
