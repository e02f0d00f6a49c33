"""Acceptance suite: one test per release criterion, at its stated tolerance.

Run with `pytest tests/test_acceptance.py -s` to see one PASS/FAIL line per
criterion. The complexity and end-to-end checks are the slow ones (about one
to two minutes each on a laptop-class machine).
"""

import functools
import json
import math
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from mtriage import pipeline as pl
from mtriage.chrf import chrf
from mtriage.demo import generate_demo
from mtriage.familiarity import (
    KdeConfig,
    KdeModel,
    build_grid,
    fa_batch,
    fa_exact,
    fa_lookup,
    fa_lookup_batch,
    fit_kde,
)
from mtriage.rules import builtin_rules
from mtriage.sets import ChallengeSet, compute_metrics, expand_topic_sets
from mtriage.service import create_app
from mtriage.topics import Topic, TopicConfig, cluster, ctfidf
from mtriage.corpus import Corpus

from conftest import make_corpus, make_record
from test_chrf import chrf_oracle
from test_rules import ES_FIXTURES, ZH_FIXTURES


def criterion(label):
    def wrap(func):
        @functools.wraps(func)
        def run(*args, **kwargs):
            try:
                result = func(*args, **kwargs)
            except BaseException:
                print(f"[{label}] FAIL")
                raise
            print(f"[{label}] PASS")
            return result

        return run

    return wrap


def fa_oracle_loop(points, h1, h2, qx, qy):
    n = len(points)
    norm = 2.0 * math.pi * h1 * h2
    total = 0.0
    for (x, y) in points:
        dx = (qx - x) / h1
        dy = (qy - y) / h2
        total += math.exp(-0.5 * (dx * dx + dy * dy)) / norm
    return math.log(total / n)


@criterion("A1 Eq.1 exactness")
def test_a1_equation_exactness():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    pts = rng.normal(size=(1000, 2)) * 1.3
    model = fit_kde(pts)
    h1, h2 = model.h
    queries = rng.normal(size=(100, 2)) * 2.0
    got = fa_batch(model, queries)
    for k, (qx, qy) in enumerate(queries):
        expected = fa_oracle_loop(pts, h1, h2, qx, qy)
        assert abs(got[k] - expected) < 1e-10, (k, got[k], expected)
    single = KdeModel(np.zeros((2, 2)), np.eye(2))
    assert abs(fa_exact(single, (0.0, 0.0)) - math.log(1 / (2 * math.pi))) < 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


@criterion("A2 Grid fidelity")
def test_a2_grid_fidelity():
    rng = np.random.default_rng(102)
    pts = np.concatenate([
        rng.normal(size=(1000, 2)),
        rng.normal(size=(1000, 2)) + np.array([6.0, 0.0]),
    ])
    model = fit_kde(pts)
    d = 200
    grid = build_grid(model, KdeConfig(grid_density=d))
    xs, ys = grid.cell_centers()
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    looked_up = fa_lookup_batch(grid, centers)
    assert np.array_equal(looked_up, grid.values.ravel())

    f = grid.values
    adjacent = max(np.abs(np.diff(f, axis=0)).max(), np.abs(np.diff(f, axis=1)).max())
    min_x, max_x, min_y, max_y = grid.bounds
    queries = np.column_stack([
        rng.uniform(min_x, max_x, size=1000),
        rng.uniform(min_y, max_y, size=1000),
    ])
    gap = np.abs(fa_lookup_batch(grid, queries) - fa_batch(model, queries))
    assert gap.max() <= adjacent, (gap.max(), adjacent)

    assert fa_lookup(grid, (max_x + 1e6, max_y + 1e6)) == f[d - 1, d - 1]
    assert fa_lookup(grid, (min_x - 1e6, min_y - 1e6)) == f[0, 0]
    assert fa_lookup(grid, (min_x - 9.0, ys[17])) == f[0, 17]
    assert fa_lookup(grid, (xs[42], max_y + 9.0)) == f[42, d - 1]


@criterion("A3 Complexity contract")
def test_a3_complexity_contract():
    start = time.perf_counter()
    rng = np.random.default_rng(103)
    n, m = 47_000, 100_000
    pts = np.concatenate([
        rng.normal(size=(n // 2, 2)),
        rng.normal(size=(n - n // 2, 2)) + np.array([6.0, 0.0]),
    ])
    model = fit_kde(pts)
    grid = build_grid(model, KdeConfig(grid_density=200))
    queries = np.column_stack([
        rng.uniform(-4.0, 10.0, size=m),
        rng.uniform(-4.0, 4.0, size=m),
    ])

    t0 = time.perf_counter()
    grid_scores = fa_lookup_batch(grid, queries)
    t_grid = time.perf_counter() - t0

    t0 = time.perf_counter()
    exact_scores = fa_batch(model, queries)
    t_exact = time.perf_counter() - t0

    assert grid_scores.shape == exact_scores.shape == (m,)
    speedup = t_exact / t_grid
    assert speedup >= 10.0, f"grid scoring only {speedup:.1f}x faster"
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0, f"whole check took {elapsed:.1f}s"
    print(f"    (speedup {speedup:.0f}x; exact {t_exact:.1f}s, grid {t_grid * 1e3:.1f}ms)")


@criterion("A4 chrF")
def test_a4_chrf():
    assert chrf("hola mundo", "hola mundo") == 1.0
    assert chrf("xxxx", "yyyy") == 0.0
    import random
    import string

    rnd = random.Random(104)
    for _ in range(50):
        hyp = "".join(rnd.choices(string.ascii_lowercase + " ", k=rnd.randint(0, 50)))
        ref = "".join(rnd.choices(string.ascii_lowercase + " ", k=rnd.randint(1, 50)))
        if not ref.strip():
            ref = "abc"
        assert abs(chrf(hyp, ref) - chrf_oracle(hyp, ref)) < 1e-9


@criterion("A5 Rules fixture suite")
def test_a5_rules_fixtures():
    es_rules = {r.name: r for r in builtin_rules(("en", "es"))}
    zh_rules = {r.name: r for r in builtin_rules(("en", "zh"))}
    checked = set()
    for fixtures, rules in ((ES_FIXTURES, es_rules), (ZH_FIXTURES, zh_rules)):
        for rule_name, cases in fixtures.items():
            passes = sum(1 for _, _, ok in cases if ok)
            fails = len(cases) - passes
            assert passes >= 3 and fails >= 3, rule_name
            for source, translation, expected in cases:
                got = rules[rule_name].evaluate("r", source, translation).passed
                assert got is expected, (rule_name, source, translation)
            checked.add(rule_name)
    assert {"emoji", "url", "number", "roman-numeral", "question",
            "exclamation", "ovs", "comma", "period"} <= checked
    q = es_rules["question"]
    assert not q.evaluate("r", "Ready?", "Listo?").passed
    assert not q.evaluate("r", "Ready?", "¿Listo").passed
    assert q.evaluate("r", "Ready?", "¿Listo?").passed


def _expansion_corpus(seed=105):
    rng = np.random.default_rng(seed)
    records, vectors = [], []
    centers = np.eye(8)[:5] * 2.0
    for i in range(1000):
        rec = make_record(f"t-{i:04d}")
        rec.chrf = 0.5
        rec.embedding_ref = len(vectors)
        vectors.append(centers[i % 5] + rng.normal(scale=0.3, size=8))
        records.append(rec)
    for i in range(100):
        rec = make_record(f"l-{i:03d}", origin="log")
        rec.familiarity = -4.0
        rec.embedding_ref = len(vectors)
        vectors.append(centers[i % 5] + rng.normal(scale=0.3, size=8))
        records.append(rec)
    corpus = make_corpus(records)
    corpus.embeddings = np.stack(vectors).astype(np.float32)
    topics = [
        Topic(t, [f"l-{i:03d}" for i in range(100) if i % 5 == t], keywords=[(f"kw{t}", 1.0)])
        for t in range(5)
    ]
    return corpus, topics


@criterion("A6 Expansion oracle")
def test_a6_expansion_oracle():
    corpus, topics = _expansion_corpus()
    radius, seed = 0.6, 106
    sets = expand_topic_sets(topics, corpus, seeds_per_topic=15, radius=radius, rng_seed=seed)
    for topic, cset in zip(topics, sets):
        members = sorted(topic.member_ids)
        rng = np.random.default_rng([seed, topic.topic_id])
        picks = rng.choice(len(members), size=15, replace=False)
        seeds = [members[i] for i in sorted(picks)]
        seed_vecs = np.stack(
            [corpus.embeddings[corpus.get(s).embedding_ref] for s in seeds]
        ).astype(np.float64)
        expected = set(members)
        for rec in corpus.train_records():
            vec = corpus.embeddings[rec.embedding_ref].astype(np.float64)
            if np.linalg.norm(seed_vecs - vec, axis=1).min() < radius:
                expected.add(rec.id)
        assert cset.member_ids == sorted(expected)
    smaller = expand_topic_sets(topics, corpus, seeds_per_topic=15, radius=0.3, rng_seed=seed)
    for small, big in zip(smaller, sets):
        assert set(small.member_ids) <= set(big.member_ids)


@criterion("A7 Topic determinism and recovery")
def test_a7_topic_determinism(tmp_path):
    # planted 3-blob recovery with exact membership
    rng = np.random.default_rng(107)
    points, expected = {}, {0: set(), 1: set(), 2: set()}
    for blob, center in enumerate([(0.0, 0.0), (25.0, 0.0), (0.0, 25.0)]):
        count = [120, 90, 60][blob]
        angles = rng.uniform(0, 2 * math.pi, size=count)
        radii = 0.4 * np.sqrt(rng.uniform(0, 1, size=count))
        for i in range(count):
            rid = f"l-{blob}{i:03d}"
            points[rid] = (center[0] + radii[i] * math.cos(angles[i]),
                           center[1] + radii[i] * math.sin(angles[i]))
            expected[blob].add(rid)
    records = []
    for rid, xy in points.items():
        rec = make_record(rid, origin="log")
        rec.projection = xy
        rec.familiarity = -5.0
        records.append(rec)
    corpus = make_corpus(records)
    config = TopicConfig(cluster_radius=0.5, min_cluster_size=25, rng_seed=1)
    topics = cluster(sorted(points), corpus, config)
    assert len(topics) == 3
    assert [set(t.member_ids) for t in topics] == [expected[0], expected[1], expected[2]]

    # hash equality of two seeded pipeline runs
    import hashlib

    data = generate_demo(tmp_path / "data", n_train=400, n_log=400, dim=12, seed=5)
    config_obj = json.loads(data.config_file.read_text("utf-8"))
    config_obj["kde"]["grid_density"] = 64
    cfg = pl.PipelineConfig.from_dict(config_obj)
    stores = [pl.run_pipeline(cfg, tmp_path / name) for name in ("run-a", "run-b")]
    digests = []
    for store in stores:
        manifest_bytes = (store.root / "manifest.json").read_bytes()
        digests.append(hashlib.sha256(manifest_bytes).hexdigest())
    assert digests[0] == digests[1]
    assert (json.loads((stores[0].root / "manifest.json").read_text())["sets"]
            == json.loads((stores[1].root / "manifest.json").read_text())["sets"])


@criterion("A8 c-TF-IDF")
def test_a8_ctfidf():
    results = ctfidf([["fever fever chills"], ["fever rent"]], frozenset(), 10)
    c1 = dict(results[0])
    # independent recomputation: A = 2.5, f(fever) = 3, f(chills) = 1
    avg_tokens = (3 + 2) / 2
    expected_chills = 1 * math.log(1 + avg_tokens / 1)
    expected_fever = 2 * math.log(1 + avg_tokens / 3)
    assert abs(c1["chills"] - expected_chills) < 1e-9
    assert abs(c1["fever"] - expected_fever) < 1e-9
    assert expected_chills > expected_fever
    assert results[0][0][0] == "chills"

    planted = ctfidf(
        [["common common exclusive"], ["common common filler"], ["common other words"]],
        frozenset(), 5,
    )
    assert planted[0][0][0] == "exclusive"


@criterion("A9 Metrics arithmetic")
def test_a9_metrics_invariants():
    rng = np.random.default_rng(109)
    records = []
    for i in range(60):
        rec = make_record(f"t-{i:03d}", provenance=f"src-{i % 4}")
        rec.chrf = float(rng.uniform(0, 1))
        records.append(rec)
    for i in range(80):
        rec = make_record(f"l-{i:03d}", origin="log", day=int(rng.integers(0, 45)),
                          provenance=f"app-{i % 3}")
        rec.familiarity = float(rng.uniform(-15, -1))
        records.append(rec)
    corpus = make_corpus(records)
    ids = [r.id for r in corpus.records]

    cases = 0
    for _ in range(350):
        chosen = [list(rng.choice(ids, size=int(rng.integers(2, 90)), replace=False))
                  for _ in range(3)]
        ut1 = ChallengeSet("ut-a", "mismatch-a", "unit-test", member_ids=sorted(chosen[0]))
        ut2 = ChallengeSet("ut-b", "mismatch-b", "unit-test", member_ids=sorted(chosen[1]))
        tp = ChallengeSet("tp-000", "topic-x", "topic", member_ids=sorted(chosen[2]))
        removable = [m for m in ut1.member_ids if rng.random() < 0.2]
        ut1.removed_ids = set(removable)
        all_sets = [ut1, ut2, tp]
        for cset in all_sets:
            metrics = compute_metrics(cset, corpus, all_sets)
            total = metrics.train_count + metrics.log_count
            assert total == len(cset.effective_members())
            if total:
                assert metrics.train_ratio == pytest.approx(metrics.train_count / total)
            else:
                assert metrics.train_ratio is None
            if metrics.mean_chrf is not None:
                assert 0.0 <= metrics.mean_chrf <= 1.0
            assert sum(metrics.chrf_histogram) == metrics.train_count
            assert sum(metrics.familiarity_histogram) == metrics.log_count
            assert sum(metrics.timeline.values()) == metrics.log_count
            assert sum(metrics.source_counts.values()) == total
            cases += 1
        for a, b in ((ut1, tp), (ut2, tp)):
            shared_ab = a.metrics.overlap_counts.get(b.set_id, 0)
            shared_ba = b.metrics.overlap_counts.get(a.set_id, 0)
            assert shared_ab == shared_ba
            assert shared_ab == len(
                set(a.effective_members()) & set(b.effective_members())
            )
        assert tp.set_id not in ut1.metrics.overlap_counts or ut1.kind != tp.kind
        assert ut2.set_id not in ut1.metrics.overlap_counts  # same kind never listed
    assert cases >= 1000


@criterion("A10 End-to-end")
def test_a10_end_to_end(tmp_path):
    data = generate_demo(tmp_path / "demo", n_train=5000, n_log=5000, dim=32, seed=7)
    config = pl.PipelineConfig.from_file(data.config_file)
    t0 = time.perf_counter()
    store = pl.run_pipeline(config, tmp_path / "store")
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0, f"pipeline took {elapsed:.1f}s"

    all_sets = store.load_sets()
    by_name = {s.name: s for s in all_sets}
    for rule in ("emoji", "url", "number", "roman-numeral", "question",
                 "exclamation", "ovs", "comma", "period"):
        name = f"mismatch-{rule}"
        assert name in by_name, f"missing unit-test set {name}"
        assert len(by_name[name].member_ids) >= 1
    topic_sets = [s for s in all_sets if s.kind == "topic"]
    assert 4 <= len(topic_sets) <= config.topics.top_k_topics
    lowest_fa = min(topic_sets, key=lambda s: s.metrics.mean_familiarity)
    assert lowest_fa.metrics.train_count == 0  # unfamiliar topic lacks train coverage

    client = TestClient(create_app(store))
    listed = client.get("/api/sets").json()
    assert len(listed) == len(all_sets)

    def fetch_all(set_id, **params):
        ids, page = [], 1
        while True:
            chunk = client.get(f"/api/sets/{set_id}/sentences",
                               params={**params, "page": page, "page_size": 1000}).json()
            if not chunk["items"]:
                return ids, chunk["total"]
            ids.extend(item["id"] for item in chunk["items"])
            page += 1

    # filter contract
    corpus = store.load_corpus()
    target = max(all_sets, key=lambda s: s.metrics.train_count)
    got_ids, got_total = fetch_all(target.set_id, chrf_max=0.7)
    expected_ids = [
        mid for mid in target.effective_members()
        if corpus.get(mid).origin == "log" or corpus.get(mid).chrf <= 0.7
    ]
    assert got_ids == expected_ids
    assert got_total == len(expected_ids)

    # edit contract: stale rejected, remove applied, journal written
    detail = client.get(f"/api/sets/{target.set_id}").json()
    victim = target.effective_members()[0]
    stale = client.post(f"/api/sets/{target.set_id}/edits",
                        json={"op": "remove", "ids": [victim], "version": detail["version"] + 7})
    assert stale.status_code == 409
    good = client.post(f"/api/sets/{target.set_id}/edits",
                       json={"op": "remove", "ids": [victim], "version": detail["version"]})
    assert good.status_code == 200
    new_total = good.json()["metrics"]["train_count"] + good.json()["metrics"]["log_count"]
    assert new_total == detail["train_count"] + detail["log_count"] - 1
    journal = (store.root / "journal.jsonl").read_text("utf-8").splitlines()
    assert len(journal) == 1

    # export contract: rows equal the filtered listing, minus the removed one
    out = client.post(f"/api/sets/{target.set_id}/export",
                      json={"filters": {"chrf_max": 0.7}})
    rows = [json.loads(ln) for ln in out.text.splitlines()]
    after_ids, after_total = fetch_all(target.set_id, chrf_max=0.7)
    assert [r["id"] for r in rows] == after_ids
    assert int(out.headers["x-row-count"]) == after_total
    print(f"    (pipeline {elapsed:.1f}s, {len(all_sets)} sets)")
