import math

import numpy as np
import pytest

from mtriage.topics import (
    Topic,
    TopicConfig,
    cluster,
    ctfidf,
    ctfidf_keywords,
    load_stopwords,
    name_topic,
    select_unfamiliar,
    tokenize,
)

from conftest import make_corpus, make_record


def corpus_with_fa(fa_by_id: dict[str, float]):
    records = []
    for rid, fa in fa_by_id.items():
        rec = make_record(rid, origin="log")
        rec.familiarity = fa
        records.append(rec)
    return make_corpus(records)


class TestSelectUnfamiliar:
    def test_lowest_k(self):
        corpus = corpus_with_fa({f"l-{i}": float(i) for i in range(10)})
        config = TopicConfig(sample_size=3)
        assert select_unfamiliar(corpus, config) == ["l-0", "l-1", "l-2"]

    def test_fewer_logs_than_sample(self):
        corpus = corpus_with_fa({"l-0": -1.0, "l-1": -2.0})
        config = TopicConfig(sample_size=50)
        assert sorted(select_unfamiliar(corpus, config)) == ["l-0", "l-1"]

    def test_ties_break_by_id(self):
        corpus = corpus_with_fa({"l-b": -5.0, "l-a": -5.0, "l-c": -5.0})
        config = TopicConfig(sample_size=2)
        assert select_unfamiliar(corpus, config) == ["l-a", "l-b"]

    def test_missing_familiarity(self):
        corpus = make_corpus([make_record("l-0", origin="log")])
        with pytest.raises(ValueError, match="familiarity"):
            select_unfamiliar(corpus, TopicConfig())


def _disk_blob(rng, center, radius, count):
    angles = rng.uniform(0, 2 * math.pi, size=count)
    radii = radius * np.sqrt(rng.uniform(0, 1, size=count))
    return np.column_stack([center[0] + radii * np.cos(angles),
                            center[1] + radii * np.sin(angles)])


def corpus_with_projections(points_by_id):
    records = []
    for rid, xy in points_by_id.items():
        rec = make_record(rid, origin="log")
        rec.projection = (float(xy[0]), float(xy[1]))
        rec.familiarity = -1.0
        records.append(rec)
    return make_corpus(records)


class TestCluster:
    def test_two_planted_blobs(self):
        rng = np.random.default_rng(0)
        pts = {}
        for i, xy in enumerate(_disk_blob(rng, (0, 0), 0.4, 100)):
            pts[f"l-a{i:03d}"] = xy
        for i, xy in enumerate(_disk_blob(rng, (20, 0), 0.4, 100)):
            pts[f"l-b{i:03d}"] = xy
        corpus = corpus_with_projections(pts)
        config = TopicConfig(cluster_radius=0.5, min_cluster_size=25)
        topics = cluster(sorted(pts), corpus, config)
        assert len(topics) == 2
        assert {len(t.member_ids) for t in topics} == {100}
        assert {m[:3] for m in topics[0].member_ids} in ({"l-a"}, {"l-b"})

    def test_uniform_scatter_no_cores(self):
        xs, ys = np.meshgrid(np.arange(8), np.arange(8))
        pts = {f"l-{i:02d}": (x, y) for i, (x, y) in enumerate(zip(xs.ravel(), ys.ravel()))}
        corpus = corpus_with_projections(pts)
        config = TopicConfig(cluster_radius=0.9, min_cluster_size=2)
        assert cluster(sorted(pts), corpus, config) == []

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        pts = {f"l-{i:03d}": xy for i, xy in enumerate(_disk_blob(rng, (0, 0), 1.0, 120))}
        corpus = corpus_with_projections(pts)
        config = TopicConfig(cluster_radius=0.3, min_cluster_size=10, rng_seed=4)
        first = [t.member_ids for t in cluster(sorted(pts), corpus, config)]
        second = [t.member_ids for t in cluster(sorted(pts), corpus, config)]
        assert first == second

    def test_topics_disjoint_and_size_ordered(self):
        rng = np.random.default_rng(2)
        pts = {}
        for b, (cx, count) in enumerate([(0, 80), (30, 50), (60, 30)]):
            for i, xy in enumerate(_disk_blob(rng, (cx, 0), 0.5, count)):
                pts[f"l-{b}{i:03d}"] = xy
        corpus = corpus_with_projections(pts)
        config = TopicConfig(cluster_radius=0.5, min_cluster_size=20)
        topics = cluster(sorted(pts), corpus, config)
        sizes = [len(t.member_ids) for t in topics]
        assert sizes == sorted(sizes, reverse=True)
        seen = set()
        for topic in topics:
            assert not seen.intersection(topic.member_ids)
            seen.update(topic.member_ids)

    def test_truncates_to_top_k(self):
        rng = np.random.default_rng(3)
        pts = {}
        for b in range(5):
            for i, xy in enumerate(_disk_blob(rng, (40 * b, 0), 0.4, 30)):
                pts[f"l-{b}{i:03d}"] = xy
        corpus = corpus_with_projections(pts)
        config = TopicConfig(cluster_radius=0.5, min_cluster_size=10, top_k_topics=3)
        topics = cluster(sorted(pts), corpus, config)
        assert len(topics) == 3
        assert [t.topic_id for t in topics] == [0, 1, 2]


class TestCtfidf:
    def test_hand_computed_two_class_example(self):
        stopwords = frozenset()
        results = ctfidf([["fever fever chills"], ["fever rent"]], stopwords, 10)
        c1 = dict(results[0])
        # A = 2.5, f(fever)=3, f(chills)=1
        assert c1["chills"] == pytest.approx(math.log(3.5), abs=1e-9)
        assert c1["fever"] == pytest.approx(2 * math.log(1 + 2.5 / 3), abs=1e-9)
        assert c1["chills"] > c1["fever"]
        assert results[0][0][0] == "chills"

    def test_independent_recomputation(self):
        docs = [["alpha beta beta gamma"], ["beta delta"], ["gamma gamma epsilon"]]
        stopwords = frozenset()
        results = ctfidf(docs, stopwords, 10)
        # independent recount with plain dicts
        class_tokens = [d[0].split() for d in docs]
        totals = {}
        for toks in class_tokens:
            for t in toks:
                totals[t] = totals.get(t, 0) + 1
        avg = sum(totals.values()) / len(class_tokens)
        for ci, toks in enumerate(class_tokens):
            counts = {}
            for t in toks:
                counts[t] = counts.get(t, 0) + 1
            got = dict(results[ci])
            for term, tf in counts.items():
                expected = tf * math.log(1 + avg / totals[term])
                assert got[term] == pytest.approx(expected, abs=1e-12)

    def test_exclusive_term_ranks_first(self):
        docs = [["shared shared unique"], ["shared shared other"]]
        results = ctfidf(docs, frozenset(), 10)
        assert results[0][0][0] == "unique"
        assert results[1][0][0] == "other"

    def test_stopwords_filtered(self):
        stopwords = load_stopwords()
        assert "the" in stopwords
        results = ctfidf([["the fever the chills"]], stopwords, 10)
        terms = [t for t, _ in results[0]]
        assert "the" not in terms

    def test_tie_break_lexicographic(self):
        results = ctfidf([["bb aa"], ["cc dd"]], frozenset(), 10)
        assert [t for t, _ in results[0]] == ["aa", "bb"]

    def test_tokenize_unicode_lowercase(self):
        assert tokenize("Dónde ESTÁ el baño?", frozenset()) == ["dónde", "está", "el", "baño"]

    def test_keywords_attached_to_topics(self):
        records = [make_record(f"l-{i}", origin="log", source=text) for i, text in
                   enumerate(["fever chills fever", "fever headache", "rent lease", "rent bills"])]
        corpus = make_corpus(records)
        topics = [Topic(0, ["l-0", "l-1"]), Topic(1, ["l-2", "l-3"])]
        ctfidf_keywords(topics, corpus, TopicConfig(keyword_count=3))
        assert topics[0].keywords[0][0] in ("fever", "chills", "headache")
        assert topics[1].keywords[0][0] in ("rent", "lease", "bills")
        for topic in topics:
            scores = [s for _, s in topic.keywords]
            assert scores == sorted(scores, reverse=True)


class TestNameTopic:
    def test_top_four_keywords(self):
        topic = Topic(0, [], keywords=[("haha", 9.0), ("lol", 8.0), ("so", 7.0),
                                       ("you", 6.0), ("funny", 5.0)])
        assert name_topic(topic) == "topic-haha_lol_so_you"

    def test_truncation_below_four(self):
        topic = Topic(0, [], keywords=[("fever", 2.0), ("chills", 1.0)])
        assert name_topic(topic) == "topic-fever_chills"

    def test_unnamed_fallback(self):
        assert name_topic(Topic(7, [])) == "topic-unnamed-7"
