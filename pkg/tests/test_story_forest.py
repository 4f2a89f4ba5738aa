import math
import random

import pytest

from storyforest.corpus import Document
from storyforest.event_cluster import DocVector, Event, LinearPairDecider
from storyforest.pipeline import canonical_json
from storyforest.story_forest import (
    ForestParams,
    StoryForest,
    StoryTree,
    coherence,
    connection_strength,
    event_compatibility,
    find_story,
    forest_from_state,
    forest_snapshot,
    forest_state,
    grow,
    story_compatibility,
    time_penalty,
    title_overlap,
    tree_to_dot,
    update_tree,
    validate_tree,
)

DAY = 86400
DELTA = 1.0 / DAY


def ev(eid, ts, tf, keywords=("k1", "k2", "k3"), title_words=None, first=None):
    """Hand-built event with a one-document body stub.

    Default titles are five words sharing only "news", so pairwise title
    cosine is 0.2 and the title overlap check still passes.
    """
    tf = {w: float(c) for w, c in tf.items()}
    if title_words is None:
        title_words = tuple(f"t{eid}{c}" for c in "abcd") + ("news",)
    else:
        title_words = tuple(title_words)
    return Event(
        id=eid,
        documents=[
            Document(id=f"e{eid}d0", title=" ".join(title_words), body="stub", timestamp=ts)
        ],
        keywords=frozenset(keywords),
        centroid=DocVector(tfidf=dict(tf), tf=dict(tf)),
        centroid_title_tf={w: 1.0 for w in title_words},
        centroid_title_tfidf={w: 1.0 for w in title_words},
        first_tf=dict(first) if first else {f"uniq{eid}": 1.0},
        title_sets=[frozenset(title_words)],
        timestamp=ts,
    )


def tree_with(*events, parents=None):
    tree = StoryTree(id=0)
    parents = parents or {}
    for e in events:
        tree.add_event(e, parents.get(e.id), "inserted" if parents.get(e.id) is None else "extended")
    return tree


class TestStoryCompatibility:
    def test_identical_sets(self):
        tree = tree_with(ev(0, 100, {"a": 1}))
        assert story_compatibility(tree, ev(1, 200, {"a": 1})) == pytest.approx(1.0)

    def test_disjoint_sets(self):
        tree = tree_with(ev(0, 100, {"a": 1}, keywords=("x", "y")))
        assert story_compatibility(tree, ev(1, 200, {"a": 1}, keywords=("p", "q"))) == 0.0

    def test_half_overlap(self):
        tree = tree_with(ev(0, 100, {"a": 1}, keywords=("a", "b", "c")))
        assert story_compatibility(tree, ev(1, 200, {"a": 1}, keywords=("b", "c", "d"))) == pytest.approx(0.5)

    def test_both_empty(self):
        tree = tree_with(ev(0, 100, {"a": 1}, keywords=()))
        assert story_compatibility(tree, ev(1, 200, {"a": 1}, keywords=())) == 0.0


class TestTitleOverlap:
    def test_identical_titles(self):
        tree = tree_with(ev(0, 100, {"a": 1}, title_words=("election", "night")))
        assert title_overlap(tree, ev(1, 200, {"a": 1}, title_words=("election", "night")), 1)

    def test_single_shared_content_word(self):
        tree = tree_with(ev(0, 100, {"a": 1}, title_words=("election", "night")))
        assert title_overlap(tree, ev(1, 200, {"a": 1}, title_words=("election", "day")), 1)

    def test_no_shared_words(self):
        tree = tree_with(ev(0, 100, {"a": 1}, title_words=("storm",)))
        assert not title_overlap(tree, ev(1, 200, {"a": 1}, title_words=("match",)), 1)

    def test_stopword_only_titles_do_not_overlap(self):
        # title sets are built stopword-free upstream; empty sets never match
        a = ev(0, 100, {"a": 1})
        a.title_sets = [frozenset()]
        tree = tree_with(a)
        b = ev(1, 200, {"a": 1})
        b.title_sets = [frozenset()]
        assert not title_overlap(tree, b, 1)

    def test_n_two_requires_pair_from_same_doc(self):
        # two tree docs each share one word with the event; no single pair shares two
        a = ev(0, 100, {"a": 1}, title_words=("red", "fox"))
        a.title_sets = [frozenset({"red"}), frozenset({"fox"})]
        tree = tree_with(a)
        b = ev(1, 200, {"a": 1}, title_words=("red", "fox"))
        assert title_overlap(tree, b, 1)
        assert not title_overlap(tree, b, 2)


class TestFindStory:
    def test_empty_forest(self):
        assert find_story(StoryForest(), ev(0, 100, {"a": 1})) is None

    def test_single_qualifying_tree(self):
        tree = tree_with(ev(0, 100, {"a": 1}))
        forest = StoryForest(trees=[tree])
        assert find_story(forest, ev(1, 200, {"a": 1})) is tree

    def test_compatibility_without_title_overlap(self):
        tree = tree_with(ev(0, 100, {"a": 1}, title_words=("alpha",)))
        forest = StoryForest(trees=[tree])
        assert find_story(forest, ev(1, 200, {"a": 1}, title_words=("beta",))) is None

    def test_highest_compatibility_wins(self):
        t0 = tree_with(ev(0, 100, {"a": 1}, keywords=("a", "b", "c")))
        t1 = StoryTree(id=1)
        t1.add_event(ev(1, 100, {"a": 1}, keywords=("a", "b", "d")), None, "inserted")
        forest = StoryForest(trees=[t1, t0])
        got = find_story(forest, ev(2, 200, {"a": 1}, keywords=("a", "b", "c")))
        assert got is t0

    def test_equal_compatibility_ties_to_smaller_id(self):
        t5 = StoryTree(id=5)
        t5.add_event(ev(0, 100, {"a": 1}, keywords=("a", "b")), None, "inserted")
        t2 = StoryTree(id=2)
        t2.add_event(ev(1, 100, {"a": 1}, keywords=("a", "b")), None, "inserted")
        forest = StoryForest(trees=[t5, t2])  # list order deliberately wrong
        got = find_story(forest, ev(2, 200, {"a": 1}, keywords=("a", "b")))
        assert got is t2


class TestEquations:
    def test_event_compatibility_self(self):
        e = ev(0, 100, {"a": 2, "b": 1})
        assert event_compatibility(e, e) == pytest.approx(1.0)

    def test_event_compatibility_disjoint(self):
        assert event_compatibility(ev(0, 1, {"a": 1}), ev(1, 2, {"b": 1})) == 0.0

    def test_event_compatibility_dot_product(self):
        a = ev(0, 1, {"a": 2, "b": 1})
        b = ev(1, 2, {"a": 1, "b": 2})
        assert event_compatibility(a, b) == pytest.approx(0.8, abs=1e-12)

    def test_coherence_single_event(self):
        assert coherence([ev(0, 1, {"a": 1})]) == pytest.approx(1.0)

    def test_coherence_root_convention(self):
        a = ev(0, 1, {"x": 3, "y": 1})
        b = ev(1, 2, {"x": 1, "y": 3})
        assert event_compatibility(a, b) == pytest.approx(0.6, abs=1e-12)
        assert coherence([a, b]) == pytest.approx(0.8, abs=1e-12)

    def test_coherence_closed_form(self):
        # k equal links of compatibility c: (1 + k*c) / (k + 1)
        events = [ev(i, i + 1, {"x": 3, "y": 1} if i % 2 == 0 else {"x": 1, "y": 3}) for i in range(5)]
        k = len(events) - 1
        assert coherence(events) == pytest.approx((1 + k * 0.6) / (k + 1), abs=1e-9)

    def test_coherence_without_root_edge(self):
        a = ev(0, 1, {"x": 3, "y": 1})
        b = ev(1, 2, {"x": 1, "y": 3})
        assert coherence([a, b], include_root_edge=False) == pytest.approx(0.6, abs=1e-12)
        assert coherence([a], include_root_edge=False) == 1.0

    def test_time_penalty_zero_branch(self):
        base = ev(0, 5000, {"a": 1})
        same = ev(1, 5000, {"a": 1})
        later = ev(2, 6000, {"a": 1})
        assert time_penalty(base, same, DELTA) == 0.0
        assert time_penalty(later, base, DELTA) == 0.0

    def test_time_penalty_one_day(self):
        older = ev(0, 1000, {"a": 1})
        newer = ev(1, 1000 + DAY, {"a": 1})
        assert time_penalty(older, newer, DELTA) == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_connection_strength_zero_for_older_event(self):
        parent = ev(0, 2000, {"a": 1})
        tree = tree_with(parent)
        older = ev(1, 1000, {"a": 1})
        assert connection_strength(tree, parent, older, DELTA) == 0.0

    def test_connection_strength_absorbs_zero_factor(self):
        parent = ev(0, 1000, {"a": 1})
        tree = tree_with(parent)
        disjoint = ev(1, 2000, {"b": 1})
        assert connection_strength(tree, parent, disjoint, DELTA) == 0.0

    def test_connection_strength_matches_factorwise_product(self):
        a = ev(0, 1000, {"x": 2, "y": 1})
        b = ev(1, 1000 + DAY // 2, {"x": 1, "y": 2})
        tree = tree_with(a, b, parents={1: 0})
        newcomer = ev(2, 1000 + DAY, {"x": 1, "y": 1})
        expected = (
            event_compatibility(b, newcomer)
            * coherence([a, b, newcomer])
            * time_penalty(b, newcomer, DELTA)
        )
        got = connection_strength(tree, b, newcomer, DELTA)
        assert got == pytest.approx(expected, abs=1e-12)
        assert 0.0 < got < 1.0


def t(hours):
    return 1_000_000 + int(hours * 3600)


def story_one_events():
    """Seven hand-traced events; margins chosen so every decision is clear."""
    e1 = ev(1, t(0), {"a": 10})
    e2 = ev(2, t(6), {"a": 6, "b": 8})
    e3 = ev(3, t(12), {"a": 6, "c": 6})
    e4 = ev(4, t(18), {"a": 5, "c": 5, "e": 3})
    e5 = ev(5, t(20), {"a": 6, "b": 8},
            title_words=("t2a", "t2b", "t2c", "t2d", "news"), first={"uniq2": 1.0})
    e6 = ev(6, t(24), {"z": 10})
    e7 = ev(7, t(3), {"m": 4}, keywords=("m1", "m2", "m3"), title_words=("other", "story"))
    return e1, e2, e3, e4, e5, e6, e7


class TestUpdateTree:
    def decider(self):
        return LinearPairDecider()

    def test_duplicate_event_merges(self):
        e1, e2, *_ = story_one_events()
        tree = tree_with(e1, e2, parents={2: 1})
        dup = ev(9, t(20), {"a": 6, "b": 8},
                 title_words=("t2a", "t2b", "t2c", "t2d", "news"), first={"uniq2": 1.0})
        op = update_tree(tree, dup, self.decider())
        assert op == "merged"
        assert len(tree.nodes) == 2  # node count unchanged
        assert len(tree.nodes[2].documents) == 2
        assert tree.nodes[2].centroid.tf["a"] == pytest.approx(12.0)

    def test_strong_event_extends_under_argmax(self):
        e1, e2, e3, *_ = story_one_events()
        tree = tree_with(e1)
        assert update_tree(tree, e2, self.decider()) == "extended"
        assert tree.parent[2] == 1
        assert update_tree(tree, e3, self.decider()) == "extended"
        assert tree.parent[3] == 1  # branches under e1, not under newer e2

    def test_unrelated_event_inserts_under_root(self):
        e1, *_ = story_one_events()
        tree = tree_with(e1)
        stray = ev(8, t(30), {"z": 5})
        assert update_tree(tree, stray, self.decider()) == "inserted"
        assert tree.parent[8] is None

    def test_never_extends_under_non_older_node(self):
        e1 = ev(1, t(10), {"a": 1})
        tree = tree_with(e1)
        same_time = ev(2, t(10), {"a": 1}, first={"different": 1.0})
        op = update_tree(tree, same_time, lambda f: False, strength_threshold=0.0)
        assert op == "inserted"

    def test_equal_strength_tie_prefers_smaller_id(self):
        a = ev(1, t(0), {"p": 1.0}, first={"fa": 1})
        b = ev(2, t(0), {"p": 1.0}, first={"fb": 1})
        tree = tree_with(a, b)
        c = ev(3, t(24), {"p": 1.0}, first={"fc": 1})
        update_tree(tree, c, lambda f: False)
        assert tree.parent[3] == 1

    def test_merge_scan_cap_checks_top_node_only(self):
        # content points at node 1, title at node 2; the decider keys on titles
        a = ev(1, t(0), {"a": 9}, title_words=("ta",))
        b = ev(2, t(1), {"b": 1}, title_words=("tb",))
        newcomer = ev(3, t(2), {"a": 9}, title_words=("tb",))
        decider = lambda f: f.cos_title_tf > 0.99
        capped = tree_with(a, b)
        assert update_tree(capped, newcomer, decider, merge_scan_cap=1) != "merged"
        a2 = ev(1, t(0), {"a": 9}, title_words=("ta",))
        b2 = ev(2, t(1), {"b": 1}, title_words=("tb",))
        full = tree_with(a2, b2)
        newcomer2 = ev(3, t(2), {"a": 9}, title_words=("tb",))
        assert update_tree(full, newcomer2, decider, merge_scan_cap=64) == "merged"
        assert len(full.nodes[2].documents) == 2


class TestGrow:
    def params(self, **kw):
        return ForestParams(**kw)

    def test_empty_event_list_only_prunes(self):
        forest = StoryForest()
        grow(forest, [ev(0, t(0), {"a": 1})], 0, LinearPairDecider(), self.params(history=1))
        grow(forest, [], 1, LinearPairDecider(), self.params(history=1))
        assert len(forest.trees) == 1
        changes = grow(forest, [], 5, LinearPairDecider(), self.params(history=1))
        assert forest.trees == []
        assert changes == [{"tree": 0, "op": "pruned"}]

    def test_single_event_bootstraps_tree(self):
        forest = StoryForest()
        changes = grow(forest, [ev(0, t(0), {"a": 1})], 0, LinearPairDecider(), self.params())
        assert len(forest.trees) == 1
        tree = forest.trees[0]
        assert tree.parent == {0: None}
        assert changes == [{"event": 0, "tree": 0, "op": "created", "parent": None}]
        validate_tree(tree)

    def test_seven_event_trace(self):
        e1, e2, e3, e4, e5, e6, e7 = story_one_events()
        forest = StoryForest()
        changes = grow(forest, [e1, e2, e3, e4, e5, e6, e7], 0, LinearPairDecider(), self.params())
        by_event = {c["event"]: c for c in changes}
        assert by_event[1]["op"] == "created"
        assert by_event[7]["op"] == "created"  # disjoint story seeds its own tree
        assert by_event[2]["op"] == "extended" and by_event[2]["parent"] == 1
        assert by_event[3]["op"] == "extended" and by_event[3]["parent"] == 1
        assert by_event[4]["op"] == "extended" and by_event[4]["parent"] == 3
        assert by_event[5]["op"] == "merged" and by_event[5]["into"] == 2
        assert by_event[6]["op"] == "inserted" and by_event[6]["parent"] is None
        assert len(forest.trees) == 2
        main = next(tr for tr in forest.trees if 1 in tr.nodes)
        assert set(main.nodes) == {1, 2, 3, 4, 6}
        assert main.parent == {1: None, 2: 1, 3: 1, 4: 3, 6: None}
        for tree in forest.trees:
            validate_tree(tree)

    def test_events_processed_in_timestamp_order(self):
        e1, e2, *_ = story_one_events()
        forest = StoryForest()
        grow(forest, [e2, e1], 0, LinearPairDecider(), self.params())  # reversed input
        tree = forest.trees[0]
        assert tree.parent[2] == 1  # e1 placed first, e2 extends it

    def test_keywords_stay_union_of_members(self):
        e1 = ev(1, t(0), {"a": 1}, keywords=("k1", "k2"))
        e2 = ev(2, t(5), {"a": 1}, keywords=("k2", "k3"))
        forest = StoryForest()
        grow(forest, [e1, e2], 0, LinearPairDecider(), self.params())
        assert set(forest.trees[0].keywords) == {"k1", "k2", "k3"}
        validate_tree(forest.trees[0])


def random_event(rng, eid, ts, kw_pool, title_pool):
    vocab = ["w%d" % i for i in range(8)]
    tf = {w: float(rng.randint(1, 5)) for w in rng.sample(vocab, rng.randint(1, 4))}
    title = tuple(rng.sample(title_pool, rng.randint(1, 2)))
    return ev(
        eid,
        ts,
        tf,
        keywords=tuple(rng.sample(kw_pool, rng.randint(2, 4))),
        title_words=title,
        first={rng.choice(vocab): 1.0},
    )


def fuzz_stream(seed):
    rng = random.Random(seed)
    kw_pool = ["k%d" % i for i in range(8)]
    title_pool = ["t%d" % i for i in range(6)]
    eid, ts = 0, 10_000
    slices = []
    for _ in range(rng.randint(1, 4)):
        events = []
        for _ in range(rng.randint(0, 6)):
            ts += rng.randint(1, 40_000)
            events.append(random_event(rng, eid, ts, kw_pool, title_pool))
            eid += 1
        slices.append(events)
    return slices


class TestInvariantsFuzzed:
    def test_compatibilities_symmetric_and_bounded(self):
        rng = random.Random(3)
        kw_pool = ["k%d" % i for i in range(8)]
        title_pool = ["t%d" % i for i in range(6)]
        for i in range(50):
            a = random_event(rng, 0, 100, kw_pool, title_pool)
            b = random_event(rng, 1, 200, kw_pool, title_pool)
            c1 = event_compatibility(a, b)
            assert c1 == pytest.approx(event_compatibility(b, a), abs=1e-12)
            assert 0.0 <= c1 <= 1.0 + 1e-12
            ta, tb = tree_with(a), tree_with(b)
            s1 = story_compatibility(ta, b)
            assert s1 == pytest.approx(story_compatibility(tb, a), abs=1e-12)
            assert 0.0 <= s1 <= 1.0

    def test_tree_invariants_and_online_stability(self):
        decider = LinearPairDecider()
        for seed in range(200):
            forest = StoryForest()
            edge_history = []
            for idx, events in enumerate(fuzz_stream(seed)):
                grow(forest, events, idx, decider, ForestParams(history=100))
                for tree in forest.trees:
                    validate_tree(tree)
                edges = {
                    (tree.id, child, parent)
                    for tree in forest.trees
                    for child, parent in tree.parent.items()
                }
                edge_history.append(edges)
            final = edge_history[-1]
            for earlier in edge_history:
                assert earlier <= final, seed

    def test_determinism_bit_identical_state(self):
        def run():
            forest = StoryForest()
            for idx, events in enumerate(fuzz_stream(77)):
                grow(forest, events, idx, LinearPairDecider(), ForestParams())
            return canonical_json(forest_state(forest))

        assert run() == run()


class TestPersistence:
    def test_state_round_trip_preserves_snapshot(self):
        forest = StoryForest()
        for idx, events in enumerate(fuzz_stream(5)):
            grow(forest, events, idx, LinearPairDecider(), ForestParams())
        state = forest_state(forest)
        restored = forest_from_state(state)
        assert canonical_json(forest_snapshot(restored)) == canonical_json(forest_snapshot(forest))
        assert canonical_json(forest_state(restored)) == canonical_json(state)

    def test_resumed_growth_matches_uninterrupted(self):
        # grow keeps (and may mutate) the caller's Event objects, so each run
        # gets freshly generated events
        def make_slices():
            return [fuzz_stream(13)[0], fuzz_stream(14)[0], fuzz_stream(15)[0]]

        full = StoryForest()
        for idx, events in enumerate(make_slices()):
            grow(full, events, idx, LinearPairDecider(), ForestParams())
        fresh = make_slices()
        half = StoryForest()
        grow(half, fresh[0], 0, LinearPairDecider(), ForestParams())
        resumed = forest_from_state(forest_state(half))
        for idx, events in enumerate(fresh[1:], start=1):
            grow(resumed, events, idx, LinearPairDecider(), ForestParams())
        assert canonical_json(forest_state(resumed)) == canonical_json(forest_state(full))

    def test_snapshot_contains_edge_provenance(self):
        e1, e2, e3, e4, e5, e6, e7 = story_one_events()
        forest = StoryForest()
        grow(forest, [e1, e2, e3, e4, e5, e6, e7], 0, LinearPairDecider(), ForestParams())
        snap = forest_snapshot(forest)
        main = next(tr for tr in snap["trees"] if any(n["id"] == 1 for n in tr["nodes"]))
        ops = {e["child"]: e["op"] for e in main["edges"]}
        assert ops == {1: "inserted", 2: "extended", 3: "extended", 4: "extended", 6: "inserted"}
        merged_node = next(n for n in main["nodes"] if n["id"] == 2)
        assert sorted(merged_node["doc_ids"]) == ["e2d0", "e5d0"]

    def test_dot_export_labels_earliest_title(self):
        e1, e2, *_ = story_one_events()
        tree = tree_with(e1, e2, parents={2: 1})
        dot = tree_to_dot(tree)
        assert dot.startswith("digraph story_0 {")
        assert "t1a t1b t1c t1d news" in dot
        assert "e1 -> e2;" in dot
        assert "root -> e1;" in dot
