"""Clustering metrics, structure-recovery scoring, and a synthetic corpus.

Homogeneity, completeness and V-measure follow the entropy definitions
(natural log). The synthetic generator plants stories with known event
membership and known tree edges, so end-to-end recovery can be scored
without a labeled corpus.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Sequence


@dataclass
class LabeledPartition:
    """Items with both a predicted cluster id and a true class id."""

    items: list[tuple[str, int, int]]  # (item id, predicted, true)

    def __post_init__(self):
        ids = [i for i, _, _ in self.items]
        if len(ids) != len(set(ids)):
            raise ValueError("item ids must be unique")


def _entropy(counts: Sequence[int]) -> float:
    total = sum(counts)
    return -sum(c / total * math.log(c / total) for c in counts if c)


def _conditional_entropy(pairs: list[tuple[int, int]]) -> float:
    """H(second | first) over observed label pairs."""
    total = len(pairs)
    by_first: dict[int, Counter] = {}
    for a, b in pairs:
        by_first.setdefault(a, Counter())[b] += 1
    h = 0.0
    for group in by_first.values():
        n = sum(group.values())
        h += n / total * _entropy(list(group.values()))
    return h


def homogeneity(p: LabeledPartition) -> float:
    """1 - H(class|cluster)/H(class); 1.0 when every cluster is pure."""
    if not p.items:
        raise ValueError("partition is empty")
    classes = Counter(t for _, _, t in p.items)
    h_class = _entropy(list(classes.values()))
    if h_class == 0.0:
        return 1.0
    h_cond = _conditional_entropy([(pred, true) for _, pred, true in p.items])
    return 1.0 - h_cond / h_class


def completeness(p: LabeledPartition) -> float:
    """Dual of homogeneity: swap the roles of class and cluster."""
    swapped = LabeledPartition([(i, t, c) for i, c, t in p.items])
    return homogeneity(swapped)


def v_measure(p: LabeledPartition) -> float:
    """Harmonic mean of homogeneity and completeness; 0 when both are 0."""
    h = homogeneity(p)
    c = completeness(p)
    if h + c == 0.0:
        return 0.0
    return 2.0 * h * c / (h + c)


@dataclass
class SynthSpec:
    """Shape of a planted corpus: stories of events of documents.

    Each event owns a keyword block; a child event inherits a fraction
    (`keyword_overlap`) of its parent's block and draws the rest fresh, so
    parent-child pairs stay closer than arbitrary pairs within a story.
    Titles mix fresh block words with one story-level word, which links
    events of a story without dominating similarity. Tree shape is random:
    each non-initial event picks its parent uniformly among earlier events
    of the same story.
    """

    num_stories: int = 5
    events_per_story: int = 4
    docs_per_event: int = 5
    event_vocab: int = 10  # keyword block size per event
    story_vocab: int = 3  # story-level words shared by all its documents
    noise_vocab: int = 60  # global noise vocabulary size
    keyword_overlap: float = 0.4  # fraction of the block inherited from parent
    noise_rate: float = 0.1  # noise draws per content token
    event_spacing: int = 17280  # seconds between parent and child events
    story_stagger: int = 10800  # seconds between story start times
    doc_spacing: int = 600  # seconds between documents inside an event
    start_time: int = 1_600_000_000
    seed: int = 42

    def __post_init__(self):
        for name in ("num_stories", "events_per_story", "docs_per_event", "event_vocab",
                     "story_vocab", "noise_vocab", "event_spacing", "story_stagger",
                     "doc_spacing", "start_time"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.keyword_overlap <= 1.0:
            raise ValueError("keyword_overlap must be in [0, 1]")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ValueError("noise_rate must be in [0, 1]")


def _sentences(tokens: list[str], width: int = 8) -> str:
    parts = [" ".join(tokens[i : i + width]) for i in range(0, len(tokens), width)]
    return ". ".join(parts) + "."


def generate_synthetic(spec: SynthSpec) -> tuple[list[str], dict]:
    """Produce JSONL lines and the planted ground truth.

    Deterministic for a given spec: same seed, same bytes. Ground truth maps
    every document to its event and lists the planted parent->child edges
    (parent None for each story's first event).
    """
    rng = random.Random(spec.seed)
    noise_words = [f"filler{i:03d}" for i in range(spec.noise_vocab)]

    lines: list[str] = []
    truth_events = []
    truth_edges = []
    doc_events: dict[str, int] = {}
    eid = 0
    for s in range(spec.num_stories):
        story_words = [f"s{s}common{i}" for i in range(spec.story_vocab)]
        story_start = spec.start_time + s * spec.story_stagger
        blocks: list[list[str]] = []
        times: list[int] = []
        first_eid = eid
        for k in range(spec.events_per_story):
            if k == 0:
                parent = None
                inherited: list[str] = []
                t = story_start
            else:
                parent = rng.randrange(k)
                n_inherit = round(spec.keyword_overlap * spec.event_vocab)
                inherited = sorted(rng.sample(blocks[parent], n_inherit)) if n_inherit else []
                # strictly after the parent, jittered so siblings never collide
                t = times[parent] + round(spec.event_spacing * (1.0 + 0.25 * rng.random()))
            fresh = [f"s{s}e{k}w{i}" for i in range(spec.event_vocab - len(inherited))]
            block = fresh + inherited
            blocks.append(block)
            times.append(t)
            title_words = fresh[: min(3, len(fresh))] or block[:3]
            title = " ".join(title_words + [story_words[0]])
            doc_ids = []
            for i in range(spec.docs_per_event):
                doc_id = f"s{s}e{k}d{i}"
                body_rest = block * 2 + [w for w in story_words for _ in range(4)]
                n_noise = round(spec.noise_rate * len(body_rest))
                body_rest = body_rest + [rng.choice(noise_words) for _ in range(n_noise)]
                rng.shuffle(body_rest)
                body = _sentences(block) + " " + _sentences(body_rest)
                record = {
                    "id": doc_id,
                    "title": title,
                    "body": body,
                    "timestamp": t + i * spec.doc_spacing,
                    "source": "synthetic",
                }
                lines.append(json.dumps(record, sort_keys=True))
                doc_ids.append(doc_id)
                doc_events[doc_id] = eid
            truth_events.append({"id": eid, "story": s, "docs": doc_ids, "timestamp": t})
            truth_edges.append([None if parent is None else first_eid + parent, eid])
            eid += 1
    truth = {
        "doc_events": doc_events,
        "events": truth_events,
        "edges": truth_edges,
        "num_stories": spec.num_stories,
    }
    return lines, truth


def _align_events(predicted: dict[int, set[str]], truth: dict[int, set[str]]) -> dict[int, int]:
    """Greedy maximum-document-overlap matching, predicted -> true event id."""
    candidates = []
    for pid, pdocs in predicted.items():
        for tid, tdocs in truth.items():
            ov = len(pdocs & tdocs)
            if ov:
                candidates.append((-ov, pid, tid))
    candidates.sort()
    used_p: set[int] = set()
    used_t: set[int] = set()
    mapping: dict[int, int] = {}
    for neg_ov, pid, tid in candidates:
        if pid in used_p or tid in used_t:
            continue
        mapping[pid] = tid
        used_p.add(pid)
        used_t.add(tid)
    return mapping


def score_structure(snapshot: dict, truth: dict) -> dict:
    """Compare a forest snapshot against planted trees.

    Events are aligned by greedy maximum document overlap; edges (with the
    virtual root as a shared endpoint) are then compared as sets. Predicted
    edges touching an unalignable event count as wrong. Also reports the
    V-measure of the document-to-event assignment, where documents missing
    from the prediction become singleton clusters.
    """
    pred_docs: dict[int, set[str]] = {}
    pred_edges = []
    for tree in snapshot["trees"]:
        for node in tree["nodes"]:
            pred_docs[node["id"]] = set(node["doc_ids"])
        for edge in tree["edges"]:
            pred_edges.append((edge["parent"], edge["child"]))
    true_docs = {e["id"]: set(e["docs"]) for e in truth["events"]}
    mapping = _align_events(pred_docs, true_docs)

    def map_end(eid, side: str):
        if eid is None:
            return "ROOT"
        return mapping.get(eid, f"unaligned:{side}:{eid}")

    mapped_pred = {(map_end(p, "p"), map_end(c, "c")) for p, c in pred_edges}
    true_set = {("ROOT" if p is None else p, c) for p, c in truth["edges"]}
    hits = len(mapped_pred & true_set)
    precision = hits / len(mapped_pred) if mapped_pred else 0.0
    recall = hits / len(true_set) if true_set else 0.0

    doc_to_pred: dict[str, int] = {}
    for pid, docs in pred_docs.items():
        for d in docs:
            doc_to_pred[d] = pid
    items = []
    next_singleton = -1
    for doc_id, true_event in sorted(truth["doc_events"].items()):
        pred = doc_to_pred.get(doc_id)
        if pred is None:
            pred = next_singleton
            next_singleton -= 1
        items.append((doc_id, pred, true_event))
    part = LabeledPartition(items)
    return {
        "edge_precision": precision,
        "edge_recall": recall,
        "event_v_measure": v_measure(part),
        "event_homogeneity": homogeneity(part),
        "event_completeness": completeness(part),
    }
