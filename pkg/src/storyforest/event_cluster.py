"""Two-layer document clustering: topic assignment, then event extraction.

Documents are assigned to the keyword community (topic) they are most similar
to; inside each topic a document graph is built from pairwise same-event
decisions and split with the same betweenness machinery as the keyword layer.
Each resulting component is one event.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

from .corpus import Document
from .keyword_graph import Community, girvan_newman_split
from .preprocess import DEFAULT_STOPWORDS, TermStats, TokenizedDocument

log = logging.getLogger(__name__)


@dataclass
class DocVector:
    """Sparse bag-of-words vector over body tokens."""

    tfidf: dict[str, float]
    tf: dict[str, float]


def cosine(a: dict, b: dict) -> float:
    """Cosine similarity of two sparse vectors; 0.0 when either is empty."""
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b[k] for k, w in a.items() if k in b)
    if dot == 0.0:
        return 0.0
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    return dot / (na * nb)


def doc_vector(tdoc: TokenizedDocument, stats: TermStats) -> DocVector:
    """Raw term counts and tf*idf weights for the document body.

    No normalization is stored; cosine normalizes at comparison time.
    """
    tf = Counter(tdoc.body_tokens)
    return DocVector(
        tfidf={w: c * stats.idf(w) for w, c in tf.items()},
        tf=dict(tf),
    )


@dataclass
class DocProfile:
    """Everything pairwise comparison needs about one document."""

    doc: Document
    vector: DocVector
    title_tf: dict[str, float]
    title_tfidf: dict[str, float]
    first_tf: dict[str, float]
    title_words: frozenset[str]  # stopwords removed, for title overlap checks


def prepare_doc(
    tdoc: TokenizedDocument,
    stats: TermStats,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
) -> DocProfile:
    title_tf = Counter(tdoc.title_tokens)
    first = Counter(tdoc.sentences[0]) if tdoc.sentences else Counter()
    return DocProfile(
        doc=tdoc.doc,
        vector=doc_vector(tdoc, stats),
        title_tf=dict(title_tf),
        title_tfidf={w: c * stats.idf(w) for w, c in title_tf.items()},
        first_tf=dict(first),
        title_words=frozenset(w for w in tdoc.title_tokens if w not in stopwords),
    )


@dataclass(frozen=True)
class DocPairFeatures:
    """Five similarity features for a document pair, each in [0, 1]."""

    cos_content_tfidf: float
    cos_content_tf: float
    cos_title_tfidf: float
    cos_title_tf: float
    first_sentence_sim: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (
            self.cos_content_tfidf,
            self.cos_content_tf,
            self.cos_title_tfidf,
            self.cos_title_tf,
            self.first_sentence_sim,
        )


def doc_pair_features(a: DocProfile, b: DocProfile) -> DocPairFeatures:
    """Symmetric pairwise features; an empty side yields 0 for that feature."""
    return DocPairFeatures(
        cos_content_tfidf=cosine(a.vector.tfidf, b.vector.tfidf),
        cos_content_tf=cosine(a.vector.tf, b.vector.tf),
        cos_title_tfidf=cosine(a.title_tfidf, b.title_tfidf),
        cos_title_tf=cosine(a.title_tf, b.title_tf),
        first_sentence_sim=cosine(a.first_tf, b.first_tf),
    )


@dataclass
class LinearPairDecider:
    """Thresholded weighted sum over the five pair features.

    Weight order: content tf*idf, content tf, title tf*idf, title tf,
    first-sentence similarity. Uniform weights with threshold 0.5 by default;
    an externally trained linear model can be loaded from JSON.
    """

    weights: tuple[float, float, float, float, float] = (0.2, 0.2, 0.2, 0.2, 0.2)
    bias: float = 0.0
    threshold: float = 0.5

    def score(self, f: DocPairFeatures) -> float:
        return sum(w * x for w, x in zip(self.weights, f.as_tuple())) + self.bias

    def __call__(self, f: DocPairFeatures) -> bool:
        return self.score(f) >= self.threshold

    @classmethod
    def from_json(cls, path) -> "LinearPairDecider":
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        weights = obj["weights"]
        if len(weights) != 5:
            raise ValueError("decider model must have exactly 5 weights")
        return cls(
            weights=tuple(float(w) for w in weights),
            bias=float(obj.get("bias", 0.0)),
            threshold=float(obj.get("threshold", 0.5)),
        )


def same_event(a: DocProfile, b: DocProfile, decider: Callable[[DocPairFeatures], bool] | None = None) -> bool:
    """Decide whether two documents report the same event. Symmetric."""
    decider = decider or LinearPairDecider()
    return bool(decider(doc_pair_features(a, b)))


def community_vector(community: Community, stats: TermStats) -> DocVector:
    """A keyword community rendered as a bag-of-words pseudo-document."""
    return DocVector(
        tfidf={w: stats.idf(w) for w in community.keywords},
        tf={w: 1.0 for w in community.keywords},
    )


def assign_to_topics(
    profiles: Sequence[DocProfile],
    communities: Sequence[Community],
    stats: TermStats,
    min_sim: float = 0.05,
) -> dict[int, list[DocProfile]]:
    """Assign each document to its most similar keyword community.

    Similarity is the cosine between the document's tf*idf vector and the
    community's bag-of-words vector. A document whose best similarity does not
    exceed `min_sim` is left unassigned and excluded from event clustering.
    Equal similarities go to the smaller community id.
    """
    if not 0.0 <= min_sim <= 1.0:
        raise ValueError("min_sim must be in [0, 1]")
    # inverted index: word -> [(community id, tfidf weight)]
    postings: dict[str, list[tuple[int, float]]] = {}
    norms: dict[int, float] = {}
    for comm in communities:
        vec = community_vector(comm, stats)
        norms[comm.id] = math.sqrt(sum(w * w for w in vec.tfidf.values()))
        for word, weight in vec.tfidf.items():
            postings.setdefault(word, []).append((comm.id, weight))

    assigned: dict[int, list[DocProfile]] = {c.id: [] for c in communities}
    dropped = 0
    for prof in profiles:
        dots: dict[int, float] = {}
        for word, weight in prof.vector.tfidf.items():
            for cid, cweight in postings.get(word, ()):
                dots[cid] = dots.get(cid, 0.0) + weight * cweight
        if not dots:
            dropped += 1
            continue
        dnorm = math.sqrt(sum(w * w for w in prof.vector.tfidf.values()))
        best_id, best_sim = None, 0.0
        for cid in sorted(dots):
            sim = dots[cid] / (dnorm * norms[cid]) if dnorm and norms[cid] else 0.0
            if sim > best_sim:
                best_id, best_sim = cid, sim
        if best_id is None or best_sim <= min_sim:
            dropped += 1
            continue
        assigned[best_id].append(prof)
    if dropped:
        log.info("%d documents matched no topic and were dropped", dropped)
    return assigned


@dataclass
class Event:
    """A cluster of documents about one real-world happening.

    The centroid is the concatenation of the member documents: term counts
    add up. tf*idf weights are fixed at creation time (idf of the slice the
    member arrived in) and add up on merge.
    """

    id: int
    documents: list[Document]
    keywords: frozenset[str]
    centroid: DocVector
    centroid_title_tf: dict[str, float]
    centroid_title_tfidf: dict[str, float]
    first_tf: dict[str, float]  # first sentence of the earliest document
    title_sets: list[frozenset[str]]
    timestamp: int

    def profile(self) -> DocProfile:
        """View the centroid as a pseudo-document for pairwise comparison."""
        return DocProfile(
            doc=self.documents[0],
            vector=self.centroid,
            title_tf=self.centroid_title_tf,
            title_tfidf=self.centroid_title_tfidf,
            first_tf=self.first_tf,
            title_words=frozenset().union(*self.title_sets) if self.title_sets else frozenset(),
        )


def make_event(event_id: int, members: Sequence[DocProfile], keywords: frozenset[str]) -> Event:
    """Build an event from member document profiles."""
    if not members:
        raise ValueError("an event needs at least one document")
    members = sorted(members, key=lambda p: (p.doc.timestamp, p.doc.id))
    tf: Counter = Counter()
    tfidf: Counter = Counter()
    title_tf: Counter = Counter()
    title_tfidf: Counter = Counter()
    for p in members:
        tf.update(p.vector.tf)
        tfidf.update(p.vector.tfidf)
        title_tf.update(p.title_tf)
        title_tfidf.update(p.title_tfidf)
    return Event(
        id=event_id,
        documents=[p.doc for p in members],
        keywords=keywords,
        centroid=DocVector(tfidf=dict(tfidf), tf=dict(tf)),
        centroid_title_tf=dict(title_tf),
        centroid_title_tfidf=dict(title_tfidf),
        first_tf=dict(members[0].first_tf),
        title_sets=[p.title_words for p in members],
        timestamp=min(p.doc.timestamp for p in members),
    )


def cluster_events(
    topic_docs: Sequence[DocProfile],
    community: Community,
    decider: Callable[[DocPairFeatures], bool] | None = None,
    max_size: int = 6,
    bt_threshold_fn: Callable[[int], float] | None = None,
    id_start: int = 0,
) -> list[Event]:
    """Split one topic's documents into events via the document graph.

    An edge joins every pair the decider marks as the same event; the graph
    is then split exactly like the keyword graph. Components become events
    (singletons included) carrying the topic's keyword set.
    """
    if not topic_docs:
        return []
    decider = decider or LinearPairDecider()
    by_id = {p.doc.id: p for p in topic_docs}
    adj: dict[str, set[str]] = {p.doc.id: set() for p in topic_docs}
    ordered = sorted(by_id)
    for i, di in enumerate(ordered):
        for dj in ordered[i + 1 :]:
            if same_event(by_id[di], by_id[dj], decider):
                adj[di].add(dj)
                adj[dj].add(di)
    threshold = bt_threshold_fn or (lambda size: float(size))
    components = girvan_newman_split(adj, max_size, threshold)
    events = []
    for comp in components:
        events.append(make_event(id_start + len(events), [by_id[d] for d in sorted(comp)], community.keywords))
    return events
