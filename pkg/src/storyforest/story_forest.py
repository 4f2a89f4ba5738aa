"""Online story forest: attach each new event by merge, extend, or insert.

A story tree is rooted at a virtual, contentless node; every event has
exactly one parent (another event, or the root). Placement of a new event
combines three signals: centroid compatibility, storyline coherence along the
root path, and an exponential time penalty that forbids attaching under a
newer event. Trees are never restructured: once an edge exists it stays.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .event_cluster import DocPairFeatures, Event, cosine, doc_pair_features

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0


@dataclass
class ForestParams:
    """Knobs for story identification and tree update."""

    compat_threshold: float = 0.15  # min keyword Jaccard to consider a tree
    title_n: int = 1  # shared title words needed between some doc pair
    strength_threshold: float = 0.25  # min connection strength to extend
    delta: float = 1.0 / SECONDS_PER_DAY  # time penalty decay, per second
    history: int = 30  # drop trees untouched for this many slices
    include_root_edge: bool = True  # root edge counts 1.0 in coherence
    merge_scan_cap: int = 64  # above this, merge-check the top node only


@dataclass
class StoryTree:
    id: int
    nodes: dict[int, Event] = field(default_factory=dict)
    parent: dict[int, int | None] = field(default_factory=dict)  # None = root
    edge_ops: dict[int, str] = field(default_factory=dict)
    keywords: set[str] = field(default_factory=set)
    created_slice: int = 0
    last_updated_slice: int = 0

    def path_to(self, event_id: int) -> list[Event]:
        """Events along the root-to-node storyline, root proxy excluded."""
        path = []
        cur: int | None = event_id
        while cur is not None:
            path.append(self.nodes[cur])
            cur = self.parent[cur]
        path.reverse()
        return path

    def add_event(self, ev: Event, parent_id: int | None, op: str) -> None:
        self.nodes[ev.id] = ev
        self.parent[ev.id] = parent_id
        self.edge_ops[ev.id] = op
        self.keywords |= ev.keywords


@dataclass
class StoryForest:
    trees: list[StoryTree] = field(default_factory=list)
    history_length: int = 30
    next_tree_id: int = 0


def jaccard(a: frozenset | set, b: frozenset | set) -> float:
    if not a and not b:
        return 0.0
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


def story_compatibility(tree: StoryTree, ev: Event) -> float:
    """Jaccard similarity between the tree's and the event's keyword sets."""
    return jaccard(tree.keywords, ev.keywords)


def title_overlap(tree: StoryTree, ev: Event, n: int = 1) -> bool:
    """True iff some document in the event and some document in the tree
    share at least n title words (title sets are stored stopword-free)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ev_sets = [s for s in ev.title_sets if s]
    if not ev_sets:
        return False
    tree_sets = [s for node in tree.nodes.values() for s in node.title_sets if s]
    if n == 1:
        # a single shared word always comes from one concrete doc pair
        tree_union = frozenset().union(*tree_sets) if tree_sets else frozenset()
        return any(s & tree_union for s in ev_sets)
    return any(len(a & b) >= n for a in ev_sets for b in tree_sets)


def find_story(
    forest: StoryForest,
    ev: Event,
    compat_threshold: float = 0.15,
    n: int = 1,
) -> StoryTree | None:
    """The most compatible tree passing both checks, or None.

    A tree qualifies when keyword compatibility exceeds the threshold and the
    title overlap test passes; among qualifiers the highest compatibility
    wins, ties going to the smallest tree id.
    """
    best: StoryTree | None = None
    best_compat = compat_threshold
    for tree in sorted(forest.trees, key=lambda t: t.id):
        compat = story_compatibility(tree, ev)
        if compat <= best_compat:
            continue
        if not title_overlap(tree, ev, n):
            continue
        best, best_compat = tree, compat
    return best


def event_compatibility(ei: Event, ej: Event) -> float:
    """Cosine of the term-count vectors of the two centroid documents."""
    return cosine(ei.centroid.tf, ej.centroid.tf)


def coherence(path: Sequence[Event], include_root_edge: bool = True) -> float:
    """Average consecutive compatibility along a storyline.

    The path starts at the virtual root, whose edge to the first event has
    compatibility 1.0 by convention (the root carries no content). With the
    convention disabled, the root edge is skipped and a single-event path is
    neutrally coherent (1.0).
    """
    if not path:
        raise ValueError("path must contain at least one event")
    pair_sum = sum(event_compatibility(a, b) for a, b in zip(path, path[1:]))
    if include_root_edge:
        return (1.0 + pair_sum) / len(path)
    if len(path) == 1:
        return 1.0
    return pair_sum / (len(path) - 1)


def time_penalty(ej: Event, ev: Event, delta: float = 1.0 / SECONDS_PER_DAY) -> float:
    """exp(delta * (t_j - t)) when the candidate parent is older, else 0."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    diff = ej.timestamp - ev.timestamp
    if diff < 0:
        return math.exp(delta * diff)
    return 0.0


def connection_strength(
    tree: StoryTree,
    ej: Event,
    ev: Event,
    delta: float = 1.0 / SECONDS_PER_DAY,
    include_root_edge: bool = True,
) -> float:
    """compatibility * coherence(root -> ej -> ev) * time penalty."""
    penalty = time_penalty(ej, ev, delta)
    if penalty == 0.0:
        return 0.0
    compat = event_compatibility(ej, ev)
    if compat == 0.0:
        return 0.0
    path = tree.path_to(ej.id)
    path.append(ev)
    return compat * coherence(path, include_root_edge) * penalty


def _merge_into(node: Event, ev: Event) -> None:
    """Absorb ev's documents into an existing node, keeping sums exact."""
    node.documents = sorted(node.documents + ev.documents, key=lambda d: (d.timestamp, d.id))
    for mine, theirs in (
        (node.centroid.tf, ev.centroid.tf),
        (node.centroid.tfidf, ev.centroid.tfidf),
        (node.centroid_title_tf, ev.centroid_title_tf),
        (node.centroid_title_tfidf, ev.centroid_title_tfidf),
    ):
        for w, x in theirs.items():
            mine[w] = mine.get(w, 0) + x
    node.title_sets = node.title_sets + ev.title_sets
    old_ts = node.timestamp
    node.timestamp = min(node.timestamp, ev.timestamp)
    if node.timestamp != old_ts:
        log.warning("merge lowered event %d timestamp; stream is not time-ordered", node.id)
    node.keywords = node.keywords | ev.keywords


def update_tree(
    tree: StoryTree,
    ev: Event,
    decider: Callable[[DocPairFeatures], bool],
    strength_threshold: float = 0.25,
    delta: float = 1.0 / SECONDS_PER_DAY,
    include_root_edge: bool = True,
    merge_scan_cap: int = 64,
) -> str:
    """Place one event in its tree; returns "merged", "extended" or "inserted".

    Merge wins when the decider says the event's centroid document and some
    node's centroid document report the same thing (most compatible passing
    node is chosen; above merge_scan_cap nodes only the single most compatible
    node is checked). Otherwise the event extends the node with the highest
    connection strength, if that strength reaches the threshold; otherwise it
    is inserted directly under the root.
    """
    by_compat = sorted(
        tree.nodes.values(),
        key=lambda node: (-event_compatibility(node, ev), node.timestamp, node.id),
    )
    candidates = by_compat[:1] if len(by_compat) > merge_scan_cap else by_compat
    ev_profile = ev.profile()
    for node in candidates:
        if decider(doc_pair_features(node.profile(), ev_profile)):
            _merge_into(node, ev)
            tree.keywords |= ev.keywords
            return "merged"

    best_id: int | None = None
    best = (-1.0, 0, 0)  # strength, then earliest timestamp, then smallest id
    for node in tree.nodes.values():
        strength = connection_strength(tree, node, ev, delta, include_root_edge)
        key = (strength, -node.timestamp, -node.id)
        if key > best:
            best, best_id = key, node.id
    # zero strength means the candidate is not strictly older; never extend there
    if best_id is not None and best[0] > 0.0 and best[0] >= strength_threshold:
        tree.add_event(ev, best_id, "extended")
        return "extended"
    tree.add_event(ev, None, "inserted")
    return "inserted"


def grow(
    forest: StoryForest,
    events: Sequence[Event],
    slice_index: int,
    decider: Callable[[DocPairFeatures], bool],
    params: ForestParams | None = None,
) -> list[dict]:
    """Process one slice's events and prune stale trees.

    Events are handled in ascending timestamp order so intra-slice causality
    can form. Existing parent->child edges are never removed or rewired.
    Returns a change log, one entry per event plus one per pruned tree.
    """
    params = params or ForestParams()
    changes = []
    for ev in sorted(events, key=lambda e: (e.timestamp, e.id)):
        tree = find_story(forest, ev, params.compat_threshold, params.title_n)
        if tree is None:
            tree = StoryTree(
                id=forest.next_tree_id,
                created_slice=slice_index,
                last_updated_slice=slice_index,
            )
            forest.next_tree_id += 1
            forest.trees.append(tree)
            tree.add_event(ev, None, "inserted")
            changes.append({"event": ev.id, "tree": tree.id, "op": "created", "parent": None})
            continue
        op = update_tree(
            tree,
            ev,
            decider,
            params.strength_threshold,
            params.delta,
            params.include_root_edge,
            params.merge_scan_cap,
        )
        tree.last_updated_slice = slice_index
        entry = {"event": ev.id, "tree": tree.id, "op": op}
        if op == "merged":
            doc_id = ev.documents[0].id
            entry["into"] = next(
                node.id for node in tree.nodes.values() if any(d.id == doc_id for d in node.documents)
            )
        else:
            entry["parent"] = tree.parent[ev.id]
        changes.append(entry)
    forest.history_length = params.history
    kept = []
    for tree in forest.trees:
        if tree.last_updated_slice < slice_index - params.history:
            changes.append({"tree": tree.id, "op": "pruned"})
        else:
            kept.append(tree)
    forest.trees = kept
    return changes


def validate_tree(tree: StoryTree) -> None:
    """Raise ValueError if structural invariants are broken.

    Checks: every node has exactly one parent edge; no cycles; timestamps
    are monotone along every root-to-leaf path; the tree keyword set is the
    exact union of member keyword sets.
    """
    if set(tree.parent) != set(tree.nodes):
        raise ValueError("parent map and node set disagree")
    for child, parent in tree.parent.items():
        if parent is not None:
            if parent not in tree.nodes:
                raise ValueError(f"edge to unknown parent {parent}")
            if tree.nodes[parent].timestamp >= tree.nodes[child].timestamp:
                raise ValueError(f"parent {parent} is not older than child {child}")
    for start in tree.nodes:
        seen = set()
        cur: int | None = start
        while cur is not None:
            if cur in seen:
                raise ValueError("cycle detected")
            seen.add(cur)
            cur = tree.parent[cur]
    union: set[str] = set()
    for node in tree.nodes.values():
        union |= node.keywords
    if union != set(tree.keywords):
        raise ValueError("tree keywords are not the union of member keyword sets")


# --- persistence -----------------------------------------------------------


def _doc_to_dict(doc) -> dict:
    return {
        "id": doc.id,
        "title": doc.title,
        "body": doc.body,
        "timestamp": doc.timestamp,
        "source": doc.source,
    }


def event_to_dict(ev: Event) -> dict:
    """Full event state, JSON-safe and loss-free."""
    return {
        "id": ev.id,
        "documents": [_doc_to_dict(d) for d in ev.documents],
        "keywords": sorted(ev.keywords),
        "centroid_tf": dict(sorted(ev.centroid.tf.items())),
        "centroid_tfidf": dict(sorted(ev.centroid.tfidf.items())),
        "title_tf": dict(sorted(ev.centroid_title_tf.items())),
        "title_tfidf": dict(sorted(ev.centroid_title_tfidf.items())),
        "first_tf": dict(sorted(ev.first_tf.items())),
        "title_sets": [sorted(s) for s in ev.title_sets],
        "timestamp": ev.timestamp,
    }


def event_from_dict(obj: dict) -> Event:
    from .corpus import Document
    from .event_cluster import DocVector

    return Event(
        id=obj["id"],
        documents=[Document(**d) for d in obj["documents"]],
        keywords=frozenset(obj["keywords"]),
        centroid=DocVector(tfidf=dict(obj["centroid_tfidf"]), tf=dict(obj["centroid_tf"])),
        centroid_title_tf=dict(obj["title_tf"]),
        centroid_title_tfidf=dict(obj["title_tfidf"]),
        first_tf=dict(obj["first_tf"]),
        title_sets=[frozenset(s) for s in obj["title_sets"]],
        timestamp=obj["timestamp"],
    )


def tree_snapshot(tree: StoryTree) -> dict:
    """The exported view of one tree: nodes, edges, edge provenance."""
    return {
        "id": tree.id,
        "created_slice": tree.created_slice,
        "last_updated_slice": tree.last_updated_slice,
        "keywords": sorted(tree.keywords),
        "nodes": [
            {
                "id": ev.id,
                "doc_ids": [d.id for d in ev.documents],
                "keywords": sorted(ev.keywords),
                "timestamp": ev.timestamp,
            }
            for ev in sorted(tree.nodes.values(), key=lambda e: e.id)
        ],
        "edges": [
            {"parent": tree.parent[child], "child": child, "op": tree.edge_ops[child]}
            for child in sorted(tree.parent)
        ],
    }


def forest_snapshot(forest: StoryForest) -> dict:
    return {
        "history_length": forest.history_length,
        "next_tree_id": forest.next_tree_id,
        "trees": [tree_snapshot(t) for t in sorted(forest.trees, key=lambda t: t.id)],
    }


def tree_state(tree: StoryTree) -> dict:
    state = tree_snapshot(tree)
    state["events"] = [event_to_dict(ev) for ev in sorted(tree.nodes.values(), key=lambda e: e.id)]
    return state


def forest_state(forest: StoryForest) -> dict:
    return {
        "history_length": forest.history_length,
        "next_tree_id": forest.next_tree_id,
        "trees": [tree_state(t) for t in sorted(forest.trees, key=lambda t: t.id)],
    }


def forest_from_state(obj: dict) -> StoryForest:
    forest = StoryForest(history_length=obj["history_length"], next_tree_id=obj["next_tree_id"])
    for tobj in obj["trees"]:
        tree = StoryTree(
            id=tobj["id"],
            created_slice=tobj["created_slice"],
            last_updated_slice=tobj["last_updated_slice"],
            keywords=set(tobj["keywords"]),
        )
        for eobj in tobj["events"]:
            tree.nodes[eobj["id"]] = event_from_dict(eobj)
        for edge in tobj["edges"]:
            tree.parent[edge["child"]] = edge["parent"]
            tree.edge_ops[edge["child"]] = edge["op"]
        forest.trees.append(tree)
    return forest


def _dot_quote(s: str) -> str:
    return '"%s"' % str(s).replace("\\", "\\\\").replace('"', '\\"')


def tree_to_dot(tree: StoryTree) -> str:
    """Render one story tree as DOT; node labels are earliest-document titles."""
    lines = [f"digraph story_{tree.id} {{", '  root [shape=point, label=""];']
    for ev in sorted(tree.nodes.values(), key=lambda e: e.id):
        title = ev.documents[0].title if ev.documents else str(ev.id)
        lines.append("  e%d [label=%s];" % (ev.id, _dot_quote(title)))
    for child in sorted(tree.parent):
        parent = tree.parent[child]
        src = "root" if parent is None else f"e{parent}"
        lines.append(f"  {src} -> e{child};")
    lines.append("}")
    return "\n".join(lines) + "\n"
