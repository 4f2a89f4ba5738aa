"""Keyword co-occurrence graph and betweenness-based community detection.

The splitting engine (`girvan_newman_split`) works on plain adjacency dicts
so the same machinery clusters keyword graphs in the first layer and document
graphs in the second. All iteration orders are sorted, making detection fully
deterministic; ties on betweenness are broken toward the lexicographically
smallest edge.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

Node = Hashable
Edge = tuple  # (u, v) with u < v
Adjacency = dict


@dataclass(frozen=True)
class EdgeStats:
    """Co-occurrence counts and conditional probabilities for one edge."""

    cooccur: int
    p_i_given_j: float  # cooccur / df(w_j)
    p_j_given_i: float  # cooccur / df(w_i)


@dataclass
class KeywordGraph:
    nodes: set[str]
    edges: dict[tuple[str, str], EdgeStats]

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {w: set() for w in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


@dataclass(frozen=True)
class Community:
    id: int
    keywords: frozenset[str]


def build_graph(
    slice_docs: Sequence[tuple[str, Iterable[str]]],
    min_cooccur: int = 3,
    min_cond_prob: float = 0.15,
) -> KeywordGraph:
    """Build the keyword co-occurrence graph for one time slice.

    `slice_docs` pairs each document id with its keyword set. An edge is kept
    only when the pair co-occurs in at least `min_cooccur` documents AND both
    conditional occurrence probabilities exceed `min_cond_prob`. Keywords that
    end up with no surviving edge remain as isolated nodes.
    """
    if min_cooccur < 1:
        raise ValueError("min_cooccur must be >= 1")
    if not 0.0 <= min_cond_prob <= 1.0:
        raise ValueError("min_cond_prob must be in [0, 1]")
    df: dict[str, int] = {}
    cooccur: dict[tuple[str, str], int] = {}
    nodes: set[str] = set()
    for _doc_id, kws in slice_docs:
        kwset = sorted(set(kws))
        nodes.update(kwset)
        for w in kwset:
            df[w] = df.get(w, 0) + 1
        for i, wi in enumerate(kwset):
            for wj in kwset[i + 1 :]:
                cooccur[(wi, wj)] = cooccur.get((wi, wj), 0) + 1
    edges = {}
    for (wi, wj), c in cooccur.items():
        if c < min_cooccur:
            continue
        p_j_given_i = c / df[wi]
        p_i_given_j = c / df[wj]
        if p_j_given_i > min_cond_prob and p_i_given_j > min_cond_prob:
            edges[(wi, wj)] = EdgeStats(cooccur=c, p_i_given_j=p_i_given_j, p_j_given_i=p_j_given_i)
    return KeywordGraph(nodes=nodes, edges=edges)


def _as_adjacency(g) -> Adjacency:
    if isinstance(g, KeywordGraph):
        return g.adjacency()
    return {u: set(vs) for u, vs in g.items()}


def _edge_key(u: Node, v: Node) -> Edge:
    return (u, v) if u < v else (v, u)


def edge_betweenness(g) -> dict[Edge, float]:
    """Betweenness score per edge: shortest paths through it, over all
    unordered node pairs, with equal-length alternatives credited 1/k each.

    Accepts a KeywordGraph or a plain adjacency dict. Disconnected graphs are
    handled per component (cross-component pairs have no paths). Brandes'
    accumulation, O(V*E) for unweighted graphs.
    """
    adj = _as_adjacency(g)
    scores: dict[Edge, float] = {}
    for u in adj:
        for v in adj[u]:
            scores.setdefault(_edge_key(u, v), 0.0)

    for s in sorted(adj):
        # BFS from s: path counts and predecessor DAG
        sigma = {s: 1.0}
        dist = {s: 0}
        preds: dict[Node, list[Node]] = {s: []}
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in sorted(adj[v]):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    sigma[w] = 0.0
                    preds[w] = []
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        # dependency accumulation in reverse BFS order
        delta = {v: 0.0 for v in order}
        for w in reversed(order):
            for v in preds[w]:
                credit = sigma[v] / sigma[w] * (1.0 + delta[w])
                scores[_edge_key(v, w)] += credit
                delta[v] += credit
    # each unordered pair was counted from both endpoints
    return {e: x / 2.0 for e, x in scores.items()}


def connected_components(adj: Adjacency) -> list[set]:
    """Connected components, ordered by their smallest node."""
    seen = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        seen.add(start)
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def girvan_newman_split(
    adj: Adjacency,
    max_size: int,
    bt_threshold_fn: Callable[[int], float],
) -> list[set]:
    """Split a graph by iterative removal of the max-betweenness edge.

    A component is split further only while it violates both stopping rules:
    its node count is >= max_size AND its maximum edge betweenness is >=
    bt_threshold_fn(component size). Betweenness is recomputed after every
    removal, within the affected component only (removals cannot change
    shortest paths elsewhere). Returns the final components, ordered by their
    smallest node.
    """
    if max_size < 2:
        raise ValueError("max_size must be >= 2")
    adj = _as_adjacency(adj)
    final: list[set] = []
    stack = [{u: adj[u] & comp for u in comp} for comp in connected_components(adj)]
    while stack:
        sub = stack.pop()
        if len(sub) < max_size:
            final.append(set(sub))
            continue
        bt = edge_betweenness(sub)
        if not bt or max(bt.values()) < bt_threshold_fn(len(sub)):
            final.append(set(sub))
            continue
        (u, v), _ = min(bt.items(), key=lambda kv: (-kv[1], kv[0]))
        sub[u].discard(v)
        sub[v].discard(u)
        parts = connected_components(sub)
        if len(parts) == 1:
            stack.append(sub)
        else:
            stack.extend({n: sub[n] & part for n in part} for part in parts)
    return sorted(final, key=min)


def detect_communities(
    g,
    max_size: int,
    bt_threshold_fn: Callable[[int], float] | None = None,
    min_community_size: int = 3,
) -> list[Community]:
    """Split the keyword graph into topic communities.

    Default betweenness stopping threshold is linear in the component size
    (beta = 1). Communities smaller than `min_community_size` are discarded:
    a topic carried by one or two keywords is noise at this granularity.
    """
    adj = _as_adjacency(g)
    if not adj:
        return []
    threshold = bt_threshold_fn or (lambda size: float(size))
    comps = girvan_newman_split(adj, max_size, threshold)
    out = []
    for comp in comps:
        if len(comp) < min_community_size:
            continue
        out.append(Community(id=len(out), keywords=frozenset(comp)))
    return out


def _dot_quote(s: str) -> str:
    return '"%s"' % str(s).replace("\\", "\\\\").replace('"', '\\"')


def graph_to_dot(g: KeywordGraph, communities: Sequence[Community] = ()) -> str:
    """Render the keyword graph as DOT, with communities as clusters."""
    lines = ["graph keywords {", "  node [shape=box];"]
    clustered = set()
    for comm in communities:
        lines.append("  subgraph cluster_%d {" % comm.id)
        lines.append('    label="community %d";' % comm.id)
        for w in sorted(comm.keywords):
            lines.append("    %s;" % _dot_quote(w))
            clustered.add(w)
        lines.append("  }")
    for w in sorted(g.nodes - clustered):
        lines.append("  %s;" % _dot_quote(w))
    for (u, v), st in sorted(g.edges.items()):
        lines.append('  %s -- %s [label="%d"];' % (_dot_quote(u), _dot_quote(v), st.cooccur))
    lines.append("}")
    return "\n".join(lines) + "\n"
