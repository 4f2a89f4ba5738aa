"""
Keyword graph construction and community detection
==================================================

Builds the co-occurrence graph from per-document keyword sets, scores
edges by shortest-path betweenness, and splits the graph into topic
communities by removing the strongest bridges.
"""

from storyforest import build_graph, detect_communities, edge_betweenness
from storyforest.keyword_graph import graph_to_dot

# Two topics that share no vocabulary, plus one ambiguous document that
# bridges them. Edge thresholds: co-occurrence >= 3 with both conditional
# probabilities above 0.15.
docs = (
    [(f"quake{i}", {"quake", "rescue", "coast", "damage"}) for i in range(6)]
    + [(f"vote{i}", {"vote", "ballot", "recount", "senate"}) for i in range(6)]
    + [(f"mix{i}", {"quake", "vote"}) for i in range(3)]
)
graph = build_graph(docs, min_cooccur=3, min_cond_prob=0.15)
print("nodes:", sorted(graph.nodes))
print("edges:")
for (u, v), st in sorted(graph.edges.items()):
    print(f"  {u} -- {v}  cooccur={st.cooccur}  P({u}|{v})={st.p_i_given_j:.2f}")

# The quake-vote edge carries every shortest path between the two topics,
# so its betweenness dwarfs the in-topic edges.
bt = edge_betweenness(graph)
print("\nbetweenness, highest first:")
for edge, score in sorted(bt.items(), key=lambda kv: -kv[1])[:5]:
    print(f"  {edge}: {score:.1f}")

communities = detect_communities(graph, max_size=5, min_community_size=3)
print("\ncommunities:")
for comm in communities:
    print(f"  {comm.id}: {sorted(comm.keywords)}")

print("\nDOT for rendering:\n")
print(graph_to_dot(graph, communities))
