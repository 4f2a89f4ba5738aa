"""
Two-layer document clustering into events
=========================================

First layer: assign each document to the keyword community it is most
similar to. Second layer: inside each topic, connect document pairs the
same-event decider accepts and split the resulting graph into events.
"""

from storyforest import (
    Document,
    assign_to_topics,
    cluster_events,
    compute_term_stats,
    doc_pair_features,
    tokenize,
)
from storyforest.event_cluster import prepare_doc
from storyforest.keyword_graph import Community

articles = [
    # one topic, two distinct happenings a day apart
    Document("q1", "Quake hits coast", "A quake hit the coast. Rescue started.", 1_700_000_000),
    Document("q2", "Quake hits coast", "A quake hit the coast. Rescue started quickly.", 1_700_000_200),
    Document("q3", "Rescue ends after quake", "Rescue work after the quake ended. Coast cleanup began.", 1_700_086_400),
    Document("q4", "Rescue ends after quake", "Rescue work after the quake ended. Coast cleanup began early.", 1_700_086_600),
    # unrelated document that matches no topic
    Document("x1", "Cooking tips", "Use fresh basil for the sauce.", 1_700_000_300),
]

tdocs = [tokenize(d) for d in articles]
stats = compute_term_stats(tdocs)
profiles = [prepare_doc(t, stats) for t in tdocs]

topic = Community(id=0, keywords=frozenset({"quake", "coast", "rescue", "cleanup"}))
assigned = assign_to_topics(profiles, [topic], stats, min_sim=0.05)
print("assigned to topic 0:", [p.doc.id for p in assigned[0]])
print("(the cooking article matches nothing and is dropped)")

# the decider sees five similarity features per pair
a, b = assigned[0][0], assigned[0][2]
print("\npair features q1 vs q3:", doc_pair_features(a, b))

events = cluster_events(assigned[0], topic, id_start=0)
print("\nevents:")
for ev in events:
    print(f"  event {ev.id}: docs={[d.id for d in ev.documents]} timestamp={ev.timestamp}")
