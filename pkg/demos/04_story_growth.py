"""
Growing story trees online
==========================

Feeds three daily batches of events into a story forest and prints the
operation chosen for each event: merge into an existing node, extend a
node with a child, or insert directly under the root. Edges laid down in
earlier batches never move.
"""

from storyforest import Document, LinearPairDecider, StoryForest, grow
from storyforest.event_cluster import DocVector, Event
from storyforest.story_forest import ForestParams, tree_to_dot

DAY = 86400
T0 = 1_700_000_000


def event(eid, ts, counts, title):
    words = title.split()
    return Event(
        id=eid,
        documents=[Document(f"d{eid}", title, "body", ts)],
        keywords=frozenset({"storm", "flood", "coast"}),
        centroid=DocVector({w: float(c) for w, c in counts.items()},
                           {w: float(c) for w, c in counts.items()}),
        centroid_title_tf={w: 1.0 for w in words},
        centroid_title_tfidf={w: 1.0 for w in words},
        first_tf={f"lead{eid}": 1.0},
        title_sets=[frozenset(words)],
        timestamp=ts,
    )


batches = [
    [event(0, T0, {"storm": 8, "coast": 2}, "storm nears coast")],
    [
        event(1, T0 + 6 * 3600, {"storm": 5, "flood": 6}, "storm floods valley town"),
        event(2, T0 + 12 * 3600, {"storm": 6, "power": 5}, "storm cuts power"),
    ],
    [
        # near-duplicate of event 1: same counts, title, and lead sentence
        event(3, T0 + DAY, {"storm": 5, "flood": 6}, "storm floods valley town"),
        event(4, T0 + DAY + 3600, {"cheese": 9}, "cheese fair opens"),
    ],
]
batches[2][0].first_tf = {"lead1": 1.0}

forest = StoryForest()
decider = LinearPairDecider()
for day, events in enumerate(batches):
    changes = grow(forest, events, day, decider, ForestParams())
    print(f"day {day}:")
    for change in changes:
        print("  ", change)

print("\nfinal forest: %d trees" % len(forest.trees))
for tree in forest.trees:
    print(tree_to_dot(tree))
