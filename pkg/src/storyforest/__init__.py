"""storyforest: cluster streaming news into events and grow story trees online."""

from .config import ConfigError, RunConfig, load_config
from .corpus import Document, TimeSlice, filter_documents, load_jsonl, slice_by_time
from .event_cluster import (
    DocPairFeatures,
    DocVector,
    Event,
    LinearPairDecider,
    assign_to_topics,
    cluster_events,
    cosine,
    doc_pair_features,
    doc_vector,
    same_event,
)
from .evaluate import (
    LabeledPartition,
    SynthSpec,
    completeness,
    generate_synthetic,
    homogeneity,
    score_structure,
    v_measure,
)
from .keyword_graph import (
    Community,
    EdgeStats,
    KeywordGraph,
    build_graph,
    detect_communities,
    edge_betweenness,
    girvan_newman_split,
)
from .pipeline import Pipeline, PipelineState, canonical_json
from .preprocess import (
    KeywordFeatures,
    LinearKeywordScorer,
    RegexTokenizer,
    TermStats,
    TokenizedDocument,
    compute_keyword_features,
    compute_term_stats,
    select_keywords,
    textrank_scores,
    tokenize,
)
from .story_forest import (
    ForestParams,
    StoryForest,
    StoryTree,
    coherence,
    connection_strength,
    event_compatibility,
    find_story,
    forest_snapshot,
    grow,
    story_compatibility,
    time_penalty,
    title_overlap,
    update_tree,
)

__version__ = "0.1.0"
