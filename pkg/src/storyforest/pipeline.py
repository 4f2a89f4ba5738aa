"""Slice-by-slice engine wiring the full pipeline together.

Per time slice: tokenize, fold term statistics, extract keywords, build the
keyword graph, detect topic communities, assign documents, cluster events
inside each topic, and grow the story forest. All cross-slice state (term
statistics, forest, counters, slice origin) lives in PipelineState so a run
can be snapshotted after any slice and resumed with identical results.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .config import RunConfig
from .corpus import Document, TimeSlice, dedupe_documents, filter_documents, slice_by_time
from .event_cluster import (
    Event,
    LinearPairDecider,
    assign_to_topics,
    cluster_events,
    prepare_doc,
)
from .keyword_graph import Community, KeywordGraph, build_graph, detect_communities
from .preprocess import (
    DEFAULT_STOPWORDS,
    LinearKeywordScorer,
    RegexTokenizer,
    TermStats,
    compute_keyword_features,
    compute_term_stats,
    load_stopwords,
    select_keywords,
    textrank_scores,
    tokenize,
)
from .story_forest import ForestParams, StoryForest, forest_from_state, forest_state, grow

log = logging.getLogger(__name__)

STATE_VERSION = 1


def canonical_json(obj) -> str:
    """Stable byte-for-byte JSON: sorted keys, fixed separators, newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


@dataclass
class PipelineState:
    forest: StoryForest = field(default_factory=StoryForest)
    stats: TermStats = field(default_factory=TermStats)
    next_event_id: int = 0
    next_slice: int = 0
    origin: int | None = None  # slice alignment anchor, fixed at first run


@dataclass
class SliceResult:
    slice: TimeSlice
    graph: KeywordGraph
    communities: list[Community]
    events: list[Event]
    changes: list[dict]


def state_to_dict(state: PipelineState) -> dict:
    return {
        "version": STATE_VERSION,
        "next_event_id": state.next_event_id,
        "next_slice": state.next_slice,
        "origin": state.origin,
        "stats": {
            "doc_count": state.stats.doc_count,
            "df": dict(sorted(state.stats.df.items())),
        },
        "forest": forest_state(state.forest),
    }


def state_from_dict(obj: dict) -> PipelineState:
    if obj.get("version") != STATE_VERSION:
        raise ValueError(f"unsupported state version {obj.get('version')!r}")
    from collections import Counter

    return PipelineState(
        forest=forest_from_state(obj["forest"]),
        stats=TermStats(df=Counter(obj["stats"]["df"]), doc_count=obj["stats"]["doc_count"]),
        next_event_id=obj["next_event_id"],
        next_slice=obj["next_slice"],
        origin=obj["origin"],
    )


class Pipeline:
    """Deterministic end-to-end engine over a document stream."""

    def __init__(self, config: RunConfig, state: PipelineState | None = None):
        self.config = config
        self.state = state or PipelineState()
        self.tokenizer = RegexTokenizer()
        self.stopwords = load_stopwords(config.stopwords) if config.stopwords else DEFAULT_STOPWORDS
        self.scorer = LinearKeywordScorer(
            w_tfidf=config.w_tfidf,
            w_title=config.w_title,
            w_coverage=config.w_coverage,
            w_textrank=config.w_textrank,
            w_early=config.w_early,
            tfidf_scale=config.tfidf_scale,
            textrank_scale=config.textrank_scale,
        )
        if config.decider_model:
            self.decider = LinearPairDecider.from_json(config.decider_model)
        else:
            self.decider = LinearPairDecider(
                weights=tuple(config.decider_weights),
                bias=config.decider_bias,
                threshold=config.decider_threshold,
            )
        self.forest_params = ForestParams(
            compat_threshold=config.compat_threshold,
            title_n=config.title_n,
            strength_threshold=config.strength_threshold,
            delta=config.delta_per_day / 86400.0,
            history=config.history,
            include_root_edge=config.include_root_edge,
            merge_scan_cap=config.merge_scan_cap,
        )

    def slices(self, docs: Iterable[Document]) -> Iterator[TimeSlice]:
        """Clean, deduplicate, filter, and slice the raw stream."""
        cfg = self.config
        pool = list(filter_documents(dedupe_documents(docs), cfg.min_len))
        if not pool:
            return iter(())
        if self.state.origin is None:
            if cfg.slice_origin is not None:
                self.state.origin = cfg.slice_origin
            else:
                self.state.origin = min(d.timestamp for d in pool)
        return slice_by_time(pool, cfg.period_seconds, self.state.origin)

    def process_slice(self, tslice: TimeSlice) -> SliceResult:
        """Run one time slice through all five stages and grow the forest."""
        cfg = self.config
        state = self.state
        if tslice.index != state.next_slice:
            raise ValueError(f"expected slice {state.next_slice}, got {tslice.index}")

        tdocs = [tokenize(d, self.tokenizer) for d in tslice.documents]
        state.stats = compute_term_stats(tdocs, state.stats)

        keyword_sets = []
        profiles = []
        for tdoc in tdocs:
            ranks = textrank_scores(tdoc, cfg.window, cfg.damping, cfg.iters)
            feats = compute_keyword_features(tdoc, state.stats, self.stopwords, textrank=ranks)
            kws = select_keywords(feats, self.scorer, cfg.max_k, cfg.threshold)
            keyword_sets.append((tdoc.doc.id, set(kws)))
            profiles.append(prepare_doc(tdoc, state.stats, self.stopwords))

        graph = build_graph(keyword_sets, cfg.min_cooccur, cfg.min_cond_prob)
        communities = detect_communities(
            graph,
            cfg.max_community_size,
            lambda size: cfg.beta * size,
            cfg.min_community_size,
        )
        topics = assign_to_topics(profiles, communities, state.stats, cfg.min_sim)

        events: list[Event] = []
        for comm in communities:
            members = topics.get(comm.id, [])
            if not members:
                continue
            evs = cluster_events(
                members,
                comm,
                self.decider,
                cfg.doc_max_size,
                lambda size: cfg.doc_beta * size,
                id_start=state.next_event_id,
            )
            state.next_event_id += len(evs)
            events.extend(evs)

        changes = grow(state.forest, events, tslice.index, self.decider, self.forest_params)
        state.next_slice = tslice.index + 1
        return SliceResult(
            slice=tslice,
            graph=graph,
            communities=communities,
            events=events,
            changes=changes,
        )

    def run(self, docs: Iterable[Document]) -> Iterator[SliceResult]:
        """Process every slice not yet covered by the loaded state."""
        for tslice in self.slices(docs):
            if tslice.index < self.state.next_slice:
                continue  # already processed before the snapshot was taken
            yield self.process_slice(tslice)
