"""Tokenization, term statistics, keyword features, and keyword selection.

Keyword extraction is a scored selection over per-word structural features
(frequency, title membership, positions, sentence coverage, TextRank). The
scorer is pluggable: any callable mapping a :class:`KeywordFeatures` row to a
float works. The built-in :class:`LinearKeywordScorer` is a weighted sum of
saturated features with a configurable threshold.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import Document

# Small built-in English list; supply a corpus-appropriate list for real data.
DEFAULT_STOPWORDS = frozenset(
    """
    a an and are as at be but by for from has have he her his i if in into is
    it its me my no not of on or our she so that the their them they this to
    was we were what when where which who will with you your
    """.split()
)


def load_stopwords(path) -> frozenset[str]:
    """Read a stopword list, one word per line; blank lines ignored."""
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


class RegexTokenizer:
    """Unicode word-boundary tokenizer with terminal-punctuation sentences.

    Keeps every token (stopwords included); stopword filtering happens at
    feature level so token positions stay faithful to the text.
    """

    def __init__(self, sentence_breaks: str = ".!?。！？", lowercase: bool = True):
        self.lowercase = lowercase
        self._word_re = re.compile(r"\w+")
        self._sentence_re = re.compile("[%s]+" % re.escape(sentence_breaks))

    def words(self, text: str) -> list[str]:
        if self.lowercase:
            text = text.lower()
        return self._word_re.findall(text)

    def sentences(self, text: str) -> list[list[str]]:
        out = []
        for part in self._sentence_re.split(text):
            tokens = self.words(part)
            if tokens:
                out.append(tokens)
        return out


@dataclass
class TokenizedDocument:
    doc: Document
    title_tokens: list[str]
    body_tokens: list[str]  # always the concatenation of sentences
    sentences: list[list[str]]


def tokenize(doc: Document, tokenizer: RegexTokenizer | None = None) -> TokenizedDocument:
    """Segment a document; an empty body yields empty token lists."""
    tok = tokenizer or RegexTokenizer()
    sentences = tok.sentences(doc.body)
    return TokenizedDocument(
        doc=doc,
        title_tokens=tok.words(doc.title),
        body_tokens=[w for sent in sentences for w in sent],
        sentences=sentences,
    )


@dataclass
class TermStats:
    """Cumulative document frequencies over every document seen so far."""

    df: Counter = field(default_factory=Counter)
    doc_count: int = 0

    def idf(self, word: str) -> float:
        """Smoothed inverse document frequency; > 0 for any word."""
        return math.log((1 + self.doc_count) / (1 + self.df[word])) + 1.0


def compute_term_stats(tdocs: Sequence[TokenizedDocument], prior: TermStats | None = None) -> TermStats:
    """Fold a slice of documents into cumulative term statistics.

    A word counts toward df once per document, over title and body together.
    The prior is not mutated.
    """
    df = Counter(prior.df) if prior else Counter()
    count = prior.doc_count if prior else 0
    for tdoc in tdocs:
        for word in set(tdoc.body_tokens) | set(tdoc.title_tokens):
            df[word] += 1
        count += 1
    return TermStats(df=df, doc_count=count)


def textrank_scores(
    tdoc: TokenizedDocument,
    window: int = 5,
    damping: float = 0.85,
    iters: int = 30,
) -> dict[str, float]:
    """Score body words by TextRank over the co-occurrence graph.

    Two words co-occur when they appear within `window` token positions of
    each other. Scores sum to the number of graph nodes. Documents with fewer
    than two distinct words get a flat score of 1.0.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must be in (0, 1)")
    tokens = tdoc.body_tokens
    index: dict[str, int] = {}
    for w in tokens:
        if w not in index:
            index[w] = len(index)
    n = len(index)
    if n < 2:
        return {w: 1.0 for w in index}

    pairs = set()
    for i, w in enumerate(tokens):
        a = index[w]
        for j in range(i + 1, min(i + window, len(tokens))):
            b = index[tokens[j]]
            if a != b:
                pairs.add((a, b) if a < b else (b, a))
    src = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
    dst = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
    heads = np.concatenate([src, dst])
    tails = np.concatenate([dst, src])
    deg = np.bincount(heads, minlength=n).astype(np.float64)

    scores = np.ones(n)
    for _ in range(iters):
        contrib = scores[heads] / deg[heads]
        scores = (1.0 - damping) + damping * np.bincount(tails, weights=contrib, minlength=n)
    return {w: float(scores[i]) for w, i in index.items()}


@dataclass
class KeywordFeatures:
    """Per (document, word) feature row.

    Positional features are fractions of the body token count, hence in
    [0, 1]; words absent from the body (title-only) get zeros there.
    """

    word: str
    tfidf: float
    in_title: bool
    first_pos: float
    avg_pos: float
    span: float
    avg_gap: float
    sentence_coverage: float
    textrank: float
    is_entity_like: bool = False
    has_brackets: bool = False


_BRACKET_CHARS = set("<>()[]{}《》〈〉【】")


def compute_keyword_features(
    tdoc: TokenizedDocument,
    stats: TermStats,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
    textrank: dict[str, float] | None = None,
    entity_annotator: Callable[[str], bool] | None = None,
) -> list[KeywordFeatures]:
    """One feature row per distinct non-stopword body or title word.

    `textrank` may be precomputed (e.g. with non-default parameters);
    otherwise it is computed here with defaults.
    """
    if textrank is None:
        textrank = textrank_scores(tdoc)
    positions: dict[str, list[int]] = {}
    for i, w in enumerate(tdoc.body_tokens):
        positions.setdefault(w, []).append(i)
    title_set = set(tdoc.title_tokens)
    n_body = len(tdoc.body_tokens)
    n_sent = len(tdoc.sentences)
    sent_hits = Counter()
    for sent in tdoc.sentences:
        sent_hits.update(set(sent))

    rows = []
    for word in sorted((set(positions) | title_set) - stopwords):
        pos = positions.get(word, [])
        tf = len(pos) + tdoc.title_tokens.count(word)
        if pos and n_body > 0:
            first = pos[0] / n_body
            avg = sum(pos) / len(pos) / n_body
            span = (pos[-1] - pos[0]) / n_body
            gaps = [b - a for a, b in zip(pos, pos[1:])]
            avg_gap = (sum(gaps) / len(gaps) / n_body) if gaps else 0.0
        else:
            first = avg = span = avg_gap = 0.0
        rows.append(
            KeywordFeatures(
                word=word,
                tfidf=tf * stats.idf(word),
                in_title=word in title_set,
                first_pos=first,
                avg_pos=avg,
                span=span,
                avg_gap=avg_gap,
                sentence_coverage=(sent_hits[word] / n_sent) if n_sent else 0.0,
                textrank=textrank.get(word, 0.0),
                is_entity_like=entity_annotator(word) if entity_annotator else False,
                has_brackets=any(c in _BRACKET_CHARS for c in word),
            )
        )
    return rows


@dataclass
class LinearKeywordScorer:
    """Weighted sum of saturated features; the default keyword scorer.

    tfidf and textrank are unbounded, so they are clipped at their scale
    before weighting; every term then contributes in [0, weight].
    """

    w_tfidf: float = 0.30
    w_title: float = 0.25
    w_coverage: float = 0.20
    w_textrank: float = 0.15
    w_early: float = 0.10
    tfidf_scale: float = 12.0
    textrank_scale: float = 2.0

    def __call__(self, f: KeywordFeatures) -> float:
        return (
            self.w_tfidf * min(f.tfidf / self.tfidf_scale, 1.0)
            + self.w_title * f.in_title
            + self.w_coverage * f.sentence_coverage
            + self.w_textrank * min(f.textrank / self.textrank_scale, 1.0)
            + self.w_early * (1.0 - f.first_pos)
        )


def select_keywords(
    features: Iterable[KeywordFeatures],
    scorer: Callable[[KeywordFeatures], float] | None = None,
    max_k: int = 15,
    threshold: float = 0.30,
) -> list[str]:
    """Pick the document's keywords: score >= threshold, top max_k by score.

    Equal scores are broken lexicographically so selection is deterministic.
    """
    scorer = scorer or LinearKeywordScorer()
    scored = [(scorer(f), f.word) for f in features]
    passing = [(s, w) for s, w in scored if s >= threshold]
    passing.sort(key=lambda sw: (-sw[0], sw[1]))
    return [w for _, w in passing[:max_k]]
