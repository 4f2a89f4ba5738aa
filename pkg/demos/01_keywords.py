"""
Keyword extraction from a single document
=========================================

Walks the preprocessing stages on two toy articles: tokenization,
cumulative term statistics, TextRank over the co-occurrence window,
per-word features, and the final scored keyword selection.
"""

from storyforest import (
    Document,
    LinearKeywordScorer,
    compute_keyword_features,
    compute_term_stats,
    select_keywords,
    textrank_scores,
    tokenize,
)

article = Document(
    id="a1",
    title="Quake strikes coastal region",
    body=(
        "A strong quake struck the coastal region early on Monday. "
        "The quake damaged homes across the region. "
        "Rescue teams reached the coastal towns within hours. "
        "Officials said the quake was the strongest in a decade."
    ),
    timestamp=1_700_000_000,
)
background = Document(
    id="a2",
    title="Markets steady after holiday",
    body="Stock markets were steady after the holiday. Trading volumes stayed low.",
    timestamp=1_700_000_100,
)

# Term statistics are cumulative over everything seen so far; here that is
# just our two documents.
tdocs = [tokenize(article), tokenize(background)]
stats = compute_term_stats(tdocs)
print("documents seen:", stats.doc_count)
print("idf('quake') = %.3f   idf('the') = %.3f" % (stats.idf("quake"), stats.idf("the")))

# TextRank rewards words that co-occur with many distinct words.
ranks = textrank_scores(tdocs[0])
top = sorted(ranks.items(), key=lambda kv: -kv[1])[:5]
print("\ntop TextRank words:", ", ".join("%s=%.2f" % kv for kv in top))

# One feature row per candidate word; the scorer folds them into one number.
rows = compute_keyword_features(tdocs[0], stats, textrank=ranks)
scorer = LinearKeywordScorer()
print("\n%-10s %7s %6s %9s %6s" % ("word", "tfidf", "title", "coverage", "score"))
for row in sorted(rows, key=lambda r: -scorer(r))[:8]:
    print("%-10s %7.2f %6s %9.2f %6.2f"
          % (row.word, row.tfidf, row.in_title, row.sentence_coverage, scorer(row)))

keywords = select_keywords(rows, scorer, max_k=8)
print("\nselected keywords:", keywords)
