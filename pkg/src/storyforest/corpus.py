"""Document ingestion, validation, filtering, and time slicing.

Input corpora are JSONL files, one document per line:

    {"id": str, "title": str, "body": str, "timestamp": int, "source": str?}

Timestamps are UTC seconds. Everything downstream works on streams of
:class:`Document` grouped into :class:`TimeSlice` buckets of a fixed period.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Document:
    """One news article."""

    id: str
    title: str
    body: str
    timestamp: int  # UTC seconds, > 0
    source: str | None = None


@dataclass
class TimeSlice:
    """All documents whose timestamps fall in [start, end)."""

    index: int
    start: int
    end: int
    documents: list[Document] = field(default_factory=list)


def _parse_line(raw: str, lineno: int) -> Document | None:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        log.warning("line %d: invalid JSON (%s); skipped", lineno, exc.msg)
        return None
    if not isinstance(obj, dict):
        log.warning("line %d: expected a JSON object; skipped", lineno)
        return None
    doc_id = obj.get("id")
    title = obj.get("title")
    body = obj.get("body")
    ts = obj.get("timestamp")
    source = obj.get("source")
    if not isinstance(doc_id, str) or not doc_id:
        log.warning("line %d: missing or empty id; skipped", lineno)
        return None
    if not isinstance(title, str) or not isinstance(body, str):
        log.warning("line %d: title/body must be strings; skipped", lineno)
        return None
    # bool is an int subclass; reject it explicitly
    if not isinstance(ts, int) or isinstance(ts, bool) or ts <= 0:
        log.warning("line %d: timestamp must be a positive integer; skipped", lineno)
        return None
    if source is not None and not isinstance(source, str):
        log.warning("line %d: source must be a string when present; skipped", lineno)
        return None
    return Document(id=doc_id, title=title, body=body, timestamp=ts, source=source)


def load_jsonl(path) -> Iterator[Document]:
    """Yield documents from a JSONL file in file order.

    Malformed lines are logged with their line number and skipped; an
    unreadable file raises OSError.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            doc = _parse_line(raw, lineno)
            if doc is not None:
                yield doc


def filter_documents(docs: Iterable[Document], min_len: int) -> Iterator[Document]:
    """Drop documents whose body is shorter than min_len characters.

    Length is the Unicode scalar count of the body, not bytes.
    """
    if min_len < 0:
        raise ValueError("min_len must be >= 0")
    for doc in docs:
        if len(doc.body) >= min_len:
            yield doc


def dedupe_documents(docs: Iterable[Document]) -> Iterator[Document]:
    """Resolve duplicate ids: the last occurrence wins, with a warning.

    Stream position of the first occurrence is kept so ordering stays stable.
    """
    seen: dict[str, Document] = {}
    for doc in docs:
        if doc.id in seen:
            log.warning("duplicate document id %r; keeping the later occurrence", doc.id)
        seen[doc.id] = doc
    yield from seen.values()


def slice_by_time(
    docs: Iterable[Document],
    period: int,
    origin: int | None = None,
) -> Iterator[TimeSlice]:
    """Bucket a document stream into consecutive fixed-period slices.

    Slices are aligned to `origin` (default: the earliest timestamp in the
    stream). Empty slices between occupied ones are emitted so downstream
    per-slice state still advances. Documents inside a slice are ordered by
    (timestamp, arrival order).
    """
    if period <= 0:
        raise ValueError("period must be > 0")
    pool = list(docs)
    if not pool:
        return
    start0 = min(d.timestamp for d in pool) if origin is None else origin
    if any(d.timestamp < start0 for d in pool):
        raise ValueError("origin is later than the earliest document timestamp")
    buckets: dict[int, list[Document]] = {}
    for doc in pool:
        buckets.setdefault((doc.timestamp - start0) // period, []).append(doc)
    last = max(buckets)
    for idx in range(last + 1):
        members = sorted(buckets.get(idx, []), key=lambda d: d.timestamp)
        yield TimeSlice(
            index=idx,
            start=start0 + idx * period,
            end=start0 + (idx + 1) * period,
            documents=members,
        )
