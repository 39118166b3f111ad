"""Proximity-filtered BM25 retrieval over positional indexes.

A document is a candidate only if it holds every token of both predicate
phrases.  Candidates whose context-predicate match does not precede a query-predicate match
within ``window`` intervening tokens are dropped without scoring; survivors
are scored with BM25 against the statistics of the index they came from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from wscoverlap.index import CorpusStats, DocRecord, PositionalIndex, load
from wscoverlap.schema import OverlapQuery
from wscoverlap.text import Token

_SHIFT = np.int64(1 << 32)


@dataclass(frozen=True)
class ScoringParams:
    k1: float = 1.2
    b: float = 0.75
    idf_floor: float = 0.0
    unchecked: bool = False  # allow k1 outside [1.2, 2.0]

    def __post_init__(self):
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")
        if not self.unchecked and not 1.2 <= self.k1 <= 2.0:
            raise ValueError(f"k1={self.k1} outside [1.2, 2.0]; pass unchecked=True to override")
        if self.k1 < 0:
            raise ValueError("k1 must be non-negative")


@dataclass(frozen=True)
class ScoredMatch:
    doc_id: int
    corpus_name: str
    score: float
    pred_c_span: tuple[int, int]
    pred_q_span: tuple[int, int]
    stored_text: str

    def to_json(self) -> dict:
        return {
            "corpus": self.corpus_name,
            "doc_id": self.doc_id,
            "score": self.score,
            "text": self.stored_text,
            "pred_c_span": list(self.pred_c_span),
            "pred_q_span": list(self.pred_q_span),
        }


@dataclass(frozen=True)
class InstanceOverlap:
    instance_id: str
    max_score: float
    best_match: ScoredMatch | None
    match_count: int

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "max_score": self.max_score,
            "match_count": self.match_count,
            "best_match": self.best_match.to_json() if self.best_match else None,
        }


# ---------------------------------------------------------------------------
# single-document primitives


def _norms(doc) -> list[str]:
    if isinstance(doc, DocRecord):
        return doc.norms
    return [t.norm if isinstance(t, Token) else t for t in doc]


def phrase_positions(doc, phrase: Sequence[str]) -> list[tuple[int, int]]:
    """Every contiguous occurrence of ``phrase`` as inclusive (start, end)."""
    if not phrase:
        raise ValueError("phrase must be nonempty")
    toks = _norms(doc)
    m = len(phrase)
    phrase = list(phrase)
    return [(i, i + m - 1) for i in range(len(toks) - m + 1) if toks[i : i + m] == phrase]


def proximity_filter(doc, phrase_a, phrase_b, window: int = 10):
    """Closest ordered (a_span, b_span) pair with at most ``window`` tokens between, or None.

    Ties on the gap go to the earliest ``a`` match.
    """
    toks = _norms(doc)
    best = None
    for a in phrase_positions(toks, phrase_a):
        for b in phrase_positions(toks, phrase_b):
            if b[0] <= a[1]:
                continue
            gap = b[0] - a[1] - 1
            if gap <= window:
                key = (gap, a[0], b[0])
                if best is None or key < best[0]:
                    best = (key, a, b)
    return None if best is None else (best[1], best[2])


def idf(stats: CorpusStats, term: str, params: ScoringParams = ScoringParams()) -> float:
    n = stats.df(term)
    return max(math.log((stats.N - n + 0.5) / (n + 0.5)), params.idf_floor)


def _term_weight(idf_t, f, dl, avgdl, params):
    k1, b = params.k1, params.b
    return idf_t * (f * (k1 + 1)) / (f + k1 * (1 - b + b * dl / avgdl))


def bm25_score(query: OverlapQuery, doc, stats: CorpusStats, params: ScoringParams = ScoringParams()) -> float:
    toks = _norms(doc)
    counts: dict[str, int] = {}
    for t in toks:
        counts[t] = counts.get(t, 0) + 1
    score = 0.0
    for term in query.terms:
        f = counts.get(term, 0)
        if f:
            score += _term_weight(idf(stats, term, params), f, len(toks), stats.avgdl, params)
    return score


# ---------------------------------------------------------------------------
# index-level evaluation


def _occurrences(pl, docs: np.ndarray, shift: int) -> np.ndarray:
    """Sorted keys doc<<32 | (pos - shift) for occurrences of ``pl`` in ``docs``."""
    ent = np.searchsorted(pl.docs, docs)
    counts = pl.tfs[ent]
    total = int(counts.sum())
    starts = pl.offsets[ent]
    first = np.cumsum(counts) - counts
    idx = np.repeat(starts - first, counts) + np.arange(total)
    pos = pl.positions[idx] - shift
    keys = np.repeat(docs, counts) * _SHIFT + pos
    return keys[pos >= 0]


def _phrase_keys(index: PositionalIndex, phrase, docs) -> np.ndarray:
    keys = None
    for i, term in enumerate(phrase):
        k = _occurrences(index.postings(term), docs, i)
        keys = k if keys is None else np.intersect1d(keys, k, assume_unique=True)
    return keys


def candidate_docs(index: PositionalIndex, query: OverlapQuery) -> np.ndarray:
    docs = None
    for term in sorted(set(query.phrase_a) | set(query.phrase_b)):
        d = index.postings(term).docs
        docs = d if docs is None else np.intersect1d(docs, d, assume_unique=True)
        if docs.size == 0:
            break
    return docs


def evaluate(index: PositionalIndex, query: OverlapQuery, params: ScoringParams = ScoringParams()):
    """Filter and score every document of ``index``.

    Returns ``(docs, scores, a_starts, b_starts)`` for the passing documents,
    ordered by doc id.
    """
    empty = np.zeros(0, dtype=np.int64)
    cand = candidate_docs(index, query)
    if cand.size == 0:
        return empty, np.zeros(0), empty, empty
    la = len(query.phrase_a)
    a_keys = _phrase_keys(index, query.phrase_a, cand)
    b_keys = _phrase_keys(index, query.phrase_b, cand)
    if a_keys.size == 0 or b_keys.size == 0:
        return empty, np.zeros(0), empty, empty
    a_end = a_keys + (la - 1)
    j = np.searchsorted(a_end, b_keys, side="left") - 1
    ok = j >= 0
    j = np.where(ok, j, 0)
    same_doc = (a_end[j] // _SHIFT) == (b_keys // _SHIFT)
    gap = b_keys - a_end[j] - 1
    ok &= same_doc & (gap <= query.window)
    if not ok.any():
        return empty, np.zeros(0), empty, empty
    b_sel = b_keys[ok]
    a_sel = a_end[j[ok]] - (la - 1)
    gap = gap[ok]
    doc_ids = b_sel // _SHIFT
    order = np.lexsort((b_sel, a_sel, gap, doc_ids))
    doc_ids, a_sel, b_sel = doc_ids[order], a_sel[order], b_sel[order]
    first = np.ones(doc_ids.size, dtype=bool)
    first[1:] = doc_ids[1:] != doc_ids[:-1]
    docs = doc_ids[first]
    a_starts = a_sel[first] - docs * _SHIFT
    b_starts = b_sel[first] - docs * _SHIFT

    dl = index.doc_lengths[docs].astype(np.float64)
    scores = np.zeros(docs.size, dtype=np.float64)
    for term in query.terms:
        pl = index.postings(term)
        if len(pl) == 0:
            continue
        pos = np.searchsorted(pl.docs, docs)
        pos_c = np.minimum(pos, len(pl) - 1)
        hit = pl.docs[pos_c] == docs
        if not hit.any():
            continue
        f = np.where(hit, pl.tfs[pos_c], 0).astype(np.float64)
        with np.errstate(invalid="ignore", divide="ignore"):
            w = _term_weight(idf(index.stats, term, params), f, dl, index.avgdl, params)
        scores = scores + np.where(hit, w, 0.0)
    return docs, scores, a_starts, b_starts


def _resolve(indexes) -> list[PositionalIndex]:
    if not indexes:
        raise ValueError("at least one index is required")
    out = []
    for ix in indexes:
        if isinstance(ix, PositionalIndex):
            out.append(ix)
        elif isinstance(ix, (str, Path)) and Path(ix).is_dir():
            out.append(load(ix))
        else:
            raise LookupError(f"unknown index {ix!r}")
    return out


def _match(index, doc_id, score, a, b, query) -> ScoredMatch:
    rec = index.doc(int(doc_id))
    return ScoredMatch(
        int(doc_id), index.corpus_name, float(score),
        (int(a), int(a) + len(query.phrase_a) - 1),
        (int(b), int(b) + len(query.phrase_b) - 1),
        rec.stored_text,
    )


def _ranked(query, indexes, params, top_k):
    ranked = []
    count = 0
    for index in _resolve(indexes):
        docs, scores, a, b = evaluate(index, query, params)
        count += len(docs)
        order = np.lexsort((docs, -scores))
        if top_k is not None:
            order = order[:top_k]
        ranked += [((-float(scores[i]), index.corpus_name, int(docs[i])), index, scores[i], a[i], b[i])
                   for i in order]
    ranked.sort(key=lambda r: r[0])
    if top_k is not None:
        ranked = ranked[:top_k]
    matches = [_match(ix, key[2], score, a, b, query) for key, ix, score, a, b in ranked]
    return matches, count


def search(query: OverlapQuery, indexes, params: ScoringParams = ScoringParams(), top_k: int | None = 10) -> list[ScoredMatch]:
    """Ranked matches across ``indexes`` by (score desc, corpus asc, doc id asc)."""
    return _ranked(query, indexes, params, top_k)[0]


def instance_overlap(query: OverlapQuery, indexes, params: ScoringParams = ScoringParams()) -> InstanceOverlap:
    """Overlap score of one instance: the best passing document over all indexes."""
    matches, count = _ranked(query, indexes, params, 1)
    if count == 0:
        return InstanceOverlap(query.instance_id, 0.0, None, 0)
    return InstanceOverlap(query.instance_id, matches[0].score, matches[0], count)
