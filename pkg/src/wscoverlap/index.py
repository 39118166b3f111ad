"""Positional inverted index over corpus sentences.

One document is one sentence.  Postings are kept in their encoded form both
in memory and on disk, and are decoded per term on demand, so a loaded
index costs little more than its term dictionary and per-document arrays.

Encoded postings for a term are a varint stream laid out as::

    doc_gap[0..df)  tf[0..df)  pos_gap[0..sum(tf))

Doc gaps are relative to the previous document of the same term (the first
is absolute); position gaps restart at every entry.
"""

from __future__ import annotations

import array
from collections.abc import Mapping
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from wscoverlap import varint
from wscoverlap.errors import BuildError, FormatError
from wscoverlap.fsio import atomic_write_bytes, atomic_write_text
from wscoverlap.text import Sentence, tokenize

FORMAT_VERSION = 1

MANIFEST = "MANIFEST"
FILES = ("terms.txt", "terms.bin", "postings.bin", "docs.bin", "docs.txt", "docs.loc")


@dataclass(frozen=True)
class CorpusStats:
    N: int
    avgdl: float
    doc_count_per_term: Mapping[str, int]

    def df(self, term: str) -> int:
        return self.doc_count_per_term.get(term, 0)


@dataclass(frozen=True, eq=False)
class PostingList:
    term: str
    docs: np.ndarray
    tfs: np.ndarray
    offsets: np.ndarray  # entry i owns positions[offsets[i]:offsets[i+1]]
    positions: np.ndarray

    def __len__(self) -> int:
        return len(self.docs)

    @property
    def entries(self) -> list[tuple[int, list[int]]]:
        return [
            (int(d), self.positions[self.offsets[i] : self.offsets[i + 1]].tolist())
            for i, d in enumerate(self.docs)
        ]

    def positions_in(self, doc_id: int) -> np.ndarray:
        i = int(np.searchsorted(self.docs, doc_id))
        if i < len(self.docs) and self.docs[i] == doc_id:
            return self.positions[self.offsets[i] : self.offsets[i + 1]]
        return self.positions[:0]


@dataclass(frozen=True)
class DocRecord:
    doc_id: int
    source_ref: tuple[str, str]
    length: int
    stored_text: str

    @property
    def norms(self) -> list[str]:
        return [t.norm for t in tokenize(self.stored_text)]


class _DocFreqView(Mapping):
    def __init__(self, index: "PositionalIndex"):
        self._index = index

    def __getitem__(self, term):
        tid = self._index._term_ids.get(term)
        if tid is None:
            raise KeyError(term)
        return int(self._index._df[tid])

    def __iter__(self):
        return iter(self._index._terms)

    def __len__(self):
        return len(self._index._terms)


class PositionalIndex:
    """Immutable positional index; construct with :func:`build_index` or :func:`load`."""

    def __init__(self, corpus_name, terms, df, postings_sizes, postings, doc_lengths,
                 text_sizes, text_blob, loc_sizes, loc_blob):
        self.corpus_name = corpus_name
        self._terms: list[str] = terms
        self._term_ids = {t: i for i, t in enumerate(terms)}
        self._df = np.asarray(df, dtype=np.int64)
        self._postings_sizes = np.asarray(postings_sizes, dtype=np.int64)
        self._post_off = np.concatenate(([0], np.cumsum(self._postings_sizes)))
        self._postings = postings
        self._doc_lengths = np.asarray(doc_lengths, dtype=np.int64)
        self._text_sizes = np.asarray(text_sizes, dtype=np.int64)
        self._text_off = np.concatenate(([0], np.cumsum(self._text_sizes)))
        self._text = text_blob
        self._loc_sizes = np.asarray(loc_sizes, dtype=np.int64)
        self._loc_off = np.concatenate(([0], np.cumsum(self._loc_sizes)))
        self._loc = loc_blob
        self.N = len(self._doc_lengths)
        self.total_tokens = int(self._doc_lengths.sum())
        self.avgdl = self.total_tokens / self.N if self.N else 0.0
        self.stats = CorpusStats(self.N, self.avgdl, _DocFreqView(self))
        self._decode = lru_cache(maxsize=4096)(self._decode_uncached)

    def __repr__(self):
        return f"PositionalIndex({self.corpus_name!r}, N={self.N}, terms={len(self._terms)})"

    @property
    def doc_lengths(self) -> np.ndarray:
        return self._doc_lengths

    @property
    def terms(self) -> list[str]:
        return list(self._terms)

    def doc_freq(self, term: str) -> int:
        tid = self._term_ids.get(term)
        return 0 if tid is None else int(self._df[tid])

    def postings(self, term: str) -> PostingList:
        tid = self._term_ids.get(term)
        if tid is None:
            empty = np.zeros(0, dtype=np.int64)
            return PostingList(term, empty, empty, np.zeros(1, dtype=np.int64), empty)
        return self._decode(tid)

    def _decode_uncached(self, tid: int) -> PostingList:
        block = self._postings[self._post_off[tid] : self._post_off[tid + 1]]
        df = int(self._df[tid])
        try:
            vals = varint.decode(block)
        except varint.VarintError as e:
            raise FormatError("CorruptPostings", f"term {self._terms[tid]!r}: {e}") from None
        if vals.size < 2 * df:
            raise FormatError("CorruptPostings", f"term {self._terms[tid]!r}")
        docs = np.cumsum(vals[:df])
        tfs = vals[df : 2 * df]
        gaps = vals[2 * df :]
        if gaps.size != int(tfs.sum()):
            raise FormatError("CorruptPostings", f"term {self._terms[tid]!r}")
        offsets = np.concatenate(([0], np.cumsum(tfs)))
        c = np.cumsum(gaps)
        starts = offsets[:-1]
        base = c[starts] - gaps[starts] if df else starts
        positions = c - np.repeat(base, tfs)
        return PostingList(self._terms[tid], docs, tfs, offsets, positions)

    def doc(self, doc_id: int) -> DocRecord:
        if not 0 <= doc_id < self.N:
            raise LookupError(f"doc_id {doc_id} out of range [0, {self.N})")
        text = self._text[self._text_off[doc_id] : self._text_off[doc_id + 1]].decode("utf-8")
        loc = self._loc[self._loc_off[doc_id] : self._loc_off[doc_id + 1]].decode("utf-8")
        return DocRecord(doc_id, (self.corpus_name, loc), int(self._doc_lengths[doc_id]), text)

    def __iter__(self) -> Iterator[DocRecord]:
        for i in range(self.N):
            yield self.doc(i)


def build_index(sentences: Iterable[Sentence], corpus_name: str) -> PositionalIndex:
    """Index ``sentences`` in stream order; doc ids are dense in ingestion order.

    Sentences without tokens are skipped.  Duplicate sentences are indexed
    as distinct documents.
    """
    if "\n" in corpus_name or "\r" in corpus_name:
        raise ValueError("corpus name must be a single line")
    vocab: dict[str, int] = {}
    ids = array.array("i")
    lengths = array.array("i")
    texts: list[bytes] = []
    locs: list[bytes] = []
    for s in sentences:
        if not s.tokens:
            continue
        ids.extend([vocab.setdefault(t.norm, len(vocab)) for t in s.tokens])
        lengths.append(len(s.tokens))
        texts.append(s.raw.encode("utf-8"))
        locs.append(str(s.sentence_id).encode("utf-8"))
    if not lengths:
        raise BuildError("EmptyCorpus", f"no sentences for corpus {corpus_name!r}")

    tmp_terms = list(vocab)
    del vocab
    order = sorted(range(len(tmp_terms)), key=lambda i: tmp_terms[i].encode("utf-8"))
    terms = [tmp_terms[i] for i in order]
    remap = np.empty(len(order), dtype=np.int32)
    remap[np.asarray(order, dtype=np.int64)] = np.arange(len(order), dtype=np.int32)

    doc_lengths = np.frombuffer(lengths, dtype=np.int32).astype(np.int64)
    term_of_tok = remap[np.frombuffer(ids, dtype=np.int32)]
    del ids
    df, sizes, postings = _encode_postings(term_of_tok, doc_lengths, len(terms))
    text_sizes = np.fromiter((len(t) for t in texts), dtype=np.int64, count=len(texts))
    loc_sizes = np.fromiter((len(t) for t in locs), dtype=np.int64, count=len(locs))
    return PositionalIndex(corpus_name, terms, df, sizes, postings, doc_lengths,
                           text_sizes, b"".join(texts), loc_sizes, b"".join(locs))


def _encode_postings(term_of_tok: np.ndarray, doc_lengths: np.ndarray, n_terms: int):
    total = term_of_tok.size
    n_docs = doc_lengths.size
    doc_start = np.concatenate(([0], np.cumsum(doc_lengths)[:-1]))
    order = np.argsort(term_of_tok, kind="stable")
    t_s = term_of_tok[order].astype(np.int64)
    d_s = np.repeat(np.arange(n_docs, dtype=np.int32), doc_lengths)[order]
    p_s = (order - np.repeat(doc_start, doc_lengths)[order]).astype(np.int64)
    del order

    new_entry = np.ones(total, dtype=bool)
    new_entry[1:] = (t_s[1:] != t_s[:-1]) | (d_s[1:] != d_s[:-1])
    e_idx = np.flatnonzero(new_entry)
    e_term = t_s[e_idx]
    e_doc = d_s[e_idx].astype(np.int64)
    tf = np.diff(np.append(e_idx, total))
    df = np.bincount(e_term, minlength=n_terms)
    occ = np.bincount(t_s, minlength=n_terms)

    first_entry = np.concatenate(([0], np.cumsum(df)[:-1]))
    first_occ = np.concatenate(([0], np.cumsum(occ)[:-1]))
    n_vals = 2 * df + occ
    val_start = np.concatenate(([0], np.cumsum(n_vals)[:-1]))

    vals = np.empty(int(n_vals.sum()), dtype=np.uint64)
    e_rank = np.arange(e_idx.size) - first_entry[e_term]
    doc_gap = e_doc.copy()
    doc_gap[1:] -= e_doc[:-1]
    is_first = e_rank == 0
    doc_gap[is_first] = e_doc[is_first]
    vals[val_start[e_term] + e_rank] = doc_gap
    vals[val_start[e_term] + df[e_term] + e_rank] = tf
    del doc_gap, e_rank, is_first

    pos_gap = p_s.copy()
    pos_gap[1:] -= p_s[:-1]
    pos_gap[e_idx] = p_s[e_idx]
    o_rank = np.arange(total) - first_occ[t_s]
    vals[val_start[t_s] + 2 * df[t_s] + o_rank] = pos_gap
    del pos_gap, o_rank, p_s, d_s

    byte_len = varint.encoded_sizes(vals)
    cum = np.concatenate(([0], np.cumsum(byte_len, dtype=np.int64)))
    term_bytes = cum[val_start + n_vals] - cum[val_start]
    return df, term_bytes, varint.encode(vals)


# ---------------------------------------------------------------------------
# module-level accessors


def doc_freq(index: PositionalIndex, term: str) -> int:
    return index.doc_freq(term)


def postings(index: PositionalIndex, term: str) -> PostingList:
    return index.postings(term)


def doc(index: PositionalIndex, doc_id: int) -> DocRecord:
    return index.doc(doc_id)


# ---------------------------------------------------------------------------
# persistence


def _interleave(*cols) -> np.ndarray:
    return np.stack([np.asarray(c, dtype=np.int64) for c in cols], axis=1).reshape(-1)


def persist(index: PositionalIndex, directory: str | Path) -> Path:
    """Write ``index`` to ``directory``; the manifest is written last."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    blobs = {
        "terms.txt": "".join(t + "\n" for t in index._terms).encode("utf-8"),
        "terms.bin": varint.encode(_interleave(index._df, index._postings_sizes)),
        "postings.bin": index._postings,
        "docs.bin": varint.encode(_interleave(index._doc_lengths, index._text_sizes, index._loc_sizes)),
        "docs.txt": index._text,
        "docs.loc": index._loc,
    }
    for name in FILES:
        atomic_write_bytes(directory / name, blobs[name])
    fields = [
        ("format_version", FORMAT_VERSION),
        ("corpus_name", index.corpus_name),
        ("N", index.N),
        ("avgdl", repr(index.avgdl)),
        ("term_count", len(index._terms)),
        ("total_tokens", index.total_tokens),
    ] + [(f"bytes.{name}", len(blobs[name])) for name in FILES]
    atomic_write_text(directory / MANIFEST, "".join(f"{k} = {v}\n" for k, v in fields))
    return directory


def read_manifest(directory: str | Path) -> dict[str, str]:
    path = Path(directory) / MANIFEST
    if not path.is_file():
        raise FormatError("MissingManifest", str(path))
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise FormatError("BadManifest", f"malformed line {line!r}")
        out[key] = value
    return out


def load(directory: str | Path) -> PositionalIndex:
    directory = Path(directory)
    man = read_manifest(directory)
    version = man.get("format_version")
    if version != str(FORMAT_VERSION):
        raise FormatError("VersionMismatch", f"found {version!r}, expected {FORMAT_VERSION}")
    try:
        n_docs = int(man["N"])
        n_terms = int(man["term_count"])
        corpus_name = man["corpus_name"]
        sizes = {name: int(man[f"bytes.{name}"]) for name in FILES}
    except (KeyError, ValueError) as e:
        raise FormatError("BadManifest", str(e)) from None
    blobs = {}
    for name in FILES:
        p = directory / name
        if not p.is_file():
            raise FormatError("MissingFile", name)
        data = p.read_bytes()
        if len(data) != sizes[name]:
            raise FormatError("Truncated", f"{name}: {len(data)} bytes, manifest says {sizes[name]}")
        blobs[name] = data
    try:
        terms = [t.decode("utf-8") for t in blobs["terms.txt"].split(b"\n")[:-1]]
        tb = varint.decode(blobs["terms.bin"], expected=2 * n_terms).reshape(-1, 2)
        db = varint.decode(blobs["docs.bin"], expected=3 * n_docs).reshape(-1, 3)
    except (varint.VarintError, UnicodeDecodeError) as e:
        raise FormatError("Corrupt", str(e)) from None
    if len(terms) != n_terms:
        raise FormatError("Corrupt", f"{len(terms)} terms, manifest says {n_terms}")
    if tb[:, 1].sum() != sizes["postings.bin"] or db[:, 1].sum() != sizes["docs.txt"] \
            or db[:, 2].sum() != sizes["docs.loc"]:
        raise FormatError("Corrupt", "section sizes disagree with file sizes")
    idx = PositionalIndex(corpus_name, terms, tb[:, 0], tb[:, 1], blobs["postings.bin"], db[:, 0],
                          db[:, 1], blobs["docs.txt"], db[:, 2], blobs["docs.loc"])
    if repr(idx.avgdl) != man.get("avgdl"):
        raise FormatError("Corrupt", "avgdl disagrees with document lengths")
    return idx
