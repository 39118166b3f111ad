"""Construction of new pronoun-disambiguation instances from raw web text.

Stages, each a per-sentence map or filter:

1. clean markup and split into sentences (length-gated)
2. keep sentences with exactly one discourse connective
3. keep sentences with exactly two noun phrases before the connective and a
   third-person pronoun after it
4. replace both noun phrases with given names matching the pronoun's gender
5. emit annotation tasks; merge five returned labels per instance, keeping
   only instances where at least four annotators agree
"""

from __future__ import annotations

import hashlib
import html
import json
import logging
import random
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from wscoverlap import lexicon
from wscoverlap.errors import DataError, SkipError
from wscoverlap.fsio import atomic_write_text
from wscoverlap.schema import RawInstance, TokenSpan
from wscoverlap.text import DEFAULT_ABBREVIATIONS, Sentence, TaggerInterface, Token, split_sentences, tag

log = logging.getLogger(__name__)

MIN_TOKENS = 6
MAX_TOKENS = 60
N_ANNOTATORS = 5
MIN_AGREEMENT = 4

_MD_LINK = re.compile(r"\[([^\]]*)\]\([^)]*\)")
_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_QUOTE_MARK = re.compile(r"^[ \t]*(?:>[ \t]?)+", re.MULTILINE)
_HEADING = re.compile(r"^[ \t]*#+[ \t]+", re.MULTILINE)
_BULLET = re.compile(r"^[ \t]*[-*+][ \t]+", re.MULTILINE)
_EMPHASIS = re.compile(r"\*\*|__|~~|`")
_PLACEHOLDER = re.compile(r"\[(?:deleted|removed)\]", re.IGNORECASE)
_SPACES = re.compile(r"\s+")


@dataclass(frozen=True)
class CandidateSentence:
    sentence: Sentence
    connective: TokenSpan
    np1: TokenSpan
    np2: TokenSpan
    pronoun: TokenSpan
    source_ref: str

    def to_json(self) -> dict:
        toks = self.sentence.tokens

        def text(sp):
            return " ".join(t.surface for t in toks[sp[0] : sp[1] + 1])

        return {
            "source_ref": self.source_ref,
            "text": self.sentence.raw,
            "np1": text(self.np1),
            "np2": text(self.np2),
            "connective": text(self.connective),
            "pronoun": text(self.pronoun),
        }


@dataclass(frozen=True)
class PerturbedInstance:
    original: CandidateSentence
    perturbed_sentence: str
    name1: str
    name2: str
    pronoun_gender: str
    instance_id: str
    name1_span: tuple[int, int]
    name2_span: tuple[int, int]
    pronoun_span: tuple[int, int]
    np1_text: str
    np2_text: str

    def bracketed(self) -> str:
        s = self.perturbed_sentence
        (a0, a1), (b0, b1), (p0, p1) = self.name1_span, self.name2_span, self.pronoun_span
        return (s[:a0] + "{" + s[a0:a1] + "}" + s[a1:b0] + "{" + s[b0:b1] + "}"
                + s[b1:p0] + "[" + s[p0:p1] + "]" + s[p1:])

    def deperturb(self) -> str:
        s = self.perturbed_sentence
        (a0, a1), (b0, b1) = self.name1_span, self.name2_span
        return s[:a0] + self.np1_text + s[a1:b0] + self.np2_text + s[b1:]

    def to_raw_instance(self, answer: int) -> RawInstance:
        return RawInstance(self.instance_id, self.perturbed_sentence, self.name1_span,
                           self.name2_span, self.pronoun_span, answer)

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "source_ref": self.original.source_ref,
            "original": self.original.sentence.raw,
            "perturbed": self.perturbed_sentence,
            "name1": self.name1,
            "name2": self.name2,
            "gender": self.pronoun_gender,
            "span1": list(self.name1_span),
            "span2": list(self.name2_span),
            "pronoun": list(self.pronoun_span),
        }


@dataclass(frozen=True)
class AnnotationRecord:
    instance_id: str
    labels: tuple[int, ...]


# ---------------------------------------------------------------------------
# stages


def clean_text(raw: str) -> str:
    text = html.unescape(raw)
    text = _MD_LINK.sub(r"\1", text)
    text = _URL.sub(" ", text)
    text = _QUOTE_MARK.sub("", text)
    text = _HEADING.sub("", text)
    text = _BULLET.sub("", text)
    text = _EMPHASIS.sub("", text)
    text = _PLACEHOLDER.sub(" ", text)
    return _SPACES.sub(" ", text).strip()


def clean_and_split(
    raw_document: str | bytes,
    id_prefix: str = "",
    min_tokens: int = MIN_TOKENS,
    max_tokens: int = MAX_TOKENS,
    abbreviations=DEFAULT_ABBREVIATIONS,
) -> list[Sentence]:
    """Strip markup and URLs, split, and drop sentences outside the length gate.

    Bytes are decoded as strict UTF-8; a ``UnicodeDecodeError`` propagates so
    the caller can count and skip the document.
    """
    if isinstance(raw_document, bytes):
        raw_document = raw_document.decode("utf-8")
    sents = split_sentences(clean_text(raw_document), abbreviations, id_prefix=id_prefix)
    return [s for s in sents if min_tokens <= len(s.tokens) <= max_tokens]


def connective_filter(sentence: Sentence | Sequence[Token], connectives: Iterable[str] | None = None) -> bool:
    conn = frozenset(connectives) if connectives is not None else lexicon.CONNECTIVES
    toks = sentence.tokens if isinstance(sentence, Sentence) else sentence
    return sum(t.norm in conn for t in toks) == 1


def noun_phrases(tokens: Sequence[Token], end: int) -> list[TokenSpan]:
    """NP chunks in ``tokens[:end]``: DET? ADJ* NOUN+ or PROPN+."""
    out = []
    i = 0
    while i < end:
        t = tokens[i].tag
        if t == "PROPN":
            j = i
            while j + 1 < end and tokens[j + 1].tag == "PROPN":
                j += 1
            out.append((i, j))
            i = j + 1
            continue
        if t in ("DET", "ADJ", "NOUN"):
            j = i
            if tokens[j].tag == "DET":
                j += 1
            while j < end and tokens[j].tag == "ADJ":
                j += 1
            if j < end and tokens[j].tag == "NOUN":
                while j + 1 < end and tokens[j + 1].tag == "NOUN":
                    j += 1
                out.append((i, j))
                i = j + 1
                continue
        i += 1
    return out


def antecedent_filter(
    sentence: Sentence,
    tagger: TaggerInterface | None = None,
    connectives: Iterable[str] | None = None,
) -> CandidateSentence | None:
    conn = frozenset(connectives) if connectives is not None else lexicon.CONNECTIVES
    toks = tag(sentence.tokens, tagger)
    conn_pos = [i for i, t in enumerate(toks) if t.norm in conn]
    if not conn_pos:
        return None
    pron = next((i for i in range(conn_pos[0] + 1, len(toks))
                 if toks[i].norm in lexicon.THIRD_PERSON_PRONOUNS), None)
    if pron is None:
        return None
    c = max(i for i in conn_pos if i < pron)
    nps = noun_phrases(toks, c)
    if len(nps) != 2:
        return None
    s = Sentence(sentence.sentence_id, sentence.raw, tuple(toks))
    return CandidateSentence(s, (c, c), nps[0], nps[1], (pron, pron), sentence.sentence_id)


def _gender(norm: str) -> str:
    if norm in lexicon.MALE_PRONOUNS:
        return "male"
    if norm in lexicon.FEMALE_PRONOUNS:
        return "female"
    raise SkipError("Ungendered", norm)


def instance_seed(source_ref: str, seed: int) -> int:
    return int(hashlib.sha256(f"{seed}\0{source_ref}".encode("utf-8")).hexdigest()[:16], 16)


def _possessive_suffix(surface: str) -> str:
    for suf in ("'s", "’s", "'", "’"):
        if surface.endswith(suf) and len(surface) > len(suf):
            return suf
    return ""


def perturb(cand: CandidateSentence, name_lists: Mapping[str, Sequence[str]], seed: int = 0) -> PerturbedInstance:
    """Replace both NPs with distinct given names of the pronoun's gender.

    The names are drawn from a generator seeded by ``seed`` and the
    candidate's source reference, so the outcome does not depend on
    processing order.
    """
    toks = cand.sentence.tokens
    raw = cand.sentence.raw
    gender = _gender(toks[cand.pronoun[0]].norm)
    names = sorted(set(name_lists[gender]))
    if len(names) < 2:
        raise ValueError(f"need at least two {gender} names")
    rng = random.Random(instance_seed(cand.source_ref, seed))
    name1, name2 = rng.sample(names, 2)

    def char_range(sp):
        start = toks[sp[0]].char_span[0]
        last = toks[sp[1]]
        return start, last.char_span[1] - len(_possessive_suffix(last.surface))

    (a0, a1), (b0, b1) = char_range(cand.np1), char_range(cand.np2)
    p0, p1 = toks[cand.pronoun[0]].char_span
    out = raw[:a0] + name1 + raw[a1:b0] + name2 + raw[b1:]
    d1 = len(name1) - (a1 - a0)
    d2 = d1 + len(name2) - (b1 - b0)
    iid = "kr-" + hashlib.sha256(f"{cand.source_ref}\0{raw}".encode("utf-8")).hexdigest()[:12]
    return PerturbedInstance(
        cand, out, name1, name2, gender, iid,
        (a0, a0 + len(name1)), (b0 + d1, b0 + d1 + len(name2)), (p0 + d2, p1 + d2),
        raw[a0:a1], raw[b0:b1],
    )


@dataclass(frozen=True)
class MergeResult:
    kept: dict[str, int]
    dropped: dict[str, str]


def merge_annotations(records: Iterable[AnnotationRecord]) -> MergeResult:
    kept: dict[str, int] = {}
    dropped: dict[str, str] = {}
    for rec in records:
        if len(rec.labels) != N_ANNOTATORS:
            raise DataError("WrongLabelCount", f"{rec.instance_id}: {len(rec.labels)} labels")
        if any(lab not in (1, 2) for lab in rec.labels):
            raise DataError("BadLabel", f"{rec.instance_id}: {rec.labels}")
        label, count = Counter(rec.labels).most_common(1)[0]
        if count >= MIN_AGREEMENT:
            kept[rec.instance_id] = label
        else:
            dropped[rec.instance_id] = "no_majority"
    return MergeResult(kept, dropped)


def read_labels(path: str | Path) -> list[AnnotationRecord]:
    """Completed labels as ``instance_id<TAB>annotator_id<TAB>label`` lines."""
    by_id: dict[str, list[tuple[str, int]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError("BadLabelLine", f"{path}:{lineno}")
            iid, annotator, label = parts
            try:
                by_id.setdefault(iid, []).append((annotator, int(label)))
            except ValueError:
                raise DataError("BadLabel", f"{path}:{lineno}: {label!r}") from None
    return [AnnotationRecord(iid, tuple(lab for _, lab in sorted(v))) for iid, v in by_id.items()]


def readable(inst: PerturbedInstance, answer: int) -> str:
    return f"{inst.bracketed()} ({inst.name1 if answer == 1 else inst.name2})"


# ---------------------------------------------------------------------------
# driver


def iter_documents(path: str | Path, fmt: str, stats: Counter) -> Iterator[tuple[str, str]]:
    """Yield ``(doc_ref, text)``; undecodable or malformed records are counted and skipped."""
    path = Path(path)
    if fmt == "text":
        try:
            yield f"{path.name}:0", path.read_bytes().decode("utf-8")
        except UnicodeDecodeError:
            stats["undecodable"] += 1
            log.warning("%s: not valid UTF-8, skipped", path)
        return
    with path.open("rb") as fh:
        for lineno, line in enumerate(fh):
            try:
                text = line.decode("utf-8")
            except UnicodeDecodeError:
                stats["undecodable"] += 1
                log.warning("%s:%d: not valid UTF-8, skipped", path, lineno)
                continue
            if not text.strip():
                continue
            if fmt == "lines":
                yield f"{path.name}:{lineno}", text
                continue
            try:
                body = json.loads(text).get("body")
            except (json.JSONDecodeError, AttributeError):
                stats["undecodable"] += 1
                log.warning("%s:%d: malformed JSON record, skipped", path, lineno)
                continue
            if isinstance(body, str):
                yield f"{path.name}:{lineno}", body


def _jsonl(rows: Iterable[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in rows)


def run_pipeline(
    inputs: Sequence[str | Path],
    fmt: str,
    out_dir: str | Path,
    seed: int = 0,
    name_lists: Mapping[str, Sequence[str]] | None = None,
    connectives: Iterable[str] | None = None,
    tagger: TaggerInterface | None = None,
    labels: str | Path | None = None,
) -> dict[str, int]:
    """Run every stage and write auditable per-stage files; return the funnel counts."""
    out_dir = Path(out_dir)
    conn = frozenset(connectives) if connectives is not None else lexicon.CONNECTIVES
    if name_lists is None:
        name_lists = {
            "male": lexicon.read_wordlist(None, "names_male.txt"),
            "female": lexicon.read_wordlist(None, "names_female.txt"),
        }
    stats: Counter = Counter()
    sentences, connective_ok, candidates, perturbed, dropped = [], [], [], [], []
    for path in inputs:
        for ref, text in iter_documents(path, fmt, stats):
            stats["documents"] += 1
            sentences.extend(clean_and_split(text, id_prefix=f"{ref}:"))
    for s in sentences:
        if not connective_filter(s, conn):
            dropped.append({"source_ref": s.sentence_id, "stage": "connective", "reason": "connective_count"})
            continue
        connective_ok.append(s)
        cand = antecedent_filter(s, tagger, conn)
        if cand is None:
            dropped.append({"source_ref": s.sentence_id, "stage": "antecedent", "reason": "np_pattern"})
            continue
        candidates.append(cand)
        try:
            perturbed.append(perturb(cand, name_lists, seed))
        except SkipError as e:
            dropped.append({"source_ref": s.sentence_id, "stage": "perturb", "reason": e.reason})

    funnel = {
        "documents": stats["documents"],
        "undecodable": stats["undecodable"],
        "sentences": len(sentences),
        "connective": len(connective_ok),
        "antecedent": len(candidates),
        "perturbed": len(perturbed),
    }
    atomic_write_text(out_dir / "01_sentences.jsonl",
                      _jsonl({"source_ref": s.sentence_id, "text": s.raw} for s in sentences))
    atomic_write_text(out_dir / "02_connective.jsonl",
                      _jsonl({"source_ref": s.sentence_id, "text": s.raw} for s in connective_ok))
    atomic_write_text(out_dir / "03_antecedent.jsonl", _jsonl(c.to_json() for c in candidates))
    atomic_write_text(out_dir / "04_perturbed.jsonl", _jsonl(p.to_json() for p in perturbed))
    atomic_write_text(out_dir / "dropped.jsonl", _jsonl(dropped))
    atomic_write_text(out_dir / "annotation_tasks.tsv",
                      "".join(f"{p.instance_id}\t{p.bracketed()}\n" for p in perturbed))

    if labels is not None:
        by_id = {p.instance_id: p for p in perturbed}
        records = read_labels(labels)
        unknown = sorted(r.instance_id for r in records if r.instance_id not in by_id)
        if unknown:
            raise DataError("UnknownInstance", ", ".join(unknown))
        merged = merge_annotations(records)
        final = [p for p in perturbed if p.instance_id in merged.kept]
        not_labeled = [p.instance_id for p in perturbed if p.instance_id not in merged.kept
                       and p.instance_id not in merged.dropped]
        atomic_write_text(out_dir / "dataset.jsonl",
                          _jsonl(p.to_raw_instance(merged.kept[p.instance_id]).to_json() for p in final))
        atomic_write_text(out_dir / "dataset_readable.txt",
                          "".join(readable(p, merged.kept[p.instance_id]) + "\n" for p in final))
        merge_dropped = [{"instance_id": i, "reason": r} for i, r in sorted(merged.dropped.items())]
        merge_dropped += [{"instance_id": i, "reason": "unlabeled"} for i in sorted(not_labeled)]
        atomic_write_text(out_dir / "merge_dropped.jsonl", _jsonl(merge_dropped))
        funnel["kept"] = len(final)

    atomic_write_text(out_dir / "funnel.json", json.dumps(funnel, indent=2) + "\n")
    return funnel
