"""Skeletal parsing of pronoun-disambiguation instances and query compilation.

Candidate antecedents and the pronoun come with the instance as character
spans; only the two predicates and the discourse connective are found here.
Token spans are inclusive ``(start, end)`` index pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from wscoverlap import lexicon
from wscoverlap.errors import DataError, ParseError
from wscoverlap.text import TaggerInterface, Token, tag, tokenize

TokenSpan = tuple[int, int]

DEFAULT_WINDOW = 10
MAX_TRAILING = 3
MAX_LEADING_ADVERBS = 2

_CLAUSE_BREAK = set(",;:()[]\"“”—–")
_ADVERBS = frozenset(
    "also just even still never always often really only already again actually certainly "
    "probably simply then finally".split()
)


@dataclass(frozen=True)
class RawInstance:
    instance_id: str
    sentence: str
    candidate_1_span: tuple[int, int]  # character offsets, end exclusive
    candidate_2_span: tuple[int, int]
    pronoun_span: tuple[int, int]
    gold_answer: int

    def __post_init__(self):
        n = len(self.sentence)
        spans = (self.candidate_1_span, self.candidate_2_span, self.pronoun_span)
        for s, e in spans:
            if not 0 <= s < e <= n:
                raise DataError("BadSpan", f"{self.instance_id}: span {(s, e)} outside sentence")
        ordered = sorted(spans)
        for (_, e0), (s1, _) in zip(ordered, ordered[1:]):
            if s1 < e0:
                raise DataError("OverlappingSpans", self.instance_id)
        if self.gold_answer not in (1, 2):
            raise DataError("BadAnswer", f"{self.instance_id}: {self.gold_answer!r}")

    @property
    def flags(self) -> tuple[str, ...]:
        out = []
        if self.candidate_2_span[0] < self.candidate_1_span[0]:
            out.append("candidates_out_of_order")
        if self.pronoun_span[0] < max(self.candidate_1_span[0], self.candidate_2_span[0]):
            out.append("pronoun_precedes_candidate")
        return tuple(out)

    @classmethod
    def from_json(cls, d: dict) -> "RawInstance":
        try:
            return cls(
                str(d["id"]), d["sentence"], tuple(d["span1"]), tuple(d["span2"]),
                tuple(d["pronoun"]), int(d["answer"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError("BadInstance", f"{d.get('id', '?')}: {e}") from None

    def to_json(self) -> dict:
        return {
            "id": self.instance_id,
            "sentence": self.sentence,
            "span1": list(self.candidate_1_span),
            "span2": list(self.candidate_2_span),
            "pronoun": list(self.pronoun_span),
            "answer": self.gold_answer,
        }


def read_instances(path: str | Path) -> list[RawInstance]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    d = json.loads(line)
                except json.JSONDecodeError as e:
                    raise DataError("BadJSON", f"{path}:{lineno}: {e}") from None
                out.append(RawInstance.from_json(d))
    ids = [r.instance_id for r in out]
    if len(set(ids)) != len(ids):
        raise DataError("DuplicateId", str(path))
    return out


@dataclass(frozen=True)
class SkeletalInstance:
    instance_id: str
    tokens: tuple[Token, ...]
    e1: TokenSpan
    e2: TokenSpan
    pred_c: TokenSpan
    pred_q: TokenSpan
    pronoun: TokenSpan
    connective: TokenSpan | None
    flags: tuple[str, ...] = ()

    def text(self, span: TokenSpan | None) -> str:
        if span is None:
            return ""
        return " ".join(t.norm for t in self.tokens[span[0] : span[1] + 1])

    @property
    def content_positions(self) -> tuple[int, ...]:
        spans = [self.e1, self.e2, self.pronoun] + ([self.connective] if self.connective else [])
        return tuple(sorted(i for s, e in spans for i in range(s, e + 1)))

    @property
    def content_words(self) -> frozenset[str]:
        return frozenset(self.tokens[i].norm for i in self.content_positions)

    def to_json(self) -> dict:
        def span(s):
            return None if s is None else list(s)

        return {
            "id": self.instance_id,
            "tokens": [t.norm for t in self.tokens],
            "e1": span(self.e1), "e2": span(self.e2),
            "pred_c": span(self.pred_c), "pred_q": span(self.pred_q),
            "pronoun": span(self.pronoun), "connective": span(self.connective),
            "text": {
                "e1": self.text(self.e1), "e2": self.text(self.e2),
                "pred_c": self.text(self.pred_c), "pred_q": self.text(self.pred_q),
                "pronoun": self.text(self.pronoun), "connective": self.text(self.connective),
            },
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class OverlapQuery:
    instance_id: str
    phrase_a: tuple[str, ...]
    phrase_b: tuple[str, ...]
    window: int = DEFAULT_WINDOW
    optional_terms: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.phrase_a or not self.phrase_b:
            raise ValueError("both predicate phrases must be nonempty")
        if self.window < 0:
            raise ValueError("window must be >= 0")

    @property
    def terms(self) -> tuple[str, ...]:
        """Distinct scoring terms in a fixed (sorted) order."""
        return tuple(sorted(set(self.phrase_a) | set(self.phrase_b) | self.optional_terms))

    def __str__(self) -> str:
        phrase = f'Phrase("{" ".join(self.phrase_a)}", "{" ".join(self.phrase_b)}", {self.window})'
        if not self.optional_terms:
            return phrase
        return f"{phrase} ∩ ({' ∪ '.join(sorted(self.optional_terms))})"

    def to_json(self) -> dict:
        return {
            "id": self.instance_id,
            "phrase_a": list(self.phrase_a),
            "phrase_b": list(self.phrase_b),
            "window": self.window,
            "optional_terms": sorted(self.optional_terms),
        }


# ---------------------------------------------------------------------------
# parsing


def _char_to_tokens(tokens: Sequence[Token], span: tuple[int, int], what: str, iid: str) -> TokenSpan:
    s, e = span
    hits = [i for i, t in enumerate(tokens) if t.char_span[0] < e and t.char_span[1] > s]
    if not hits:
        raise ParseError("BadSpan", f"{iid}: {what} span {span} covers no token")
    return hits[0], hits[-1]


def _break_before(sentence: str, tokens: Sequence[Token], k: int) -> bool:
    """True if clause punctuation sits between token k-1 and token k."""
    if k <= 0:
        return False
    gap = sentence[tokens[k - 1].char_span[1] : tokens[k].char_span[0]]
    return any(c in _CLAUSE_BREAK for c in gap) or "." in gap


def _is_adverb(tok: Token) -> bool:
    return tok.tag == "OTHER" and (tok.norm in _ADVERBS or (tok.norm.endswith("ly") and len(tok.norm) > 4))


class _Chunker:
    def __init__(self, sentence: str, tokens: Sequence[Token], blocked: set[int]):
        self.sentence = sentence
        self.tokens = tokens
        self.blocked = blocked

    def _free(self, k: int, lo: int, hi: int) -> bool:
        return lo <= k < hi and k not in self.blocked

    def _is_verb(self, k: int) -> bool:
        return self.tokens[k].tag == "VERB"

    def _core_continues(self, k: int, lo: int, hi: int) -> bool:
        """May token k extend a verb group whose previous token is k-1?"""
        tok = self.tokens[k]
        if tok.tag == "VERB" or tok.norm in lexicon.NEGATIONS:
            return True
        nxt_verb = self._free(k + 1, lo, hi) and self._is_verb(k + 1) and not _break_before(self.sentence, self.tokens, k + 1)
        if tok.norm == "to" and nxt_verb:
            return True
        if _is_adverb(tok) and nxt_verb:
            return True
        if tok.norm in lexicon.PARTICLES and tok.tag == "OTHER" and self._is_verb(k - 1):
            return True
        return False

    def forward(self, start: int, lo: int, hi: int) -> TokenSpan | None:
        """Verb group beginning at ``start`` (after at most two adverbs), plus trailing modifiers."""
        toks = self.tokens
        i = start
        while (i - start < MAX_LEADING_ADVERBS and self._free(i, lo, hi) and _is_adverb(toks[i])
               and not _break_before(self.sentence, toks, i + 1)):
            i += 1
        if not (self._free(i, lo, hi) and (self._is_verb(i) or toks[i].norm in lexicon.NEGATIONS)):
            return None
        j = i
        has_verb = self._is_verb(i)
        while (self._free(j + 1, lo, hi) and not _break_before(self.sentence, toks, j + 1)
               and self._core_continues(j + 1, lo, hi)):
            j += 1
            has_verb = has_verb or self._is_verb(j)
        if not has_verb:
            return None
        n_trail = 0
        while (n_trail < MAX_TRAILING and self._free(j + 1, lo, hi)
               and not _break_before(self.sentence, toks, j + 1)
               and toks[j + 1].tag in ("OTHER", "ADJ")):
            j += 1
            n_trail += 1
        return start, j

    def backward(self, end: int, lo: int, hi: int) -> TokenSpan | None:
        """Verb group ending exactly at ``end``."""
        toks = self.tokens
        if not (self._free(end, lo, hi) and (self._is_verb(end) or toks[end].norm in lexicon.PARTICLES)):
            return None
        i = end
        while (self._free(i - 1, lo, hi) and not _break_before(self.sentence, toks, i)
               and (self._is_verb(i - 1) or toks[i - 1].norm in lexicon.NEGATIONS
                    or (toks[i - 1].norm == "to" and self._is_verb(i))
                    or (_is_adverb(toks[i - 1]) and self._is_verb(i)))):
            i -= 1
        if not any(self._is_verb(k) for k in range(i, end + 1)):
            return None
        while toks[i].norm == "to" or _is_adverb(toks[i]):
            i += 1
        return i, end

    def scan(self, lo: int, hi: int) -> list[TokenSpan]:
        out = []
        k = lo
        while k < hi:
            ch = self.forward(k, lo, hi)
            if ch is None:
                k += 1
            else:
                out.append(ch)
                k = ch[1] + 1
        return out


def parse_instance(
    raw: RawInstance,
    tagger: TaggerInterface | None = None,
    connectives: Iterable[str] | None = None,
) -> SkeletalInstance:
    conn_lex = frozenset(connectives) if connectives is not None else lexicon.CONNECTIVES
    toks = tag(tokenize(raw.sentence), tagger)
    iid = raw.instance_id
    e1 = _char_to_tokens(toks, raw.candidate_1_span, "candidate_1", iid)
    e2 = _char_to_tokens(toks, raw.candidate_2_span, "candidate_2", iid)
    p = _char_to_tokens(toks, raw.pronoun_span, "pronoun", iid)
    if p[0] != p[1]:
        raise ParseError("BadPronoun", f"{iid}: pronoun span covers {p[1] - p[0] + 1} tokens")
    ptok = toks[p[0]]
    if ptok.tag != "PRON" and ptok.norm not in lexicon.PRONOUNS | lexicon.POSSESSIVE_DETERMINERS | {"her"}:
        raise ParseError("BadPronoun", f"{iid}: {ptok.surface!r} is not a pronoun")

    n = len(toks)
    cand_end = max(e1[1], e2[1])
    connective = None
    for k in range(p[0] - 1, cand_end, -1):
        if toks[k].norm in conn_lex and toks[k].tag != "OTHER":
            connective = (k, k)
            break

    blocked = {i for s, e in (e1, e2, p) for i in range(s, e + 1)}
    if connective:
        blocked.add(connective[0])
    chunker = _Chunker(raw.sentence, toks, blocked)

    pred_q = chunker.forward(p[1] + 1, p[1] + 1, n)
    if pred_q is None and ptok.norm in lexicon.POSSESSIVE_DETERMINERS | {"her"}:
        # "her work was excellent": the possessed noun opens the query predicate
        k = p[1] + 1
        while k < n and toks[k].tag == "ADJ":
            k += 1
        if k < n and toks[k].tag == "NOUN":
            while k + 1 < n and toks[k + 1].tag == "NOUN":
                k += 1
            verb = chunker.forward(k + 1, k + 1, n)
            if verb is not None:
                pred_q = (p[1] + 1, verb[1])
    if pred_q is None:
        lo = connective[1] + 1 if connective else cand_end + 1
        pred_q = chunker.backward(p[0] - 1, lo, p[0])
    if pred_q is None:
        raise ParseError("MissingPredicate", f"{iid}: no query predicate next to the pronoun")

    blocked |= set(range(pred_q[0], pred_q[1] + 1))
    clause_end = connective[0] if connective else p[0]
    first, second = sorted((e1, e2))
    pred_c = None
    between = chunker.scan(first[1] + 1, second[0])
    if between:
        pred_c = between[0]
    if pred_c is None:
        before = chunker.scan(0, first[0])
        if before:
            pred_c = before[-1]
    if pred_c is None:
        after = chunker.scan(second[1] + 1, clause_end)
        if after:
            pred_c = after[0]
    if pred_c is None:
        raise ParseError("MissingPredicate", f"{iid}: no context predicate")

    return SkeletalInstance(iid, tuple(toks), e1, e2, pred_c, pred_q, p, connective, raw.flags)


def build_query(sk: SkeletalInstance, window: int = DEFAULT_WINDOW) -> OverlapQuery:
    norms = [t.norm for t in sk.tokens]
    return OverlapQuery(
        instance_id=sk.instance_id,
        phrase_a=tuple(norms[sk.pred_c[0] : sk.pred_c[1] + 1]),
        phrase_b=tuple(norms[sk.pred_q[0] : sk.pred_q[1] + 1]),
        window=window,
        optional_terms=sk.content_words,
    )
