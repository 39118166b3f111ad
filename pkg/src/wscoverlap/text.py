"""Sentence segmentation, tokenization and coarse tagging.

Everything here is a pure function of its inputs.  Tokens keep their
character offsets into the sentence text so that downstream modules can
map character-level annotations (candidate spans, pronoun spans) onto
token indices and back.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

from wscoverlap import lexicon

TAGS = ("NOUN", "PROPN", "VERB", "PRON", "DET", "ADJ", "CONN", "OTHER")

# ASCII punctuation plus the typographic quotes/dashes common in web text.
PUNCT = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~" + "‘’“”«»–—…´"

_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "´": "'"})

_CHUNK_RE = re.compile(r"\S+")

DEFAULT_ABBREVIATIONS = frozenset(
    """
    mr. mrs. ms. dr. prof. sr. jr. st. mt. gen. col. lt. sgt. capt. rev. hon.
    e.g. i.e. etc. vs. cf. al. approx. inc. ltd. co. corp. dept. univ. no.
    jan. feb. mar. apr. jun. jul. aug. sep. sept. oct. nov. dec. u.s. u.k.
    """.split()
)

_OPEN_QUOTES = "\"'“‘(["
_CLOSE_QUOTES = "\"'”’)]"


class Token(NamedTuple):
    surface: str
    norm: str
    char_span: tuple[int, int]
    tag: str | None = None


@dataclass(frozen=True)
class Sentence:
    sentence_id: str
    raw: str
    tokens: tuple[Token, ...] = field(default=())

    @classmethod
    def from_text(cls, sentence_id: str, raw: str) -> "Sentence":
        return cls(sentence_id, raw, tuple(tokenize(raw)))

    @property
    def norms(self) -> list[str]:
        return [t.norm for t in self.tokens]


TaggerInterface = Callable[[Sequence[Token]], Sequence[str]]


def normalize(surface: str) -> str:
    return surface.translate(_APOSTROPHES).lower()


def tokenize(sentence_text: str) -> list[Token]:
    """Whitespace tokenization with surrounding punctuation stripped.

    Internal apostrophes and hyphens survive ("couldn't", "state-of-the-art").
    Chunks made only of punctuation are dropped.  No stopword removal, no
    stemming.
    """
    out = []
    for m in _CHUNK_RE.finditer(sentence_text):
        chunk = m.group()
        core = chunk.strip(PUNCT)
        if not core:
            continue
        lead = len(chunk) - len(chunk.lstrip(PUNCT))
        start = m.start() + lead
        end = start + len(core)
        norm = normalize(core).strip(PUNCT)
        if not norm:
            continue
        out.append(Token(core, norm, (start, end)))
    return out


def _is_boundary(text: str, i: int, abbreviations: frozenset[str]) -> int | None:
    """If a sentence may end at terminal mark text[i], return the cut index."""
    j = i + 1
    n = len(text)
    while j < n and text[j] in ".?!":
        j += 1
    while j < n and text[j] in _CLOSE_QUOTES:
        j += 1
    if j >= n or not text[j].isspace():
        return None
    k = j
    while k < n and text[k].isspace():
        k += 1
    if k >= n:
        return None
    nxt = text[k]
    if not (nxt.isupper() or nxt in _OPEN_QUOTES):
        return None
    if text[i] == ".":
        w = i
        while w > 0 and not text[w - 1].isspace():
            w -= 1
        word = text[w : i + 1].lower().lstrip(_OPEN_QUOTES)
        if word in abbreviations:
            return None
        # single-letter initials such as "J. Smith"
        if len(word) == 2 and word[0].isalpha():
            return None
    return j


def split_sentences(
    text: str,
    abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
    id_prefix: str = "",
) -> list[Sentence]:
    """Rule-based sentence splitter.

    A split happens after ``.``, ``?`` or ``!`` (plus any closing quotes)
    when followed by whitespace and then an uppercase letter or an opening
    quote, unless the word ending in ``.`` is a known abbreviation or an
    initial.  Whitespace between sentences is dropped; sentences without any
    token are not emitted.
    """
    abbrevs = frozenset(a.lower() for a in abbreviations)
    pieces = []
    start = 0
    for m in re.finditer(r"[.?!]", text):
        i = m.start()
        if i < start:
            continue
        cut = _is_boundary(text, i, abbrevs)
        if cut is None:
            continue
        pieces.append(text[start:cut])
        start = cut
    pieces.append(text[start:])
    out = []
    for piece in pieces:
        piece = piece.strip()
        if not piece:
            continue
        s = Sentence.from_text(f"{id_prefix}{len(out)}", piece)
        if s.tokens:
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# tagging


class HeuristicTagger:
    """Closed-class lexicons plus left-to-right contextual rules.

    Meant as a dependency-free default; anything satisfying
    ``TaggerInterface`` can replace it.
    """

    def __init__(self, names: Iterable[str] | None = None):
        self.names = frozenset(n.lower() for n in (names if names is not None else lexicon.given_names()))

    def __call__(self, tokens: Sequence[Token]) -> list[str]:
        tags: list[str] = []
        norms = [t.norm for t in tokens]
        for i, tok in enumerate(tokens):
            prev = tags[i - 1] if i else None
            prev_norm = norms[i - 1] if i else None
            nxt = norms[i + 1] if i + 1 < len(norms) else None
            tags.append(self._tag_one(tok, i, prev, prev_norm, nxt))
        return tags

    def _tag_one(self, tok: Token, i: int, prev, prev_norm, nxt) -> str:
        w = tok.norm
        capitalized = tok.surface[:1].isupper()

        if w in lexicon.POSSESSIVE_DETERMINERS:
            return "DET"
        if w == "her":
            return "DET" if nxt is not None and nxt not in lexicon.NON_NOMINAL else "PRON"
        if w in lexicon.PRONOUNS:
            return "PRON"
        if w in lexicon.DETERMINERS:
            return "DET"
        if w in lexicon.CONNECTIVES:
            # "so"/"while" used as intensifier or adverb right after a verb
            if w == "so" and prev == "VERB" and nxt is not None and nxt not in lexicon.PRONOUNS and nxt not in lexicon.DETERMINERS:
                return "OTHER"
            return "CONN"
        if w in lexicon.AUXILIARIES:
            return "VERB"
        if capitalized and i > 0:
            return "PROPN"
        if capitalized and i == 0 and w in self.names:
            return "PROPN"
        if w in lexicon.FUNCTION_WORDS:
            if w == "like" and prev in ("PRON", "NOUN", "PROPN") and prev_norm not in lexicon.AUXILIARIES:
                return "VERB"
            return "OTHER"
        if w in lexicon.ADJECTIVES:
            return "ADJ"
        if prev_norm in lexicon.INTENSIFIERS:
            return "ADJ"
        if w[:1].isdigit():
            return "OTHER"
        if w.endswith("ly") and len(w) > 4:
            return "OTHER"
        after_det = prev in ("DET", "ADJ")
        if w in lexicon.VERB_FORMS:
            if after_det and not (w.endswith("ed") or w.endswith("ing")):
                return "NOUN"
            if after_det:
                return "ADJ" if w.endswith("ed") else "NOUN"
            return "VERB"
        if prev_norm in lexicon.MODALS_AND_DO:
            return "VERB"
        if len(w) > 4 and (w.endswith("ed") or w.endswith("ing")):
            if after_det:
                return "ADJ" if w.endswith("ed") else "NOUN"
            return "VERB"
        if any(w.endswith(s) for s in lexicon.ADJ_SUFFIXES) and len(w) > 5:
            return "ADJ"
        return "NOUN"


_default_tagger: HeuristicTagger | None = None


def default_tagger() -> HeuristicTagger:
    global _default_tagger
    if _default_tagger is None:
        _default_tagger = HeuristicTagger()
    return _default_tagger


def tag(tokens: Sequence[Token], tagger: TaggerInterface | None = None) -> list[Token]:
    """Return copies of ``tokens`` with ``tag`` filled in by ``tagger``."""
    tagger = tagger or default_tagger()
    tags = list(tagger(tokens))
    if len(tags) != len(tokens):
        raise ValueError(f"tagger returned {len(tags)} tags for {len(tokens)} tokens")
    for t in tags:
        if t not in TAGS:
            raise ValueError(f"unknown tag {t!r}")
    return [tok._replace(tag=t) for tok, t in zip(tokens, tags)]


# ---------------------------------------------------------------------------
# ingestion readers

READER_FORMATS = ("text", "lines", "jsonl")


def read_corpus(path: str | Path, fmt: str, abbreviations=DEFAULT_ABBREVIATIONS) -> Iterator[Sentence]:
    """Stream sentences from ``path``.

    ``text``: the whole file is one document.  ``lines``: one pre-split
    sentence per line.  ``jsonl``: one record per line with a ``body`` field,
    each body segmented into sentences.  Sentence ids are locators of the
    form ``<file>:<record>:<sentence>`` (``<file>:<line>`` for ``lines``).
    """
    path = Path(path)
    name = path.name
    if fmt == "text":
        text = path.read_text(encoding="utf-8")
        yield from split_sentences(text, abbreviations, id_prefix=f"{name}:0:")
    elif fmt == "lines":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                s = Sentence.from_text(f"{name}:{lineno}", line)
                if s.tokens:
                    yield s
    elif fmt == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh):
                if not line.strip():
                    continue
                body = json.loads(line).get("body")
                if not isinstance(body, str):
                    continue
                yield from split_sentences(body, abbreviations, id_prefix=f"{name}:{lineno}:")
    else:
        raise ValueError(f"unknown corpus format {fmt!r}; expected one of {READER_FORMATS}")
