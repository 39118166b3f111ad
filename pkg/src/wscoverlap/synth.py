"""Synthetic corpora and queries for benchmarks and oracle tests.

Words are drawn from a Zipf-like distribution over a fixed pseudo-vocabulary,
so term statistics look roughly like natural text while staying fully
reproducible from a seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from wscoverlap.schema import OverlapQuery
from wscoverlap.text import Sentence

_SYLLABLES = ("ka", "lo", "mi", "ne", "ru", "ta", "ve", "so", "pi", "da", "go", "he", "ju", "ba", "fe", "zi")


@dataclass(frozen=True)
class SynthConfig:
    n_sentences: int = 10_000
    vocab_size: int = 20_000
    mean_length: float = 15.0
    min_length: int = 3
    max_length: int = 40
    zipf_s: float = 1.1
    seed: int = 0


def vocabulary(size: int) -> list[str]:
    """Distinct lowercase pseudo-words, shortest first."""
    out = []
    n = len(_SYLLABLES)
    k = 1
    while len(out) < size:
        for i in range(n**k):
            word = "".join(_SYLLABLES[(i // n**j) % n] for j in range(k))
            out.append(word)
            if len(out) == size:
                break
        k += 1
    return out


def _probabilities(cfg: SynthConfig) -> np.ndarray:
    ranks = np.arange(1, cfg.vocab_size + 1, dtype=np.float64)
    p = ranks ** -cfg.zipf_s
    return p / p.sum()


def sentence_ids(cfg: SynthConfig, chunk: int = 100_000) -> Iterator[np.ndarray]:
    """Yield each sentence as an array of vocabulary indices."""
    rng = np.random.default_rng(cfg.seed)
    p = _probabilities(cfg)
    cdf = np.cumsum(p)
    done = 0
    while done < cfg.n_sentences:
        m = min(chunk, cfg.n_sentences - done)
        lengths = np.clip(rng.poisson(cfg.mean_length, m), cfg.min_length, cfg.max_length)
        words = np.searchsorted(cdf, rng.random(int(lengths.sum())), side="right")
        words = np.minimum(words, cfg.vocab_size - 1)
        yield from np.split(words, np.cumsum(lengths)[:-1])
        done += m


def sentences(cfg: SynthConfig) -> Iterator[Sentence]:
    vocab = vocabulary(cfg.vocab_size)
    for i, ids in enumerate(sentence_ids(cfg)):
        yield Sentence.from_text(f"synth:{i}", " ".join(vocab[j] for j in ids))


def write_corpus(cfg: SynthConfig, path) -> None:
    """One sentence per line (the ``lines`` reader format)."""
    vocab = vocabulary(cfg.vocab_size)
    with open(path, "w", encoding="utf-8") as fh:
        for ids in sentence_ids(cfg):
            fh.write(" ".join(vocab[j] for j in ids))
            fh.write("\n")


def queries(cfg: SynthConfig, n: int, seed: int = 1, window: int = 10) -> list[OverlapQuery]:
    """Queries whose predicates are cut from real corpus sentences about half the time.

    The rest use random phrases, so both matching and non-matching queries
    are exercised.
    """
    vocab = vocabulary(cfg.vocab_size)
    rng = np.random.default_rng(seed)
    docs = [ids for ids, _ in zip(sentence_ids(cfg), range(min(cfg.n_sentences, 50_000)))]
    p = _probabilities(cfg)
    out = []
    for qi in range(n):
        la, lb = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        doc = docs[int(rng.integers(len(docs)))]
        if qi % 2 == 0 and len(doc) >= la + lb:
            a0 = int(rng.integers(0, len(doc) - la - lb + 1))
            gap = int(rng.integers(0, max(1, min(window + 3, len(doc) - a0 - la - lb + 1))))
            b0 = min(a0 + la + gap, len(doc) - lb)
            pa, pb = doc[a0 : a0 + la], doc[b0 : b0 + lb]
        else:
            pa = rng.choice(cfg.vocab_size, la, p=p)
            pb = rng.choice(cfg.vocab_size, lb, p=p)
        opt = rng.choice(cfg.vocab_size, int(rng.integers(0, 6)), p=p)
        out.append(OverlapQuery(
            f"q{qi:05d}", tuple(vocab[j] for j in pa), tuple(vocab[j] for j in pb), window,
            frozenset(vocab[j] for j in opt),
        ))
    return out
