#!/usr/bin/env python
"""Time index build, persist, load and batch scoring on a synthetic corpus."""

import argparse
import resource
import tempfile
import time
from pathlib import Path

from wscoverlap.index import build_index, load, persist
from wscoverlap.retrieval import instance_overlap
from wscoverlap.synth import SynthConfig, queries, sentences


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sentences", type=int, default=1_000_000)
    ap.add_argument("--vocab", type=int, default=50_000)
    ap.add_argument("--queries", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--keep", help="persist the index here instead of a temp dir")
    args = ap.parse_args()

    cfg = SynthConfig(n_sentences=args.sentences, vocab_size=args.vocab, seed=args.seed)
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(args.keep or tmp) / "idx"
        t = time.perf_counter()
        ix = build_index(sentences(cfg), "synth")
        t_build = time.perf_counter() - t
        print(f"build     {t_build:8.2f}s  {ix.stats.N} docs, {ix.stats.avgdl * ix.stats.N / 1e6:.1f}M tokens")
        t = time.perf_counter()
        persist(ix, out)
        print(f"persist   {time.perf_counter() - t:8.2f}s  "
              f"{sum(p.stat().st_size for p in out.iterdir()) / 2**20:.0f} MiB")
        del ix
        t = time.perf_counter()
        ix = load(out)
        print(f"load      {time.perf_counter() - t:8.2f}s")
        qs = queries(cfg, args.queries, seed=args.seed + 1)
        t = time.perf_counter()
        hits = sum(instance_overlap(q, [ix]).match_count > 0 for q in qs)
        print(f"score     {time.perf_counter() - t:8.2f}s  {len(qs)} queries, {hits} with a match")
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    print(f"peak RSS  {rss:8.0f} MiB")


if __name__ == "__main__":
    main()
