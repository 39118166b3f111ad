#!/usr/bin/env python
"""Write a Zipf-distributed synthetic corpus (one sentence per line) and a query file.

The corpus goes through ``wscoverlap index --format lines``; the queries are
written as JSON lines for the benchmark script.
"""

import argparse
import json
from dataclasses import fields

from wscoverlap.synth import SynthConfig, queries, write_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f in fields(SynthConfig):
        ap.add_argument("--" + f.name.replace("_", "-"), type=type(f.default), default=f.default)
    ap.add_argument("--queries", type=int, default=0, help="also write this many queries")
    ap.add_argument("--out", required=True, help="corpus path")
    args = ap.parse_args()
    cfg = SynthConfig(**{f.name: getattr(args, f.name) for f in fields(SynthConfig)})
    write_corpus(cfg, args.out)
    if args.queries:
        with open(args.out + ".queries.jsonl", "w", encoding="utf-8") as fh:
            for q in queries(cfg, args.queries):
                fh.write(json.dumps(q.to_json(), sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
