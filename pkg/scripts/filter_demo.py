#!/usr/bin/env python
"""Score the four retrieved sentences for "The man couldn't lift his son ..."

Prints each sentence's BM25 score with and without the proximity filter, so
the effect of the filter on the reference ranking can be inspected.
"""

from pathlib import Path

from wscoverlap.index import build_index
from wscoverlap.retrieval import bm25_score, proximity_filter
from wscoverlap.schema import build_query, parse_instance, read_instances
from wscoverlap.text import read_corpus

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    ix = build_index(read_corpus(FIXTURES / "lifting_corpus.txt", "lines"), "lifting")
    query = build_query(parse_instance(read_instances(FIXTURES / "reference_instances.jsonl")[0]))
    print(query)
    print()
    for d in range(4):
        rec = ix.doc(d)
        passed = proximity_filter(rec.norms, query.phrase_a, query.phrase_b, query.window) is not None
        score = bm25_score(query, rec.norms, ix.stats)
        print(f"{score:6.2f}  {'pass' if passed else 'drop'}  {rec.stored_text[:90]}")


if __name__ == "__main__":
    main()
