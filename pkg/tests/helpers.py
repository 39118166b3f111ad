"""Deterministic test-set builders shared by several test modules."""

import json
import random

from wscoverlap.analysis import PredictionFile


def calibrated_wsc(seed: int = 0):
    """273 instances: 53 with a positive overlap score (42 predicted correctly),
    220 scored 0 (153 predicted correctly), matching the reference subset sizes
    and accuracies for the WSC test set at cutoff 0."""
    rng = random.Random(seed)
    gold, scores, preds = {}, {}, {}
    for i in range(273):
        iid = f"wsc{i:03d}"
        over = i < 53
        gold[iid] = rng.choice((1, 2))
        scores[iid] = round(rng.uniform(0.5, 45.0), 3) if over else 0.0
        right = i < 42 if over else i < 53 + 153
        preds[iid] = gold[iid] if right else 3 - gold[iid]
    return gold, scores, PredictionFile("bert", preds)


def write_instances(path, gold):
    """Minimal valid instance file for the given gold answers."""
    sentence = "The man called the boy because he was late."
    with open(path, "w", encoding="utf-8") as fh:
        for iid, ans in gold.items():
            fh.write(json.dumps({"id": iid, "sentence": sentence, "span1": [0, 7], "span2": [15, 22],
                                 "pronoun": [31, 33], "answer": ans}) + "\n")


def write_scores(path, scores):
    with open(path, "w", encoding="utf-8") as fh:
        for iid, s in sorted(scores.items()):
            fh.write(json.dumps({"instance_id": iid, "max_score": s, "match_count": int(s > 0),
                                 "best_match": None}) + "\n")


def write_predictions(path, preds):
    with open(path, "w", encoding="utf-8") as fh:
        for iid, p in sorted(preds.items()):
            fh.write(f"{iid}\t{p}\n")
