"""Cutoff partitioning of scored test sets, subset accuracy and significance."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from wscoverlap.errors import DataError, StatError

DEFAULT_CUTOFFS = (0.0, 25.0, 35.0)
ALPHA = 0.05


@dataclass(frozen=True)
class PredictionFile:
    model_name: str
    entries: Mapping[str, int]


def read_predictions(path: str | Path, model_name: str | None = None) -> PredictionFile:
    """Tab-separated ``instance_id<TAB>answer`` lines; the model name defaults to the file stem."""
    path = Path(path)
    entries: dict[str, int] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), 1):
            if not row or not row[0].strip() or row[0].startswith("#"):
                continue
            if len(row) < 2:
                raise DataError("BadPrediction", f"{path}:{lineno}: expected 2 columns")
            iid, ans = row[0].strip(), row[1].strip()
            if ans not in ("1", "2"):
                raise DataError("BadPrediction", f"{path}:{lineno}: answer {ans!r} not in {{1, 2}}")
            if iid in entries:
                raise DataError("DuplicatePrediction", f"{path}:{lineno}: {iid}")
            entries[iid] = int(ans)
    return PredictionFile(model_name or path.stem, entries)


def read_scores(path: str | Path) -> dict[str, float]:
    """Overlap scores from a line-delimited JSON file with ``instance_id`` and ``max_score``."""
    out: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                iid, score = str(rec["instance_id"]), float(rec["max_score"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise DataError("BadScore", f"{path}:{lineno}: {e}") from None
            if iid in out:
                raise DataError("DuplicateScore", f"{path}:{lineno}: {iid}")
            out[iid] = score
    return out


@dataclass(frozen=True)
class PartitionReport:
    model: str
    cutoff: float
    overlap_size: int
    nonoverlap_size: int
    overlap_acc: float | None
    nonoverlap_acc: float | None
    overall_acc: float
    perf_diff: float | None
    chi2: float | None
    p_value: float | None
    significant: bool


@dataclass(frozen=True)
class OverlapCurve:
    points: tuple[tuple[float, float], ...]


def partition(scores: Mapping[str, float], cutoff: float) -> tuple[frozenset[str], frozenset[str]]:
    """Split ids into (score > cutoff, score <= cutoff)."""
    over = frozenset(i for i, s in scores.items() if s > cutoff)
    return over, frozenset(scores) - over


def subset_accuracy(subset: Iterable[str], predictions: PredictionFile | Mapping[str, int],
                    gold: Mapping[str, int]) -> float | None:
    """Fraction of ``subset`` predicted correctly; None for an empty subset."""
    preds = predictions.entries if isinstance(predictions, PredictionFile) else predictions
    subset = list(subset)
    missing = sorted(i for i in subset if i not in preds)
    if missing:
        raise DataError("MissingPrediction", ", ".join(missing))
    if not subset:
        return None
    return sum(preds[i] == gold[i] for i in subset) / len(subset)


def chi2_sf_1dof(stat: float) -> float:
    """Upper-tail probability of a chi-squared variable with one degree of freedom."""
    return math.erfc(math.sqrt(stat / 2))


def chi_squared_2x2(table: Sequence[Sequence[float]], yates: bool = False) -> tuple[float, float]:
    """Pearson chi-squared for a 2x2 table and its 1-dof upper-tail p-value."""
    (a, b), (c, d) = table
    cells = (a, b, c, d)
    if any(x < 0 for x in cells):
        raise StatError("NegativeCell", str(table))
    n = a + b + c + d
    rows = (a + b, c + d)
    cols = (a + c, b + d)
    if min(rows) <= 0 or min(cols) <= 0:
        raise StatError("DegenerateTable", str(table))
    stat = 0.0
    for i, row in enumerate(((a, b), (c, d))):
        for j, obs in enumerate(row):
            exp = rows[i] * cols[j] / n
            dev = abs(obs - exp)
            if yates:
                dev = max(0.0, dev - 0.5)
            stat += dev * dev / exp
    return stat, chi2_sf_1dof(stat)


def analyze(
    gold: Mapping[str, int],
    scores: Mapping[str, float],
    predictions: PredictionFile,
    cutoffs: Sequence[float] = DEFAULT_CUTOFFS,
    yates: bool = False,
) -> list[PartitionReport]:
    """One report per cutoff for a single model over the test set ``gold``."""
    missing_scores = sorted(set(gold) - set(scores))
    if missing_scores:
        raise DataError("MissingScore", ", ".join(missing_scores))
    missing = sorted(set(gold) - set(predictions.entries))
    if missing:
        raise DataError("MissingPrediction", f"{predictions.model_name}: {', '.join(missing)}")
    test_scores = {i: scores[i] for i in gold}
    overall = subset_accuracy(gold, predictions, gold)
    out = []
    for cutoff in cutoffs:
        over, non = partition(test_scores, cutoff)
        acc_o = subset_accuracy(over, predictions, gold)
        acc_n = subset_accuracy(non, predictions, gold)
        diff = None if acc_o is None or acc_n is None else acc_o - acc_n
        right_o = sum(predictions.entries[i] == gold[i] for i in over)
        right_n = sum(predictions.entries[i] == gold[i] for i in non)
        table = [[right_o, len(over) - right_o], [right_n, len(non) - right_n]]
        try:
            chi2, p = chi_squared_2x2(table, yates=yates)
        except StatError:
            chi2 = p = None
        out.append(PartitionReport(
            predictions.model_name, float(cutoff), len(over), len(non), acc_o, acc_n, overall,
            diff, chi2, p, p is not None and p < ALPHA,
        ))
    return out


def overlap_curve(scores: Mapping[str, float] | Sequence[float], cutoff_grid: Sequence[float]) -> OverlapCurve:
    """Proportion of instances whose score exceeds each cutoff."""
    values = list(scores.values()) if isinstance(scores, Mapping) else list(scores)
    if not values:
        raise ValueError("no scores")
    grid = list(cutoff_grid)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("cutoff grid must be ascending")
    n = len(values)
    return OverlapCurve(tuple((float(t), sum(v > t for v in values) / n) for t in grid))
