import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from helpers import calibrated_wsc
from wscoverlap.analysis import (
    PredictionFile, analyze, chi2_sf_1dof, chi_squared_2x2, overlap_curve, partition, read_predictions, read_scores,
    subset_accuracy,
)
from wscoverlap.errors import DataError, StatError

SCORES = {"a": 0.0, "b": 12.3, "c": 0.0, "d": 40.1}


def test_partition_examples():
    assert partition(SCORES, 0) == ({"b", "d"}, {"a", "c"})
    assert partition(SCORES, 35) == ({"d"}, {"a", "b", "c"})


def test_partition_is_strict():
    assert partition({"x": 25.0}, 25) == (set(), {"x"})


def test_calibrated_wsc_sizes():
    gold, scores, preds = calibrated_wsc()
    over, non = partition(scores, 0)
    assert (len(over), len(non)) == (53, 220)
    assert subset_accuracy(over, preds, gold) == pytest.approx(0.792, abs=1e-3)
    assert subset_accuracy(non, preds, gold) == pytest.approx(0.695, abs=1e-3)


@given(st.dictionaries(st.text(min_size=1, max_size=4), st.floats(0, 60), min_size=1, max_size=40),
       st.floats(0, 60))
def test_partition_exhaustive_and_exclusive(scores, cutoff):
    over, non = partition(scores, cutoff)
    assert not over & non
    assert over | non == set(scores)
    assert len(over) + len(non) == len(scores)


def test_subset_accuracy():
    gold = {"a": 1, "b": 2, "c": 1, "d": 2}
    preds = PredictionFile("m", {"a": 1, "b": 2, "c": 1, "d": 1})
    assert subset_accuracy(gold, preds, gold) == 0.75
    assert subset_accuracy([], preds, gold) is None
    with pytest.raises(DataError) as e:
        subset_accuracy(["a", "zz"], preds, gold)
    assert "zz" in str(e.value)


def test_chi_squared_examples():
    assert chi_squared_2x2([[10, 10], [10, 10]]) == (0.0, 1.0)
    stat, p = chi_squared_2x2([[30, 10], [20, 20]])
    assert stat == pytest.approx(5.333, abs=1e-3)
    assert p == pytest.approx(0.0209, abs=1e-3)
    with pytest.raises(StatError):
        chi_squared_2x2([[1, 0], [0, 0]])


def test_chi_squared_matches_scipy():
    rng = random.Random(0)
    for _ in range(200):
        t = [[rng.randint(1, 60), rng.randint(1, 60)], [rng.randint(1, 60), rng.randint(1, 60)]]
        stat, p = chi_squared_2x2(t)
        ref_stat, ref_p, _ = oracles.chi2_2x2(t)
        assert stat == pytest.approx(ref_stat, rel=1e-12)
        assert p == pytest.approx(ref_p, rel=1e-9, abs=1e-15)


def test_yates_matches_scipy():
    from scipy.stats import chi2_contingency

    t = [[30, 10], [20, 20]]
    stat, p = chi_squared_2x2(t, yates=True)
    ref = chi2_contingency(t, correction=True)
    assert stat == pytest.approx(ref[0])
    assert p == pytest.approx(ref[1])


def test_critical_value():
    _, p = chi_squared_2x2([[1, 1], [1, 1]])
    assert p == 1.0
    assert chi2_sf_1dof(3.841) == pytest.approx(0.05, abs=1e-3)
    assert chi2_sf_1dof(0.0) == 1.0


cells = st.integers(min_value=1, max_value=500)


@given(cells, cells, cells, cells)
def test_chi_squared_symmetries(a, b, c, d):
    base = chi_squared_2x2([[a, b], [c, d]])
    transposed = chi_squared_2x2([[a, c], [b, d]])
    swapped = chi_squared_2x2([[d, c], [b, a]])
    assert transposed[0] == pytest.approx(base[0], rel=1e-9, abs=1e-12)
    assert swapped[0] == pytest.approx(base[0], rel=1e-9, abs=1e-12)
    assert 0 < base[1] <= 1


def _fixture(counts):
    """Build gold/scores/predictions from a correct x subset table."""
    (ro, wo), (rn, wn) = counts
    gold, scores, preds = {}, {}, {}
    i = 0
    for n, score, right in ((ro, 10.0, True), (wo, 10.0, False), (rn, 0.0, True), (wn, 0.0, False)):
        for _ in range(n):
            iid = f"i{i:04d}"
            gold[iid] = 1
            scores[iid] = score
            preds[iid] = 1 if right else 2
            i += 1
    return gold, scores, PredictionFile("m", preds)


def test_analyze_equal_accuracy():
    gold, scores, preds = _fixture([[10, 10], [10, 10]])
    r = analyze(gold, scores, preds, cutoffs=[0])[0]
    assert r.perf_diff == 0
    assert not r.significant


def test_analyze_significant_fixture():
    gold, scores, preds = _fixture([[30, 10], [20, 20]])
    r = analyze(gold, scores, preds, cutoffs=[0])[0]
    assert r.significant
    assert r.chi2 == pytest.approx(5.333, abs=1e-3)
    assert (r.overlap_size, r.nonoverlap_size) == (40, 40)


def test_analyze_negative_difference():
    gold, scores, preds = _fixture([[5, 5], [8, 2]])
    r = analyze(gold, scores, preds, cutoffs=[0])[0]
    assert r.perf_diff < 0


def test_analyze_weighted_mean_identity():
    gold, scores, preds = calibrated_wsc()
    for r in analyze(gold, scores, preds):
        parts = [(n, a) for n, a in ((r.overlap_size, r.overlap_acc), (r.nonoverlap_size, r.nonoverlap_acc)) if n]
        assert sum(n * a for n, a in parts) / len(gold) == pytest.approx(r.overall_acc, abs=1e-12)
        assert r.overlap_size + r.nonoverlap_size == len(gold)


def test_analyze_empty_subset():
    gold, scores, preds = _fixture([[3, 1], [0, 0]])
    r = analyze(gold, scores, preds, cutoffs=[0, 50])
    assert r[0].nonoverlap_size == 0 and r[0].nonoverlap_acc is None
    assert r[0].chi2 is None and not r[0].significant
    assert r[1].overlap_size == 0 and r[1].overlap_acc is None


def test_analyze_missing_prediction_lists_id():
    gold, scores, preds = _fixture([[3, 1], [2, 2]])
    del preds.entries["i0002"]
    with pytest.raises(DataError) as e:
        analyze(gold, scores, preds)
    assert "i0002" in str(e.value)


def test_analyze_is_pure():
    gold, scores, preds = calibrated_wsc()
    assert analyze(gold, scores, preds) == analyze(dict(gold), dict(scores), preds)


def test_overlap_curve_examples():
    assert overlap_curve([0, 10, 20, 30], [0, 15, 25]).points == ((0, 0.75), (15, 0.5), (25, 0.25))
    assert {p for _, p in overlap_curve([0.0] * 5, [0, 1, 2]).points} == {0.0}
    with pytest.raises(ValueError):
        overlap_curve([1.0], [5, 1])


def test_overlap_curve_recount_500():
    rng = random.Random(42)
    values = [0.0 if rng.random() < 0.4 else rng.uniform(0, 60) for _ in range(500)]
    grid = [float(t) for t in range(0, 61, 2)]
    assert list(overlap_curve(values, grid).points) == oracles.curve(values, grid)


@given(st.lists(st.floats(0, 100), min_size=1, max_size=100),
       st.lists(st.floats(0, 100), min_size=1, max_size=20))
def test_overlap_curve_properties(values, grid):
    grid = sorted(grid)
    pts = overlap_curve(values, grid).points
    props = [p for _, p in pts]
    assert all(0 <= p <= 1 for p in props)
    assert all(b <= a for a, b in zip(props, props[1:]))
    zero = overlap_curve(values, [0.0]).points[0][1]
    assert zero == len(partition(dict(enumerate(values)), 0)[0]) / len(values)


def test_read_predictions(tmp_path):
    p = tmp_path / "bert.tsv"
    p.write_text("a\t1\nb\t2\n# comment\n\n")
    pf = read_predictions(p)
    assert pf.model_name == "bert" and pf.entries == {"a": 1, "b": 2}
    p.write_text("a\t3\n")
    with pytest.raises(DataError):
        read_predictions(p)
    p.write_text("a\t1\na\t2\n")
    with pytest.raises(DataError):
        read_predictions(p)


def test_read_scores(tmp_path):
    p = tmp_path / "s.jsonl"
    p.write_text('{"instance_id": "a", "max_score": 1.5}\n{"instance_id": "b", "max_score": 0}\n')
    assert read_scores(p) == {"a": 1.5, "b": 0.0}
    p.write_text('{"instance_id": "a"}\n')
    with pytest.raises(DataError):
        read_scores(p)
