import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wscoverlap.errors import DataError, ParseError
from wscoverlap.schema import OverlapQuery, RawInstance, build_query, parse_instance, read_instances
from wscoverlap.text import normalize

# (context predicate, query predicate, candidate 1, candidate 2, pronoun, connective), typographic apostrophes kept
REFERENCE_ROWS = {
    "wsc-1b": ("couldn’t lift", "was so heavy", "the man", "his son", "he", "because"),
    "wsc-2a": ("were bullying", "punished", "the older students", "the younger ones", "them", "so"),
    "wsc-3b": ("tried to paint", "ended up looking more like", "shepherds", "sheep", "they", "but"),
}


def raw(sentence, a, b, p, answer=1, iid="x"):
    i = sentence.index(a)
    j = sentence.index(b, i + len(a))
    k = sentence.index(" " + p, j + len(b)) + 1
    return RawInstance(iid, sentence, (i, i + len(a)), (j, j + len(b)), (k, k + len(p)), answer)


@pytest.fixture
def reference(fixtures):
    return {r.instance_id: r for r in read_instances(fixtures / "reference_instances.jsonl")}


@pytest.mark.parametrize("iid", sorted(REFERENCE_ROWS))
def test_reference_rows(reference, iid):
    sk = parse_instance(reference[iid])
    got = tuple(sk.text(s) for s in (sk.pred_c, sk.pred_q, sk.e1, sk.e2, sk.pronoun, sk.connective))
    assert got == tuple(normalize(x) for x in REFERENCE_ROWS[iid])


def test_reference_query(reference):
    q = build_query(parse_instance(reference["wsc-1b"]))
    assert q.phrase_a == ("couldn't", "lift")
    assert q.phrase_b == ("was", "so", "heavy")
    assert q.window == 10
    assert q.optional_terms == {"the", "man", "his", "son", "because", "he"}
    assert str(q).startswith('Phrase("couldn\'t lift", "was so heavy", 10)')


def test_no_connective_omits_it():
    r = raw("The man lifted the boy and then he smiled happily.", "The man", "the boy", "he")
    sk = parse_instance(r, connectives=["because"])
    assert sk.connective is None
    q = build_query(sk)
    assert "and" not in q.optional_terms
    assert q.optional_terms == {"the", "man", "boy", "he"}


def test_content_word_dedup():
    r = raw("The man couldn't lift the boy because he was so heavy.", "The man", "the boy", "he")
    q = build_query(parse_instance(r))
    assert q.optional_terms == {"the", "man", "boy", "because", "he"}


def test_closest_connective_before_pronoun():
    r = raw("The man called the boy and waved because he was late.", "The man", "the boy", "he")
    sk = parse_instance(r)
    assert sk.text(sk.connective) == "because"


def test_bad_pronoun_multi_token():
    s = "The man couldn't lift his son because he was so heavy."
    r = RawInstance("x", s, (0, 7), (22, 29), (38, 44), 2)
    with pytest.raises(ParseError) as e:
        parse_instance(r)
    assert e.value.reason == "BadPronoun"


def test_bad_pronoun_not_pronoun():
    s = "The man couldn't lift his son because Bob was so heavy."
    r = raw(s, "The man", "his son", "Bob")
    with pytest.raises(ParseError) as e:
        parse_instance(r)
    assert e.value.reason == "BadPronoun"


def test_missing_predicate():
    r = raw("The man and the boy, because of him.", "The man", "the boy", "him")
    with pytest.raises(ParseError) as e:
        parse_instance(r)
    assert e.value.reason == "MissingPredicate"


def test_raw_instance_validation():
    with pytest.raises(DataError):
        RawInstance("x", "abc", (0, 5), (0, 1), (2, 3), 1)
    with pytest.raises(DataError):
        RawInstance("x", "abcdef", (0, 3), (2, 4), (5, 6), 1)
    with pytest.raises(DataError):
        RawInstance("x", "abcdef", (0, 1), (2, 3), (4, 5), 3)


def test_order_violations_are_flagged_not_rejected():
    s = "He said the man couldn't lift his son."
    r = RawInstance("x", s, (12, 15), (8, 11), (0, 2), 1)
    assert set(r.flags) == {"candidates_out_of_order", "pronoun_precedes_candidate"}


def test_read_instances_rejects_duplicates(tmp_path, fixtures):
    line = (fixtures / "reference_instances.jsonl").read_text().splitlines()[0]
    (tmp_path / "dup.jsonl").write_text(line + "\n" + line + "\n")
    with pytest.raises(DataError):
        read_instances(tmp_path / "dup.jsonl")


def test_instance_json_round_trip(reference):
    r = reference["wsc-2a"]
    assert RawInstance.from_json(json.loads(json.dumps(r.to_json()))) == r


def test_query_validation():
    with pytest.raises(ValueError):
        OverlapQuery("x", (), ("a",))
    with pytest.raises(ValueError):
        OverlapQuery("x", ("a",), ("b",), window=-1)


def test_query_terms_sorted_union():
    q = OverlapQuery("x", ("b", "a"), ("c",), 10, frozenset({"a", "z"}))
    assert q.terms == ("a", "b", "c", "z")


# ---------------------------------------------------------------------------
# properties over generated instances

SUBJECTS = ["The man", "The doctor", "Anna", "The old farmer", "My brother"]
OBJECTS = ["his son", "the nurse", "the young pilot", "Peter", "her friend"]
VERBS = ["couldn't lift", "called", "was helping", "tried to warn", "thanked"]
CONNS = ["because", "but", "so", "although"]
PRONS = ["he", "she", "they"]
TAILS = ["was so heavy", "was late", "had left early", "seemed very tired", "ran away"]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SUBJECTS), st.sampled_from(VERBS), st.sampled_from(OBJECTS),
       st.sampled_from(CONNS), st.sampled_from(PRONS), st.sampled_from(TAILS))
def test_parse_properties(subj, verb, obj, conn, pron, tail):
    s = f"{subj} {verb} {obj} {conn} {pron} {tail}."
    r = raw(s, subj, obj, pron)
    sk = parse_instance(r)
    spans = [sk.e1, sk.e2, sk.pred_c, sk.pred_q, sk.pronoun]
    covered = [i for a, b in spans for i in range(a, b + 1)]
    assert len(covered) == len(set(covered))
    assert sk.pred_c[0] <= sk.pred_c[1] and sk.pred_q[0] <= sk.pred_q[1]
    if sk.connective:
        assert sk.pred_c[1] < sk.connective[0]
    assert not set(sk.content_positions) & set(range(sk.pred_c[0], sk.pred_c[1] + 1))
    assert sk.text(sk.pred_c) == normalize(verb)
    q1, q2 = build_query(sk), build_query(parse_instance(r))
    assert json.dumps(q1.to_json()) == json.dumps(q2.to_json())
