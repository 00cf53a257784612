import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mkge.kg_store import KgDataset, Triple, Vocabulary, build_dataset, contains, parse_triples


def write(tmp_path, text, name="f.txt"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_parse_hrt(tmp_path):
    assert parse_triples(write(tmp_path, "A\tr1\tB\n"), "hrt") == [("A", "r1", "B")]


def test_parse_htr(tmp_path):
    assert parse_triples(write(tmp_path, "A\tB\tr1\n"), "htr") == [("A", "r1", "B")]


def test_parse_arity_error(tmp_path):
    with pytest.raises(ValueError, match="expected 3 fields, got 2 at line 1"):
        parse_triples(write(tmp_path, "A\tB\n"))


def test_parse_skips_blank_lines_and_reports_later_line(tmp_path):
    p = write(tmp_path, "A\tr\tB\n\nC\tr\tD\tE\n")
    with pytest.raises(ValueError, match="got 4 at line 3"):
        parse_triples(p)


def test_parse_missing_file(tmp_path):
    with pytest.raises(OSError):
        parse_triples(tmp_path / "nope.txt")


def test_build_small():
    ds = build_dataset([("A", "r", "B")], [("B", "r", "A")], [])
    assert ds.entities.names == ["A", "B"]
    assert ds.relations.names == ["r"]
    assert len(ds.filter_index) == 2


def test_duplicates_kept_in_train_collapsed_in_filter():
    ds = build_dataset([("A", "r", "B"), ("A", "r", "B")])
    assert len(ds.train) == 2
    assert len(ds.filter_index) == 1


def test_contains_union_semantics():
    ds = build_dataset([("A", "r", "B")], [], [("C", "r", "A")])
    a, b, c = (ds.entities.encode(x) for x in "ABC")
    assert contains(ds.filter_index, Triple(a, b, 0))
    assert contains(ds.filter_index, Triple(c, a, 0))
    assert not contains(ds.filter_index, Triple(b, a, 0))


def test_unseen_entity_warns(caplog):
    with caplog.at_level("WARNING"):
        ds = build_dataset([("A", "r", "B")], [("A", "r", "Z")])
    assert "Z" in ds.entities
    assert "untrained" in caplog.text


def test_save_load_roundtrip(tmp_path):
    ds = build_dataset([("A", "r", "B"), ("B", "s", "C")], [("C", "r", "A")], [])
    ds.save(tmp_path / "d")
    back = KgDataset.load(tmp_path / "d")
    assert back.entities.names == ds.entities.names
    assert back.relations.names == ds.relations.names
    np.testing.assert_array_equal(back.train, ds.train)
    np.testing.assert_array_equal(back.valid, ds.valid)
    assert back.test.shape == (0, 3)
    assert len(back.filter_index) == len(ds.filter_index)


names = st.text(alphabet="abcdefgh", min_size=1, max_size=3)
raw_triples = st.lists(st.tuples(names, st.sampled_from(["r", "s", "t"]), names), max_size=30)


@given(raw_triples, raw_triples, raw_triples)
def test_dataset_invariants(train, valid, test):
    ds = build_dataset(train, valid, test)
    for i, name in enumerate(ds.entities.names):
        assert ds.entities.encode(name) == i
    for i, name in enumerate(ds.relations.names):
        assert ds.relations.encode(name) == i
    union = {tuple(x) for x in np.concatenate([ds.train, ds.valid, ds.test]).tolist()}
    assert len(ds.filter_index) == len(union)
    assert len(ds.filter_index) <= len(train) + len(valid) + len(test)
    for trip in union:
        assert trip in ds.filter_index
    # deterministic re-encoding
    again = build_dataset(train, valid, test)
    assert again.entities.names == ds.entities.names
    np.testing.assert_array_equal(again.train, ds.train)


@given(raw_triples)
def test_filter_has_no_false_positives(train):
    ds = build_dataset(train)
    present = {tuple(x) for x in ds.train.tolist()}
    n, m = ds.num_entities, max(ds.num_relations, 1)
    for h in range(n):
        for t in range(n):
            for r in range(m):
                assert ((h, t, r) in ds.filter_index) == ((h, t, r) in present)


def test_vocab_file_roundtrip(tmp_path):
    v = Vocabulary(["x", "y y", "z"])
    v.save(tmp_path / "v.txt")
    assert Vocabulary.load(tmp_path / "v.txt").names == ["x", "y y", "z"]
