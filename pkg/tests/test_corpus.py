"""Corpus loading, stats and stratified subsampling."""
import json
import math

import numpy as np
import pytest

from mvsd.corpus import (
    Corpus,
    Sample,
    corpus_stats,
    load_corpus,
    save_corpus,
    subsample,
    tokenize,
)
from mvsd.errors import ArgumentError, ParseError, ValidationError

from conftest import make_sample


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")


def record(i, label=1, split="train", text="hello world"):
    return {"id": f"{split}-{i}", "text": text, "image_ref": f"i{i}.jpg",
            "label": label, "split": split}


def test_tokenize_collapses_whitespace():
    assert tokenize("  a  b\tc\n") == ["a", "b", "c"]
    assert tokenize("") == []


def test_load_save_round_trip(tmp_path):
    p = tmp_path / "c.jsonl"
    write_jsonl(p, [record(0), record(1, label=0), record(2, label=None, split="test")])
    corpus = load_corpus(p)
    assert len(corpus) == 3
    assert corpus["train-0"].label == 1
    assert corpus["test-2"].label is None
    out1 = tmp_path / "o1.jsonl"
    out2 = tmp_path / "o2.jsonl"
    save_corpus(corpus, out1)
    save_corpus(load_corpus(out1), out2)
    assert out1.read_bytes() == out2.read_bytes()


def test_load_rejects_malformed_json_with_line_number(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text(json.dumps(record(0)) + "\n{not json\n")
    with pytest.raises(ParseError, match=":2:"):
        load_corpus(p)


def test_load_rejects_duplicate_ids(tmp_path):
    p = tmp_path / "c.jsonl"
    write_jsonl(p, [record(0), record(0)])
    with pytest.raises(ValidationError, match="duplicate"):
        load_corpus(p)


def test_load_rejects_bad_label_and_split(tmp_path):
    p = tmp_path / "c.jsonl"
    write_jsonl(p, [dict(record(0), label=2)])
    with pytest.raises(ParseError, match="label"):
        load_corpus(p)
    write_jsonl(p, [dict(record(0), split="dev")])
    with pytest.raises(ParseError, match="split"):
        load_corpus(p)


def test_load_rejects_missing_fields(tmp_path):
    p = tmp_path / "c.jsonl"
    r = record(0)
    del r["image_ref"]
    write_jsonl(p, [r])
    with pytest.raises(ParseError, match="image_ref"):
        load_corpus(p)


def test_corpus_rejects_unknown_split_and_duplicates():
    with pytest.raises(ValidationError):
        Corpus([make_sample(0, 1, "train"), make_sample(0, 1, "train")])
    with pytest.raises(ValidationError):
        Corpus([Sample(id="x", text="t", image_ref="i", label=1, split="dev")])


def test_stats_counts(small_corpus):
    report = corpus_stats(small_corpus)
    d = report.to_dict()
    assert d["train"] == {"sentences": 4, "positive": 2, "negative": 2, "pending": 0}
    assert d["validation"]["sentences"] == 2
    assert d["test"]["sentences"] == 2
    text = report.render()
    assert "Sentences" in text and "Positive" in text and "Negative" in text


def test_stats_positive_plus_negative_equals_labeled():
    rng = np.random.default_rng(4)
    for trial in range(30):
        samples = []
        for i in range(int(rng.integers(1, 60))):
            split = ("train", "validation", "test")[int(rng.integers(0, 3))]
            label = int(rng.integers(0, 2))
            samples.append(make_sample(f"{trial}-{i}", label, split))
        report = corpus_stats(Corpus(samples))
        for split, st in report.to_dict().items():
            assert st["positive"] + st["negative"] == st["sentences"]


def test_stats_rejects_unlabeled_by_default():
    corpus = Corpus([make_sample(0, None), make_sample(1, 1)])
    with pytest.raises(ValidationError, match="train-0"):
        corpus_stats(corpus)
    report = corpus_stats(corpus, allow_pending=True)
    st = report.to_dict()["train"]
    assert st == {"sentences": 2, "positive": 1, "negative": 0, "pending": 1}


def _train_corpus(n_pos, n_neg):
    samples = [make_sample(f"p{i}", 1) for i in range(n_pos)]
    samples += [make_sample(f"n{i}", 0) for i in range(n_neg)]
    samples.append(make_sample(0, 1, "validation"))
    samples.append(make_sample(0, 0, "test"))
    return Corpus(samples)


def test_subsample_identity_at_one():
    corpus = _train_corpus(10, 10)
    out = subsample(corpus, 1.0, seed=3)
    assert [s.id for s in out.samples] == [s.id for s in corpus.samples]


def test_subsample_stratified_half():
    corpus = _train_corpus(10, 10)
    out = subsample(corpus, 0.5, seed=7)
    train = out.split_samples("train")
    assert sum(1 for s in train if s.label == 1) == 5
    assert sum(1 for s in train if s.label == 0) == 5
    # other splits untouched
    assert len(out.split_samples("validation")) == 1
    assert len(out.split_samples("test")) == 1


def test_subsample_ceil_rounding():
    corpus = _train_corpus(3, 5)
    out = subsample(corpus, 0.5, seed=0)
    train = out.split_samples("train")
    assert sum(1 for s in train if s.label == 1) == math.ceil(0.5 * 3)
    assert sum(1 for s in train if s.label == 0) == math.ceil(0.5 * 5)


def test_subsample_deterministic_and_ratio_preserving():
    rng = np.random.default_rng(9)
    for trial in range(20):
        n_pos = int(rng.integers(2, 40))
        n_neg = int(rng.integers(2, 40))
        corpus = _train_corpus(n_pos, n_neg)
        fraction = float(rng.uniform(0.1, 0.9))
        a = subsample(corpus, fraction, seed=trial)
        b = subsample(corpus, fraction, seed=trial)
        assert [s.id for s in a.samples] == [s.id for s in b.samples]
        train = a.split_samples("train")
        pos = sum(1 for s in train if s.label == 1)
        total = len(train)
        assert abs(pos / total - n_pos / (n_pos + n_neg)) <= 1.0 / total


def test_subsample_keeps_pending_train_samples():
    corpus = Corpus([make_sample(i, i % 2) for i in range(10)] + [make_sample("x", None)])
    out = subsample(corpus, 0.5, seed=1)
    assert "train-x" in out


def test_subsample_rejects_bad_fraction():
    corpus = _train_corpus(4, 4)
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(ArgumentError):
            subsample(corpus, bad, seed=0)
