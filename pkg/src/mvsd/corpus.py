"""Canonical corpus records: JSONL loading, stats, stratified subsampling.

On-disk format is one JSON object per line with fields
{id, text, image_ref, label, split}. label is 1 (sarcastic), 0 (not
sarcastic) or null for annotation-pending exports.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ParseError, ValidationError

SPLITS = ("train", "validation", "test")


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization after trimming; the stored text is space-joined."""
    return text.split()


@dataclass
class Sample:
    id: str
    text: str
    image_ref: str
    label: int | None
    split: str
    tokens: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.tokens:
            self.tokens = tokenize(self.text)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "image_ref": self.image_ref,
            "label": self.label,
            "split": self.split,
        }


@dataclass
class Corpus:
    samples: list[Sample]

    def __post_init__(self):
        self._by_id = {}
        for s in self.samples:
            if s.id in self._by_id:
                raise ValidationError(f"duplicate sample id {s.id!r}")
            if s.split not in SPLITS:
                raise ValidationError(f"sample {s.id!r} has unknown split {s.split!r}")
            self._by_id[s.id] = s

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, sample_id: str) -> Sample:
        return self._by_id[sample_id]

    def __contains__(self, sample_id: str) -> bool:
        return sample_id in self._by_id

    def split_samples(self, split: str) -> list[Sample]:
        if split not in SPLITS:
            raise ArgumentError(f"unknown split {split!r}")
        return [s for s in self.samples if s.split == split]

    @property
    def split_index(self) -> dict[str, list[str]]:
        index = {split: [] for split in SPLITS}
        for s in self.samples:
            index[s.split].append(s.id)
        return index


@dataclass
class SplitStats:
    sentences: int = 0
    positive: int = 0
    negative: int = 0
    pending: int = 0


@dataclass
class StatsReport:
    splits: dict[str, SplitStats]

    def to_dict(self) -> dict:
        return {
            split: {
                "sentences": st.sentences,
                "positive": st.positive,
                "negative": st.negative,
                "pending": st.pending,
            }
            for split, st in self.splits.items()
        }

    def render(self) -> str:
        rows = [("", "Train", "Validation", "Test")]
        for label, attr in (("Sentences", "sentences"), ("Positive", "positive"),
                            ("Negative", "negative")):
            rows.append((label,) + tuple(
                f"{getattr(self.splits[s], attr):,}" for s in SPLITS))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        return "\n".join(
            "  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows
        )


REQUIRED_FIELDS = ("id", "text", "image_ref", "label", "split")


def load_corpus(path: str | Path) -> Corpus:
    """Parse a JSONL corpus file, validating ids, splits and labels."""
    path = Path(path)
    samples = []
    seen = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            missing = [f for f in REQUIRED_FIELDS if f not in record]
            if missing:
                raise ParseError(f"{path}:{lineno}: missing fields {missing}")
            if record["id"] in seen:
                raise ValidationError(f"{path}:{lineno}: duplicate id {record['id']!r}")
            seen.add(record["id"])
            label = record["label"]
            if label not in (0, 1, None):
                raise ParseError(f"{path}:{lineno}: label must be 0, 1 or null")
            if record["split"] not in SPLITS:
                raise ParseError(f"{path}:{lineno}: unknown split {record['split']!r}")
            samples.append(
                Sample(
                    id=str(record["id"]),
                    text=str(record["text"]),
                    image_ref=str(record["image_ref"]),
                    label=label,
                    split=record["split"],
                )
            )
    return Corpus(samples)


def save_corpus(corpus: Corpus, path: str | Path):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for s in corpus.samples:
            fh.write(json.dumps(s.to_record(), ensure_ascii=False) + "\n")


def corpus_stats(corpus: Corpus, allow_pending: bool = False) -> StatsReport:
    """Per-split sentence/positive/negative counts.

    Unlabeled samples are rejected unless allow_pending is set, in which case
    they count toward the sentence total only (annotation-pending exports).
    """
    pending_ids = [s.id for s in corpus.samples if s.label is None]
    if pending_ids and not allow_pending:
        shown = ", ".join(pending_ids[:10])
        more = "" if len(pending_ids) <= 10 else f" (+{len(pending_ids) - 10} more)"
        raise ValidationError(f"unlabeled samples: {shown}{more}")
    splits = {split: SplitStats() for split in SPLITS}
    for s in corpus.samples:
        st = splits[s.split]
        st.sentences += 1
        if s.label == 1:
            st.positive += 1
        elif s.label == 0:
            st.negative += 1
        else:
            st.pending += 1
    return StatsReport(splits)


def subsample(corpus: Corpus, fraction: float, seed: int) -> Corpus:
    """Reduce the train split, stratified by class; validation/test pass through.

    Each train class is independently cut to ceil(fraction * class_size) by a
    seeded draw, so the class ratio is preserved up to rounding and the result
    is deterministic in (corpus, fraction, seed).
    """
    if not (0.0 < fraction <= 1.0):
        raise ArgumentError(f"fraction must be in (0, 1], got {fraction}")
    if fraction == 1.0:
        return Corpus(list(corpus.samples))
    rng = np.random.Generator(np.random.PCG64(seed))
    keep: set[str] = set()
    for label in (0, 1):
        ids = [s.id for s in corpus.samples if s.split == "train" and s.label == label]
        k = math.ceil(fraction * len(ids))
        if ids:
            chosen = rng.choice(len(ids), size=k, replace=False)
            keep.update(ids[i] for i in chosen)
    kept_samples = [
        replace(s, tokens=list(s.tokens))
        for s in corpus.samples
        if s.split != "train" or s.id in keep or s.label is None
    ]
    return Corpus(kept_samples)
