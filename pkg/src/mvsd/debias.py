"""Spurious-cue removal: hashtag words and emoji placeholder words.

Hashtag words are tokens starting with '#'. Emoji words follow the
emoji_<digits> placeholder convention; an optional lexicon extends detection
to corpora that store literal emoji tokens.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import SPLITS, Corpus, Sample
from .errors import ValidationError

EMOJI_WORD = re.compile(r"^emoji_[0-9]+$")


@dataclass
class CueSpans:
    hashtag_indices: list[int]
    emoji_indices: list[int]

    def all_indices(self) -> set[int]:
        return set(self.hashtag_indices) | set(self.emoji_indices)


@dataclass
class BiasReport:
    # split -> class label -> mean hashtag tokens per sample
    hashtag_means: dict[str, dict[int, float]]
    emoji_vocab_size: int
    emoji_both_classes_fraction: float
    emoji_single_class_fraction: float
    emptied_sample_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "hashtag_means": {
                split: {str(lbl): mean for lbl, mean in by_class.items()}
                for split, by_class in self.hashtag_means.items()
            },
            "emoji_vocab_size": self.emoji_vocab_size,
            "emoji_both_classes_fraction": self.emoji_both_classes_fraction,
            "emoji_single_class_fraction": self.emoji_single_class_fraction,
            "emptied_sample_ids": self.emptied_sample_ids,
        }


def detect_hashtags(tokens: list[str]) -> list[int]:
    return [i for i, tok in enumerate(tokens) if tok.startswith("#")]


def detect_emoji_words(tokens: list[str], lexicon: set[str] | None = None) -> list[int]:
    lexicon = lexicon or set()
    return [
        i for i, tok in enumerate(tokens)
        if EMOJI_WORD.match(tok) or tok in lexicon
    ]


def find_cues(tokens: list[str], lexicon: set[str] | None = None) -> CueSpans:
    hashtags = detect_hashtags(tokens)
    taken = set(hashtags)
    emoji = [i for i in detect_emoji_words(tokens, lexicon) if i not in taken]
    return CueSpans(hashtags, emoji)


def strip_spurious(sample: Sample, lexicon: set[str] | None = None) -> Sample:
    """Copy of the sample with cue tokens deleted and text re-joined."""
    cues = find_cues(sample.tokens, lexicon).all_indices()
    kept = [tok for i, tok in enumerate(sample.tokens) if i not in cues]
    return replace(sample, text=" ".join(kept), tokens=kept)


def bias_report(corpus: Corpus, lexicon: set[str] | None = None) -> BiasReport:
    """Class-conditional hashtag means and emoji-word class overlap."""
    unlabeled = [s.id for s in corpus.samples if s.label is None]
    if unlabeled:
        raise ValidationError(f"unlabeled samples: {', '.join(unlabeled[:10])}")
    counts: dict[str, dict[int, list[int]]] = {
        split: {0: [], 1: []} for split in SPLITS
    }
    emoji_classes: dict[str, set[int]] = {}
    for s in corpus.samples:
        counts[s.split][s.label].append(len(detect_hashtags(s.tokens)))
        for i in detect_emoji_words(s.tokens, lexicon):
            emoji_classes.setdefault(s.tokens[i], set()).add(s.label)
    means = {
        split: {
            lbl: (sum(vals) / len(vals) if vals else 0.0)
            for lbl, vals in by_class.items()
        }
        for split, by_class in counts.items()
    }
    vocab = len(emoji_classes)
    both = sum(1 for classes in emoji_classes.values() if len(classes) == 2)
    return BiasReport(
        hashtag_means=means,
        emoji_vocab_size=vocab,
        emoji_both_classes_fraction=(both / vocab if vocab else 0.0),
        emoji_single_class_fraction=((vocab - both) / vocab if vocab else 0.0),
    )


def debias_corpus(
    corpus: Corpus, lexicon: set[str] | None = None
) -> tuple[Corpus, BiasReport, BiasReport]:
    """Strip cues from every sample; returns (corpus, report before, report after)."""
    before = bias_report(corpus, lexicon)
    stripped = [strip_spurious(s, lexicon) for s in corpus.samples]
    cleaned = Corpus(stripped)
    after = bias_report(cleaned, lexicon)
    after.emptied_sample_ids = [
        s.id for s, orig in zip(stripped, corpus.samples) if not s.tokens and orig.tokens
    ]
    return cleaned, before, after


def load_lexicon(path: str | Path) -> set[str]:
    """One emoji token per line; blank lines ignored."""
    tokens = set()
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            tok = line.strip()
            if tok:
                tokens.add(tok)
    return tokens


def write_report(report_before: BiasReport, report_after: BiasReport, path: str | Path):
    payload = {"before": report_before.to_dict(), "after": report_after.to_dict()}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
