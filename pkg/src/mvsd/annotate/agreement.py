"""Inter-annotator agreement and onboarding grading."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..errors import ArgumentError

LABEL_SARCASM = "Sarcasm"
LABEL_NOT_SARCASM = "NotSarcasm"
LABEL_UNDECIDED = "Undecided"
WIRE_LABELS = (LABEL_SARCASM, LABEL_NOT_SARCASM, LABEL_UNDECIDED)
FINAL_LABELS = (LABEL_SARCASM, LABEL_NOT_SARCASM)

ONBOARDING_SIZE = 100
ONBOARDING_THRESHOLD = 0.85


@dataclass
class KappaReport:
    n_items: int
    p_o: float
    p_e: float
    kappa: float

    def to_dict(self) -> dict:
        return {"n_items": self.n_items, "p_o": self.p_o, "p_e": self.p_e, "kappa": self.kappa}


def cohen_kappa(labels_a, labels_b) -> KappaReport:
    """Chance-corrected agreement between two equally long label lists.

    kappa = (p_o - p_e) / (1 - p_e) with p_e from the product of the two
    raters' marginal distributions. Perfect agreement with degenerate
    marginals (p_e = 1) is defined as kappa = 1.
    """
    if len(labels_a) != len(labels_b):
        raise ArgumentError("label lists differ in length")
    n = len(labels_a)
    if n == 0:
        raise ArgumentError("cannot compute agreement over zero items")
    p_o = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    counts_a = Counter(labels_a)
    counts_b = Counter(labels_b)
    p_e = sum(counts_a[c] * counts_b.get(c, 0) for c in counts_a) / (n * n)
    if p_e >= 1.0:
        kappa = 1.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return KappaReport(n_items=n, p_o=p_o, p_e=p_e, kappa=kappa)


def grade_onboarding(answers, gold) -> tuple:
    """Exact-match score against the gold labels; passing is >= 0.85 inclusive."""
    if len(answers) != len(gold):
        raise ArgumentError(
            f"answer count {len(answers)} does not match gold count {len(gold)}"
        )
    if not gold:
        raise ArgumentError("onboarding gold set is empty")
    score = sum(1 for a, g in zip(answers, gold) if a == g) / len(gold)
    return score, score >= ONBOARDING_THRESHOLD
