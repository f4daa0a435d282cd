"""Rule-based post-retrieval filters: digit agreement and near-duplicate removal.

Two cheap predicates catch most mismatched pairs: true translations must
carry exactly the same digit runs, and sentences copied verbatim across the
two corpora (same text on both sides) are not translations at all.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import Corpus
from .mining import CandidatePair

_DIGIT_RUN_RE = re.compile(r"[0-9]+")


@dataclass
class FilterReport:
    kept: list[CandidatePair]
    dropped_digit: int
    dropped_edit: int

    @property
    def n_input(self) -> int:
        return len(self.kept) + self.dropped_digit + self.dropped_edit

    def summary(self) -> str:
        return (
            f"filters: kept={len(self.kept)} "
            f"dropped_digit={self.dropped_digit} dropped_edit={self.dropped_edit}"
        )


def digit_signature(sentence: str) -> set[str]:
    """The set of maximal ASCII digit runs, as strings (leading zeros kept)."""
    return set(_DIGIT_RUN_RE.findall(sentence))


def digit_filter_pass(src_text: str, tgt_text: str) -> bool:
    return digit_signature(src_text) == digit_signature(tgt_text)


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over Unicode scalar values, two-row DP."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(b) > len(a):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def edit_distance_ratio(a: str, b: str) -> float:
    """levenshtein(a, b) / max(|a|, |b|); two empty strings count as identical (0)."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


def edit_distance_pass(src_text: str, tgt_text: str) -> bool:
    """Keep (True) iff the pair differs in more than half its characters."""
    longest = max(len(src_text), len(tgt_text))
    if longest == 0:
        return False
    # distance >= length gap, so a large gap proves "keep" without the DP
    if abs(len(src_text) - len(tgt_text)) > 0.5 * longest:
        return True
    return edit_distance_ratio(src_text, tgt_text) > 0.5


def filter_pairs(
    pairs: list[CandidatePair], src_corpus: Corpus, tgt_corpus: Corpus
) -> FilterReport:
    """Apply the digit filter then the edit-distance filter.

    The two predicates are independent, so the kept set does not depend on
    their order; drop counts attribute each removal to the first failing rule.
    """
    kept: list[CandidatePair] = []
    dropped_digit = 0
    dropped_edit = 0
    for pair in pairs:
        if not 0 <= pair.src_id < len(src_corpus):
            raise ValueError(f"source id {pair.src_id} out of range")
        if not 0 <= pair.tgt_id < len(tgt_corpus):
            raise ValueError(f"target id {pair.tgt_id} out of range")
        src_text = src_corpus[pair.src_id]
        tgt_text = tgt_corpus[pair.tgt_id]
        if not digit_filter_pass(src_text, tgt_text):
            dropped_digit += 1
        elif not edit_distance_pass(src_text, tgt_text):
            dropped_edit += 1
        else:
            kept.append(pair)
    return FilterReport(kept, dropped_digit, dropped_edit)
