"""Ratio-margin scoring and candidate pair selection.

The margin of a pair divides its cosine by the mean of the two endpoints'
k-neighborhood average cosines, which calibrates raw similarity against
local hubness. Each source sentence is paired with its best-margin forward
neighbor; a threshold selected from a prior proportion (or a fixed budget)
cuts the candidate list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import EmbeddingMatrix
from .errors import DataFormatError
from .knn import knn_search


@dataclass(frozen=True)
class CandidatePair:
    src_id: int
    tgt_id: int
    cos: float
    margin: float


@dataclass(frozen=True)
class ScoredNeighbor:
    tgt_id: int
    cos: float
    margin: float


@dataclass
class ScoredNeighbors:
    """Forward neighbors of one source, ranked by margin descending (ties by id)."""

    query_id: int
    entries: list[ScoredNeighbor]


@dataclass
class MiningConfig:
    """Knobs for one retrieval pass. Exactly one of prior/budget must be set."""

    k: int = 4
    prior: float | None = None
    budget: int | None = None
    shard_size: int = 32768

    def __post_init__(self) -> None:
        if (self.prior is None) == (self.budget is None):
            raise ValueError("exactly one of prior/budget must be set")
        if self.prior is not None and not 0.0 < self.prior <= 1.0:
            raise ValueError(f"prior must be in (0, 1], got {self.prior}")
        if self.budget is not None and self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.shard_size < 1:
            raise ValueError(f"shard_size must be >= 1, got {self.shard_size}")


def margin_score(cos_xy: float, avg_src_nn: float, avg_tgt_nn: float) -> float:
    """Ratio margin: pair cosine over the mean of the two neighborhood averages."""
    denom = 0.5 * (avg_src_nn + avg_tgt_nn)
    if denom == 0.0:
        raise ValueError("degenerate neighborhood: zero mean neighbor cosine")
    return cos_xy / denom


def mine_candidates(
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    cfg: MiningConfig,
    *,
    workers: int = 1,
) -> tuple[list[CandidatePair], list[ScoredNeighbors]]:
    """Pair every source sentence with its best-margin forward neighbor.

    Runs forward (src->tgt) and backward (tgt->src) k-NN, margin-scores each
    of the k forward neighbors of every source, and emits one CandidatePair
    per source (max margin, ties to the smaller target id). The full scored
    neighborhoods are returned as well; negative mining needs the ranked
    structure, not just the winner.

    Both matrices must be unit-normalized and share a dim.
    """
    if len(src) == 0:
        return [], []
    if len(tgt) == 0:
        raise ValueError("cannot mine against an empty target matrix")

    forward = knn_search(src, tgt, cfg.k, cfg.shard_size, workers=workers)
    backward = knn_search(tgt, src, cfg.k, cfg.shard_size, workers=workers)

    fwd_ids = np.array([[nb.id for nb in nl.neighbors] for nl in forward])
    fwd_cos = np.array([[nb.cos for nb in nl.neighbors] for nl in forward])
    bwd_cos = np.array([[nb.cos for nb in nl.neighbors] for nl in backward])
    avg_fwd = fwd_cos.mean(axis=1)
    avg_bwd = bwd_cos.mean(axis=1)

    denom = 0.5 * (avg_fwd[:, None] + avg_bwd[fwd_ids])
    if np.any(denom == 0.0):
        raise ValueError("degenerate neighborhood: zero mean neighbor cosine")
    margins = fwd_cos / denom

    candidates: list[CandidatePair] = []
    neighborhoods: list[ScoredNeighbors] = []
    for i in range(len(forward)):
        order = np.lexsort((fwd_ids[i], -margins[i]))
        entries = [
            ScoredNeighbor(int(fwd_ids[i][j]), float(fwd_cos[i][j]), float(margins[i][j]))
            for j in order
        ]
        neighborhoods.append(ScoredNeighbors(i, entries))
        best = entries[0]
        candidates.append(CandidatePair(i, best.tgt_id, best.cos, best.margin))
    return candidates, neighborhoods


def select_threshold(margins: list[float] | np.ndarray, cfg: MiningConfig) -> float:
    """The order statistic that retrieves ceil(prior*n) pairs (or min(budget, n))."""
    arr = np.asarray(margins, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot select a threshold from empty margins")
    if cfg.prior is not None:
        keep = math.ceil(cfg.prior * arr.size)
    else:
        keep = min(cfg.budget, arr.size)
    keep = max(keep, 1)
    return float(np.sort(arr)[::-1][keep - 1])


def apply_threshold(
    pairs: list[CandidatePair], threshold: float
) -> list[CandidatePair]:
    """Keep pairs with margin >= threshold, margin-descending (ties by ids)."""
    kept = [p for p in pairs if p.margin >= threshold]
    kept.sort(key=lambda p: (-p.margin, p.src_id, p.tgt_id))
    return kept


def write_pairs_tsv(pairs: list[CandidatePair], path: str | Path) -> None:
    """Candidate dump: ``src_id TAB tgt_id TAB cos TAB margin``."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(f"{p.src_id}\t{p.tgt_id}\t{p.cos:.12f}\t{p.margin:.12f}\n")


def read_pairs_tsv(path: str | Path) -> list[CandidatePair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 4 tab-separated fields"
                )
            try:
                pairs.append(
                    CandidatePair(
                        int(fields[0]), int(fields[1]),
                        float(fields[2]), float(fields[3]),
                    )
                )
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: malformed pair row") from exc
    return pairs
