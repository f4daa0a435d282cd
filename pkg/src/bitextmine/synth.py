"""Synthetic benchmark with planted ground-truth alignments.

Target embeddings are random unit vectors. The whole source cloud lives in a
rotated copy of the target space: planted source rows are the rotated,
noise-perturbed gold targets, filler rows are rotated fresh unit vectors.
Retrieval therefore degrades with the rotation angle and the noise level,
and a trained projection head can recover the rotation. Sentence texts are
synthesized so that gold pairs share digit signatures while every other
cross-side pair differs, which exercises the rule-based filters.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, EmbeddingMatrix, save_corpus, write_embeddings

# Keeps round-0 retrieval partially working: the rotation must bend the
# space enough to leave headroom for self-training, but not so far that the
# gold pair drops out of its source's neighborhood entirely. 1.1 puts the
# reference benchmark (10k x 10k, dim 64, sigma 0.3) near round-0 F1 0.78.
DEFAULT_ROTATION = 1.1

# Digit tokens are drawn from disjoint ranges so a cross-side signature
# match happens exactly on gold pairs.
_GOLD_DIGIT_BASE = 5_000_000
_SRC_DIGIT_BASE = 1_000_000
_TGT_DIGIT_BASE = 8_000_000


@dataclass
class SynthConfig:
    n_src: int
    n_tgt: int
    n_parallel: int
    dim: int
    noise_sigma: float
    seed: int
    rotation: float = DEFAULT_ROTATION

    def __post_init__(self) -> None:
        if self.n_src < 0 or self.n_tgt < 0:
            raise ValueError("corpus sizes must be non-negative")
        if not 0 <= self.n_parallel <= min(self.n_src, self.n_tgt):
            raise ValueError("n_parallel must be <= min(n_src, n_tgt)")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.rotation < 0:
            raise ValueError("rotation must be >= 0")


@dataclass
class SyntheticData:
    src_corpus: Corpus
    tgt_corpus: Corpus
    src_emb: EmbeddingMatrix
    tgt_emb: EmbeddingMatrix
    gold: list[tuple[int, int]]


def _unit_rows(rows: np.ndarray) -> np.ndarray:
    return rows / np.linalg.norm(rows, axis=1)[:, None]


def _partial_rotation(rng: np.random.Generator, dim: int, strength: float) -> np.ndarray:
    """Orthogonalized identity-plus-noise; strength 0 gives the exact identity."""
    seed_matrix = np.eye(dim) + strength * rng.standard_normal((dim, dim)) / np.sqrt(dim)
    Q, R = np.linalg.qr(seed_matrix)
    return Q * np.sign(np.diag(R))


def generate_synthetic(cfg: SynthConfig) -> SyntheticData:
    """Deterministic benchmark instance: same seed, bit-identical output."""
    rng = np.random.default_rng(cfg.seed)

    tgt_rows = _unit_rows(rng.standard_normal((cfg.n_tgt, cfg.dim)))
    Q = _partial_rotation(rng, cfg.dim, cfg.rotation)
    planted_src = rng.permutation(cfg.n_src)[: cfg.n_parallel]
    planted_tgt = rng.permutation(cfg.n_tgt)[: cfg.n_parallel]

    src_rows = _unit_rows(rng.standard_normal((cfg.n_src, cfg.dim))) @ Q
    if cfg.n_parallel:
        noisy = tgt_rows[planted_tgt]
        if cfg.noise_sigma > 0:
            # 1/sqrt(dim) calibrates the noise vector norm to ~sigma, so the
            # signal-to-noise ratio of a planted pair is dim-independent
            scale = cfg.noise_sigma / np.sqrt(cfg.dim)
            noisy = noisy + scale * rng.standard_normal(noisy.shape)
        src_rows[planted_src] = _unit_rows(noisy @ Q)

    gold_digit = {}
    for p in range(cfg.n_parallel):
        gold_digit[("src", int(planted_src[p]))] = _GOLD_DIGIT_BASE + p
        gold_digit[("tgt", int(planted_tgt[p]))] = _GOLD_DIGIT_BASE + p

    src_sentences = [
        f"quellsatz vermerk {gold_digit.get(('src', i), _SRC_DIGIT_BASE + i)} zeichen de"
        for i in range(cfg.n_src)
    ]
    tgt_sentences = [
        f"archive record {gold_digit.get(('tgt', j), _TGT_DIGIT_BASE + j)} marker en"
        for j in range(cfg.n_tgt)
    ]

    gold = sorted(
        (int(s), int(t)) for s, t in zip(planted_src, planted_tgt)
    )
    return SyntheticData(
        Corpus(src_sentences, "src"),
        Corpus(tgt_sentences, "tgt"),
        EmbeddingMatrix(src_rows),
        EmbeddingMatrix(tgt_rows),
        gold,
    )


def write_gold_tsv(gold: list[tuple[int, int]], path: str | Path) -> None:
    Path(path).write_text(
        "".join(f"{s}\t{t}\n" for s, t in gold), encoding="utf-8"
    )


def write_synthetic(data: SyntheticData, out_dir: str | Path) -> dict[str, Path]:
    """Write the benchmark files into out_dir and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "src_txt": out / "src.txt",
        "tgt_txt": out / "tgt.txt",
        "src_emb": out / "src.emb",
        "tgt_emb": out / "tgt.emb",
        "gold": out / "gold.tsv",
    }
    save_corpus(data.src_corpus, paths["src_txt"])
    save_corpus(data.tgt_corpus, paths["tgt_txt"])
    write_embeddings(data.src_emb, paths["src_emb"])
    write_embeddings(data.tgt_emb, paths["tgt_emb"])
    write_gold_tsv(data.gold, paths["gold"])
    return paths
