"""Self-training of a source-side projection head on mined pairs.

The retrieval output labels its own training data: top-scoring mined pairs
become positives, and for each positive the remaining forward neighbors of
its source (or random target sentences) become negatives. A square affine
head on the frozen source embeddings is then refined to push positive-pair
cosines toward 1 and negative-pair cosines toward 0. The target side stays
fixed throughout; training both sides would collapse every pair onto a
single representation.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import EmbeddingMatrix
from .errors import DataFormatError
from .mining import CandidatePair, ScoredNeighbors

logger = logging.getLogger(__name__)

HEAD_MAGIC = b"PROJHD01"
_HEAD_HEADER = struct.Struct("<8sI")


@dataclass(frozen=True)
class TrainingPair:
    src_id: int
    tgt_id: int
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


@dataclass
class ProjectionHead:
    """Affine map W x + b on source embeddings; the only trainable state."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        W = np.asarray(self.W, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"W must be square, got shape {W.shape}")
        if b.shape != (W.shape[0],):
            raise ValueError(f"b shape {b.shape} does not match W {W.shape}")
        if not (np.isfinite(W).all() and np.isfinite(b).all()):
            raise ValueError("head parameters must be finite")
        self.W = W
        self.b = b

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "ProjectionHead":
        return cls(np.eye(dim), np.zeros(dim))

    def copy(self) -> "ProjectionHead":
        return ProjectionHead(self.W.copy(), self.b.copy())


@dataclass
class TrainConfig:
    # The step size is scaled to the head parameterization: an affine map on
    # frozen embeddings sees ~40 minibatches per round, so it needs a much
    # larger per-parameter step than full encoder fine-tuning would use.
    batch_size: int = 100
    learning_rate: float = 3e-3
    epochs: int = 2
    positive_fraction: float = 0.5
    negative_mode: str = "hard"
    negatives_per_positive: int = 3
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 < self.positive_fraction <= 1.0:
            raise ValueError("positive_fraction must be in (0, 1]")
        if self.negative_mode not in ("hard", "random"):
            raise ValueError(f"negative_mode must be hard|random, got {self.negative_mode!r}")
        if self.negatives_per_positive < 1:
            raise ValueError("negatives_per_positive must be >= 1")


def build_training_set(
    filtered: list[CandidatePair],
    forward_nn: list[ScoredNeighbors],
    cfg: TrainConfig,
    n_tgt: int,
) -> list[TrainingPair]:
    """Label the top positive_fraction of the filtered pairs 1 and attach negatives.

    ``filtered`` must be sorted by margin descending. Hard negatives are the
    next-ranked forward neighbors of each positive's source (the positive
    target excluded); random negatives are drawn uniformly without
    replacement from the target id space, seeded for reproducibility.
    """
    if not filtered:
        return []
    n_pos = int(np.ceil(cfg.positive_fraction * len(filtered)))
    positives = filtered[:n_pos]
    by_src = {sn.query_id: sn for sn in forward_nn}
    rng = np.random.default_rng(cfg.seed)

    out: list[TrainingPair] = []
    short = 0
    for pos in positives:
        out.append(TrainingPair(pos.src_id, pos.tgt_id, 1))
        if cfg.negative_mode == "hard":
            entries = by_src[pos.src_id].entries
            neg_ids = [e.tgt_id for e in entries if e.tgt_id != pos.tgt_id]
            neg_ids = neg_ids[: cfg.negatives_per_positive]
        else:
            n_avail = min(cfg.negatives_per_positive, n_tgt - 1)
            draws = rng.choice(n_tgt - 1, size=n_avail, replace=False)
            neg_ids = [int(d) + int(d >= pos.tgt_id) for d in draws]
        if len(neg_ids) < cfg.negatives_per_positive:
            short += 1
        out.extend(TrainingPair(pos.src_id, t, 0) for t in neg_ids)
    if short:
        logger.warning(
            "%d positives had fewer than %d available negatives",
            short, cfg.negatives_per_positive,
        )
    return out


def head_forward(head: ProjectionHead, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (head.dim,):
        raise ValueError(f"vector shape {x.shape} does not match head dim {head.dim}")
    return head.W @ x + head.b


def _cosine(u: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    norm_u = float(np.linalg.norm(u))
    norm_y = float(np.linalg.norm(y))
    if norm_u < 1e-12 or norm_y < 1e-12:
        raise ValueError("zero-norm vector in cosine")
    return float(u @ y) / (norm_u * norm_y), norm_u, norm_y


def pair_loss(head: ProjectionHead, x: np.ndarray, y: np.ndarray, label: int) -> float:
    """|cos(W x + b, y) - label|; 0 iff the pair is scored perfectly."""
    cos, _, _ = _cosine(head_forward(head, x), np.asarray(y, dtype=np.float64))
    return abs(cos - label)


def pair_gradient(
    head: ProjectionHead, x: np.ndarray, y: np.ndarray, label: int
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of pair_loss w.r.t. (W, b).

    With u = W x + b: dcos/du = y/(|u||y|) - cos * u/|u|^2, scaled by
    sign(cos - label); dW is its outer product with x, db is it directly.
    At the |.| kink (loss exactly 0) the subgradient is defined as 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    u = head_forward(head, x)
    cos, norm_u, norm_y = _cosine(u, y)
    sign = np.sign(cos - label)
    if sign == 0.0:
        return np.zeros_like(head.W), np.zeros_like(head.b)
    g = sign * (y / (norm_u * norm_y) - (cos / norm_u**2) * u)
    return np.outer(g, x), g


def _batch_loss_grad(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, Y: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean loss and mean gradient over a batch (rows of X, Y)."""
    U = X @ W.T + b
    norm_u = np.linalg.norm(U, axis=1)
    norm_y = np.linalg.norm(Y, axis=1)
    if (norm_u < 1e-12).any() or (norm_y < 1e-12).any():
        raise ValueError("zero-norm vector in training batch")
    cos = np.einsum("ij,ij->i", U, Y) / (norm_u * norm_y)
    diff = cos - labels
    sign = np.sign(diff)
    g_u = sign[:, None] * (
        Y / (norm_u * norm_y)[:, None] - (cos / norm_u**2)[:, None] * U
    )
    n = X.shape[0]
    return float(np.abs(diff).mean()), g_u.T @ X / n, g_u.mean(axis=0)


def train(
    head: ProjectionHead,
    data: list[TrainingPair],
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    cfg: TrainConfig,
    log_path: str | Path | None = None,
) -> ProjectionHead:
    """Adam over shuffled minibatches; deterministic for a fixed seed.

    The input head is not modified and the target matrix is never written;
    only the returned head carries the refinement.
    """
    if not data:
        raise ValueError("training data is empty")
    if head.dim != src.dim or head.dim != tgt.dim:
        raise ValueError("head/embedding dim mismatch")

    W = head.W.copy()
    b = head.b.copy()
    m_W = np.zeros_like(W)
    v_W = np.zeros_like(W)
    m_b = np.zeros_like(b)
    v_b = np.zeros_like(b)

    src_ids = np.array([p.src_id for p in data])
    tgt_ids = np.array([p.tgt_id for p in data])
    labels = np.array([p.label for p in data], dtype=np.float64)

    rng = np.random.default_rng(cfg.seed)
    log_rows: list[tuple[int, int, float]] = []
    t = 0
    for epoch in range(1, cfg.epochs + 1):
        perm = rng.permutation(len(data))
        for step, start in enumerate(range(0, len(data), cfg.batch_size), start=1):
            idx = perm[start : start + cfg.batch_size]
            loss, d_W, d_b = _batch_loss_grad(
                W, b, src.rows[src_ids[idx]], tgt.rows[tgt_ids[idx]], labels[idx]
            )
            t += 1
            for param, grad, m, v in ((W, d_W, m_W, v_W), (b, d_b, m_b, v_b)):
                m *= cfg.adam_beta1
                m += (1.0 - cfg.adam_beta1) * grad
                v *= cfg.adam_beta2
                v += (1.0 - cfg.adam_beta2) * grad * grad
                m_hat = m / (1.0 - cfg.adam_beta1**t)
                v_hat = v / (1.0 - cfg.adam_beta2**t)
                param -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
            log_rows.append((epoch, step, loss))

    if log_path is not None:
        with open(log_path, "w", encoding="utf-8") as fh:
            fh.write("epoch,step,mean_loss\n")
            for epoch, step, loss in log_rows:
                fh.write(f"{epoch},{step},{loss:.12e}\n")
    return ProjectionHead(W, b)


def apply_projection(head: ProjectionHead, matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Project every row through the head and renormalize to unit norm."""
    if head.dim != matrix.dim:
        raise ValueError(f"head dim {head.dim} does not match matrix dim {matrix.dim}")
    projected = matrix.rows @ head.W.T + head.b
    norms = np.linalg.norm(projected, axis=1)
    bad = np.flatnonzero(norms < 1e-12)
    if bad.size:
        raise ValueError(f"projected row {bad[0]} has near-zero norm")
    return EmbeddingMatrix(projected / norms[:, None])


def save_head(head: ProjectionHead, path: str | Path) -> None:
    """Checkpoint: magic, u32 dim, then W row-major and b as f64 LE."""
    header = _HEAD_HEADER.pack(HEAD_MAGIC, head.dim)
    body = head.W.astype("<f8").tobytes() + head.b.astype("<f8").tobytes()
    Path(path).write_bytes(header + body)


def load_head(path: str | Path) -> ProjectionHead:
    data = Path(path).read_bytes()
    if len(data) < _HEAD_HEADER.size:
        raise DataFormatError(f"{path}: truncated header")
    magic, dim = _HEAD_HEADER.unpack_from(data)
    if magic != HEAD_MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    expected = _HEAD_HEADER.size + (dim * dim + dim) * 8
    if len(data) != expected:
        raise DataFormatError(
            f"{path}: size mismatch, expected {expected} bytes, found {len(data)}"
        )
    flat = np.frombuffer(data, dtype="<f8", offset=_HEAD_HEADER.size)
    W = flat[: dim * dim].reshape(dim, dim).astype(np.float64)
    b = flat[dim * dim :].astype(np.float64)
    return ProjectionHead(W, b)
