"""Export mean-pooled sentence embeddings from a pretrained encoder.

Each sentence becomes the mean over token positions of one hidden layer's
states. Padding positions never contribute; whether boundary/special tokens
contribute is a flag (included by default). Embeddings are written
unnormalized; the mining engine normalizes at load, so there is a single
place of truth for normalization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .formats import read_corpus_lines, write_embedding_file

logger = logging.getLogger(__name__)


@dataclass
class ExportConfig:
    model: str
    layer: int = 12
    batch_size: int = 64
    max_length: int = 256
    device: str = "cpu"
    include_special_tokens: bool = True

    def __post_init__(self) -> None:
        if self.layer < 1:
            raise ValueError(f"layer must be >= 1, got {self.layer}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_length < 2:
            raise ValueError("max_length must be >= 2")


def _load_encoder(cfg: ExportConfig):
    try:
        tokenizer = AutoTokenizer.from_pretrained(cfg.model)
        model = AutoModel.from_pretrained(cfg.model)
    except Exception as exc:
        raise RuntimeError(f"could not load model {cfg.model!r}: {exc}") from exc
    depth = getattr(model.config, "num_hidden_layers", None)
    if depth is not None and cfg.layer > depth:
        raise ValueError(
            f"layer {cfg.layer} out of range: {cfg.model!r} has {depth} layers"
        )
    model.eval()
    model.to(cfg.device)
    return tokenizer, model


def _pool_batch(model, tokenizer, sentences, cfg: ExportConfig) -> np.ndarray:
    encoded = tokenizer(
        sentences,
        padding=True,
        truncation=True,
        max_length=cfg.max_length,
        return_tensors="pt",
        return_special_tokens_mask=True,
    )
    special_mask = encoded.pop("special_tokens_mask")
    encoded = {k: v.to(cfg.device) for k, v in encoded.items()}
    with torch.no_grad():
        output = model(**encoded, output_hidden_states=True)
    hidden = output.hidden_states[cfg.layer]

    mask = encoded["attention_mask"]
    if not cfg.include_special_tokens:
        stripped = mask * (1 - special_mask.to(cfg.device))
        # a sentence of only special tokens (e.g. empty text) falls back to
        # the full attention mask rather than dividing by zero
        empty = stripped.sum(dim=1) == 0
        if bool(empty.any()):
            logger.warning(
                "%d sentences have no non-special tokens; pooling specials for them",
                int(empty.sum()),
            )
            stripped[empty] = mask[empty]
        mask = stripped

    mask = mask.unsqueeze(-1).to(hidden.dtype)
    pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1)
    return pooled.cpu().double().numpy()


def export_embeddings(
    corpus_path: str | Path, out_path: str | Path, cfg: ExportConfig
) -> Path:
    """Write one embedding row per corpus sentence, in corpus order.

    A ``<out>.meta`` sidecar records the export settings (the on-disk format
    itself carries no provenance).
    """
    sentences = read_corpus_lines(corpus_path)
    tokenizer, model = _load_encoder(cfg)

    rows: list[np.ndarray] = []
    for start in range(0, len(sentences), cfg.batch_size):
        batch = sentences[start : start + cfg.batch_size]
        try:
            rows.append(_pool_batch(model, tokenizer, batch, cfg))
        except (RuntimeError, MemoryError) as exc:
            if "memory" in str(exc).lower():
                raise RuntimeError(
                    f"out of memory at batch starting {start}; retry with a "
                    f"smaller --batch (current {cfg.batch_size})"
                ) from exc
            raise

    dim = int(model.config.hidden_size)
    matrix = np.concatenate(rows, axis=0) if rows else np.empty((0, dim))
    write_embedding_file(matrix, out_path)

    meta = Path(str(out_path) + ".meta")
    meta.write_text(
        f"model = {cfg.model}\n"
        f"layer = {cfg.layer}\n"
        f"batch_size = {cfg.batch_size}\n"
        f"max_length = {cfg.max_length}\n"
        f"include_special_tokens = {cfg.include_special_tokens}\n"
        f"rows = {matrix.shape[0]}\n"
        f"dim = {matrix.shape[1]}\n",
        encoding="utf-8",
    )
    return Path(out_path)
