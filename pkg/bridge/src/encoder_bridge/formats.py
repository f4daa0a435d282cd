"""The mining engine's file formats, reimplemented against their documented layout.

The engine is consumed through its files only: corpus text (UTF-8, LF, one
sentence per line), embedding matrices (magic ``EMBMAT01``, u32 LE dim,
u64 LE row count, f32 LE row-major), and TSV id maps.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

EMB_MAGIC = b"EMBMAT01"
_EMB_HEADER = struct.Struct("<8sIQ")


class BridgeFormatError(Exception):
    """Input file failed structural validation."""


def read_corpus_lines(path: str | Path) -> list[str]:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BridgeFormatError(
            f"{path}: invalid UTF-8 at byte offset {exc.start}"
        ) from exc
    if text == "":
        return []
    if text.endswith("\n"):
        text = text[:-1]
    return [ln[:-1] if ln.endswith("\r") else ln for ln in text.split("\n")]


def write_corpus_lines(sentences: list[str], path: str | Path) -> None:
    for i, sentence in enumerate(sentences):
        if "\n" in sentence or "\r" in sentence:
            raise ValueError(f"sentence {i} contains a line break")
    Path(path).write_bytes("".join(s + "\n" for s in sentences).encode("utf-8"))


def write_embedding_file(rows: np.ndarray, path: str | Path) -> None:
    rows = np.asarray(rows)
    if rows.ndim != 2 or rows.shape[1] < 1:
        raise ValueError(f"expected an n x dim array with dim >= 1, got {rows.shape}")
    header = _EMB_HEADER.pack(EMB_MAGIC, rows.shape[1], rows.shape[0])
    Path(path).write_bytes(header + np.ascontiguousarray(rows, dtype="<f4").tobytes())


def write_id_map(pairs: list[tuple[str, int]], path: str | Path) -> None:
    """TSV ``old_id TAB new_id``; old ids here are the original string ids."""
    Path(path).write_text(
        "".join(f"{old}\t{new}\n" for old, new in pairs), encoding="utf-8"
    )


def read_id_map(path: str | Path) -> list[tuple[str, int]]:
    pairs = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise BridgeFormatError(f"{path}:{lineno}: expected 2 tab-separated fields")
        pairs.append((fields[0], int(fields[1])))
    return pairs
