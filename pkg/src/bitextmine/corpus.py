"""Sentence corpora and embedding matrices: loading, cleaning, binary IO, sharding.

On-disk formats:
  * corpus file: UTF-8 text, LF line endings, one sentence per line
  * embedding file: 8-byte magic ``EMBMAT01``, u32 LE dim, u64 LE row count,
    then rows of dim x f32 LE, row-major
  * id-map sidecar: TSV ``old_id <TAB> new_id``
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError

EMB_MAGIC = b"EMBMAT01"
_EMB_HEADER = struct.Struct("<8sIQ")

# Wiki-derived corpora carry boilerplate (markup remnants, URLs, talk pages,
# timestamps). A sentence is dropped if it contains any of these literals
# (case-sensitive) or a two-digit:two-digit time pattern anywhere.
WIKI_NOISE_LITERALS = ("*", "=", "//", "::", "#", "www", "(talk)")
_TIME_RE = re.compile(r"[0-9]{2}:[0-9]{2}")


@dataclass
class Corpus:
    """An ordered list of sentences; the list index is the sentence id."""

    sentences: list[str]
    language_tag: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __getitem__(self, sentence_id: int) -> str:
        return self.sentences[sentence_id]


def load_corpus(path: str | Path, language_tag: str = "") -> Corpus:
    """Read a one-sentence-per-line UTF-8 file; line i becomes sentence id i.

    CRLF endings are tolerated (the trailing CR is stripped). Empty lines are
    kept as empty sentences. Invalid UTF-8 is a hard error naming the byte
    offset.
    """
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataFormatError(
            f"{path}: invalid UTF-8 at byte offset {exc.start}"
        ) from exc
    if text == "":
        return Corpus([], language_tag)
    if text.endswith("\n"):
        text = text[:-1]
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in text.split("\n")]
    return Corpus(lines, language_tag)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    for i, sentence in enumerate(corpus.sentences):
        if "\n" in sentence or "\r" in sentence:
            raise ValueError(f"sentence {i} contains a line break")
    body = "".join(s + "\n" for s in corpus.sentences)
    Path(path).write_bytes(body.encode("utf-8"))


def is_wiki_noise(sentence: str) -> bool:
    """True if the sentence should be dropped by the wiki cleaning rules."""
    if not sentence.strip():
        return True
    if any(lit in sentence for lit in WIKI_NOISE_LITERALS):
        return True
    return _TIME_RE.search(sentence) is not None


def clean_wiki_corpus(raw: Corpus) -> Corpus:
    """Drop noise sentences, producing a new dense id space.

    Use :func:`wiki_clean_id_map` for the old-id -> new-id correspondence.
    """
    kept = [s for s in raw.sentences if not is_wiki_noise(s)]
    return Corpus(kept, raw.language_tag)


def wiki_clean_id_map(raw: Corpus) -> list[tuple[int, int]]:
    """(old_id, new_id) pairs for the sentences clean_wiki_corpus keeps."""
    pairs = []
    new_id = 0
    for old_id, sentence in enumerate(raw.sentences):
        if not is_wiki_noise(sentence):
            pairs.append((old_id, new_id))
            new_id += 1
    return pairs


def write_id_map(pairs: list[tuple[int, int]], path: str | Path) -> None:
    Path(path).write_text(
        "".join(f"{old}\t{new}\n" for old, new in pairs), encoding="utf-8"
    )


def read_id_map(path: str | Path) -> list[tuple[int, int]]:
    pairs = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 2 tab-separated fields")
        try:
            pairs.append((int(fields[0]), int(fields[1])))
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: non-integer id") from exc
    return pairs


@dataclass
class EmbeddingMatrix:
    """Dense row-per-sentence vector store; row i pairs with sentence id i.

    Storage interchange is 32-bit float; all in-memory arithmetic is 64-bit.
    """

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ValueError(f"expected a 2-d array, got shape {rows.shape}")
        self.rows = rows

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def normalize(self) -> "EmbeddingMatrix":
        """Return a copy with unit-norm rows. Rows of (near-)zero norm are rejected."""
        norms = np.linalg.norm(self.rows, axis=1)
        bad = np.flatnonzero(norms < 1e-12)
        if bad.size:
            raise ValueError(f"cannot normalize: row {bad[0]} has near-zero norm")
        return EmbeddingMatrix(self.rows / norms[:, None])


@dataclass
class Shard:
    """A contiguous slice of an EmbeddingMatrix starting at global id start_id."""

    start_id: int
    rows: np.ndarray


def write_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    if matrix.dim < 1:
        raise ValueError("embedding dim must be positive")
    header = _EMB_HEADER.pack(EMB_MAGIC, matrix.dim, len(matrix))
    body = np.ascontiguousarray(matrix.rows, dtype="<f4").tobytes()
    Path(path).write_bytes(header + body)


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    data = Path(path).read_bytes()
    if len(data) < _EMB_HEADER.size:
        raise DataFormatError(f"{path}: truncated header")
    magic, dim, n_rows = _EMB_HEADER.unpack_from(data)
    if magic != EMB_MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    if dim < 1:
        raise DataFormatError(f"{path}: non-positive dim {dim}")
    expected = _EMB_HEADER.size + n_rows * dim * 4
    if len(data) != expected:
        raise DataFormatError(
            f"{path}: size mismatch, expected {expected} bytes for "
            f"{n_rows} x {dim} rows, found {len(data)}"
        )
    flat = np.frombuffer(data, dtype="<f4", offset=_EMB_HEADER.size)
    return EmbeddingMatrix(flat.astype(np.float64).reshape(n_rows, dim))


def shard_matrix(matrix: EmbeddingMatrix, shard_size: int) -> list[Shard]:
    """Partition the matrix into contiguous shards of shard_size rows (last may be short)."""
    if shard_size < 1:
        raise ValueError(f"shard_size must be >= 1, got {shard_size}")
    return [
        Shard(start, matrix.rows[start : start + shard_size])
        for start in range(0, len(matrix), shard_size)
    ]
