"""Real-encoder embedding export and BUCC conversion for the mining engine."""

from .bucc import BuccConversion, convert_bucc
from .export import ExportConfig, export_embeddings
from .formats import (
    BridgeFormatError,
    read_corpus_lines,
    write_corpus_lines,
    write_embedding_file,
)

__version__ = "0.1.0"

__all__ = [
    "BridgeFormatError",
    "BuccConversion",
    "ExportConfig",
    "convert_bucc",
    "export_embeddings",
    "read_corpus_lines",
    "write_corpus_lines",
    "write_embedding_file",
]
