"""Convert BUCC-format corpora and gold alignments to the engine's formats.

BUCC corpus lines are ``lang-number TAB sentence``; gold lines pair two such
ids. Output corpora use dense 0-based integer ids (line order), with id-map
sidecars preserving the original string ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .formats import (
    BridgeFormatError,
    read_corpus_lines,
    write_corpus_lines,
    write_id_map,
)


@dataclass
class BuccConversion:
    src_txt: Path
    tgt_txt: Path
    gold_tsv: Path
    src_idmap: Path
    tgt_idmap: Path
    n_src: int
    n_tgt: int
    n_gold: int


def _parse_bucc_corpus(path: str | Path) -> tuple[list[str], dict[str, int]]:
    sentences: list[str] = []
    id_of: dict[str, int] = {}
    for lineno, line in enumerate(read_corpus_lines(path), start=1):
        if not line:
            continue
        if "\t" not in line:
            raise BridgeFormatError(f"{path}:{lineno}: expected 'id<TAB>sentence'")
        bucc_id, sentence = line.split("\t", 1)
        if not bucc_id:
            raise BridgeFormatError(f"{path}:{lineno}: empty id")
        if bucc_id in id_of:
            raise BridgeFormatError(f"{path}:{lineno}: duplicate id {bucc_id!r}")
        id_of[bucc_id] = len(sentences)
        sentences.append(sentence)
    return sentences, id_of


def _parse_gold(
    path: str | Path, src_ids: dict[str, int], tgt_ids: dict[str, int]
) -> list[tuple[int, int]]:
    pairs: list[tuple[int, int]] = []
    for lineno, line in enumerate(read_corpus_lines(path), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise BridgeFormatError(f"{path}:{lineno}: expected 'src-id<TAB>tgt-id'")
        src, tgt = fields
        if src not in src_ids:
            raise BridgeFormatError(f"{path}:{lineno}: unknown source id {src!r}")
        if tgt not in tgt_ids:
            raise BridgeFormatError(f"{path}:{lineno}: unknown target id {tgt!r}")
        pairs.append((src_ids[src], tgt_ids[tgt]))
    return pairs


def convert_bucc(
    src_path: str | Path,
    tgt_path: str | Path,
    gold_path: str | Path,
    out_dir: str | Path,
) -> BuccConversion:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    src_sentences, src_ids = _parse_bucc_corpus(src_path)
    tgt_sentences, tgt_ids = _parse_bucc_corpus(tgt_path)
    gold = _parse_gold(gold_path, src_ids, tgt_ids)

    result = BuccConversion(
        src_txt=out / "src.txt",
        tgt_txt=out / "tgt.txt",
        gold_tsv=out / "gold.tsv",
        src_idmap=out / "src_ids.tsv",
        tgt_idmap=out / "tgt_ids.tsv",
        n_src=len(src_sentences),
        n_tgt=len(tgt_sentences),
        n_gold=len(gold),
    )
    write_corpus_lines(src_sentences, result.src_txt)
    write_corpus_lines(tgt_sentences, result.tgt_txt)
    result.gold_tsv.write_text(
        "".join(f"{s}\t{t}\n" for s, t in gold), encoding="utf-8"
    )
    write_id_map(sorted(src_ids.items(), key=lambda kv: kv[1]), result.src_idmap)
    write_id_map(sorted(tgt_ids.items(), key=lambda kv: kv[1]), result.tgt_idmap)
    return result
