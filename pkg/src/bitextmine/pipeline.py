"""End-to-end orchestration: mine, filter, self-train, re-mine, evaluate.

Round 0 mines with the raw (normalized) embeddings. Each self-training
round then labels its own training set from the previous round's surviving
pairs, refines a fresh projection head on the current source matrix, applies
it, and re-mines. Per-round precision/recall/F1 against an optional gold
file goes to a metrics CSV, with companion figures rendered next to the
final pair TSV.
"""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, EmbeddingMatrix, load_corpus, read_embeddings
from .errors import DataFormatError
from .filters import FilterReport, filter_pairs
from .mining import (
    CandidatePair,
    MiningConfig,
    ScoredNeighbors,
    apply_threshold,
    mine_candidates,
    select_threshold,
    write_pairs_tsv,
)
from .selftrain import (
    ProjectionHead,
    TrainConfig,
    apply_projection,
    build_training_set,
    save_head,
    train,
)

logger = logging.getLogger(__name__)


@dataclass
class PRF:
    precision: float
    recall: float
    f1: float
    true_positives: int
    predicted: int
    gold: int


@dataclass
class PipelineConfig:
    src_txt: Path
    tgt_txt: Path
    src_emb: Path
    tgt_emb: Path
    out: Path
    mining: MiningConfig
    train: TrainConfig = field(default_factory=TrainConfig)
    gold: Path | None = None
    rounds: int = 1
    workers: int = 1
    figures: bool = True

    def __post_init__(self) -> None:
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class RoundResult:
    report: FilterReport
    pairs: list[CandidatePair]
    neighborhoods: list[ScoredNeighbors]
    candidate_margins: np.ndarray
    threshold: float


@dataclass
class PipelineResult:
    pairs: list[CandidatePair]
    out_path: Path
    metrics_path: Path
    figure_paths: list[Path]
    prf_per_round: list[PRF | None]
    reports: list[FilterReport]


def evaluate(predicted, gold) -> PRF:
    """Exact (src_id, tgt_id) set intersection; predictions are deduplicated."""
    pred_set = {(int(s), int(t)) for s, t in predicted}
    gold_set = {(int(s), int(t)) for s, t in gold}
    tp = len(pred_set & gold_set)
    precision = tp / len(pred_set) if pred_set else 0.0
    recall = tp / len(gold_set) if gold_set else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return PRF(precision, recall, f1, tp, len(pred_set), len(gold_set))


def read_gold_tsv(path: str | Path) -> list[tuple[int, int]]:
    """Id-pair TSV; extra columns beyond the two ids are ignored."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise DataFormatError(f"{path}:{lineno}: expected at least 2 columns")
            try:
                out.append((int(fields[0]), int(fields[1])))
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: non-integer id") from exc
    return out


def _mine_and_filter(
    src_emb: EmbeddingMatrix,
    tgt_emb: EmbeddingMatrix,
    corpora: tuple[Corpus, Corpus],
    cfg: MiningConfig,
    workers: int = 1,
) -> RoundResult:
    candidates, neighborhoods = mine_candidates(src_emb, tgt_emb, cfg, workers=workers)
    if not candidates:
        return RoundResult(FilterReport([], 0, 0), [], [], np.array([]), math.nan)
    margins = np.array([c.margin for c in candidates])
    threshold = select_threshold(margins, cfg)
    retrieved = apply_threshold(candidates, threshold)
    report = filter_pairs(retrieved, corpora[0], corpora[1])
    return RoundResult(report, report.kept, neighborhoods, margins, threshold)


def run_round(
    src_emb: EmbeddingMatrix,
    tgt_emb: EmbeddingMatrix,
    corpora: tuple[Corpus, Corpus],
    cfg: MiningConfig,
    *,
    workers: int = 1,
) -> tuple[FilterReport, list[CandidatePair]]:
    """One mine -> threshold -> filter pass; pairs come back margin-descending."""
    result = _mine_and_filter(src_emb, tgt_emb, corpora, cfg, workers)
    return result.report, result.pairs


def _write_metrics_csv(
    path: Path, rounds: list[RoundResult], prfs: list[PRF | None]
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "round,candidates,threshold,kept,dropped_digit,dropped_edit,"
            "precision,recall,f1,true_positives,predicted,gold\n"
        )
        for rnd, (res, prf) in enumerate(zip(rounds, prfs)):
            base = (
                f"{rnd},{res.candidate_margins.size},{res.threshold:.12f},"
                f"{len(res.pairs)},{res.report.dropped_digit},{res.report.dropped_edit}"
            )
            if prf is None:
                fh.write(base + ",,,,,\n")
            else:
                fh.write(
                    base
                    + f",{prf.precision:.6f},{prf.recall:.6f},{prf.f1:.6f}"
                    + f",{prf.true_positives},{prf.predicted},{prf.gold}\n"
                )


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Run the mining loop end to end and write the final pair TSV plus logs.

    Partial outputs are removed if any stage fails.
    """
    src_corpus = load_corpus(cfg.src_txt)
    tgt_corpus = load_corpus(cfg.tgt_txt)
    src_matrix = read_embeddings(cfg.src_emb).normalize()
    tgt_matrix = read_embeddings(cfg.tgt_emb).normalize()
    if len(src_matrix) != len(src_corpus):
        raise DataFormatError(
            f"source corpus has {len(src_corpus)} sentences but embedding "
            f"file has {len(src_matrix)} rows"
        )
    if len(tgt_matrix) != len(tgt_corpus):
        raise DataFormatError(
            f"target corpus has {len(tgt_corpus)} sentences but embedding "
            f"file has {len(tgt_matrix)} rows"
        )
    gold = read_gold_tsv(cfg.gold) if cfg.gold is not None else None

    out_path = Path(cfg.out)
    out_dir = out_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / (out_path.stem + "_metrics.csv")
    created: list[Path] = []
    corpora = (src_corpus, tgt_corpus)

    try:
        rounds: list[RoundResult] = []
        current = src_matrix
        rounds.append(_mine_and_filter(current, tgt_matrix, corpora, cfg.mining, cfg.workers))
        logger.info("round 0: %s", rounds[0].report.summary())
        print(f"round 0: {rounds[0].report.summary()}", file=sys.stderr)

        for round_no in range(1, cfg.rounds + 1):
            prev = rounds[-1]
            training_set = build_training_set(
                prev.pairs, prev.neighborhoods, cfg.train, len(tgt_corpus)
            )
            log_path = out_dir / f"{out_path.stem}_train_round{round_no}.csv"
            head = train(
                ProjectionHead.identity(src_matrix.dim),
                training_set,
                current,
                tgt_matrix,
                cfg.train,
                log_path=log_path,
            )
            created.append(log_path)
            head_path = out_dir / f"{out_path.stem}_head_round{round_no}.bin"
            save_head(head, head_path)
            created.append(head_path)
            current = apply_projection(head, current)
            rounds.append(
                _mine_and_filter(current, tgt_matrix, corpora, cfg.mining, cfg.workers)
            )
            logger.info("round %d: %s", round_no, rounds[-1].report.summary())
            print(f"round {round_no}: {rounds[-1].report.summary()}", file=sys.stderr)

        write_pairs_tsv(rounds[-1].pairs, out_path)
        created.append(out_path)

        prfs: list[PRF | None] = []
        for res in rounds:
            if gold is None:
                prfs.append(None)
            else:
                prfs.append(evaluate([(p.src_id, p.tgt_id) for p in res.pairs], gold))
        _write_metrics_csv(metrics_path, rounds, prfs)
        created.append(metrics_path)

        figure_paths: list[Path] = []
        if cfg.figures:
            from . import report as report_mod

            margin_fig = out_dir / (out_path.stem + "_margins.png")
            report_mod.save_margin_figure(
                [r.candidate_margins for r in rounds],
                [r.threshold for r in rounds],
                margin_fig,
            )
            figure_paths.append(margin_fig)
            created.append(margin_fig)
            if gold is not None:
                prf_fig = out_dir / (out_path.stem + "_metrics.png")
                report_mod.save_round_metrics_figure(prfs, prf_fig)
                figure_paths.append(prf_fig)
                created.append(prf_fig)

        return PipelineResult(
            rounds[-1].pairs, out_path, metrics_path, figure_paths, prfs,
            [r.report for r in rounds],
        )
    except BaseException:
        for path in created:
            path.unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------------------
# key=value config files for the pipeline subcommand


_CONFIG_KEYS = {
    "src_txt", "tgt_txt", "src_emb", "tgt_emb", "gold", "out",
    "prior", "budget", "k", "shard_size",
    "batch_size", "learning_rate", "epochs", "positive_fraction",
    "negative_mode", "negatives_per_positive", "seed",
    "rounds", "workers", "figures",
}


def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse a ``key = value`` file; blank lines and # comments are ignored."""
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise DataFormatError(f"{path}:{lineno}: expected key = value")
            key, _, value = stripped.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _CONFIG_KEYS:
                raise DataFormatError(f"{path}:{lineno}: unknown key {key!r}")
            mapping[key] = value
    return mapping


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise DataFormatError(f"not a boolean: {value!r}")


def build_pipeline_config(
    mapping: dict[str, str],
    rounds: int | None = None,
    out: str | Path | None = None,
    workers: int | None = None,
) -> PipelineConfig:
    """Turn a config-file mapping into a PipelineConfig; CLI values win."""
    try:
        for key in ("src_txt", "tgt_txt", "src_emb", "tgt_emb"):
            if key not in mapping:
                raise DataFormatError(f"config is missing required key {key!r}")
        if out is None and "out" not in mapping:
            raise DataFormatError("config is missing required key 'out'")

        mining = MiningConfig(
            k=int(mapping.get("k", 4)),
            prior=float(mapping["prior"]) if "prior" in mapping else None,
            budget=int(mapping["budget"]) if "budget" in mapping else None,
            shard_size=int(mapping.get("shard_size", 32768)),
        )
        train_cfg = TrainConfig(
            batch_size=int(mapping.get("batch_size", 100)),
            learning_rate=float(mapping.get("learning_rate", 3e-3)),
            epochs=int(mapping.get("epochs", 2)),
            positive_fraction=float(mapping.get("positive_fraction", 0.5)),
            negative_mode=mapping.get("negative_mode", "hard"),
            negatives_per_positive=int(mapping.get("negatives_per_positive", 3)),
            seed=int(mapping.get("seed", 0)),
        )
        return PipelineConfig(
            src_txt=Path(mapping["src_txt"]),
            tgt_txt=Path(mapping["tgt_txt"]),
            src_emb=Path(mapping["src_emb"]),
            tgt_emb=Path(mapping["tgt_emb"]),
            out=Path(out) if out is not None else Path(mapping["out"]),
            mining=mining,
            train=train_cfg,
            gold=Path(mapping["gold"]) if "gold" in mapping else None,
            rounds=rounds if rounds is not None else int(mapping.get("rounds", 1)),
            workers=workers if workers is not None else int(mapping.get("workers", 1)),
            figures=_parse_bool(mapping.get("figures", "true")),
        )
    except ValueError as exc:
        raise DataFormatError(f"bad config value: {exc}") from exc
