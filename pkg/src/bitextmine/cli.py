"""Command-line surface.

Subcommands: clean, knn, mine, self-train, pipeline, eval, synth.
Exit codes: 0 success, 1 usage error, 2 data/format error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .corpus import (
    Corpus,
    clean_wiki_corpus,
    load_corpus,
    read_embeddings,
    save_corpus,
    wiki_clean_id_map,
    write_id_map,
)
from .errors import DataFormatError
from .filters import filter_pairs
from .knn import knn_search, write_neighbor_tsv
from .mining import (
    MiningConfig,
    apply_threshold,
    mine_candidates,
    read_pairs_tsv,
    select_threshold,
    write_pairs_tsv,
)
from .pipeline import (
    build_pipeline_config,
    evaluate,
    load_config_file,
    read_gold_tsv,
    run_pipeline,
)
from .selftrain import ProjectionHead, TrainConfig, build_training_set, save_head, train
from .synth import SynthConfig, generate_synthetic, write_synthetic


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="bitextmine", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("clean", help="apply wiki noise filters to a corpus")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--idmap", required=True)

    p = sub.add_parser("knn", help="exact top-k cosine search, TSV dump")
    p.add_argument("--queries", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--shard-size", type=int, default=32768)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("mine", help="mine, threshold, and filter candidate pairs")
    p.add_argument("--src-emb", required=True)
    p.add_argument("--tgt-emb", required=True)
    p.add_argument("--src-txt", required=True)
    p.add_argument("--tgt-txt", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--prior", type=float)
    group.add_argument("--budget", type=int)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--shard-size", type=int, default=32768)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("self-train", help="refine a projection head on mined pairs")
    p.add_argument("--pairs", required=True)
    p.add_argument("--src-emb", required=True)
    p.add_argument("--tgt-emb", required=True)
    p.add_argument("--neg-mode", choices=("hard", "random"), default="hard")
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--lr", type=float, default=3e-3)
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--pos-frac", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--head-out", required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--negatives", type=int, default=3)
    p.add_argument("--log", default=None)

    p = sub.add_parser("pipeline", help="mine -> self-train -> re-mine loop")
    p.add_argument("--config", required=True)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("eval", help="precision/recall/F1 against a gold pair file")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)

    p = sub.add_parser("synth", help="generate a planted synthetic benchmark")
    p.add_argument("--n-src", type=int, required=True)
    p.add_argument("--n-tgt", type=int, required=True)
    p.add_argument("--n-parallel", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--rotation", type=float, default=None)

    return parser


def _cmd_clean(args) -> int:
    corpus = load_corpus(args.in_path)
    cleaned = clean_wiki_corpus(corpus)
    save_corpus(cleaned, args.out)
    write_id_map(wiki_clean_id_map(corpus), args.idmap)
    print(
        f"clean: kept={len(cleaned)} dropped={len(corpus) - len(cleaned)}",
        file=sys.stderr,
    )
    return 0


def _cmd_knn(args) -> int:
    queries = read_embeddings(args.queries).normalize()
    index = read_embeddings(args.index).normalize()
    lists = knn_search(queries, index, args.k, args.shard_size, workers=args.workers)
    write_neighbor_tsv(lists, args.out)
    return 0


def _load_mining_inputs(src_emb, tgt_emb, src_txt, tgt_txt):
    src_matrix = read_embeddings(src_emb).normalize()
    tgt_matrix = read_embeddings(tgt_emb).normalize()
    src_corpus = load_corpus(src_txt)
    tgt_corpus = load_corpus(tgt_txt)
    if len(src_matrix) != len(src_corpus) or len(tgt_matrix) != len(tgt_corpus):
        raise DataFormatError("corpus length does not match embedding row count")
    return src_matrix, tgt_matrix, src_corpus, tgt_corpus


def _cmd_mine(args) -> int:
    src_matrix, tgt_matrix, src_corpus, tgt_corpus = _load_mining_inputs(
        args.src_emb, args.tgt_emb, args.src_txt, args.tgt_txt
    )
    cfg = MiningConfig(
        k=args.k, prior=args.prior, budget=args.budget, shard_size=args.shard_size
    )
    candidates, _ = mine_candidates(src_matrix, tgt_matrix, cfg, workers=args.workers)
    if candidates:
        threshold = select_threshold([c.margin for c in candidates], cfg)
        retrieved = apply_threshold(candidates, threshold)
    else:
        retrieved = []
    report = filter_pairs(retrieved, src_corpus, tgt_corpus)
    write_pairs_tsv(report.kept, args.out)
    print(report.summary(), file=sys.stderr)
    return 0


def _cmd_self_train(args) -> int:
    src_matrix = read_embeddings(args.src_emb).normalize()
    tgt_matrix = read_embeddings(args.tgt_emb).normalize()
    pairs = read_pairs_tsv(args.pairs)
    pairs.sort(key=lambda p: (-p.margin, p.src_id, p.tgt_id))
    cfg = TrainConfig(
        batch_size=args.batch,
        learning_rate=args.lr,
        epochs=args.epochs,
        positive_fraction=args.pos_frac,
        negative_mode=args.neg_mode,
        negatives_per_positive=args.negatives,
        seed=args.seed,
    )
    # hard negatives need the ranked forward neighborhoods, which the pair
    # file does not carry; recompute them from the embeddings
    mining = MiningConfig(k=args.k, prior=1.0)
    _, neighborhoods = mine_candidates(src_matrix, tgt_matrix, mining)
    training_set = build_training_set(pairs, neighborhoods, cfg, len(tgt_matrix))
    log_path = (
        Path(args.log)
        if args.log is not None
        else Path(args.head_out).with_suffix(".train.csv")
    )
    head = train(
        ProjectionHead.identity(src_matrix.dim),
        training_set,
        src_matrix,
        tgt_matrix,
        cfg,
        log_path=log_path,
    )
    save_head(head, args.head_out)
    print(
        f"self-train: pairs={len(training_set)} head={args.head_out} log={log_path}",
        file=sys.stderr,
    )
    return 0


def _cmd_pipeline(args) -> int:
    mapping = load_config_file(args.config)
    cfg = build_pipeline_config(
        mapping, rounds=args.rounds, out=args.out, workers=args.workers
    )
    result = run_pipeline(cfg)
    print(f"pipeline: wrote {len(result.pairs)} pairs to {result.out_path}")
    print(f"pipeline: metrics at {result.metrics_path}")
    for fig in result.figure_paths:
        print(f"pipeline: figure at {fig}")
    return 0


def _cmd_eval(args) -> int:
    predicted = read_gold_tsv(args.pred)
    gold = read_gold_tsv(args.gold)
    prf = evaluate(predicted, gold)
    print(
        f"{prf.precision:.6f} {prf.recall:.6f} {prf.f1:.6f} "
        f"{prf.true_positives} {prf.predicted} {prf.gold}"
    )
    return 0


def _cmd_synth(args) -> int:
    kwargs = dict(
        n_src=args.n_src,
        n_tgt=args.n_tgt,
        n_parallel=args.n_parallel,
        dim=args.dim,
        noise_sigma=args.sigma,
        seed=args.seed,
    )
    if args.rotation is not None:
        kwargs["rotation"] = args.rotation
    data = generate_synthetic(SynthConfig(**kwargs))
    paths = write_synthetic(data, args.out_dir)
    for name, path in paths.items():
        print(f"synth: {name} -> {path}")
    return 0


_COMMANDS = {
    "clean": _cmd_clean,
    "knn": _cmd_knn,
    "mine": _cmd_mine,
    "self-train": _cmd_self_train,
    "pipeline": _cmd_pipeline,
    "eval": _cmd_eval,
    "synth": _cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (DataFormatError, ValueError, OSError) as exc:
        print(f"bitextmine: error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
