"""Pseudo-parallel bitext mining from unaligned monolingual corpora.

Sharded exact cosine k-NN over sentence embeddings, ratio-margin pair
scoring, rule-based filtering, and an unsupervised self-training loop that
refines a source-side projection head to improve retrieval.
"""

from .corpus import (
    Corpus,
    EmbeddingMatrix,
    Shard,
    clean_wiki_corpus,
    load_corpus,
    read_embeddings,
    save_corpus,
    shard_matrix,
    write_embeddings,
)
from .errors import DataFormatError
from .filters import (
    FilterReport,
    digit_filter_pass,
    digit_signature,
    edit_distance_pass,
    edit_distance_ratio,
    filter_pairs,
    levenshtein,
)
from .knn import (
    Neighbor,
    NeighborList,
    avg_neighbor_cos,
    knn_search,
    knn_shard,
    merge_neighbor_lists,
)
from .mining import (
    CandidatePair,
    MiningConfig,
    ScoredNeighbors,
    apply_threshold,
    margin_score,
    mine_candidates,
    select_threshold,
)
from .pipeline import (
    PRF,
    PipelineConfig,
    PipelineResult,
    evaluate,
    run_pipeline,
    run_round,
)
from .selftrain import (
    ProjectionHead,
    TrainConfig,
    TrainingPair,
    apply_projection,
    build_training_set,
    head_forward,
    load_head,
    pair_gradient,
    pair_loss,
    save_head,
    train,
)
from .synth import SynthConfig, SyntheticData, generate_synthetic, write_synthetic

__version__ = "0.1.0"

__all__ = [
    "CandidatePair",
    "Corpus",
    "DataFormatError",
    "EmbeddingMatrix",
    "FilterReport",
    "MiningConfig",
    "Neighbor",
    "NeighborList",
    "PRF",
    "PipelineConfig",
    "PipelineResult",
    "ProjectionHead",
    "ScoredNeighbors",
    "Shard",
    "SynthConfig",
    "SyntheticData",
    "TrainConfig",
    "TrainingPair",
    "apply_projection",
    "apply_threshold",
    "avg_neighbor_cos",
    "build_training_set",
    "clean_wiki_corpus",
    "digit_filter_pass",
    "digit_signature",
    "edit_distance_pass",
    "edit_distance_ratio",
    "evaluate",
    "filter_pairs",
    "head_forward",
    "knn_search",
    "knn_shard",
    "levenshtein",
    "load_corpus",
    "load_head",
    "margin_score",
    "merge_neighbor_lists",
    "mine_candidates",
    "pair_gradient",
    "pair_loss",
    "read_embeddings",
    "run_pipeline",
    "run_round",
    "save_corpus",
    "save_head",
    "select_threshold",
    "shard_matrix",
    "generate_synthetic",
    "train",
    "write_embeddings",
    "write_synthetic",
]
