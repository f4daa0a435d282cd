"""Exact k-nearest-neighbor search by cosine similarity over sharded matrices.

Both sides must be unit-normalized, so cosine reduces to a dot product.
Results are deterministic: neighbors are ordered by cosine descending with
ties broken by ascending id, and shard partials are merged in a fixed order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import EmbeddingMatrix, Shard, shard_matrix

# Bounds the transient similarity buffer to query_block * shard_size doubles.
_QUERY_BLOCK = 2048


@dataclass(frozen=True)
class Neighbor:
    id: int
    cos: float


@dataclass
class NeighborList:
    """Top-k neighbors of one query, cosine-descending, ties by ascending id."""

    query_id: int
    neighbors: list[Neighbor]


def knn_shard(
    queries: EmbeddingMatrix,
    shard: Shard,
    k: int,
    *,
    query_block: int = _QUERY_BLOCK,
) -> list[NeighborList]:
    """Exact top-k within one shard for every query row.

    Neighbor ids are global (offset by ``shard.start_id``).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n_shard, shard_dim = shard.rows.shape
    if queries.dim != shard_dim:
        raise ValueError(f"dim mismatch: queries {queries.dim}, shard {shard_dim}")
    if n_shard == 0:
        return [NeighborList(q, []) for q in range(len(queries))]

    kk = min(k, n_shard)
    ids_base = np.arange(n_shard)
    out: list[NeighborList] = []
    for start in range(0, len(queries), query_block):
        block = queries.rows[start : start + query_block]
        sims = block @ shard.rows.T
        if kk < n_shard:
            cand = np.argpartition(-sims, kk - 1, axis=1)[:, :kk]
        else:
            cand = np.broadcast_to(ids_base, sims.shape)
        for r in range(block.shape[0]):
            row_ids = cand[r]
            row_cos = sims[r, row_ids]
            order = np.lexsort((row_ids, -row_cos))
            out.append(
                NeighborList(
                    start + r,
                    [
                        Neighbor(int(shard.start_id + row_ids[j]), float(row_cos[j]))
                        for j in order
                    ],
                )
            )
    return out


def merge_neighbor_lists(partials: list[NeighborList], k: int) -> NeighborList:
    """Merge per-shard top-k lists for one query into the global top-k.

    Partials must cover disjoint id ranges; the merge is associative and
    independent of the order the partials are given in.
    """
    if not partials:
        raise ValueError("no partial lists to merge")
    query_id = partials[0].query_id
    if any(p.query_id != query_id for p in partials):
        raise ValueError("partial lists belong to different queries")

    spans = sorted(
        (min(nb.id for nb in p.neighbors), max(nb.id for nb in p.neighbors))
        for p in partials
        if p.neighbors
    )
    for (_, prev_hi), (lo, _) in zip(spans, spans[1:]):
        if lo <= prev_hi:
            raise ValueError("overlapping id ranges in partial lists")

    merged = sorted(
        (nb for p in partials for nb in p.neighbors),
        key=lambda nb: (-nb.cos, nb.id),
    )
    return NeighborList(query_id, merged[:k])


def knn_search(
    queries: EmbeddingMatrix,
    index: EmbeddingMatrix,
    k: int,
    shard_size: int = 32768,
    *,
    workers: int = 1,
) -> list[NeighborList]:
    """Sharded exact top-k search; output is independent of shard_size and workers."""
    if queries.dim != index.dim:
        raise ValueError(f"dim mismatch: queries {queries.dim}, index {index.dim}")
    shards = shard_matrix(index, shard_size)
    if not shards:
        return [NeighborList(q, []) for q in range(len(queries))]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_shard = list(pool.map(lambda sh: knn_shard(queries, sh, k), shards))
    else:
        per_shard = [knn_shard(queries, sh, k) for sh in shards]

    return [
        merge_neighbor_lists([shard_lists[q] for shard_lists in per_shard], k)
        for q in range(len(queries))
    ]


def avg_neighbor_cos(neighbor_list: NeighborList) -> float:
    """Arithmetic mean of the neighbor cosines."""
    if not neighbor_list.neighbors:
        raise ValueError(f"query {neighbor_list.query_id}: empty neighbor list")
    return sum(nb.cos for nb in neighbor_list.neighbors) / len(neighbor_list.neighbors)


def write_neighbor_tsv(lists: list[NeighborList], path: str | Path) -> None:
    """Debug dump: ``query_id TAB rank TAB neighbor_id TAB cos`` (rank 1-based)."""
    with open(path, "w", encoding="utf-8") as fh:
        for nl in lists:
            for rank, nb in enumerate(nl.neighbors, start=1):
                fh.write(f"{nl.query_id}\t{rank}\t{nb.id}\t{nb.cos:.12f}\n")
