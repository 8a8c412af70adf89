"""Microcanonical stochastic block model: fit per-block-pair edge counts
from a graph and a partition, then sample new simple graphs preserving
those counts exactly.

No degree correction: per-block-pair counts are exact, per-node degrees
are free. For each block pair the edge set is a uniform draw without
replacement from the admissible node pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .community import louvain
from .graphs import Graph


@dataclass(frozen=True)
class BlockEdgeCounts:
    """Symmetric per-block-pair edge counts plus the block membership
    needed to realize a sample over the original node ids."""

    num_blocks: int
    block_sizes: np.ndarray
    counts: np.ndarray  # (B, B) symmetric; intra-block counted once
    members: tuple  # index arrays per block, covering [0, n)
    n: int

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", c)
        if not np.array_equal(c, c.T):
            raise ValueError("counts must be symmetric")
        sizes = np.asarray(self.block_sizes, dtype=np.int64)
        object.__setattr__(self, "block_sizes", sizes)
        for r in range(self.num_blocks):
            if c[r, r] > sizes[r] * (sizes[r] - 1) // 2:
                raise ValueError(f"intra-block count exceeds slots in block {r}")
            for s in range(r + 1, self.num_blocks):
                if c[r, s] > sizes[r] * sizes[s]:
                    raise ValueError(
                        f"inter-block count exceeds slots for pair ({r},{s})")

    @property
    def total_edges(self):
        return int(np.triu(self.counts).sum())


def fit_block_counts(g, b):
    """Tally g's edges by endpoint blocks under partition b."""
    if len(b.assignment) != g.n:
        raise ValueError("partition must cover every node of g")
    counts = np.zeros((b.num_blocks, b.num_blocks), dtype=np.int64)
    if g.num_edges:
        br = b.assignment[g.edges[:, 0]]
        bs = b.assignment[g.edges[:, 1]]
        np.add.at(counts, (br, bs), 1)
        np.add.at(counts, (bs, br), 1)
        # intra-block edges were double-counted by the symmetric tally
        np.fill_diagonal(counts, np.diag(counts) // 2)
    members = b.members()
    sizes = np.array([len(mm) for mm in members], dtype=np.int64)
    return BlockEdgeCounts(num_blocks=b.num_blocks, block_sizes=sizes,
                           counts=counts, members=members, n=g.n)


def _sample_intra(members, k, rng):
    """k distinct unordered pairs inside one block, uniform without replacement."""
    size = len(members)
    slots = size * (size - 1) // 2
    if k > slots:
        raise ValueError("intra-block count exceeds available pairs")
    if k == 0:
        return []
    if k * 2 > slots:
        us, vs = np.triu_indices(size, k=1)
        idx = rng.choice(slots, size=k, replace=False)
        return [(int(members[us[t]]), int(members[vs[t]])) for t in idx]
    chosen = set()
    while len(chosen) < k:
        m = max(16, 2 * (k - len(chosen)))
        i = rng.integers(0, size, size=m)
        j = rng.integers(0, size, size=m)
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        for a, b in zip(lo[lo != hi], hi[lo != hi]):
            chosen.add((int(a), int(b)))
            if len(chosen) == k:
                break
    return [(int(members[i]), int(members[j])) for i, j in sorted(chosen)]


def _sample_inter(members_r, members_s, k, rng):
    """k distinct pairs across two blocks, uniform without replacement."""
    a, b = len(members_r), len(members_s)
    slots = a * b
    if k > slots:
        raise ValueError("inter-block count exceeds available pairs")
    if k == 0:
        return []
    if k * 2 > slots:
        idx = rng.choice(slots, size=k, replace=False)
        return [(int(members_r[t // b]), int(members_s[t % b])) for t in idx]
    chosen = set()
    while len(chosen) < k:
        m = max(16, 2 * (k - len(chosen)))
        i = rng.integers(0, a, size=m)
        j = rng.integers(0, b, size=m)
        for ii, jj in zip(i, j):
            chosen.add((int(ii), int(jj)))
            if len(chosen) == k:
                break
    return [(int(members_r[i]), int(members_s[j])) for i, j in sorted(chosen)]


def sample_sbm(c, seed=0):
    """Sample a simple undirected graph realizing the block-pair counts.

    fit_block_counts of the sample under the same partition reproduces c
    exactly, for every seed.
    """
    rng = np.random.default_rng(seed)
    edges = []
    for r in range(c.num_blocks):
        edges.extend(_sample_intra(c.members[r], int(c.counts[r, r]), rng))
        for s in range(r + 1, c.num_blocks):
            edges.extend(_sample_inter(c.members[r], c.members[s],
                                       int(c.counts[r, s]), rng))
    return Graph(c.n, np.array(edges, dtype=np.int64).reshape(-1, 2))


def sbm_augment(g, detector=louvain, seed=0):
    """Detect blocks, fit counts, and sample a fresh graph; features carried."""
    if g.num_edges == 0:
        raise ValueError("sbm augmentation requires at least one edge")
    seq = np.random.SeedSequence(seed)
    detect_seed, sample_seed = (int(s.generate_state(1)[0])
                                for s in seq.spawn(2))
    b = detector(g, detect_seed)
    counts = fit_block_counts(g, b)
    sampled = sample_sbm(counts, sample_seed)
    return sampled.with_features(g.features)
