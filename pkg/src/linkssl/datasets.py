"""Benchmark dataset registry and ingestion.

Datasets are plain edge-list text files ("u v" per line, '#' comments)
living under a root directory given by the LINKSSL_DATA_ROOT environment
variable or the `root` argument. Arbitrary node ids are remapped to dense
0-based integers; the mapping persists in a "<name>.idmap" sidecar so
repeated loads agree. Each registry entry carries the expected node count
and directed edge count (each undirected edge counted twice), validated
at load time.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graphs import Graph, canonical_edges

DATA_ROOT_ENV = "LINKSSL_DATA_ROOT"

UNATTRIBUTED_SPLIT = (0.70, 0.10, 0.20)
ATTRIBUTED_SPLIT = (0.85, 0.05, 0.10)


@dataclass(frozen=True)
class DatasetInfo:
    """Manifest entry: name, file, directedness convention, expected sizes."""

    name: str
    filename: str
    num_nodes: int
    num_directed_edges: int  # undirected count is half of this
    attributed: bool = False

    @property
    def num_undirected_edges(self):
        return self.num_directed_edges // 2

    @property
    def split_fractions(self):
        return ATTRIBUTED_SPLIT if self.attributed else UNATTRIBUTED_SPLIT


REGISTRY = {
    info.name: info
    for info in (
        DatasetInfo("USAir", "USAir.txt", 332, 4252),
        DatasetInfo("NS", "NS.txt", 1589, 5484),
        DatasetInfo("PB", "PB.txt", 1222, 33428),
        DatasetInfo("Yeast", "Yeast.txt", 2375, 23386),
        DatasetInfo("Celegans", "Celegans.txt", 297, 4296),
        DatasetInfo("Power", "Power.txt", 4941, 13188),
        DatasetInfo("Router", "Router.txt", 5022, 12516),
        DatasetInfo("Ecoli", "Ecoli.txt", 1805, 29320),
        DatasetInfo("cora", "cora.txt", 2708, 10556, attributed=True),
        DatasetInfo("citeseer", "citeseer.txt", 3327, 9104, attributed=True),
    )
}

UNATTRIBUTED_NAMES = [n for n, i in REGISTRY.items() if not i.attributed]


def data_root(root=None):
    resolved = root or os.environ.get(DATA_ROOT_ENV)
    if not resolved:
        raise FileNotFoundError(
            f"no dataset root: pass root= or set {DATA_ROOT_ENV}")
    return Path(resolved)


def dataset_path(name, root=None):
    info = REGISTRY.get(name)
    filename = info.filename if info else f"{name}.txt"
    return data_root(root) / filename


def _read_raw_pairs(path):
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) != 2:
                raise ValueError(f"{path}:{lineno}: expected two node ids")
            pairs.append((int(tokens[0]), int(tokens[1])))
    if not pairs:
        raise ValueError(f"{path}: no edges found")
    return np.array(pairs, dtype=np.int64)


def _load_id_map(path):
    mapping = {}
    with open(path) as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            original, internal = stripped.split()
            mapping[int(original)] = int(internal)
    return mapping


def _write_id_map(path, mapping):
    with open(path, "w") as fh:
        fh.write("# original_id internal_id\n")
        for original in sorted(mapping):
            fh.write(f"{original} {mapping[original]}\n")


def load_dataset(name, root=None):
    """Load a registered dataset, remapping ids and validating counts."""
    info = REGISTRY.get(name)
    if info is None:
        raise KeyError(f"unknown dataset {name!r}; known: {sorted(REGISTRY)}")
    path = dataset_path(name, root)
    if not path.exists():
        raise FileNotFoundError(
            f"dataset file {path} not found; see README for how to obtain "
            f"the benchmark edge lists")
    raw = _read_raw_pairs(path)

    idmap_path = path.with_suffix(path.suffix + ".idmap")
    if idmap_path.exists():
        mapping = _load_id_map(idmap_path)
    else:
        unique = np.unique(raw)
        mapping = {int(orig): i for i, orig in enumerate(unique)}
        _write_id_map(idmap_path, mapping)
    remapped = np.array([(mapping[int(u)], mapping[int(v)]) for u, v in raw],
                        dtype=np.int64)
    edges = canonical_edges(remapped)
    n = max(len(mapping), info.num_nodes)
    g = Graph(n, edges)

    if g.n != info.num_nodes or g.num_edges != info.num_undirected_edges:
        raise ValueError(
            f"{name}: expected n={info.num_nodes}, "
            f"undirected edges={info.num_undirected_edges}; "
            f"loaded n={g.n}, edges={g.num_edges}")
    return g


def dataset_available(name, root=None):
    try:
        return dataset_path(name, root).exists()
    except FileNotFoundError:
        return False


def write_edge_list(path, edges, header=None):
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def convert_mat(mat_path, out_path, key="net"):
    """Convert a .mat adjacency file (sparse matrix under `key`) to the
    edge-list text format. Used to import the standard benchmark graphs."""
    from scipy.io import loadmat
    from scipy import sparse as sp

    contents = loadmat(mat_path)
    if key not in contents:
        candidates = [k for k in contents if not k.startswith("__")]
        raise KeyError(f"{mat_path}: no {key!r} entry; found {candidates}")
    adj = sp.csr_matrix(contents[key])
    coo = sp.triu(adj, k=1).tocoo()
    pairs = np.stack([coo.row, coo.col], axis=1)
    write_edge_list(out_path, pairs, header=f"converted from {mat_path}")
    return pairs.shape[0]
