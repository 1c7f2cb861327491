"""File formats: graph edge lists, oracle files, matrices and JSON reports."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ValidationError
from .graphon import LatentOracle, SampledGraph


def write_graph(g: SampledGraph, path) -> None:
    """Text edge list: first line n, then one `i j` line (0-indexed, i < j) per edge."""
    i_idx, j_idx = np.nonzero(np.triu(g.adjacency, k=1))
    with open(path, "w") as fh:
        fh.write(f"{g.n}\n")
        for i, j in zip(i_idx, j_idx):
            fh.write(f"{int(i)} {int(j)}\n")


def write_oracle(g: SampledGraph, path) -> None:
    """One latent position per line, full float precision (evaluation-only file)."""
    from .graphon import oracle_positions

    u = oracle_positions(g)
    with open(path, "w") as fh:
        for v in u:
            fh.write(f"{float(v)!r}\n")


def read_graph(path, oracle_path: Optional[str] = None, seed: int = 0) -> SampledGraph:
    """Read a graph file, optionally attaching a latent-position oracle file."""
    with open(path) as fh:
        first = fh.readline().strip()
        if not first:
            raise ValidationError(f"{path}: missing vertex count line")
        n = int(first)
        adj = np.zeros((n, n), dtype=bool)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = (int(x) for x in line.split())
            if not (0 <= a < b < n):
                raise ValidationError(f"{path}: bad edge line '{line}' (need 0 <= i < j < n)")
            adj[a, b] = adj[b, a] = True
    oracle = None
    if oracle_path is not None:
        u = np.array([float(line) for line in Path(oracle_path).read_text().split()])
        if u.size != n:
            raise ValidationError(f"{oracle_path}: expected {n} positions, found {u.size}")
        oracle = LatentOracle(u)
    return SampledGraph(n=n, adjacency=adj, seed=seed, oracle=oracle)


def write_matrix(M: np.ndarray, path) -> None:
    """Dense matrix dump, one row per line, full float precision."""
    with open(path, "w") as fh:
        for row in np.asarray(M, dtype=np.float64):
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_matrix(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split()])
    return np.asarray(rows, dtype=np.float64)


def write_json(obj: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
