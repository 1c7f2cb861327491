"""Block-model graphon estimation at the latent positions.

The estimator splits the vertex set in three, learns an ordering on each
split, extends it to everything else, partitions each split's complement into
rank-interval blocks, and averages adjacency entries per block pair.  The
three per-split estimators are combined so that every vertex pair is predicted
only by estimators trained without that pair's edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from . import rng
from .error_rooting import (
    build_schedule,
    epsilon_for_delta,
    extension_thresholds,
    refine_all,
    single_stage,
)
from .errors import SealedOracleError, ValidationError
from .graphon import Graphon, LatentOracle, SampledGraph, oracle_positions
from .ordering import Ranking, restrict_rank


@dataclass(frozen=True)
class SplitEstimate:
    """One split's block model: trained on ``split_ids``, predicting on its complement."""

    split_ids: tuple
    complement_ids: tuple
    z: dict
    q: int
    Q: np.ndarray

    def theta_full(self, n: int) -> np.ndarray:
        """The n x n estimate of this split: block means on complement pairs, 0 elsewhere."""
        zvec = np.full(n, -1, dtype=np.int64)
        for i, b in self.z.items():
            zvec[i] = b - 1
        member = zvec >= 0
        theta = self.Q[zvec.clip(0)[:, None], zvec.clip(0)[None, :]]
        theta = theta * (member[:, None] & member[None, :])
        np.fill_diagonal(theta, 0.0)
        return theta


@dataclass(frozen=True)
class BlockModelEstimate:
    """Combined block-model estimate; ``z``/``q``/``Q`` describe the first split."""

    m: int
    z: dict
    q: int
    Q: np.ndarray
    theta: np.ndarray
    clamp_warnings: tuple
    splits: tuple

    def __post_init__(self):
        th = self.theta
        if th.min() < 0.0 or th.max() > 1.0:
            raise ValidationError("theta entries must lie in [0, 1]")
        if np.any(np.abs(np.diag(th)) > 0) or np.any(th != th.T):
            raise ValidationError("theta must be symmetric with zero diagonal")


@dataclass(frozen=True)
class EstimationLossReport:
    mse: float
    n: int
    per_split_mse: tuple

    def __post_init__(self):
        if self.mse < 0:
            raise ValidationError("mse must be nonnegative")


def block_partition(V: Iterable[int], sigma: Ranking, m: int) -> dict:
    """Partition V into m rank-interval blocks of size ~ floor(|V|/m).

    Block a < m collects ranks ((a-1)q, aq]; the last block absorbs the
    remainder, so its size lies in [q, q+m).
    """
    ids = np.asarray(sorted(set(int(v) for v in V)), dtype=np.int64)
    if not (1 <= m <= ids.size):
        raise ValidationError(f"m must lie in 1..|V| (got m={m}, |V|={ids.size})")
    q = ids.size // m
    ranks = sigma.ranks_for(ids)
    blocks = np.minimum(m, -(-ranks // q))  # ceil(rank/q), capped at m
    return {int(i): int(b) for i, b in zip(ids, blocks)}


def block_average(A: np.ndarray, z: Mapping[int, int], m: int) -> np.ndarray:
    """Block means of an adjacency matrix under a partition function.

    Diagonal blocks exclude the matrix diagonal; empty and singleton diagonal
    blocks average to 0.
    """
    ids = np.asarray(sorted(z), dtype=np.int64)
    zvec = np.asarray([z[int(i)] - 1 for i in ids], dtype=np.int64)
    if zvec.size and (zvec.min() < 0 or zvec.max() >= m):
        raise ValidationError("partition values must lie in 1..m")
    counts = np.bincount(zvec, minlength=m).astype(np.float64)
    Z = np.zeros((ids.size, m))
    Z[np.arange(ids.size), zvec] = 1.0
    S = Z.T @ A[np.ix_(ids, ids)].astype(np.float64) @ Z
    denom = np.outer(counts, counts)
    np.fill_diagonal(denom, counts * (counts - 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        Q = np.where(denom > 0, S / np.where(denom > 0, denom, 1.0), 0.0)
    return Q


def split_vertices(n: int, seed: int, parts: int) -> list:
    """A seeded near-equal partition of 0..n-1 into ``parts`` subsets."""
    keys = rng.uniforms(seed, "S", np.arange(n, dtype=np.uint64))
    perm = np.argsort(keys, kind="stable")
    return [np.sort(chunk) for chunk in np.array_split(perm, parts)]


def estimate_graphon(
    G: SampledGraph,
    m: int,
    alpha: float,
    delta: float,
    gamma: float,
    seed: int,
    m1: float = 1.0,
    log_factor_scale: float = 1.0,
    auto_rounds: bool = True,
) -> BlockModelEstimate:
    """Estimate edge probabilities at the latent positions by split block averaging."""
    n = G.n
    if m < 1 or n < 3 * m:
        raise ValidationError(f"m must satisfy n >= 3m (got n={n}, m={m})")
    if not 0.0 < delta < 1.0 / (3.0 * (1.0 + alpha)):
        raise ValidationError("delta must lie in (0, 1/(3(1+alpha)))")
    splits = split_vertices(n, seed, 3)
    epsilon, _ = epsilon_for_delta(delta, alpha)
    warnings: list = []
    per_split = []
    all_ids = np.arange(n, dtype=np.int64)
    for r, split_ids in enumerate(splits):
        comp_ids = np.setdiff1d(all_ids, split_ids)
        if m > comp_ids.size // 3:
            raise ValidationError(
                f"m={m} too large for complement size {comp_ids.size}; increase n"
            )
        sub, _ = induced_subgraph(G, split_ids)
        schedule = build_schedule(
            sub.n, alpha, gamma, epsilon, m1=m1, log_factor_scale=log_factor_scale,
            auto_rounds=auto_rounds,
        )
        sigma_local = refine_all(
            sub, schedule, seed=rng.derive_seed(seed, "R", r), warnings_out=warnings
        )
        sigma_train = Ranking(split_ids[sigma_local.ids], sigma_local.ranks)
        c1, c2, c3, ext_warn = extension_thresholds(
            split_ids.size, n, alpha, delta, m1=m1, log_factor_scale=log_factor_scale,
            d_floor=schedule.d[-1],
        )
        warnings.extend(ext_warn)
        sigma_extend = single_stage(G, split_ids, all_ids, sigma_train, c1, c2, c3)
        sigma_comp = restrict_rank(sigma_extend, comp_ids)
        z = block_partition(comp_ids, sigma_comp, m)
        Q = block_average(G.adjacency, z, m)
        per_split.append(
            SplitEstimate(
                split_ids=tuple(int(i) for i in split_ids),
                complement_ids=tuple(int(i) for i in comp_ids),
                z=z,
                q=comp_ids.size // m,
                Q=Q,
            )
        )

    # combine: a pair (i, j) is predicted by the estimators trained on neither side
    split_of = np.empty(n, dtype=np.int64)
    for r, split_ids in enumerate(splits):
        split_of[split_ids] = r
    theta = np.zeros((n, n))
    weight = np.zeros((n, n))
    for r, est in enumerate(per_split):
        mask = (split_of[:, None] != r) & (split_of[None, :] != r)
        theta += np.where(mask, est.theta_full(n), 0.0)
        weight += mask
    np.fill_diagonal(weight, 1.0)
    theta = theta / weight
    np.fill_diagonal(theta, 0.0)

    first = per_split[0]
    return BlockModelEstimate(
        m=m,
        z=first.z,
        q=first.q,
        Q=first.Q,
        theta=theta,
        clamp_warnings=tuple(warnings),
        splits=tuple(per_split),
    )


def induced_subgraph(G: SampledGraph, ids: np.ndarray) -> tuple:
    """The induced subgraph on ``ids`` with local labels 0..|ids|-1; returns (graph, ids)."""
    ids = np.asarray(sorted(ids), dtype=np.int64)
    adj = G.adjacency[np.ix_(ids, ids)]
    oracle = None
    if G.oracle is not None:
        oracle = LatentOracle(G.oracle.positions()[ids])
    return SampledGraph(n=ids.size, adjacency=adj, seed=G.seed, oracle=oracle), ids


def naive_local_average(G: SampledGraph, sigma: Ranking, b: int, x: float, y: float) -> float:
    """Plain local averaging: mean adjacency over the (2b+1)^2 rank window at (x, y).

    Windows are clipped at the rank boundaries and the clipped window size is
    the denominator; centers floor(n*x), floor(n*y) are clipped into 1..n.
    """
    n = len(sigma)
    if b < 0 or 2 * b + 1 > n:
        raise ValidationError("bandwidth must satisfy 0 <= b and 2b+1 <= n")
    ids_by_rank = sigma.order()

    def window(center: float) -> np.ndarray:
        c = min(n, max(1, math.floor(n * center)))
        lo, hi = max(1, c - b), min(n, c + b)
        return ids_by_rank[lo - 1 : hi]

    wx, wy = window(x), window(y)
    total = G.adjacency[np.ix_(wx, wy)].sum()
    return float(total) / (wx.size * wy.size)


def oracle_estimation_loss(
    estimate: BlockModelEstimate, G: SampledGraph, w: Graphon
) -> EstimationLossReport:
    """Mean squared error of the estimate against the kernel at the latent positions."""
    if G.oracle is None:
        raise SealedOracleError("loss evaluation needs the latent-position oracle")
    u = oracle_positions(G)
    n = G.n
    theta_true = np.array(w.kernel(u[:, None], u[None, :]), dtype=np.float64)
    np.fill_diagonal(theta_true, 0.0)
    mse = float(((estimate.theta - theta_true) ** 2).sum() / n**2)
    per_split = []
    for est in estimate.splits:
        comp = np.asarray(est.complement_ids, dtype=np.int64)
        th = est.theta_full(n)[np.ix_(comp, comp)]
        tt = theta_true[np.ix_(comp, comp)]
        per_split.append(float(((th - tt) ** 2).sum() / comp.size**2))
    return EstimationLossReport(mse=mse, n=n, per_split_mse=tuple(per_split))
