"""Rankings, comparison tables, ordering error and extreme sets.

Ranks are 1-indexed throughout (block arithmetic downstream assumes ranks in
{1..|S|}); vertex ids are plain 0-indexed integers.  All values are immutable
after construction and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainMismatchError, ValidationError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Ranking:
    """A bijection from a vertex set onto {1..|set|}.

    ``ids`` holds the domain in ascending id order and ``ranks[t]`` is the
    rank of ``ids[t]``.
    """

    ids: np.ndarray
    ranks: np.ndarray

    def __post_init__(self):
        ids = _frozen(np.asarray(self.ids, dtype=np.int64).copy())
        ranks = _frozen(np.asarray(self.ranks, dtype=np.int64).copy())
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "ranks", ranks)
        if ids.ndim != 1 or ranks.shape != ids.shape:
            raise ValidationError("ids and ranks must be aligned 1-d arrays")
        if ids.size == 0:
            raise ValidationError("ranking domain is empty")
        if np.any(np.diff(ids) <= 0):
            raise ValidationError("ids must be strictly ascending and unique")
        n = ids.size
        seen = np.zeros(n, dtype=bool)
        if ranks.min() < 1 or ranks.max() > n:
            raise ValidationError("ranks must lie in 1..|domain|")
        seen[ranks - 1] = True
        if not seen.all():
            raise ValidationError("ranks must be a bijection onto 1..|domain|")

    def __len__(self) -> int:
        return int(self.ids.size)

    @property
    def domain(self) -> tuple:
        return tuple(int(i) for i in self.ids)

    def rank_of(self, vertex: int) -> int:
        t = int(np.searchsorted(self.ids, vertex))
        if t >= self.ids.size or self.ids[t] != vertex:
            raise DomainMismatchError(f"vertex {vertex} not in ranking domain")
        return int(self.ranks[t])

    def rank_map(self) -> dict:
        return {int(i): int(r) for i, r in zip(self.ids, self.ranks)}

    def order(self) -> np.ndarray:
        """Domain ids sorted by rank (rank 1 first)."""
        return self.ids[np.argsort(self.ranks, kind="stable")]

    def reversed(self) -> "Ranking":
        return Ranking(self.ids, len(self) + 1 - self.ranks)

    def ranks_for(self, ids: Iterable[int]) -> np.ndarray:
        ids = np.asarray(list(ids), dtype=np.int64)
        pos = np.searchsorted(self.ids, ids)
        if np.any(pos >= self.ids.size) or np.any(self.ids[pos.clip(max=self.ids.size - 1)] != ids):
            raise DomainMismatchError("some ids are outside the ranking domain")
        return self.ranks[pos]


@dataclass(frozen=True)
class ComparisonTable:
    """An antisymmetric table of pairwise comparisons with values in {-1, 0, +1}."""

    ids: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        ids = _frozen(np.asarray(self.ids, dtype=np.int64).copy())
        vals = _frozen(np.asarray(self.values, dtype=np.int8).copy())
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "values", vals)
        m = ids.size
        if np.any(np.diff(ids) <= 0):
            raise ValidationError("ids must be strictly ascending and unique")
        if vals.shape != (m, m):
            raise ValidationError("values must be a square matrix over ids")
        if not np.isin(vals, (-1, 0, 1)).all():
            raise ValidationError("comparison values must be in {-1, 0, 1}")
        if np.any(vals != -vals.T) or np.any(np.diag(vals) != 0):
            raise ValidationError("comparison table must be antisymmetric with zero diagonal")

    def value(self, i: int, j: int) -> int:
        a = int(np.searchsorted(self.ids, i))
        b = int(np.searchsorted(self.ids, j))
        return int(self.values[a, b])


def table_from_ranking(sigma: Ranking) -> ComparisonTable:
    """The comparison table induced by a ranking: +1 where the first id ranks earlier."""
    r = sigma.ranks
    vals = np.sign(r[None, :] - r[:, None]).astype(np.int8)
    return ComparisonTable(sigma.ids, vals)


def rank_from_embedding(phi) -> Ranking:
    """Rank vertices by embedding value, breaking ties by smaller id first.

    ``phi`` is a mapping id -> value or a pair (ids, values).
    """
    if isinstance(phi, Mapping):
        ids = np.array(sorted(phi), dtype=np.int64)
        vals = np.array([phi[int(i)] for i in ids], dtype=np.float64)
    else:
        ids, vals = phi
        ids = np.asarray(ids, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        srt = np.argsort(ids, kind="stable")
        ids, vals = ids[srt], vals[srt]
    if not np.isfinite(vals).all():
        raise ValidationError("embedding values must be finite")
    order = np.lexsort((ids, vals))
    ranks = np.empty(ids.size, dtype=np.int64)
    ranks[order] = np.arange(1, ids.size + 1)
    return Ranking(ids, ranks)


def ordering_error(sigma: Ranking, sigma_true: Ranking) -> int:
    """Worst-case rank displacement against the better of a ranking and its reversal."""
    if sigma.ids.shape != sigma_true.ids.shape or np.any(sigma.ids != sigma_true.ids):
        raise DomainMismatchError("rankings must share the same domain")
    fwd = int(np.abs(sigma.ranks - sigma_true.ranks).max())
    rev = int(np.abs(sigma.ranks - (len(sigma_true) + 1 - sigma_true.ranks)).max())
    return min(fwd, rev)


def agrees_at_precision(sigma: Ranking, tau: Ranking, positions, d: float) -> bool:
    """Whether sigma orders every pair of its domain at latent distance >= d as tau does.

    ``positions`` maps vertex id -> latent coordinate (mapping or array indexed
    by id).  Evaluation-only: callers obtain positions from a graph oracle.
    """
    ids = sigma.ids
    if isinstance(positions, Mapping):
        u = np.array([positions[int(i)] for i in ids], dtype=np.float64)
    else:
        u = np.asarray(positions, dtype=np.float64)[ids]
    rs = sigma.ranks.astype(np.float64)
    rt = tau.ranks_for(ids).astype(np.float64)
    du = np.abs(u[:, None] - u[None, :])
    far = du >= d
    same = np.sign(rs[:, None] - rs[None, :]) == np.sign(rt[:, None] - rt[None, :])
    return bool(np.all(same[far]))


def extreme_sets(S: Iterable[int], sigma: Ranking, c: int) -> tuple:
    """The c highest-ranked and c lowest-ranked members of S under sigma."""
    if c < 0:
        raise ValidationError("c must be >= 0")
    S = np.asarray(sorted(set(int(s) for s in S)), dtype=np.int64)
    if S.size == 0 or c == 0:
        return set(), set()
    ranks = sigma.ranks_for(S)
    order = S[np.argsort(ranks)]
    take = min(c, S.size)
    high = set(int(v) for v in order[-take:])
    low = set(int(v) for v in order[:take])
    return high, low


def rank_from_comparisons(table: ComparisonTable) -> Ranking:
    """Aggregate a comparison table into a ranking.

    f(i, j) = +1 is a vote that i precedes j; vertices are ranked by
    descending vote sum, ties by smaller id first.  This orientation closes
    the round trip table_from_ranking -> rank_from_comparisons (the vote sum
    of a ranking-induced table decreases with rank), so comparison evidence
    and rank aggregation stay consistently oriented across stages.
    """
    gamma = table.values.astype(np.int64).sum(axis=1)
    order = np.lexsort((table.ids, -gamma))
    ranks = np.empty(table.ids.size, dtype=np.int64)
    ranks[order] = np.arange(1, table.ids.size + 1)
    return Ranking(table.ids, ranks)


def restrict_rank(sigma: Ranking, S: Iterable[int]) -> Ranking:
    """Re-rank the members of S by their relative order under sigma."""
    S = np.asarray(sorted(set(int(s) for s in S)), dtype=np.int64)
    if S.size == 0:
        raise DomainMismatchError("cannot restrict a ranking to an empty set")
    ranks = sigma.ranks_for(S)  # raises if S is not a subset
    out = np.empty(S.size, dtype=np.int64)
    out[np.argsort(ranks)] = np.arange(1, S.size + 1)
    return Ranking(S, out)


def read_ranking(path) -> Ranking:
    """Read a ranking file: one `vertex_id rank` pair per line."""
    ids, ranks = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = line.split()
            ids.append(int(a))
            ranks.append(int(b))
    srt = np.argsort(ids)
    return Ranking(np.asarray(ids)[srt], np.asarray(ranks)[srt])


def write_ranking(sigma: Ranking, path) -> None:
    with open(path, "w") as fh:
        for i, r in zip(sigma.ids, sigma.ranks):
            fh.write(f"{int(i)} {int(r)}\n")
