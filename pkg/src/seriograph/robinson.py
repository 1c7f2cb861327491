"""The interval-triple statistic for testing diagonal-increasing structure.

For ordered, disjoint, equal-size rank intervals A < B < C the edge mass
between the outer pair should not exceed the mass between adjacent pairs when
the kernel is diagonally increasing.  The statistic scans such triples on a
held-out half of the graph, ordered by the refinement pipeline, and reports
the worst normalized excess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from . import rng
from .error_rooting import (
    build_schedule,
    epsilon_for_delta,
    extension_thresholds,
    refine_all,
    single_stage,
)
from .errors import NoTriplesError, ValidationError
from .estimation import induced_subgraph, split_vertices
from .graphon import Graphon, SampledGraph
from .ordering import Ranking, restrict_rank


@dataclass(frozen=True)
class IntervalTriple:
    """Three disjoint equal-size rank intervals in strictly increasing rank order.

    Each descriptor is (start_rank, length) with 1-based inclusive start.
    """

    A: tuple
    B: tuple
    C: tuple
    s: int

    def __post_init__(self):
        for name, (start, length) in (("A", self.A), ("B", self.B), ("C", self.C)):
            if start < 1 or length != self.s or self.s < 1:
                raise ValidationError(f"interval {name} must have start >= 1 and length s")
        if self.A[0] + self.s > self.B[0] or self.B[0] + self.s > self.C[0]:
            raise ValidationError("intervals must be disjoint and rank-ordered A < B < C")


@dataclass(frozen=True)
class LambdaReport:
    lambda_hat: float
    lambda1_max: float
    lambda2_max: float
    argmax1: IntervalTriple
    argmax2: IntervalTriple
    mu: float
    stride: int
    n2: int

    def __post_init__(self):
        if abs(self.lambda_hat - (self.lambda1_max + self.lambda2_max) / 2.0) > 1e-12:
            raise ValidationError("lambda_hat must average the two component maxima")

    def to_dict(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "lambda1_max": self.lambda1_max,
            "lambda2_max": self.lambda2_max,
            "argmax1": {"A": self.argmax1.A, "B": self.argmax1.B, "C": self.argmax1.C},
            "argmax2": {"A": self.argmax2.A, "B": self.argmax2.B, "C": self.argmax2.C},
            "mu": self.mu,
            "stride": self.stride,
            "n2": self.n2,
        }


def _sizes_and_starts(n: int, mu: float, stride: int) -> tuple:
    smax = math.floor(mu * n)
    if smax < 1:
        raise NoTriplesError(f"mu*|V| = {mu * n:.3g} < 1: no interval triples exist")
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    sizes = list(range(stride, smax + 1, stride)) if stride > 1 else list(range(1, smax + 1))
    if not sizes:
        raise NoTriplesError(f"stride {stride} exceeds the maximum interval size {smax}")
    starts = np.arange(1, n + 1, stride, dtype=np.int64)
    return sizes, starts


def interval_triples(
    V: Iterable[int], sigma: Ranking, mu: float, stride: int = 1
) -> Iterator[IntervalTriple]:
    """All equal-size ordered rank-interval triples with size <= mu*|V|.

    With stride > 1, interval sizes and start ranks are restricted to the
    stride lattice.  Triples are yielded in ascending (size, A, B, C) order.
    """
    ids = sorted(set(int(v) for v in V))
    n = len(ids)
    sigma.ranks_for(ids)  # domain check
    sizes, starts = _sizes_and_starts(n, mu, stride)
    for s in sizes:
        for a in starts:
            if a + 3 * s - 1 > n:
                break
            for b in starts[starts >= a + s]:
                if b + 2 * s - 1 > n:
                    break
                for c in starts[starts >= b + s]:
                    if c + s - 1 > n:
                        break
                    yield IntervalTriple(
                        A=(int(a), s), B=(int(b), s), C=(int(c), s), s=s
                    )


def lambda_components(
    A_adj: np.ndarray, triple: IntervalTriple, sigma: Ranking, n2: int
) -> tuple:
    """The two normalized edge-mass differences of one interval triple."""
    order = sigma.order()
    take = lambda iv: order[iv[0] - 1 : iv[0] - 1 + iv[1]]
    a_ids, b_ids, c_ids = take(triple.A), take(triple.B), take(triple.C)
    s_ac = int(A_adj[np.ix_(a_ids, c_ids)].sum())
    s_bc = int(A_adj[np.ix_(b_ids, c_ids)].sum())
    s_ab = int(A_adj[np.ix_(a_ids, b_ids)].sum())
    return (s_ac - s_bc) / n2**2, (s_ac - s_ab) / n2**2


def _scan_triples(P: np.ndarray, n: int, sizes, starts, n2: int) -> tuple:
    """Maximize both components over the triple family via 2-d prefix sums."""

    def rect(r0, r1, c0, c1):
        return P[r1, c1] - P[r0, c1] - P[r1, c0] + P[r0, c0]

    best = [(-np.inf, None), (-np.inf, None)]
    for s in sizes:
        ok = starts[starts + 3 * s - 1 <= n]
        if ok.size < 1:
            continue
        a, b, c = np.meshgrid(
            starts[starts + 3 * s - 1 <= n],
            starts[starts + 2 * s - 1 <= n],
            starts[starts + s - 1 <= n],
            indexing="ij",
        )
        keep = (a + s <= b) & (b + s <= c)
        if not keep.any():
            continue
        a, b, c = a[keep], b[keep], c[keep]
        a0, b0, c0 = a - 1, b - 1, c - 1
        s_ac = rect(a0, a0 + s, c0, c0 + s)
        s_bc = rect(b0, b0 + s, c0, c0 + s)
        s_ab = rect(a0, a0 + s, b0, b0 + s)
        for comp, other in ((0, s_bc), (1, s_ab)):
            vals = (s_ac - other) / n2**2
            t = int(np.argmax(vals))
            if vals[t] > best[comp][0]:
                best[comp] = (
                    float(vals[t]),
                    IntervalTriple(
                        A=(int(a[t]), s), B=(int(b[t]), s), C=(int(c[t]), s), s=s
                    ),
                )
    if best[0][1] is None:
        raise NoTriplesError("triple family is empty")
    return best


def lambda_statistic(
    G: SampledGraph,
    mu: float,
    alpha: float,
    delta: float,
    gamma: float,
    stride: Optional[int] = None,
    seed: int = 0,
    m1: float = 1.0,
    log_factor_scale: float = 1.0,
    auto_rounds: bool = True,
    warnings_out: Optional[list] = None,
) -> LambdaReport:
    """The held-out interval-triple statistic of a graph.

    Half the vertices are ordered by the refinement pipeline, the ordering is
    extended to everything, and both component maxima are taken over the
    triple family of the held-out half.
    """
    n = G.n
    if n < 8:
        raise ValidationError("n must be >= 8")
    if mu * math.ceil(n / 2) < 1:
        raise NoTriplesError("mu too small: no triples fit in the held-out half")
    warnings: list = [] if warnings_out is None else warnings_out
    v_train, v_test = split_vertices(n, seed, 2)
    sub, _ = induced_subgraph(G, v_train)
    epsilon, _ = epsilon_for_delta(delta, alpha)
    schedule = build_schedule(
        sub.n, alpha, gamma, epsilon, m1=m1, log_factor_scale=log_factor_scale,
        auto_rounds=auto_rounds,
    )
    sigma_local = refine_all(
        sub, schedule, seed=rng.derive_seed(seed, "R", 1), warnings_out=warnings
    )
    sigma_train = Ranking(v_train[sigma_local.ids], sigma_local.ranks)
    c1, c2, c3, ext_warn = extension_thresholds(
        v_train.size, n, alpha, delta, m1=m1, log_factor_scale=log_factor_scale,
        d_floor=schedule.d[-1],
    )
    warnings.extend(ext_warn)
    sigma_extend = single_stage(
        G, v_train, np.arange(n, dtype=np.int64), sigma_train, c1, c2, c3
    )
    sigma2 = restrict_rank(sigma_extend, v_test)

    n2 = v_test.size
    stride = max(1, n2 // 50) if stride is None else stride
    sizes, starts = _sizes_and_starts(n2, mu, stride)
    order = sigma2.order()
    sub_adj = G.adjacency[np.ix_(order, order)].astype(np.int64)
    P = np.zeros((n2 + 1, n2 + 1), dtype=np.int64)
    P[1:, 1:] = sub_adj.cumsum(axis=0).cumsum(axis=1)
    (m1v, t1), (m2v, t2) = _scan_triples(P, n2, sizes, starts, n2)
    return LambdaReport(
        lambda_hat=(m1v + m2v) / 2.0,
        lambda1_max=m1v,
        lambda2_max=m2v,
        argmax1=t1,
        argmax2=t2,
        mu=mu,
        stride=stride,
        n2=n2,
    )


def population_lambda(w: Graphon, grid: int) -> float:
    """Grid lower bound on the population interval-triple statistic of a kernel.

    [0,1] is cut into ``grid`` cells; A, B, C range over equal-length ordered
    cell intervals and integrals use cell means sampled on a common fine grid,
    so refining the grid by powers of two only grows the family.
    """
    if grid < 3:
        raise ValidationError("grid must be >= 3")
    sub = max(1, round(320 / grid))
    fine = grid * sub
    centers = (np.arange(fine) + 0.5) / fine
    K = np.asarray(w.kernel(centers[:, None], centers[None, :]), dtype=np.float64)
    Kc = K.reshape(grid, sub, grid, sub).mean(axis=(1, 3))
    P = np.zeros((grid + 1, grid + 1))
    P[1:, 1:] = Kc.cumsum(axis=0).cumsum(axis=1)
    sizes = list(range(1, grid // 3 + 1))
    if not sizes:
        raise NoTriplesError("grid too coarse for any triple")
    starts = np.arange(1, grid + 1, dtype=np.int64)
    best = _scan_triples(P, grid, sizes, starts, grid)
    return (best[0][0] + best[1][0]) / 2.0
