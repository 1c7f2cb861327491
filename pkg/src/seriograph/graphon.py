"""Graphon kernels, the boundary-decay family, graph sampling and assumption checks.

A graphon is a symmetric kernel w : [0,1]^2 -> [0,1].  Graphs are sampled by
drawing latent positions U_1..U_n uniformly and connecting i < j when an
independent uniform coin falls below w(U_i, U_j).  Latent positions are stored
sealed: algorithm code never reads them, only operations named ``oracle_*``
(and loss evaluation) may.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import rng
from .errors import (
    DegenerateSupportError,
    EmptyGraphError,
    SealedOracleError,
    ValidationError,
)
from .ordering import Ranking, rank_from_embedding

_EDGE_CHUNK = 4_000_000  # pairs per sampling chunk, bounds peak memory


@dataclass(frozen=True)
class Graphon:
    """A symmetric edge-probability kernel with decay-rate metadata.

    ``kernel`` must broadcast over numpy arrays.  ``support_right`` /
    ``support_left`` give the closed-form support boundary of each row when
    known; otherwise :func:`support_bounds` falls back to bisection.
    ``alpha`` is accepted on [0, 1]; the endpoint alpha = 1 lies outside the
    decay regime the refinement thresholds were designed for and is allowed
    for experimentation only.
    """

    kernel: Callable
    alpha: float
    support_right: Optional[Callable] = None
    support_left: Optional[Callable] = None
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError("alpha: decay rate must lie in [0, 1]")

    def __call__(self, x, y):
        return self.kernel(x, y)


@dataclass(frozen=True)
class BoundaryFamilyParams:
    """Parameters of the built-in boundary-decay family."""

    p: float
    alpha: float
    r: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValidationError("p: noise rate must lie in (0, 1]")
        if not 0.0 <= self.alpha < 1.0:
            raise ValidationError("alpha: decay rate must lie in [0, 1)")
        if not 0.0 < self.r < 0.5:
            raise ValidationError("r: radius must lie in (0, 0.5)")


class LatentOracle:
    """Sealed holder of latent positions; read only via explicit oracle calls."""

    __slots__ = ("_positions",)

    def __init__(self, positions: np.ndarray):
        pos = np.asarray(positions, dtype=np.float64).copy()
        pos.setflags(write=False)
        self._positions = pos

    def positions(self) -> np.ndarray:
        """Evaluation-only access to the latent positions."""
        return self._positions

    def __repr__(self):  # never leak values in logs
        return f"LatentOracle(n={self._positions.size}, sealed)"


@dataclass(frozen=True)
class SampledGraph:
    """A sampled graph: symmetric boolean adjacency, zero diagonal, sealed oracle."""

    n: int
    adjacency: np.ndarray = field(repr=False)
    seed: int
    oracle: Optional[LatentOracle] = None

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.shape != (self.n, self.n):
            raise ValidationError("adjacency must be n x n")
        adj = adj.copy()
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2


@dataclass(frozen=True)
class AssumptionReport:
    """Numeric diagnostics of the structural assumptions on a kernel."""

    robinson_violation_count: int
    max_robinson_violation: float
    holder_M2_estimate: float
    decay_M0_range: tuple
    decay_M1_range: tuple
    boundary_B_estimate: float
    rho_estimate: float
    grid_size: int


def make_boundary_family(params: BoundaryFamilyParams) -> Graphon:
    """The boundary-decay kernel p * ((r - |x-y|)/r)^alpha on |x-y| <= r, else 0.

    alpha = 0 selects the step form (value p on the whole band, including the
    band edge).
    """
    p, alpha, r = params.p, params.alpha, params.r

    def kernel(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        d = np.abs(x - y)
        inside = d <= r
        if alpha == 0.0:
            val = np.where(inside, p, 0.0)
        else:
            base = np.clip(r - d, 0.0, None) / r
            val = np.where(inside, p * base**alpha, 0.0)
        if val.ndim == 0:
            return float(val)
        return val

    return Graphon(
        kernel=kernel,
        alpha=alpha,
        support_right=lambda x: np.minimum(1.0, np.asarray(x, dtype=np.float64) + r),
        support_left=lambda x: np.maximum(0.0, np.asarray(x, dtype=np.float64) - r),
        label=f"boundary(p={p},alpha={alpha},r={r})",
    )


def graphon_from_config(spec: dict) -> Graphon:
    """Build a graphon from its JSON config form, e.g. {"family": "boundary", ...}."""
    family = spec.get("family")
    if family == "boundary":
        return make_boundary_family(
            BoundaryFamilyParams(p=spec["p"], alpha=spec["alpha"], r=spec["r"])
        )
    if family == "constant":
        c = float(spec["value"])
        if not 0.0 <= c <= 1.0:
            raise ValidationError("value: constant kernel level must lie in [0, 1]")

        def kernel(x, y, _c=c):
            shape = np.broadcast_shapes(np.shape(x), np.shape(y))
            return _c if shape == () else np.full(shape, _c)

        return Graphon(kernel=kernel, alpha=0.0, label=f"constant({c})")
    raise ValidationError(f"family: unknown graphon family {family!r}")


def _draw_positions(n: int, seed: int) -> np.ndarray:
    """Latent positions from the seeded stream; one resample round on ties."""
    idx = np.arange(n, dtype=np.uint64)
    u = rng.uniforms(seed, "U", idx, np.zeros(n, dtype=np.uint64))
    order = np.argsort(u, kind="stable")
    dup = np.zeros(n, dtype=bool)
    eq = u[order][1:] == u[order][:-1]
    dup[order[1:][eq]] = True
    if dup.any():
        u = u.copy()
        u[dup] = rng.uniforms(seed, "U", idx[dup], np.ones(dup.sum(), dtype=np.uint64))
        if np.unique(u).size != n:
            raise ValidationError("latent positions collided twice; change the seed")
    return u


def sample_graph(w: Graphon, n: int, seed: int) -> SampledGraph:
    """Sample an n-vertex graph from kernel w, deterministically in (w, n, seed)."""
    if n < 1:
        raise EmptyGraphError("n must be >= 1")
    u = _draw_positions(n, seed)
    adj = np.zeros((n, n), dtype=bool)
    # fill the upper triangle in row blocks to bound memory
    row = 0
    while row < n:
        rows = max(1, min(n - row, _EDGE_CHUNK // max(1, n - row)))
        ivals = np.arange(row, row + rows, dtype=np.int64)
        counts = n - 1 - ivals
        gi = np.repeat(ivals, counts)
        starts = np.zeros(rows, dtype=np.int64)
        starts[1:] = np.cumsum(counts[:-1])
        jj = np.arange(gi.size, dtype=np.int64) - np.repeat(starts, counts) + np.repeat(
            ivals + 1, counts
        )
        coins = rng.uniforms(seed, "E", gi.astype(np.uint64), jj.astype(np.uint64))
        probs = np.asarray(w.kernel(u[gi], u[jj]), dtype=np.float64)
        edges = coins < probs
        adj[gi[edges], jj[edges]] = True
        row += rows
        del gi, jj, coins, probs, edges
    adj |= adj.T
    np.fill_diagonal(adj, False)
    return SampledGraph(n=n, adjacency=adj, seed=seed, oracle=LatentOracle(u))


def oracle_positions(g: SampledGraph) -> np.ndarray:
    """Evaluation-only access to the sealed latent positions."""
    if g.oracle is None:
        raise SealedOracleError("graph carries no latent-position oracle")
    return g.oracle.positions()


def oracle_true_ranking(g: SampledGraph) -> Ranking:
    """The ranking induced by the sealed latent positions (evaluation-only)."""
    u = oracle_positions(g)
    return rank_from_embedding((np.arange(g.n), u))


def support_bounds(w: Graphon, x: float, grid: int | None = None, tol: float = 1e-9) -> tuple:
    """The support boundary (l(x), r(x)) of row x: closed-form when available,
    otherwise bisection on a sign-change bracket located on a coarse grid."""
    if w.support_right is not None and w.support_left is not None:
        return float(w.support_left(x)), float(w.support_right(x))
    if grid is None:
        raise ValidationError("grid: numeric support search needs a fallback grid size")
    ys = np.linspace(0.0, 1.0, int(grid))
    vals = np.asarray(w.kernel(np.full_like(ys, x), ys), dtype=np.float64)
    pos = vals > 0.0
    if not pos.any():
        raise DegenerateSupportError(f"kernel row at x={x} is identically zero on the grid")

    def bisect(inside: float, outside: float) -> float:
        for _ in range(200):
            if abs(outside - inside) <= tol:
                break
            mid = 0.5 * (inside + outside)
            if float(w.kernel(x, mid)) > 0.0:
                inside = mid
            else:
                outside = mid
        return 0.5 * (inside + outside)

    hi_in = ys[pos].max()
    lo_in = ys[pos].min()
    right = 1.0 if hi_in == ys[-1] else bisect(hi_in, ys[np.searchsorted(ys, hi_in) + 1])
    left = 0.0 if lo_in == ys[0] else bisect(lo_in, ys[np.searchsorted(ys, lo_in) - 1])
    return float(left), float(right)


def _support_profiles(w: Graphon, xs: np.ndarray, grid: int) -> tuple:
    left = np.empty_like(xs)
    right = np.empty_like(xs)
    for t, x in enumerate(xs):
        try:
            left[t], right[t] = support_bounds(w, float(x), grid=grid)
        except DegenerateSupportError:
            left[t], right[t] = float(x), float(x)
    return left, right


def _rho_estimate(xs, left, right) -> float:
    """Largest t with min over {x <= 1-t} of r(x)-x >= t and the mirrored condition."""
    best = 0.0
    for t in np.linspace(0.0, 0.5, 201):
        ok_r = right[xs <= 1.0 - t] - xs[xs <= 1.0 - t]
        ok_l = xs[xs >= t] - left[xs >= t]
        if ok_r.size and ok_l.size and ok_r.min() >= t - 1e-12 and ok_l.min() >= t - 1e-12:
            best = float(t)
    return best


def check_assumptions(w: Graphon, grid_size: int) -> AssumptionReport:
    """Scan a grid for Robinson violations and estimate the decay/boundary constants.

    Reports rather than fails: a kernel that breaks an assumption yields a
    nonzero violation count or an extreme constant, never an exception.
    """
    if grid_size < 3:
        raise ValidationError("grid_size must be >= 3")
    G = int(grid_size)
    xs = np.linspace(0.0, 1.0, G)
    W = np.asarray(w.kernel(xs[:, None], xs[None, :]), dtype=np.float64)

    tol = 1e-12
    count = 0
    maxv = 0.0
    for c in range(1, G - 1):
        cap = np.minimum(W[:c, c][:, None], W[c, c + 1 :][None, :])
        v = W[:c, c + 1 :] - cap
        bad = v > tol
        count += int(bad.sum())
        if v.size:
            maxv = max(maxv, float(v.max()))
    maxv = max(0.0, maxv) if count else 0.0

    alpha = w.alpha
    # Hoelder constant: max |w(u,v)-w(u',v)| / |u-u'|^alpha over grid pairs
    m2 = 0.0
    du = np.abs(xs[:, None] - xs[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = np.where(du > 0, du**alpha, np.inf)
    for v in range(G):
        dw = np.abs(W[:, v][:, None] - W[:, v][None, :])
        m2 = max(m2, float((dw / denom).max()))

    left, right = _support_profiles(w, xs, grid=max(G, 64))
    rho = _rho_estimate(xs, left, right)

    # decay ratios w(x, r(x)-z)/z^alpha near the right boundary, mirrored on the left
    m0_ratios = []
    for x, r_x in zip(xs, right):
        if x > 1.0 - rho or r_x - x <= 0:
            continue
        zs = np.linspace(0.0, r_x - x, 12)[1:]
        vals = np.asarray(w.kernel(np.full_like(zs, x), r_x - zs), dtype=np.float64)
        m0_ratios.extend((vals / zs**alpha).tolist())
    for x, l_x in zip(xs, left):
        if x < rho or x - l_x <= 0:
            continue
        zs = np.linspace(0.0, x - l_x, 12)[1:]
        vals = np.asarray(w.kernel(np.full_like(zs, x), l_x + zs), dtype=np.float64)
        m0_ratios.extend((vals / zs**alpha).tolist())
    m0_ratios = np.asarray(m0_ratios, dtype=np.float64)
    m0_range = (float(m0_ratios.min()), float(m0_ratios.max())) if m0_ratios.size else (0.0, 0.0)
    scale = float(np.median(m0_ratios)) if m0_ratios.size else 1.0
    scale = scale if scale > 0 else 1.0

    # increment ratios (w(x, r(x)-z) - w(y, r(x)-z)) / (z^a - max(0, z-d)^a),
    # normalized by the boundary scale so the built-in family reads 1
    m1_ratios = []
    for xi in range(G):
        x, r_x = xs[xi], right[xi]
        if x > 1.0 - rho or r_x - x <= 0:
            continue
        for yi in range(max(0, xi - 5), xi):
            y = xs[yi]
            d = x - y
            zs = np.linspace(0.0, r_x - x, 12)[1:]
            num = np.asarray(w.kernel(np.full_like(zs, x), r_x - zs), float) - np.asarray(
                w.kernel(np.full_like(zs, y), r_x - zs), float
            )
            den = zs**alpha - np.where(zs > d, np.clip(zs - d, 0.0, None) ** alpha, 0.0)
            ok = den > 1e-9
            m1_ratios.extend((num[ok] / den[ok] / scale).tolist())
    for xi in range(G):
        y, l_y = xs[xi], left[xi]
        if y < rho or y - l_y <= 0:
            continue
        for xj in range(xi + 1, min(G, xi + 6)):
            x = xs[xj]
            d = x - y
            zs = np.linspace(0.0, y - l_y, 12)[1:]
            num = np.asarray(w.kernel(np.full_like(zs, y), l_y + zs), float) - np.asarray(
                w.kernel(np.full_like(zs, x), l_y + zs), float
            )
            den = zs**alpha - np.where(zs > d, np.clip(zs - d, 0.0, None) ** alpha, 0.0)
            ok = den > 1e-9
            m1_ratios.extend((num[ok] / den[ok] / scale).tolist())
    m1_ratios = np.asarray(m1_ratios, dtype=np.float64)
    m1_range = (float(m1_ratios.min()), float(m1_ratios.max())) if m1_ratios.size else (0.0, 0.0)

    # boundary propagation: min over x<y of ((r(y)-r(x)) + (l(y)-l(x))) / (y-x)
    b_est = np.inf
    for a in range(G - 1):
        gaps = xs[a + 1 :] - xs[a]
        move = (right[a + 1 :] - right[a]) + (left[a + 1 :] - left[a])
        b_est = min(b_est, float((move / gaps).min()))
    b_est = max(0.0, b_est if np.isfinite(b_est) else 0.0)

    return AssumptionReport(
        robinson_violation_count=count,
        max_robinson_violation=maxv,
        holder_M2_estimate=m2,
        decay_M0_range=m0_range,
        decay_M1_range=m1_range,
        boundary_B_estimate=b_est,
        rho_estimate=rho,
        grid_size=G,
    )
