"""Shared test fixtures: kernels and constructed graphs used across test modules."""

import numpy as np

from seriograph.graphon import (
    BoundaryFamilyParams,
    Graphon,
    LatentOracle,
    SampledGraph,
    make_boundary_family,
)
from seriograph import rng as srng

# parameters frozen for the acceptance runs (see the package README for how to
# reproduce the sweeps that chose them)
GAMMA = 0.35
LOG_SCALE = 0.3
M1 = 0.06


def planted_bump_graphon(p=0.8, alpha=0.5, r=0.3, eta=0.3) -> Graphon:
    """Boundary kernel plus a symmetrized off-diagonal bump on [0,.1]x[.6,.7].

    The bump breaks the diagonally-increasing property; used as the test
    alternative.  Not part of the shipped model set.
    """
    base = make_boundary_family(BoundaryFamilyParams(p=p, alpha=alpha, r=r))

    def kernel(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        v = np.asarray(base.kernel(x, y), dtype=np.float64)
        in_bump = ((x <= 0.1) & (y >= 0.6) & (y <= 0.7)) | (
            (y <= 0.1) & (x >= 0.6) & (x <= 0.7)
        )
        out = np.clip(v + eta * in_bump, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    return Graphon(kernel=kernel, alpha=alpha, label="planted-bump")


def spaced_band_graph(n: int, r: float = 0.3, seed: int = 0) -> SampledGraph:
    """Deterministic zero-noise band graph on equally spaced latent positions.

    Equal spacing guarantees distinct closed neighborhoods (no graph twins),
    the regime in which spectral recovery is exact.  The band is computed on
    the integer grid so float rounding at the radius cannot reintroduce twins;
    vertex ids are scrambled by a seeded permutation so the identity ordering
    carries no information.
    """
    b = int(round(r * n))
    perm = np.argsort(srng.uniforms(seed, "S", np.arange(n, dtype=np.uint64)))
    pos = np.argsort(perm)  # true grid index of each vertex id
    u = (pos + 0.5) / n
    adj = np.abs(pos[:, None] - pos[None, :]) <= b
    np.fill_diagonal(adj, False)
    return SampledGraph(n=n, adjacency=adj, seed=seed, oracle=LatentOracle(u))


def twin_floor(g: SampledGraph) -> int:
    """Max rank displacement forced by id-ordering each class of graph twins.

    Vertices with identical closed neighborhoods are exchangeable by a graph
    automorphism; no ordering algorithm can place them better than an
    arbitrary fixed rule, so this is an information floor for the error.
    """
    A = g.adjacency.copy()
    np.fill_diagonal(A, True)
    u = g.oracle.positions()
    _, inv = np.unique(A, axis=0, return_inverse=True)
    worst = 0
    for c in np.unique(inv):
        members = np.flatnonzero(inv == c)
        if members.size < 2:
            continue
        pos_by_u = np.argsort(np.argsort(u[members]))
        worst = max(worst, int(np.abs(np.arange(members.size) - pos_by_u).max()))
    return worst
