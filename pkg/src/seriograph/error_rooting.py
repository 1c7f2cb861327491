"""Multistage ordering refinement.

The pipeline: a coarse spectral ordering of a small seeded vertex subset is
iteratively extended to larger nested subsets.  Each stage compares new
vertices through their edge counts into the extreme (highest- and
lowest-ranked) neighborhoods of the previous stage, then re-ranks everything
from the resulting comparison table.

Stage thresholds follow closed-form schedules in (n, alpha, gamma, epsilon);
the schedule builder clamps the spacing sequence at small n and can reduce the
round count to the largest one whose stages are all viable (opt-in).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph
import scipy.sparse.linalg

from . import rng
from .errors import (
    DomainMismatchError,
    EmptyGraphError,
    ScheduleDegenerateError,
    ScheduleInfeasibleError,
    ValidationError,
)
from .graphon import Graphon, SampledGraph, oracle_positions
from .ordering import ComparisonTable, Ranking, rank_from_comparisons, rank_from_embedding
from . import graphon as _graphon_mod

# viability floors for the reduced-round schedule search
_MIN_COARSE = 32  # smallest expected first-stage subset
_MIN_NEW = 16  # smallest expected per-stage increment
_NEW_PER_C3 = 2.0  # increment must exceed this multiple of C3 to resolve ranks
_MIN_NEW_FRACTION = 0.15  # increment must be a real fraction of n at desk scale
_NOISE_MARGIN = 0.8  # C2 must exceed this multiple of sqrt(C1) to beat count noise
_MIN_C3 = 3  # rank-gap thresholds below this fire on max/min statistic noise
_MAX_WINDOW = 0.25  # extreme-set window d1 * log_eff must stay concentrated


@dataclass(frozen=True)
class StageSchedule:
    """Per-round parameters of the multistage refinement."""

    k: int
    epsilon: float
    beta: float
    gamma: float
    p: tuple
    d: tuple
    c1: tuple
    c2: tuple
    c3: tuple
    alpha: float
    m1: float
    log_factor_scale: float
    warnings: tuple = ()
    requested_epsilon: float = None
    requested_k: int = None
    d1_raw: float = None

    def __post_init__(self):
        if len(self.p) != self.k or len(self.d) != self.k:
            raise ValidationError("p and d must have one entry per round")
        if len(self.c1) != self.k - 1 or len(self.c2) != self.k - 1 or len(self.c3) != self.k - 1:
            raise ValidationError("thresholds must have k-1 entries")
        if abs(self.p[-1] - 1.0) > 1e-12:
            raise ValidationError("p must end at 1")
        if any(b >= a for a, b in zip(self.p[1:], self.p[:-1])):
            raise ValidationError("p must be strictly increasing")
        if any(b >= a for a, b in zip(self.d[:-1], self.d[1:])):
            raise ValidationError("d must be strictly decreasing")
        if any(c < 1 for c in self.c1 + self.c2 + self.c3):
            raise ValidationError("thresholds must be >= 1")
        if self.k != math.floor(-math.log2(self.epsilon)) + 1:
            raise ValidationError("k must equal floor(-log2(epsilon)) + 1")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "epsilon": self.epsilon,
            "beta": self.beta,
            "gamma": self.gamma,
            "p": list(self.p),
            "d": list(self.d),
            "c1": list(self.c1),
            "c2": list(self.c2),
            "c3": list(self.c3),
            "alpha": self.alpha,
            "m1": self.m1,
            "log_factor_scale": self.log_factor_scale,
            "warnings": list(self.warnings),
            "requested_epsilon": self.requested_epsilon,
            "requested_k": self.requested_k,
            "d1_raw": self.d1_raw,
        }


@dataclass(frozen=True)
class StageDiagnostics:
    """Oracle view of one comparison: signal and noise edge counts."""

    pair: tuple
    dist_size: int
    signal: int
    noise: int
    c2: int


def epsilon_for_delta(delta: float, alpha: float) -> tuple:
    """Largest epsilon of the form 2^-(k-1), with minimal k, meeting the
    accuracy budget delta; returns (epsilon, k)."""
    if delta <= 0:
        raise ValidationError("delta must be positive")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError("alpha must lie in [0, 1]")
    for k in range(1, 61):
        lhs = ((1.0 - alpha) / 2.0) ** (k - 1) / (1.0 + alpha) + 2.0**-k / (1.0 + alpha) * (
            1.0 + 2.0 / (k * (1.0 + alpha))
        )
        if lhs <= delta / 2.0:
            return min(0.5, 2.0 ** -(k - 1)), k
    raise ScheduleInfeasibleError(
        f"delta={delta} needs more than 60 refinement rounds; infeasible at this scale"
    )


def _literal_schedule(n, alpha, gamma, epsilon, m1, scale):
    """The closed-form schedule with its small-n clamps; raises on degenerate rounds."""
    warnings = []
    k = math.floor(-math.log2(epsilon)) + 1
    beta = (epsilon - 2.0**-k) / k
    log_eff = scale * math.log(n)
    p = [n ** (-(k - i) * beta) for i in range(1, k + 1)]
    p[-1] = 1.0

    d = [n**-gamma]
    cap = log_eff**-2.0
    if d[0] > cap:
        warnings.append(f"round 1: d1 clamped from {d[0]:.6g} to {cap:.6g}")
        d[0] = cap
    for i in range(k - 1):
        raw = (n * p[i]) ** -0.5 * d[i] ** ((1.0 - alpha) / 2.0) * log_eff**2
        nxt = min(raw, d[i] / 2.0)
        if raw > d[i] / 2.0:
            warnings.append(f"round {i + 2}: d clamped from {raw:.6g} to {nxt:.6g}")
        d.append(nxt)

    c1, c2, c3 = [], [], []
    for i in range(k - 1):
        npi, di = n * p[i], d[i]
        c1.append(math.ceil(npi * di * log_eff))
        c2.append(math.floor(npi**0.5 * di ** ((1.0 + alpha) / 2.0) / (6.0 * m1)))
        c3.append(
            math.floor(
                npi ** ((1.0 - alpha) / 2.0)
                * di ** ((1.0 - alpha * alpha) / 2.0)
                * log_eff ** (1.0 + alpha)
                / (2.0 * (1.0 + alpha))
            )
        )
        if c2[-1] < 1 or c3[-1] < 1:
            raise ScheduleDegenerateError(
                f"round {i + 1}: C2={c2[-1]}, C3={c3[-1]} (need >= 1); "
                "n (or d1) too small for this round count"
            )
        if c2[-1] / 2.0 < math.sqrt(c1[-1]) * log_eff + log_eff**2:
            warnings.append(
                f"round {i + 1}: noise margin C2/2 >= sqrt(C1)*log + log^2 does not hold"
            )
    return k, beta, p, d, c1, c2, c3, warnings


def _viable(n, p, d, c1, c2, c3, log_eff):
    if len(p) >= 2 and n * p[0] < _MIN_COARSE:
        return False
    if len(p) >= 2 and d[0] * log_eff > _MAX_WINDOW:
        return False
    for i in range(len(p) - 1):
        inc = n * (p[i + 1] - p[i])
        if inc < max(_MIN_NEW, _NEW_PER_C3 * c3[i], _MIN_NEW_FRACTION * n):
            return False
        if c2[i] < _NOISE_MARGIN * math.sqrt(c1[i]):
            return False
        if c3[i] < _MIN_C3:
            return False
    return True


def build_schedule(
    n: int,
    alpha: float,
    gamma: float,
    epsilon: float,
    m1: float = 1.0,
    log_factor_scale: float = 1.0,
    auto_rounds: bool = False,
) -> StageSchedule:
    """Build the per-round parameter set for a graph of size n.

    With ``auto_rounds`` the round count is reduced to the largest k whose
    stages all have usable thresholds and expected increments; the reduction
    is recorded in the schedule warnings.  Without it the requested round
    count is built literally and degenerate rounds raise.
    """
    if n < 8:
        raise ValidationError("n must be >= 8")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError("alpha must lie in [0, 1]")
    if not 0.0 < gamma <= 1.0:
        raise ValidationError("gamma must lie in (0, 1]")
    if not 0.0 < epsilon <= 0.5:
        raise ValidationError("epsilon must lie in (0, 0.5]")
    if m1 <= 0:
        raise ValidationError("m1 must be positive")
    if log_factor_scale <= 0:
        raise ValidationError("log_factor_scale must be positive")

    requested_k = math.floor(-math.log2(epsilon)) + 1
    d1_raw = n**-gamma
    if not auto_rounds:
        k, beta, p, d, c1, c2, c3, warns = _literal_schedule(
            n, alpha, gamma, epsilon, m1, log_factor_scale
        )
        return StageSchedule(
            k=k,
            epsilon=epsilon,
            beta=beta,
            gamma=gamma,
            p=tuple(p),
            d=tuple(d),
            c1=tuple(c1),
            c2=tuple(c2),
            c3=tuple(c3),
            alpha=alpha,
            m1=m1,
            log_factor_scale=log_factor_scale,
            warnings=tuple(warns),
            requested_epsilon=epsilon,
            requested_k=requested_k,
            d1_raw=d1_raw,
        )

    for kp in range(requested_k, 0, -1):
        eps_p = epsilon if kp == requested_k else 2.0 ** -(kp - 1)
        if kp == 1:
            break
        try:
            k, beta, p, d, c1, c2, c3, warns = _literal_schedule(
                n, alpha, gamma, eps_p, m1, log_factor_scale
            )
        except ScheduleDegenerateError:
            continue
        if not _viable(n, p, d, c1, c2, c3, log_factor_scale * math.log(n)):
            continue
        if kp < requested_k:
            warns = warns + [
                f"rounds reduced from {requested_k} to {kp}: "
                "later stages would have too few new vertices or degenerate thresholds"
            ]
        return StageSchedule(
            k=k,
            epsilon=eps_p,
            beta=beta,
            gamma=gamma,
            p=tuple(p),
            d=tuple(d),
            c1=tuple(c1),
            c2=tuple(c2),
            c3=tuple(c3),
            alpha=alpha,
            m1=m1,
            log_factor_scale=log_factor_scale,
            warnings=tuple(warns),
            requested_epsilon=epsilon,
            requested_k=requested_k,
            d1_raw=d1_raw,
        )

    # single round: the coarse algorithm orders everything
    log_eff = log_factor_scale * math.log(n)
    d1 = min(n**-gamma, log_eff**-2.0)
    return StageSchedule(
        k=1,
        epsilon=1.0,
        beta=0.0,
        gamma=gamma,
        p=(1.0,),
        d=(d1,),
        c1=(),
        c2=(),
        c3=(),
        alpha=alpha,
        m1=m1,
        log_factor_scale=log_factor_scale,
        warnings=(
            f"rounds reduced from {requested_k} to 1: no viable multi-stage schedule at n={n}",
        ),
        requested_epsilon=epsilon,
        requested_k=requested_k,
        d1_raw=d1_raw,
    )


def extension_thresholds(
    n_train: int,
    n_total: int,
    alpha: float,
    delta: float,
    m1: float = 1.0,
    log_factor_scale: float = 1.0,
    floor_to_one: bool = True,
    d_floor: float = 0.0,
) -> tuple:
    """Thresholds for extending a trained ordering to the full vertex set.

    These are the stage thresholds with the trained subset playing the role of
    the seeded stage and the trained ordering's precision playing the role of
    the spacing: the theoretical target n^(-1/(1+alpha)+delta), floored by
    ``d_floor`` (the precision the training schedule actually aimed for, which
    dominates at small n).  Returns (C1, C2, C3, warnings).
    """
    if n_train < 1 or n_total < n_train:
        raise ValidationError("need 1 <= n_train <= n_total")
    log_eff = log_factor_scale * math.log(n_total)
    d_eff = max(n_total ** (-1.0 / (1.0 + alpha) + delta), d_floor)
    c1 = math.ceil(n_train * d_eff * log_eff)
    c2 = math.floor(n_train**0.5 * d_eff ** ((1.0 + alpha) / 2.0) / (6.0 * m1))
    c3 = math.floor(
        n_train ** ((1.0 - alpha) / 2.0)
        * d_eff ** ((1.0 - alpha * alpha) / 2.0)
        * log_eff ** (1.0 + alpha)
        / (2.0 * (1.0 + alpha))
    )
    warnings = []
    if floor_to_one:
        for name, val in (("C1", c1), ("C2", c2), ("C3", c3)):
            if val < 1:
                warnings.append(f"extension threshold {name} floored from {val} to 1")
        c1, c2, c3 = max(1, c1), max(1, c2), max(1, c3)
    elif c2 < 1 or c3 < 1:
        raise ScheduleDegenerateError(f"extension thresholds degenerate: C2={c2}, C3={c3}")
    return c1, c2, c3, warnings


# ---------------------------------------------------------------------------
# coarse spectral ordering


def _fiedler_values(A: np.ndarray, seed_words: np.ndarray) -> np.ndarray:
    """Entries of the second-smallest Laplacian eigenvector of a connected graph."""
    m = A.shape[0]
    if m == 1:
        return np.zeros(1)
    if m == 2:
        return np.array([0.0, 1.0])
    deg = A.sum(axis=1).astype(np.float64)
    Af = A.astype(np.float64)
    shift = 2.0 * deg.max() + 1.0

    def matvec(x):
        return (shift - deg) * x + Af @ x

    op = scipy.sparse.linalg.LinearOperator((m, m), matvec=matvec, dtype=np.float64)
    v0 = rng.uniforms(0, "P", seed_words, np.arange(m, dtype=np.uint64)) - 0.5
    try:
        vals, vecs = scipy.sparse.linalg.eigsh(op, k=2, which="LA", v0=v0, tol=1e-10, maxiter=5000)
        order = np.argsort(-vals)  # largest shifted eigenvalue = smallest Laplacian one
        fied = vecs[:, order[1]]
        lam = shift - vals[order[1]]
        resid = np.abs(deg * fied - Af @ fied - lam * fied).max()
        if not np.isfinite(resid) or resid > 1e-8 * max(1.0, abs(lam)):
            raise scipy.sparse.linalg.ArpackNoConvergence("residual too large", [], [])
    except (scipy.sparse.linalg.ArpackNoConvergence, scipy.sparse.linalg.ArpackError):
        L = np.diag(deg) - Af
        _, vecs = scipy.linalg.eigh(L, subset_by_index=[0, 1])
        fied = vecs[:, 1]
    s = float(fied @ np.arange(m))
    if s < 0 or (s == 0 and fied[np.flatnonzero(fied)[0] if np.any(fied) else 0] < 0):
        fied = -fied
    return fied


def coarse_spectral_order(
    G: SampledGraph,
    ids: Optional[Iterable[int]] = None,
    warnings_out: Optional[list] = None,
) -> Ranking:
    """Rank a vertex subset by its Laplacian second-eigenvector entries.

    Disconnected subsets are ranked component by component (components in
    ascending order of their smallest member), with a warning recorded in
    ``warnings_out`` when given.
    """
    ids = np.arange(G.n, dtype=np.int64) if ids is None else np.asarray(sorted(ids), np.int64)
    if ids.size < 1:
        raise EmptyGraphError("coarse ordering needs at least one vertex")
    A = G.adjacency[np.ix_(ids, ids)]
    ncomp, labels = scipy.sparse.csgraph.connected_components(
        scipy.sparse.csr_matrix(A), directed=False
    )
    if ncomp > 1 and warnings_out is not None:
        warnings_out.append(f"coarse ordering: {ncomp} components ranked separately")
    order_chunks = []
    comp_keys = sorted(range(ncomp), key=lambda c: ids[labels == c].min())
    for c in comp_keys:
        members = np.flatnonzero(labels == c)
        vals = _fiedler_values(A[np.ix_(members, members)], ids[members].astype(np.uint64))
        sub = ids[members]
        order_chunks.append(sub[np.lexsort((sub, vals))])
    order = np.concatenate(order_chunks)
    ranks = np.empty(ids.size, dtype=np.int64)
    ranks[np.searchsorted(ids, order)] = np.arange(1, ids.size + 1)
    return Ranking(ids, ranks)


# ---------------------------------------------------------------------------
# single refinement stage

_POP8 = np.array([bin(v).count("1") for v in range(256)], dtype=np.int64)
_SEL8 = np.full((256, 8), 8, dtype=np.int64)
for _v in range(256):
    _r = 0
    for _b in range(8):
        if _v >> _b & 1:
            _SEL8[_v, _r] = _b
            _r += 1
del _v, _r, _b


def _pack_bits(T: np.ndarray) -> tuple:
    """Pack a boolean matrix row-wise into uint64 words plus per-word prefix counts."""
    nrows, ncols = T.shape
    nbytes = -(-max(ncols, 1) // 8)
    nbytes_pad = -(-nbytes // 8) * 8
    packed = np.packbits(T, axis=1, bitorder="little")
    if packed.shape[1] < nbytes_pad:
        packed = np.pad(packed, ((0, 0), (0, nbytes_pad - packed.shape[1])))
    bits = packed.view("<u8")
    counts = np.bitwise_count(bits).astype(np.int32)
    prefix = np.cumsum(counts, axis=1, dtype=np.int32)
    return np.ascontiguousarray(bits), prefix


def _select_bit(words: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    """Position (0..63) of the ranks-th set bit of each word; ranks is 1-based."""
    pos = np.zeros(words.shape, dtype=np.int64)
    rem = ranks.astype(np.int64).copy()
    found = np.zeros(words.shape, dtype=bool)
    for b in range(8):
        byte = (words >> np.uint64(8 * b)).astype(np.uint64) & np.uint64(0xFF)
        byte = byte.astype(np.int64)
        cnt = _POP8[byte]
        hit = ~found & (rem <= cnt)
        pos[hit] = 8 * b + _SEL8[byte[hit], rem[hit] - 1]
        found |= hit
        rem = np.where(found, rem, rem - cnt)
    return pos


def _prefix_counts(bits, prefix, c1, i_row, rows):
    """For pairs (i_row, rows): neighbor counts of both endpoints inside the
    top-c1 members of the union, along the packed axis."""
    U = bits[i_row][None, :] | bits[rows]
    pc = np.bitwise_count(U).astype(np.int32)
    cum = np.cumsum(pc, axis=1, dtype=np.int32)
    total = cum[:, -1]
    full = total <= c1

    w_star = (cum >= min(c1, np.iinfo(np.int32).max)).argmax(axis=1)
    nrows = rows.size
    idx = np.arange(nrows)
    before = cum[idx, w_star] - pc[idx, w_star]
    need = np.maximum(1, np.minimum(c1 - before, 64))
    word = U[idx, w_star]
    bitpos = _select_bit(word, need)
    shift = np.minimum(bitpos + 1, 63).astype(np.uint64)
    mask = np.where(
        bitpos >= 63,
        np.uint64(0xFFFFFFFFFFFFFFFF),
        (np.uint64(1) << np.where(bitpos >= 63, np.uint64(0), shift)) - np.uint64(1),
    )

    prev_i = np.where(w_star > 0, prefix[i_row][np.maximum(w_star - 1, 0)], 0)
    prev_j = np.where(w_star > 0, prefix[rows, np.maximum(w_star - 1, 0)], 0)
    in_word_i = np.bitwise_count(bits[i_row][w_star] & mask).astype(np.int64)
    in_word_j = np.bitwise_count(bits[rows, w_star] & mask).astype(np.int64)
    ci = np.where(full, prefix[i_row, -1], prev_i + in_word_i)
    cj = np.where(full, prefix[rows, -1], prev_j + in_word_j)
    return ci.astype(np.int64), cj.astype(np.int64)


def stage_comparison_table(
    G: SampledGraph,
    V1: Iterable[int],
    sigma1: Ranking,
    new_ids: Iterable[int],
    C1: int,
    C2: int,
) -> ComparisonTable:
    """Pairwise comparisons among new vertices from extreme-neighborhood counts.

    For each unordered pair of new vertices, the previous-stage members
    adjacent to either one are ranked by ``sigma1``; the pair is compared by
    the gap between the endpoints' edge counts into the C1 highest-ranked
    (and, mirrored, C1 lowest-ranked) of those members, against margin C2.
    """
    v1 = np.asarray(sorted(V1), dtype=np.int64)
    new = np.asarray(sorted(new_ids), dtype=np.int64)
    if np.intersect1d(v1, new).size:
        raise DomainMismatchError("new vertices must be disjoint from the ranked set")
    ranks = sigma1.ranks_for(v1)
    asc = v1[np.argsort(ranks)]
    desc = asc[::-1]
    F = np.zeros((new.size, new.size), dtype=np.int8)
    if new.size < 2 or v1.size == 0:
        return ComparisonTable(new, F)
    bits_d, pre_d = _pack_bits(G.adjacency[np.ix_(new, desc)])
    bits_a, pre_a = _pack_bits(G.adjacency[np.ix_(new, asc)])
    for a in range(new.size - 1):
        rows = np.arange(a + 1, new.size)
        ciR, cjR = _prefix_counts(bits_d, pre_d, C1, a, rows)
        ciL, cjL = _prefix_counts(bits_a, pre_a, C1, a, rows)
        plus = (cjR - ciR > C2) | (ciL - cjL > C2)
        minus = ~plus & ((ciR - cjR > C2) | (cjL - ciL > C2))
        vals = np.where(plus, 1, np.where(minus, -1, 0)).astype(np.int8)
        F[a, a + 1 :] = vals
        F[a + 1 :, a] = -vals
    return ComparisonTable(new, F)


def single_stage(
    G: SampledGraph,
    V1: Iterable[int],
    V2: Iterable[int],
    sigma1: Ranking,
    C1: int,
    C2: int,
    C3: int,
) -> Ranking:
    """Extend a ranking of V1 to a ranking of V2.

    New vertices are first ordered among themselves from extreme-neighborhood
    comparisons; every pair touching V1 is then compared through the ranks of
    its endpoints' highest and lowest new neighbors (gap threshold C3), and
    the full comparison table is aggregated into the output ranking.  Pairs
    for which either endpoint has no new neighbor are left uncompared, and
    V2 == V1 returns ``sigma1`` unchanged.
    """
    v1 = np.asarray(sorted(set(int(v) for v in V1)), dtype=np.int64)
    v2 = np.asarray(sorted(set(int(v) for v in V2)), dtype=np.int64)
    if np.setdiff1d(v1, v2).size:
        raise DomainMismatchError("V1 must be a subset of V2")
    if v2.size and (v2.min() < 0 or v2.max() >= G.n):
        raise DomainMismatchError("V2 contains ids outside the graph")
    if min(C1, C2, C3) < 1:
        raise ValidationError("stage thresholds must be >= 1")
    if sigma1.ids.shape != v1.shape or np.any(sigma1.ids != v1):
        raise DomainMismatchError("sigma1 must rank exactly V1")
    new = np.setdiff1d(v2, v1)
    if new.size == 0:
        return sigma1

    table = stage_comparison_table(G, v1, sigma1, new, C1, C2)
    sigma_new = rank_from_comparisons(table)

    # ranks of each vertex's highest/lowest new neighbor
    M = G.adjacency[np.ix_(v2, new)]
    has = M.any(axis=1)
    rk = sigma_new.ranks.astype(np.float64)
    t = np.where(M, rk[None, :], -np.inf).max(axis=1)
    b = np.where(M, rk[None, :], np.inf).min(axis=1)

    n2 = v2.size
    F = np.zeros((n2, n2), dtype=np.int8)
    new_pos = np.searchsorted(v2, new)
    F[np.ix_(new_pos, new_pos)] = table.values

    with np.errstate(invalid="ignore"):
        dt = t[None, :] - t[:, None]
        db = b[None, :] - b[:, None]
        plus = (dt > C3) | (db > C3)
        minus = ~plus & ((-dt > C3) | (-db > C3))
    vals = np.where(plus, 1, np.where(minus, -1, 0)).astype(np.int8)

    is_new = np.zeros(n2, dtype=bool)
    is_new[new_pos] = True
    touching = ~(is_new[:, None] & is_new[None, :])
    defined = has[:, None] & has[None, :]
    upper = np.triu(np.ones((n2, n2), dtype=bool), k=1)
    sel = upper & touching & defined
    F[sel] = vals[sel]
    F.T[sel] = -vals[sel]

    gamma = F.astype(np.int64).sum(axis=1)
    order = np.lexsort((v2, -gamma))  # votes for "earlier" rank first, ties by id
    ranks = np.empty(n2, dtype=np.int64)
    ranks[order] = np.arange(1, n2 + 1)
    return Ranking(v2, ranks)


def refine_all(
    G: SampledGraph,
    schedule: StageSchedule,
    coarse: Optional[Callable] = None,
    seed: int = 0,
    warnings_out: Optional[list] = None,
) -> Ranking:
    """Run the full multistage refinement on G and return a ranking of V.

    Vertices enter stage j when their membership coin (stream (seed, "B", i))
    falls below p_j; the coarse procedure orders the first stage and each
    later stage is a single refinement step with that round's thresholds.
    """
    if coarse is None:
        coarse = coarse_spectral_order
    n = G.n
    coins = rng.uniforms(seed, "B", np.arange(n, dtype=np.uint64))
    stages = [np.flatnonzero(coins <= p) for p in schedule.p]
    stages[-1] = np.arange(n, dtype=np.int64)  # p_k = 1 includes everything
    if stages[0].size < 2:
        raise EmptyGraphError(
            f"first stage drew {stages[0].size} vertices; increase p1 (or n)"
        )
    if warnings_out is not None:
        warnings_out.extend(schedule.warnings)
    sigma = coarse(G, stages[0], warnings_out)
    for j in range(schedule.k - 1):
        sigma = single_stage(
            G,
            stages[j],
            stages[j + 1],
            sigma,
            schedule.c1[j],
            schedule.c2[j],
            schedule.c3[j],
        )
    return sigma


def oracle_stage_diagnostics(
    G: SampledGraph,
    w: Graphon,
    V1: Iterable[int],
    i: int,
    j: int,
    d1: float,
    C1: int,
    m1: float = 1.0,
) -> StageDiagnostics:
    """Signal and noise counts of one comparison, measured with the oracle.

    The pair is oriented so the first vertex has the smaller latent position;
    the distinguishing set collects stage-1 vertices whose positions fall in
    the window of width d1 below the right support boundary of the larger
    one, and the extreme set is built from the true ordering.
    """
    u = oracle_positions(G)
    if u[i] > u[j]:
        i, j = j, i
    v1 = np.asarray(sorted(set(int(v) for v in V1)), dtype=np.int64)
    alpha = w.alpha
    c2 = math.floor((v1.size) ** 0.5 * d1 ** ((1.0 + alpha) / 2.0) / (6.0 * m1)) if v1.size else 0
    if v1.size == 0:
        return StageDiagnostics(pair=(int(i), int(j)), dist_size=0, signal=0, noise=0, c2=c2)

    r_j = _graphon_mod.support_bounds(w, float(u[j]), grid=256)[1]
    in_window = (u[v1] >= r_j - d1) & (u[v1] <= r_j)
    dist = set(v1[in_window].tolist())

    adj = G.adjacency
    nbr_union = v1[(adj[i, v1] | adj[j, v1])]
    # C1 members of the union with the highest true positions
    if nbr_union.size:
        order = nbr_union[np.argsort(u[nbr_union])]
        R = set(order[-min(C1, order.size) :].tolist())
    else:
        R = set()

    Ni = set(v1[adj[i, v1]].tolist())
    Nj = set(v1[adj[j, v1]].tolist())
    signal = len(R & dist & Nj) - len(R & dist & Ni)
    noise = len((R & Ni) - dist) - len((R & Nj) - dist)
    return StageDiagnostics(
        pair=(int(i), int(j)),
        dist_size=len(dist),
        signal=int(signal),
        noise=int(noise),
        c2=int(c2),
    )
