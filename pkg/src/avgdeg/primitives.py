"""Statistical subroutines shared by the estimators.

Samplers here are batch callables ``draw(k) -> array`` that perform exactly
``k`` i.i.d. draws.  Sequential stopping rules are simulated exactly by
asking only for draws that are certain to be needed: when a counter must
reach ``T`` and grows by at most one per draw, the next ``T - counter``
draws happen no matter what.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BudgetExhausted
from .oracle import OracleSession

__all__ = [
    "EstimatorConfig", "Estimate", "VALUE", "ASSERT", "ABORT",
    "VertexSet", "AllVertices", "IdSet", "DegreeClass",
    "bernoulli_threshold", "bernoulli_est", "est_frac_vert", "est_frac_edge",
    "est_num_ver", "collision_tau", "est_num_coll", "rand_vert_samp",
    "rand_vert_samp_many", "median_boost", "tally_degrees", "mean_inverse",
]

VALUE, ASSERT, ABORT = "value", "assert", "abort"

DEFAULT_CONSTANTS = {
    "bernoulli": 3.0,          # threshold 3(1+eps)/eps^2 ln(2/delta)
    "harmonic": 1000.0,
    "density": 100.0,
    "numedges": 180.0,
    "estavgdeg_edges": 10.0,   # 10/eps edges to set the degree threshold
    "estavgdeg_threshold": 200.0,
    "fast_eps0": 0.5,
    "fast_eps_iters": 100.0,
    "ers": 100.0,
    "ers_reps": 10.0,          # ceil(10 ln(1/delta)) repetitions
    "bt": 100.0,
    "bt_reps": 10.0,           # beta = C ln(1/delta)
    "collision": 12.0,
    "a_const": None,           # None: ceil(delta^-3 ln^3(1/delta))
    "samp_cap": 64.0,
}


@dataclass(frozen=True)
class EstimatorConfig:
    eps: float = 0.2
    delta: float = 0.1
    constants: dict = field(default_factory=dict)
    median_reps: int = 1

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.median_reps < 1:
            raise ValueError("median_reps must be >= 1")
        unknown = set(self.constants) - set(DEFAULT_CONSTANTS)
        if unknown:
            raise ValueError(f"unknown constants: {sorted(unknown)}")

    def c(self, name: str):
        return self.constants.get(name, DEFAULT_CONSTANTS[name])

    def with_eps(self, eps: float) -> "EstimatorConfig":
        return EstimatorConfig(eps, self.delta, dict(self.constants), self.median_reps)


@dataclass
class Estimate:
    status: str
    value: float | None = None
    cost: dict = field(default_factory=dict)
    seed: int | None = None
    trace: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == VALUE

    @classmethod
    def of(cls, sess: OracleSession, status: str, value=None, **trace) -> "Estimate":
        return cls(status, None if value is None else float(value), sess.meter.snapshot(),
                   sess.seed, trace)


def tally_degrees(tally: Counter, deg: np.ndarray, weight: np.ndarray | None = None) -> None:
    """Add sampled degrees (optionally only where ``weight`` is set) to ``tally``."""
    deg = np.asarray(deg)
    if weight is not None:
        deg = deg[np.asarray(weight, dtype=bool)]
    vals, counts = np.unique(deg, return_counts=True)
    for v, c in zip(vals.tolist(), counts.tolist()):
        tally[v] += c


def mean_inverse(tally: Counter, k: int) -> Fraction:
    """Exact (1/k) * sum of 1/deg over the tallied samples."""
    return sum((Fraction(c, d) for d, c in tally.items()), Fraction(0)) / k


# ---------------------------------------------------------------------------
# query-able vertex sets

class VertexSet:
    needs_degree = False

    def contains(self, ids: np.ndarray, deg: np.ndarray | None) -> np.ndarray:
        raise NotImplementedError


class AllVertices(VertexSet):
    def contains(self, ids, deg):
        return np.ones(np.shape(ids), dtype=bool)


class IdSet(VertexSet):
    def __init__(self, ids):
        self.ids = np.unique(np.asarray(list(ids), dtype=np.uint64))

    def contains(self, ids, deg):
        return np.isin(np.asarray(ids, dtype=np.uint64), self.ids)


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    x = np.asarray(x, dtype=np.uint64).copy()
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    return x


@dataclass(frozen=True)
class DegreeClass(VertexSet):
    """Vertices with ``lo <= deg < hi``, optionally one side of a seeded 2-coloring."""

    lo: int
    hi: float = math.inf
    color: int | None = None
    salt: int = 0

    needs_degree = True

    def contains(self, ids, deg):
        deg = np.asarray(deg)
        inside = (deg >= self.lo) & (deg < self.hi)
        if self.color is not None:
            inside &= self.colors(ids) == self.color
        return inside

    def colors(self, ids) -> np.ndarray:
        h = _mix64(np.asarray(ids, dtype=np.uint64) ^ np.uint64(self.salt))
        return (h >> np.uint64(63)).astype(np.int64)


# ---------------------------------------------------------------------------
# Bernoulli estimation and fraction estimators

def bernoulli_threshold(cfg: EstimatorConfig) -> float:
    e = cfg.eps
    return cfg.c("bernoulli") * (1 + e) / e ** 2 * math.log(2 / cfg.delta)


def bernoulli_est(draw, cfg: EstimatorConfig, max_draws: int | None = None) -> float:
    """Draw until ``M >= 3(1+eps)/eps^2 ln(2/delta)`` successes; return M/N.

    ``max_draws`` optionally stops early (the result may then be 0).
    """
    target = math.ceil(bernoulli_threshold(cfg))
    M = N = 0
    while M < target:
        need = target - M
        if max_draws is not None:
            need = min(need, max_draws - N)
            if need <= 0:
                break
        M += int(np.count_nonzero(draw(need)))
        N += need
    return M / N


def _member(sess: OracleSession, S: VertexSet, ids: np.ndarray) -> np.ndarray:
    deg = sess.degree_many(ids) if S.needs_degree else None
    return S.contains(ids, deg)


def est_frac_vert(sess: OracleSession, A: VertexSet, cfg: EstimatorConfig) -> float:
    """(1±eps)-estimate of |A|/n from uniform vertices."""
    return bernoulli_est(lambda k: _member(sess, A, sess.rand_vert_many(k)), cfg)


def est_frac_edge(sess: OracleSession, A: VertexSet, B: VertexSet, cfg: EstimatorConfig) -> float:
    """(1±eps)-estimate of m(A,B)/m from uniform edges."""
    def draw(k):
        u, v = sess.rand_edge_many(k)
        if A.needs_degree or B.needs_degree:
            du, dv = np.split(sess.degree_many(np.concatenate([u, v])), 2)
        else:
            du = dv = None
        return (A.contains(u, du) & B.contains(v, dv)) | (A.contains(v, dv) & B.contains(u, du))
    return bernoulli_est(draw, cfg)


def adjacency_probe(sess: OracleSession, x, ys: np.ndarray) -> np.ndarray:
    """Whether each ``y`` is a neighbor of ``x``: pair when present, else additive({x, y})."""
    ys = np.asarray(ys, dtype=np.uint64)
    if sess.has("pair"):
        return sess.pair_many(np.uint64(x), ys).astype(bool)
    sets = np.stack([np.full(ys.size, x, dtype=np.uint64), ys], axis=1)
    return sess.additive_many(sets).astype(bool)


def est_num_ver(sess: OracleSession, x, cfg: EstimatorConfig) -> float:
    """(1±eps)-estimate of n as deg(x) / Pr[uniform vertex is adjacent to x]."""
    deg = sess.degree(x)
    p_hat = bernoulli_est(lambda k: adjacency_probe(sess, x, sess.rand_vert_many(k)), cfg)
    return deg / p_hat


# ---------------------------------------------------------------------------
# collision counting

def collision_tau(cfg: EstimatorConfig) -> int:
    return math.ceil(cfg.c("collision") / cfg.eps ** 2 * math.log(4 / cfg.delta))


def est_num_coll(sess: OracleSession, cfg: EstimatorConfig, tau: int | None = None) -> float:
    """Flagged-dictionary collision counter; returns Z^2 / (2 tau).

    A repeat of a vertex whose flag is 0 counts one collision and sets the
    flag; any other draw (re)inserts the vertex with flag 0.
    """
    tau = collision_tau(cfg) if tau is None else tau
    flags: dict[int, int] = {}
    Y = Z = 0
    while Y < tau:
        for x in sess.rand_vert_many(tau - Y).tolist():
            Z += 1
            if flags.get(x) == 0:
                Y += 1
                flags[x] = 1
            else:
                flags[x] = 0
    return Z * Z / (2 * tau)


# ---------------------------------------------------------------------------
# rejection sampling from a quasi-regular set

def rand_vert_samp_many(sess: OracleSession, A: VertexSet, k: float, count: int,
                        alpha_hint: float = 1.0, cap_factor: float = 64.0):
    """``count`` independent uniform members of ``A`` plus their degrees.

    One attempt = a uniform edge, its first endpoint x (uniform within the
    edge by the orientation convention), a degree query, then acceptance
    with probability k/deg(x) when x is in A.  An attempt costs 2.  More
    than ``cap_factor * alpha_hint`` consecutive rejections raise
    BudgetExhausted.
    """
    cap = max(1, math.ceil(cap_factor * alpha_hint))
    got_ids, got_deg = [], []
    got = 0
    misses = 0
    while got < count:
        need = count - got
        x, _ = sess.rand_edge_many(need)
        dx = sess.degree_many(x)
        coin = sess.coins.random(need)
        acc = A.contains(x, dx) & (coin * dx < k)
        hits = np.flatnonzero(acc)
        gaps = np.diff(np.concatenate([[-1 - misses], hits])) - 1
        tail = need - 1 - hits[-1] if hits.size else misses + need
        if (gaps.size and gaps.max() >= cap) or tail >= cap:
            raise BudgetExhausted(f"rand_vert_samp exceeded {cap} attempts")
        misses = int(tail)
        got_ids.append(x[hits])
        got_deg.append(dx[hits])
        got += hits.size
    return np.concatenate(got_ids), np.concatenate(got_deg)


def rand_vert_samp(sess: OracleSession, A: VertexSet, k: float, alpha_hint: float = 1.0,
                   cap_factor: float = 64.0) -> int:
    ids, _ = rand_vert_samp_many(sess, A, k, 1, alpha_hint, cap_factor)
    return int(ids[0])


# ---------------------------------------------------------------------------
# boosting

def median_boost(run, sess: OracleSession, cfg: EstimatorConfig, *args, **kw) -> Estimate:
    """Median over ``cfg.median_reps`` independent runs that produced a value."""
    if cfg.median_reps == 1:
        return run(sess, cfg, *args, **kw)
    results = [run(sess, cfg, *args, **kw) for _ in range(cfg.median_reps)]
    vals = [r.value for r in results if r.ok]
    if not vals:
        last = results[-1]
        return Estimate.of(sess, last.status, None, reps=cfg.median_reps, **last.trace)
    return Estimate.of(sess, VALUE, float(np.median(vals)), reps=cfg.median_reps,
                       values=vals, **{k: v for k, v in results[-1].trace.items() if k != "values"})
