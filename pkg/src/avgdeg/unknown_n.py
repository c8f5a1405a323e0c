"""Average-degree estimation when n is not revealed.

Long-running loops are written as generators.  ``gen.send(allowance)``
asks a loop to spend roughly ``allowance`` queries and yield; the loop's
final Estimate arrives as ``StopIteration.value``.  ``_drain`` runs a loop
to completion, and the ReMode pipeline interleaves two loops on a cost
ladder.  Splitting work into slices never changes the random draws, so a
sliced run and a straight run return the same answer.
"""
from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import Exhausted, OracleDisabled
from .graph_model import Graph
from .oracle import OracleSession
from .primitives import (ASSERT, VALUE, Estimate, EstimatorConfig, adjacency_probe,
                         est_num_ver, mean_inverse, tally_degrees)

__all__ = [
    "ThresholdState", "VertOrDens", "OnehopParams", "KnownN", "RhoAdvice",
    "ReMode", "AdvancedMode", "oriented_up", "out_degrees",
    "est_avg_deg_re", "est_avg_deg_re_fast_eps", "est_numvert_or_estdens",
    "onehop_check", "onehop_scan_dense", "bt_est_avg_deg", "bt_driver", "ers_est_avg_deg",
    "unknown_n_pipeline",
]

NHAT, RHOHAT = "NHat", "RhoHat"
_UNBOUNDED = math.inf


@dataclass
class ThresholdState:
    tau: int
    Y: int = 0
    k: int = 0
    w_sum: float = 0.0


@dataclass(frozen=True)
class VertOrDens:
    kind: str
    value: float
    witness: int | None
    s_star: int

    def __post_init__(self):
        if self.kind not in (NHAT, RHOHAT):
            raise ValueError(f"kind must be {NHAT} or {RHOHAT}")
        if (self.witness is not None) != (self.kind == NHAT):
            raise ValueError("witness is present exactly when kind is NHat")


@dataclass(frozen=True)
class OnehopParams:
    C: float
    delta: float = 0.1

    @property
    def B(self) -> float:
        return 5 * self.C + 2 * self.C ** 3

    @property
    def C_delta(self) -> int:
        return math.ceil(3 / math.sqrt(self.delta) * math.log(1 / self.delta))


@dataclass(frozen=True)
class KnownN:
    n: float


@dataclass(frozen=True)
class RhoAdvice:
    rho: float


@dataclass(frozen=True)
class ReMode:
    """BT and EstAvgDeg interleaved on a doubling cost ladder (needs rand_edge)."""


@dataclass(frozen=True)
class AdvancedMode:
    """EstNumVert-or-EstDens followed by ERS with the returned advice."""
    query: str = "additive"


# ---------------------------------------------------------------------------
# orientation and slicing helpers

def oriented_up(deg_x, id_x, deg_y, id_y) -> np.ndarray:
    """y above x in the (degree, id) order."""
    deg_x, deg_y = np.asarray(deg_x), np.asarray(deg_y)
    return (deg_y > deg_x) | ((deg_y == deg_x) & (np.asarray(id_y, dtype=np.uint64) >
                                                   np.asarray(id_x, dtype=np.uint64)))


def out_degrees(g: Graph) -> np.ndarray:
    """deg+ of every vertex (by index) under the (degree, id) orientation."""
    deg = g.degrees
    up_v = oriented_up(deg[g.eu], g.ids[g.eu], deg[g.ev], g.ids[g.ev])
    src = np.where(up_v, g.eu, g.ev)
    return np.bincount(src, minlength=g.n)


def _drain(gen):
    try:
        gen.send(None)
        while True:
            gen.send(_UNBOUNDED)
    except StopIteration as stop:
        return stop.value


def _units(allow: float, unit_cost: int, want: int) -> int:
    """How many unit steps fit into the allowance (at least one)."""
    if allow == _UNBOUNDED:
        return want
    return int(min(want, max(1, allow // unit_cost)))


def _up_samples(sess: OracleSession, k: int):
    """k ERS draws: uniform x, uniform neighbor y; returns (deg x, y above x)."""
    x = sess.rand_vert_many(k)
    dx = sess.degree_many(x)
    y = sess.rand_nbr_many(x)
    dy = sess.degree_many(y)
    return dx, oriented_up(dx, x, dy, y)


# ---------------------------------------------------------------------------
# EstAvgDeg with random edges

def _threshold(sess: OracleSession, cfg: EstimatorConfig) -> int:
    u, v = sess.rand_edge_many(math.ceil(cfg.c("estavgdeg_edges") / cfg.eps))
    du, dv = np.split(sess.degree_many(np.concatenate([u, v])), 2)
    return int(np.minimum(du, dv).max())


def _re_loop(sess: OracleSession, cfg: EstimatorConfig):
    st = ThresholdState(_threshold(sess, cfg))
    target = math.ceil(cfg.c("estavgdeg_threshold") / cfg.eps ** 2)
    allow = yield
    while st.Y < target:
        # Y grows by at most one per draw, so target - Y more draws are certain
        k = _units(allow, 4, target - st.Y)
        dx, up = _up_samples(sess, k)
        st.Y += int(np.count_nonzero(dx >= st.tau))
        st.k += k
        st.w_sum += float(np.minimum(np.where(up, dx, 0), st.tau).sum())
        if st.Y < target:
            allow = yield
    return Estimate.of(sess, VALUE, 2 * st.w_sum / st.k, branch="re", tau=st.tau, k=st.k, Y=st.Y)


def _need_re(sess: OracleSession) -> None:
    for op in ("rand_vert", "rand_nbr", "degree", "rand_edge"):
        if not sess.has(op):
            raise OracleDisabled(f"this estimator needs {op}")


def est_avg_deg_re(sess: OracleSession, cfg: EstimatorConfig) -> Estimate:
    """Average degree from vertex/neighbor samples, stopped by a degree-threshold counter."""
    _need_re(sess)
    return _drain(_re_loop(sess, cfg))


def _re_fast_loop(sess: OracleSession, cfg: EstimatorConfig):
    first = yield from _re_loop(sess, cfg.with_eps(cfg.c("fast_eps0")))
    d0, tau = first.value, first.trace["tau"]
    iters = math.ceil(cfg.c("fast_eps_iters") * tau / (cfg.eps ** 2 * d0))
    done, w_sum = 0, 0.0
    allow = yield
    while done < iters:
        k = _units(allow, 4, iters - done)
        dx, up = _up_samples(sess, k)
        w_sum += float(np.minimum(np.where(up, dx, 0), tau).sum())
        done += k
        if done < iters:
            allow = yield
    return Estimate.of(sess, VALUE, 2 * w_sum / iters, branch="re-fast", tau=tau, d0=d0,
                       iters=iters)


def est_avg_deg_re_fast_eps(sess: OracleSession, cfg: EstimatorConfig) -> Estimate:
    """Coarse run at eps0 sets the sample count of a fixed-length second phase."""
    _need_re(sess)
    return _drain(_re_fast_loop(sess, cfg))


# ---------------------------------------------------------------------------
# BT

def bt_est_avg_deg(sess: OracleSession, theta: float, cfg: EstimatorConfig) -> Estimate:
    """Degree-proportional samples of 1/deg; Assert when the mean is below 1/(2 theta)."""
    return _drain(_bt_level(sess, theta, cfg))


def _bt_level(sess, theta, cfg):
    k = math.ceil(cfg.c("bt") * theta / cfg.eps ** 2)
    done, tally = 0, Counter()
    allow = yield
    while done < k:
        step = _units(allow, 2, k - done)
        x, _ = sess.rand_edge_many(step)
        tally_degrees(tally, sess.degree_many(x))
        done += step
        if done < k:
            allow = yield
    # exact arithmetic so that regular graphs give exactly r
    Z = mean_inverse(tally, k)
    if Z < 1 / (2 * Fraction(theta)):
        return Estimate.of(sess, ASSERT, None, theta=theta, Z=Z, k=k)
    return Estimate.of(sess, VALUE, 1 / Z, theta=theta, Z=Z, k=k)


def _bt_driver_loop(sess, cfg):
    beta = math.ceil(cfg.c("bt_reps") * math.log(1 / cfg.delta))
    theta = 1
    while True:
        zs = []
        for _ in range(beta):
            r = yield from _bt_level(sess, theta, cfg)
            if r.ok:
                zs.append(r.trace["Z"])
        if 2 * len(zs) >= beta:
            return Estimate.of(sess, VALUE, 1 / statistics.median(zs), branch="bt",
                               theta_star=theta, beta=beta, hits=len(zs))
        theta *= 2


def bt_driver(sess: OracleSession, cfg: EstimatorConfig) -> Estimate:
    """Double theta until half of beta repetitions produce a value; trace holds theta_star."""
    for op in ("rand_edge", "degree"):
        if not sess.has(op):
            raise OracleDisabled(f"bt needs {op}")
    return _drain(_bt_driver_loop(sess, cfg))


# ---------------------------------------------------------------------------
# ERS

def _ers_median(sess, k, reps):
    zs = []
    for _ in range(reps):
        dx, up = _up_samples(sess, k)
        zs.append(2.0 * float(np.sum(np.where(up, dx, 0))) / k)
    return float(np.median(zs))


def ers_est_avg_deg(sess: OracleSession, cfg: EstimatorConfig, advice) -> Estimate:
    """Median of means of 2 deg(x) [neighbor above x]; advice fixes the sample count."""
    reps = math.ceil(cfg.c("ers_reps") * math.log(1 / cfg.delta))
    C = cfg.c("ers") / cfg.eps ** 2
    if isinstance(advice, RhoAdvice):
        k = math.ceil(C * math.ceil(math.sqrt(advice.rho)))
        return Estimate.of(sess, VALUE, _ers_median(sess, k, reps), k=k, reps=reps)
    if not isinstance(advice, KnownN):
        raise TypeError("advice must be KnownN or RhoAdvice")
    n = advice.n
    g = float(n)
    while g >= 1:
        k = math.ceil(C * math.sqrt(n / g))
        Z = _ers_median(sess, k, reps)
        if Z >= g / 2:
            return Estimate.of(sess, VALUE, Z, g=g, k=k, reps=reps)
        g /= 2
    raise Exhausted("guess g fell below 1")


# ---------------------------------------------------------------------------
# EstNumVert-or-EstDens

def _edges_inside(sess: OracleSession, X: np.ndarray, query: str) -> np.ndarray:
    """m(X) per row: ordered index pairs i<j with pair, one additive call otherwise."""
    X = np.atleast_2d(X)
    if query == "pair":
        s = X.shape[1]
        iu, ju = np.triu_indices(s, 1)
        out = np.empty(X.shape[0], dtype=np.int64)
        step = max(1, 1_000_000 // max(1, iu.size))
        for lo in range(0, X.shape[0], step):
            blk = X[lo:lo + step]
            out[lo:lo + step] = sess.pair_many(blk[:, iu].ravel(), blk[:, ju].ravel()) \
                .reshape(blk.shape[0], iu.size).sum(axis=1)
        return out
    return sess.additive_many(X)


def _has_nbr_in(sess: OracleSession, x: int, X: np.ndarray, query: str) -> bool:
    if query == "pair":
        return bool(np.any(adjacency_probe(sess, x, X)))
    with_x = np.concatenate([X, [np.uint64(x)]])[None, :]
    return int(sess.additive_many(with_x)[0] - sess.additive_many(X[None, :])[0]) > 0


def a_const(cfg: EstimatorConfig) -> int:
    a = cfg.c("a_const")
    if a is not None:
        return int(a)
    d = cfg.delta
    return math.ceil(d ** -3 * math.log(1 / d) ** 3)


def est_numvert_or_estdens(sess: OracleSession, cfg: EstimatorConfig,
                           query: str | None = None) -> VertOrDens:
    """Either n_hat via a high-degree witness or rho_hat = n/d via m(X) on doubling s."""
    if query is None:
        query = "additive" if sess.has("additive") else "pair"
    for op in ("rand_vert", "rand_nbr", "degree", query):
        if not sess.has(op):
            raise OracleDisabled(f"this estimator needs {op}")
    s = 2
    while True:
        A = sess.rand_vert_many(s)
        B = sess.rand_nbr_many(A)
        AB = np.concatenate([A, B])
        deg = sess.degree_many(AB)
        best = np.lexsort((AB, deg))[-1]
        x = int(AB[best])
        X = sess.rand_vert_many(s)
        if _has_nbr_in(sess, x, X, query):
            return VertOrDens(NHAT, est_num_ver(sess, x, cfg), x, s)
        if int(_edges_inside(sess, X, query)[0]) == 0:
            s *= 2
            continue
        k = math.ceil(a_const(cfg) / cfg.eps ** 2)
        total = 0
        step = max(1, 2_000_000 // s)
        for lo in range(0, k, step):
            rows = min(step, k - lo)
            total += int(_edges_inside(sess, sess.rand_vert_many(rows * s).reshape(rows, s), query).sum())
        if total == 0:
            # every repetition came back empty; treat like the zero probe
            s *= 2
            continue
        return VertOrDens(RHOHAT, s * s / (2 * total / k), None, s)


# ---------------------------------------------------------------------------
# one-hop combinatorial checker

def onehop_check(g: Graph, C: float) -> dict:
    """Full-scan check of: many squared degrees and few heavy vertices imply
    a large neighbor-weighted heavy fraction."""
    deg = g.degrees.astype(np.float64)
    m = g.m
    sqm = math.sqrt(m)
    D2 = float(np.sum(deg ** 2))
    heavy = deg >= C * sqm
    h = int(np.count_nonzero(heavy))
    rows = np.repeat(np.arange(g.n), g.degrees)
    deg_in_h = np.bincount(rows, weights=heavy[g.indices], minlength=g.n)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(deg > 0, deg_in_h / np.maximum(deg, 1), 0.0)
    total = float(frac.sum())
    params = OnehopParams(C)
    premises = D2 >= params.B * m ** 1.5 and h < C * sqm
    return {"premises_hold": bool(premises), "conclusion_holds": bool(total > C * sqm),
            "D2": D2, "heavy": h, "sum": total, "bound": C * sqm}


def onehop_scan_dense(adj: np.ndarray, C: float) -> tuple[np.ndarray, np.ndarray]:
    """Batched onehop_check over dense 0/1 adjacency matrices of shape (B, n, n).

    Returns (premises_hold, conclusion_holds) boolean arrays of length B.
    """
    adj = np.asarray(adj, dtype=np.float64)
    deg = adj.sum(axis=2)
    m = deg.sum(axis=1) / 2
    sqm = np.sqrt(m)
    D2 = (deg ** 2).sum(axis=1)
    heavy = deg >= C * sqm[:, None]
    deg_in_h = np.einsum("bij,bj->bi", adj, heavy.astype(np.float64))
    frac = np.where(deg > 0, deg_in_h / np.maximum(deg, 1), 0.0).sum(axis=1)
    B = OnehopParams(C).B
    premises = (D2 >= B * m ** 1.5) & (heavy.sum(axis=1) < C * sqm)
    return premises, frac > C * sqm


# ---------------------------------------------------------------------------
# pipelines

def _interleave(branches):
    """Run generator branches on a doubling cost ladder; first to finish wins."""
    started = []
    for sess, gen in branches:
        gen.send(None)
        started.append((sess, gen))
    level = 0
    while True:
        slice_cost = 2 ** level
        for sess, gen in started:
            spent = 0
            while spent < slice_cost:
                before = sess.meter.total
                try:
                    gen.send(slice_cost - spent)
                except StopIteration as stop:
                    stop.value.trace["ladder_level"] = level
                    return stop.value
                spent += sess.meter.total - before
        level += 1


def unknown_n_pipeline(sess: OracleSession, cfg: EstimatorConfig, mode) -> Estimate:
    if isinstance(mode, ReMode):
        _need_re(sess)
        bt_sess, re_sess = sess.spawn(), sess.spawn()
        out = _interleave([(bt_sess, _bt_driver_loop(bt_sess, cfg)),
                           (re_sess, _re_fast_loop(re_sess, cfg))])
        out.cost = sess.meter.snapshot()
        out.seed = sess.seed
        return out
    if isinstance(mode, AdvancedMode):
        vd = est_numvert_or_estdens(sess, cfg, mode.query)
        if vd.kind == NHAT:
            est = ers_est_avg_deg(sess, cfg, KnownN(vd.value))
            n_hat = vd.value
        else:
            est = ers_est_avg_deg(sess, cfg, RhoAdvice(vd.value))
            n_hat = vd.value * est.value
        est.trace.update(kind=vd.kind, n_hat=n_hat, s_star=vd.s_star, advice=vd.value)
        return est
    raise TypeError("mode must be ReMode or AdvancedMode")
