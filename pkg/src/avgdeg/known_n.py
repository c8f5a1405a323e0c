"""Average-degree estimation when n is known.

Easy case: heavy vertices (degree >= Delta) carry few edges, so the harmonic
estimator over the heavy set is cheap.  Hard case: find two dense
quasi-regular degree classes, estimate the edges between them from small
vertex samples, and scale up by the fraction of edges they account for.
A guess g of the average degree is halved until the edge-count probe stops
aborting.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import Exhausted, InvalidP, NoDensePair, OracleDisabled
from .oracle import OracleSession
from .primitives import (ABORT, ASSERT, VALUE, DegreeClass, Estimate, EstimatorConfig,
                         bernoulli_est, bernoulli_threshold, est_frac_edge, median_boost,
                         rand_vert_samp_many, mean_inverse, tally_degrees)

__all__ = [
    "PAIR", "ADDITIVE", "HighDegSummary", "DensePair", "DensityEstimate",
    "est_dens_high_deg", "harmonic_estimator", "degree_bin", "find_dense_pair",
    "estimate_density", "count_cross_edges", "est_num_edges",
    "estimate_average_degree", "est_avg_deg_edge_only",
]

PAIR, ADDITIVE = "pair", "additive"


@dataclass(frozen=True)
class HighDegSummary:
    f: float
    f_prime: float
    delta: int
    p: float


@dataclass(frozen=True)
class DensePair:
    i: int
    j: int
    A: DegreeClass
    B: DegreeClass
    k: int
    l: int
    alpha: float
    count: int = 0


@dataclass(frozen=True)
class DensityEstimate:
    rho_A: float
    rho_B: float


def _log2n(sess: OracleSession) -> float:
    return math.log2(sess.n)


def edge_degrees(sess: OracleSession, k: int) -> np.ndarray:
    """min endpoint degree of ``k`` uniform edges."""
    u, v = sess.rand_edge_many(k)
    du, dv = np.split(sess.degree_many(np.concatenate([u, v])), 2)
    return np.minimum(du, dv)


def est_dens_high_deg(sess: OracleSession, p: float) -> HighDegSummary:
    if not 0 < p <= 1:
        raise InvalidP(f"p must lie in (0, 1], got {p}")
    lg = _log2n(sess)
    L = max(1, math.ceil(lg))
    r = max(L, math.ceil(lg / p))
    xs = sess.rand_vert_many(r)
    degs = sess.degree_many(xs)
    # L-th largest by (degree, id); only the degree matters downstream
    order = np.lexsort((xs, degs))[::-1]
    delta = int(degs[order[L - 1]])
    ed = edge_degrees(sess, L)
    return HighDegSummary(float(np.mean(ed >= delta)), float(np.mean(ed >= delta + 1)), delta, p)


def harmonic_estimator(sess: OracleSession, delta: int, p: float, cfg: EstimatorConfig) -> Estimate:
    """d = (|H|/n) / (|H|/2m): fraction of heavy vertices over a degree-weighted harmonic mean."""
    H = DegreeClass(lo=delta)
    # |H| >= np/4 whp, so 64x the expected draw count only trips on a broken premise
    cap = math.ceil(64 * bernoulli_threshold(cfg) / p)
    p_hat = bernoulli_est(lambda k: _in_class(sess, H, sess.rand_vert_many(k)), cfg, max_draws=cap)
    if p_hat == 0:
        return Estimate.of(sess, ABORT, None, branch="harmonic", reason="empty heavy set")
    k = math.ceil(cfg.c("harmonic") / (cfg.eps ** 2 * p_hat))
    x, _ = sess.rand_edge_many(k)
    dx = sess.degree_many(x)
    tally = Counter()
    tally_degrees(tally, dx, dx >= delta)
    Z = mean_inverse(tally, k)
    if Z == 0:
        return Estimate.of(sess, ABORT, None, branch="harmonic", reason="Z = 0")
    return Estimate.of(sess, VALUE, Fraction(p_hat) / Z, branch="harmonic", p_hat=p_hat, Z=float(Z), k=k,
                       delta=delta)


def _in_class(sess, S, ids):
    return S.contains(ids, sess.degree_many(ids))


def degree_bin(deg, delta: int) -> np.ndarray:
    """Bin index i >= 1 with deg in [2^(i-1)(delta+1), 2^i(delta+1)); 0 below delta+1."""
    q = np.asarray(deg, dtype=np.int64) // (delta + 1)
    out = np.zeros(q.shape, dtype=np.int64)
    pos = q > 0
    out[pos] = np.floor(np.log2(q[pos])).astype(np.int64) + 1
    # float log2 can be off by one at exact powers of two
    out[pos & (np.left_shift(1, np.maximum(out - 1, 0)) > q)] -= 1
    out[pos & (np.left_shift(1, out) <= q)] += 1
    return out


def find_dense_pair(sess: OracleSession, delta: int) -> DensePair:
    lg = _log2n(sess)
    count = math.ceil(lg ** 3)
    u, v = sess.rand_edge_many(count)
    du, dv = np.split(sess.degree_many(np.concatenate([u, v])), 2)
    bu, bv = degree_bin(du, delta), degree_bin(dv, delta)
    both = (bu > 0) & (bv > 0)
    tally = Counter(zip(np.minimum(bu, bv)[both].tolist(), np.maximum(bu, bv)[both].tolist()))
    need = lg ** 2 / 4
    good = [(c, ij) for ij, c in tally.items() if c >= need]
    if not good:
        raise NoDensePair(f"no bin pair reached {need:.1f} of {count} sampled edges")
    c, (i, j) = max(good, key=lambda t: (t[0], -t[1][0], -t[1][1]))
    alpha = lg ** 2 / 16
    k = (1 << (i - 1)) * (delta + 1)
    l = (1 << (j - 1)) * (delta + 1)
    if i == j:
        salt = int(sess.coins.integers(0, 2 ** 63))
        A = DegreeClass(k, 2 * k, color=0, salt=salt)
        B = DegreeClass(k, 2 * k, color=1, salt=salt)
    else:
        A, B = DegreeClass(k, 2 * k), DegreeClass(l, 2 * l)
    return DensePair(i, j, A, B, k, l, alpha, c)


def _samp(sess, S, base, count, alpha, cfg):
    return rand_vert_samp_many(sess, S, base, count, alpha, cfg.c("samp_cap"))


def estimate_density(sess: OracleSession, dp: DensePair, cfg: EstimatorConfig) -> DensityEstimate:
    t = math.ceil(cfg.c("density") * dp.alpha / cfg.eps ** 2)
    rhos = []
    for S, base, T in ((dp.A, dp.k, dp.B), (dp.B, dp.l, dp.A)):
        a, da = _samp(sess, S, base, t, dp.alpha, cfg)
        y = sess.rand_nbr_many(a)
        hit = T.contains(y, sess.degree_many(y))
        rhos.append(float(np.mean(da * hit)))
    return DensityEstimate(*rhos)


def count_cross_edges(sess: OracleSession, X: np.ndarray, Y: np.ndarray, mode: str) -> np.ndarray:
    """m(X_r, Y_r) for each row r.

    pair: all s^2 ordered index pairs, duplicates counted with multiplicity.
    additive: additive(X+Y) - additive(X) - additive(Y), cost 4s per row.
    """
    X = np.atleast_2d(X)
    Y = np.atleast_2d(Y)
    t, s = X.shape
    if mode == PAIR:
        out = np.empty(t, dtype=np.int64)
        step = max(1, 1_000_000 // max(1, s * Y.shape[1]))
        for lo in range(0, t, step):
            xb, yb = X[lo:lo + step], Y[lo:lo + step]
            xs = np.repeat(xb, yb.shape[1], axis=1)
            ys = np.tile(yb, (1, xb.shape[1]))
            out[lo:lo + step] = sess.pair_many(xs.ravel(), ys.ravel()).reshape(xs.shape).sum(axis=1)
        return out
    both = sess.additive_many(np.concatenate([X, Y], axis=1))
    return both - sess.additive_many(X) - sess.additive_many(Y)


def est_num_edges(sess: OracleSession, dp: DensePair, s: int, cfg: EstimatorConfig,
                  mode: str = ADDITIVE) -> Estimate:
    """Abort, or m_hat(A,B) = s^2 rho_A rho_B / mean m(X,Y)."""
    X, _ = _samp(sess, dp.A, dp.k, s, dp.alpha, cfg)
    Y, _ = _samp(sess, dp.B, dp.l, s, dp.alpha, cfg)
    z0 = int(count_cross_edges(sess, X[None, :], Y[None, :], mode)[0])
    if z0 == 0:
        return Estimate.of(sess, ABORT, None, s=s, z0=0)
    t = math.ceil(cfg.c("numedges") * dp.alpha / cfg.eps ** 2)
    Xs, _ = _samp(sess, dp.A, dp.k, t * s, dp.alpha, cfg)
    Ys, _ = _samp(sess, dp.B, dp.l, t * s, dp.alpha, cfg)
    Zs = float(np.mean(count_cross_edges(sess, Xs.reshape(t, s), Ys.reshape(t, s), mode)))
    dens = estimate_density(sess, dp, cfg)
    if Zs == 0:
        return Estimate.of(sess, ABORT, None, s=s, z0=z0, Zs=0.0)
    m_hat = s * s * dens.rho_A * dens.rho_B / Zs
    return Estimate.of(sess, VALUE, m_hat, s=s, t=t, z0=z0, Zs=Zs,
                       rho_A=dens.rho_A, rho_B=dens.rho_B)


def _sample_size(alpha: float, p: float, mode: str) -> int:
    if mode == ADDITIVE:
        return math.ceil(math.sqrt(alpha) / p)
    return math.ceil(math.sqrt(alpha / p))


def _check_mode(sess: OracleSession, mode: str) -> None:
    if mode not in (PAIR, ADDITIVE):
        raise ValueError(f"mode must be {PAIR!r} or {ADDITIVE!r}")
    if not sess.has(mode):
        raise OracleDisabled(f"{mode} mode needs the {mode} oracle")


def _dense_branch(sess, cfg, delta, p, n, mode):
    """One pass of the hard case; None means abort (halve the guess)."""
    try:
        dp = find_dense_pair(sess, delta)
    except NoDensePair:
        return None, {}
    s = _sample_size(dp.alpha, p, mode)
    out = est_num_edges(sess, dp, s, cfg, mode)
    if not out.ok:
        return None, {}
    theta = est_frac_edge(sess, dp.A, dp.B, cfg)
    d_hat = out.value / theta * 2 / n
    return d_hat, dict(bins=(dp.i, dp.j), alpha=dp.alpha, s=s, m_hat=out.value, theta=theta)


def _ead_once(sess: OracleSession, cfg: EstimatorConfig, mode: str) -> Estimate:
    n = sess.n
    expo = 0.25 if mode == ADDITIVE else 1 / 3
    g = float(n)
    while g >= 1:
        p = (g / n) ** expo
        hs = est_dens_high_deg(sess, p)
        if hs.f_prime < 2 / 3:
            est = harmonic_estimator(sess, hs.delta, p, cfg)
            est.trace.update(g=g, f_prime=hs.f_prime)
            return est
        d_hat, info = _dense_branch(sess, cfg, hs.delta, p, n, mode)
        if d_hat is not None:
            return Estimate.of(sess, VALUE, d_hat, branch="dense", g=g, delta=hs.delta, **info)
        g /= 2
    raise Exhausted("guess g fell below 1")


def estimate_average_degree(sess: OracleSession, cfg: EstimatorConfig, mode: str = ADDITIVE) -> Estimate:
    """Guess-halving driver; p = (g/n)^(1/4) with additive, (g/n)^(1/3) with pair."""
    _check_mode(sess, mode)
    return median_boost(_ead_once, sess, cfg, mode)


def _edge_only_once(sess: OracleSession, cfg: EstimatorConfig) -> Estimate:
    from .unknown_n import bt_est_avg_deg

    n = sess.n
    bt = bt_est_avg_deg(sess, n ** (1 / 3), cfg)
    if bt.ok:
        bt.trace["branch"] = "bt"
        return bt
    g = float(n)
    while g >= 1:
        p = (g / n) ** 0.5
        d_hat, info = _dense_branch(sess, cfg, 0, p, n, ADDITIVE)
        if d_hat is not None:
            return Estimate.of(sess, VALUE, d_hat, branch="dense", g=g, **info)
        g /= 2
    raise Exhausted("guess g fell below 1")


def est_avg_deg_edge_only(sess: OracleSession, cfg: EstimatorConfig) -> Estimate:
    """Known-n estimator without uniform vertex samples."""
    if sess.has("rand_vert"):
        raise OracleDisabled("edge-only estimation requires rand_vert to be disabled")
    _check_mode(sess, ADDITIVE)
    return median_boost(_edge_only_once, sess, cfg)
