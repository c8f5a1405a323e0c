"""Metered query access to a graph.

An :class:`OracleSession` is the only thing estimators see.  Every query is
charged to a :class:`QueryMeter`; additive(S) costs ``len(S)`` and every
other query costs 1.  Batch methods (``*_many``) are exactly equivalent to
the corresponding sequence of scalar queries: each random oracle reads its
own Philox stream, so answers do not depend on how calls are grouped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BudgetExhausted, IsolatedVertices, OracleDisabled, UnknownVertex
from .graph_model import Graph

__all__ = ["AccessPolicy", "QueryMeter", "OracleSession", "OPS", "PRESETS"]

OPS = ("rand_vert", "rand_nbr", "degree", "rand_edge", "pair", "additive", "full_nbrhood")
# column suffixes used by the harness
OP_SHORT = {
    "rand_vert": "rv", "rand_nbr": "rn", "degree": "deg", "rand_edge": "re",
    "pair": "pair", "additive": "add", "full_nbrhood": "full",
}


@dataclass(frozen=True)
class AccessPolicy:
    rand_vert: bool = True
    rand_nbr: bool = True
    degree: bool = True
    rand_edge: bool = False
    pair: bool = False
    additive: bool = False
    full_nbrhood: bool = False
    n_known: bool = True

    @classmethod
    def base(cls, n_known: bool = True, **extra) -> "AccessPolicy":
        return cls(n_known=n_known, **extra)

    @classmethod
    def standard(cls, n_known: bool = True, **extra) -> "AccessPolicy":
        return cls(pair=True, n_known=n_known, **extra)

    @classmethod
    def advanced(cls, n_known: bool = True, **extra) -> "AccessPolicy":
        return cls(pair=True, additive=True, n_known=n_known, **extra)

    def with_(self, **kw) -> "AccessPolicy":
        return replace(self, **kw)

    def enabled(self, op: str) -> bool:
        return bool(getattr(self, op))


PRESETS = {
    "base": AccessPolicy.base(),
    "base+re": AccessPolicy.base(rand_edge=True),
    "standard": AccessPolicy.standard(),
    "standard+re": AccessPolicy.standard(rand_edge=True),
    "advanced": AccessPolicy.advanced(),
    "advanced+re": AccessPolicy.advanced(rand_edge=True),
    "edge-only": AccessPolicy(rand_vert=False, rand_edge=True, additive=True),
}


@dataclass
class QueryMeter:
    budget: int | None = None
    counts: dict = field(default_factory=lambda: dict.fromkeys(OPS, 0))
    costs: dict = field(default_factory=lambda: dict.fromkeys(OPS, 0))
    total: int = 0

    def remaining(self) -> float:
        return math.inf if self.budget is None else self.budget - self.total

    def charge(self, op: str, calls: int, cost: int) -> None:
        self.counts[op] += calls
        self.costs[op] += cost
        self.total += cost

    def snapshot(self) -> dict:
        return {"total": self.total, "counts": dict(self.counts), "costs": dict(self.costs)}


def _ids_str(a) -> str:
    return ",".join(str(int(v)) for v in np.atleast_1d(a))


class OracleSession:
    """Seeded, metered access to ``graph`` under ``policy``.

    ``transcript=True`` records one ``op;args;answer;cost`` line per query.
    ``meter`` may be shared with other sessions (pipelines split RNG
    sub-streams but keep a single bill).
    """

    def __init__(self, graph: Graph, policy: AccessPolicy, seed: int = 0,
                 budget: int | None = None, transcript: bool = False,
                 meter: QueryMeter | None = None, allow_isolated: bool = False,
                 _seedseq: np.random.SeedSequence | None = None):
        if not allow_isolated and graph.n and graph.min_degree < 1:
            raise IsolatedVertices("graph has isolated vertices (min degree 0)")
        self._g = graph
        self.policy = policy
        self.seed = seed
        self.meter = meter if meter is not None else QueryMeter(budget=budget)
        self.transcript: list[str] | None = [] if transcript else None
        ss = _seedseq if _seedseq is not None else np.random.SeedSequence(seed)
        rv, rn, re, coin, split = ss.spawn(5)
        self._rv = np.random.Generator(np.random.Philox(rv))
        self._rn = np.random.Generator(np.random.Philox(rn))
        self._re = np.random.Generator(np.random.Philox(re))
        self.coins = np.random.Generator(np.random.Philox(coin))
        self._split = split
        self._memo = (None, None)

    # session plumbing -----------------------------------------------------
    def spawn(self) -> "OracleSession":
        """Child session with independent streams and the same meter."""
        child = OracleSession(self._g, self.policy, seed=self.seed, meter=self.meter,
                              allow_isolated=True, _seedseq=self._split.spawn(1)[0])
        child.transcript = self.transcript
        return child

    @property
    def n(self) -> int:
        if not self.policy.n_known:
            raise OracleDisabled("n is not revealed under this policy")
        return self._g.n

    def has(self, op: str) -> bool:
        return self.policy.enabled(op)

    def _gate(self, op: str) -> None:
        if not self.policy.enabled(op):
            raise OracleDisabled(f"{op} is disabled by the access policy")

    def _fit_unit(self, k: int) -> int:
        rem = self.meter.remaining()
        return k if rem >= k else max(0, int(rem))

    def _idx(self, vids) -> np.ndarray:
        # estimators often query the same freshly returned (read-only) array twice
        if vids is self._memo[0]:
            return self._memo[1]
        idx = self._g.index_of(vids)
        if isinstance(vids, np.ndarray) and not vids.flags.writeable:
            self._memo = (vids, idx)
        if np.any(idx < 0):
            bad = np.atleast_1d(np.asarray(vids, dtype=np.uint64))[idx < 0][0]
            raise UnknownVertex(f"unknown vertex id {int(bad)}")
        return idx

    def _done(self, op: str, ok: int, want: int, cost: int | None = None) -> None:
        self.meter.charge(op, ok, ok if cost is None else cost)
        if ok < want:
            raise BudgetExhausted(f"budget {self.meter.budget} exhausted at {op}")

    def _log(self, op: str, args: list[str], answers: list[str], costs) -> None:
        if self.transcript is None:
            return
        if isinstance(costs, int):
            costs = [costs] * len(answers)
        self.transcript.extend(f"{op};{a};{b};{c}" for a, b, c in zip(args, answers, costs))

    # random vertices --------------------------------------------------------
    def rand_vert_many(self, k: int) -> np.ndarray:
        self._gate("rand_vert")
        ok = self._fit_unit(int(k))
        g = self._g
        idx = np.minimum((self._rv.random(ok) * g.n).astype(np.int64), g.n - 1)
        out = g.ids[idx]
        out.flags.writeable = False
        if self.transcript is not None:
            self._log("rand_vert", [""] * ok, [str(int(v)) for v in out], 1)
        self._done("rand_vert", ok, k)
        return out

    def rand_vert(self) -> int:
        return int(self.rand_vert_many(1)[0])

    # random neighbors -------------------------------------------------------
    def rand_nbr_many(self, xs) -> np.ndarray:
        self._gate("rand_nbr")
        xs = np.atleast_1d(np.asarray(xs, dtype=np.uint64))
        idx = self._idx(xs)
        g = self._g
        deg = g.indptr[idx + 1] - g.indptr[idx]
        if np.any(deg == 0):
            raise UnknownVertex("rand_nbr on an isolated vertex")
        ok = self._fit_unit(xs.size)
        pos = g.indptr[idx[:ok]] + np.minimum((self._rn.random(ok) * deg[:ok]).astype(np.int64), deg[:ok] - 1)
        out = g.ids[g.indices[pos]]
        out.flags.writeable = False
        if self.transcript is not None:
            self._log("rand_nbr", [str(int(v)) for v in xs[:ok]], [str(int(v)) for v in out], 1)
        self._done("rand_nbr", ok, xs.size)
        return out

    def rand_nbr(self, x) -> int:
        return int(self.rand_nbr_many([x])[0])

    # degrees ----------------------------------------------------------------
    def degree_many(self, xs) -> np.ndarray:
        self._gate("degree")
        xs = np.atleast_1d(np.asarray(xs, dtype=np.uint64))
        idx = self._idx(xs)
        ok = self._fit_unit(xs.size)
        g = self._g
        out = g.indptr[idx[:ok] + 1] - g.indptr[idx[:ok]]
        if self.transcript is not None:
            self._log("degree", [str(int(v)) for v in xs[:ok]], [str(int(v)) for v in out], 1)
        self._done("degree", ok, xs.size)
        return out

    def degree(self, x) -> int:
        return int(self.degree_many([x])[0])

    # random edges -----------------------------------------------------------
    def rand_edge_many(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """``k`` uniform edges as (first, second) id arrays, orientation uniform."""
        self._gate("rand_edge")
        ok = self._fit_unit(int(k))
        g = self._g
        j = np.minimum((self._re.random(ok) * (2 * g.m)).astype(np.int64), 2 * g.m - 1)
        e, flip = j >> 1, (j & 1).astype(bool)
        a = np.where(flip, g.ev[e], g.eu[e])
        b = np.where(flip, g.eu[e], g.ev[e])
        u, v = g.ids[a], g.ids[b]
        if self.transcript is not None:
            self._log("rand_edge", [""] * ok, [f"{int(p)},{int(q)}" for p, q in zip(u, v)], 1)
        self._done("rand_edge", ok, k)
        return u, v

    def rand_edge(self) -> tuple[int, int]:
        u, v = self.rand_edge_many(1)
        return int(u[0]), int(v[0])

    # pair -------------------------------------------------------------------
    def pair_many(self, xs, ys) -> np.ndarray:
        self._gate("pair")
        xs = np.atleast_1d(np.asarray(xs, dtype=np.uint64))
        ys = np.atleast_1d(np.asarray(ys, dtype=np.uint64))
        xs, ys = np.broadcast_arrays(xs, ys)
        xs, ys = xs.ravel(), ys.ravel()
        a, b = self._idx(xs), self._idx(ys)
        ok = self._fit_unit(xs.size)
        out = self._g.has_edges(a[:ok], b[:ok]).astype(np.int64)
        if self.transcript is not None:
            self._log("pair", [f"{int(p)},{int(q)}" for p, q in zip(xs[:ok], ys[:ok])],
                      [str(int(v)) for v in out], 1)
        self._done("pair", ok, xs.size)
        return out

    def pair(self, x, y) -> int:
        return int(self.pair_many([x], [y])[0])

    # additive -----------------------------------------------------------------
    def additive_many(self, sets) -> np.ndarray:
        """Edge counts inside each (deduplicated) set; cost is the multiset size."""
        self._gate("additive")
        rect = isinstance(sets, np.ndarray) and sets.ndim == 2
        if rect:
            sets = np.asarray(sets, dtype=np.uint64)
            sizes = np.full(sets.shape[0], sets.shape[1], dtype=np.int64)
            idx2 = self._idx(sets.ravel()).reshape(sets.shape)
        else:
            sets = [np.atleast_1d(np.asarray(s, dtype=np.uint64)) for s in sets]
            sizes = np.array([s.size for s in sets], dtype=np.int64)
            idxs = [self._idx(s) if s.size else np.empty(0, np.int64) for s in sets]
        rem = self.meter.remaining()
        ok = int(np.searchsorted(np.cumsum(sizes), rem, side="right")) if rem < math.inf else sizes.size
        if rect:
            out = self._count_rect(idx2[:ok])
        else:
            out = np.array([self._g.count_induced(i) for i in idxs[:ok]], dtype=np.int64)
        if self.transcript is not None:
            src = sets[:ok]
            self._log("additive", [_ids_str(s) for s in src], [str(int(v)) for v in out],
                      [int(c) for c in sizes[:ok]])
        self._done("additive", ok, sizes.size, int(sizes[:ok].sum()))
        return out

    def _count_rect(self, idx2: np.ndarray) -> np.ndarray:
        t, s = idx2.shape
        if t == 0:
            return np.zeros(0, dtype=np.int64)
        npairs = s * (s - 1) // 2
        if npairs > 4096:
            return np.array([self._g.count_induced(r) for r in idx2], dtype=np.int64)
        srt = np.sort(idx2, axis=1)
        # duplicates get distinct negative sentinels so they pair with nothing
        dup = np.zeros_like(srt, dtype=bool)
        dup[:, 1:] = srt[:, 1:] == srt[:, :-1]
        srt = np.where(dup, -1 - np.arange(s)[None, :], srt)
        iu, ju = np.triu_indices(s, 1)
        out = np.empty(t, dtype=np.int64)
        step = max(1, 2_000_000 // max(npairs, 1))
        for lo in range(0, t, step):
            blk = srt[lo:lo + step]
            a, b = blk[:, iu], blk[:, ju]
            valid = (a >= 0) & (b >= 0)
            hit = np.zeros(a.shape, dtype=bool)
            hit[valid] = self._g.has_edges(a[valid], b[valid])
            out[lo:lo + step] = hit.sum(axis=1)
        return out

    def additive(self, S) -> int:
        return int(self.additive_many([S])[0])

    # full neighborhood --------------------------------------------------------
    def full_nbrhood(self, x) -> list[int]:
        self._gate("full_nbrhood")
        i = int(self._idx([x])[0])
        ok = self._fit_unit(1)
        if ok:
            out = [int(v) for v in self._g.ids[self._g.neighbors(i)]]
            self._log("full_nbrhood", [str(int(x))], [_ids_str(out)], 1)
        self._done("full_nbrhood", ok, 1)
        return out
