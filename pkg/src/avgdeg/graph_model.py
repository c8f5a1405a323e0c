"""Immutable simple-graph storage, ground truth and synthetic families.

Vertices carry opaque 64-bit ids drawn uniformly at random.  Internally a
graph keeps its vertices sorted by id, so index order and id order agree and
every neighbor list (CSR layout) is sorted by id.  Id -> index translation
goes through a vectorized open-addressing hash table because the estimators
look ids up by the million.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DuplicateEdge, InconsistentNHint, InvalidSpec, SelfLoop

__all__ = [
    "Graph",
    "GraphFamilySpec",
    "FAMILIES",
    "build_from_edges",
    "generate",
    "ground_truth",
    "read_edge_list",
    "write_edge_list",
    "parse_edge_list",
    "format_edge_list",
    "random_ids",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MASK32 = np.int64(0xFFFFFFFF)


class HashIndex:
    """Vectorized uint64 -> int64 map with linear probing (load factor <= 1/spread)."""

    def __init__(self, keys: np.ndarray, values: np.ndarray | None = None, spread: int = 2):
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        if values is None:
            values = np.arange(keys.size, dtype=np.int64)
        bits = max(4, int(math.ceil(math.log2(max(spread * keys.size, 2)))))
        size = 1 << bits
        self._mask = np.int64(size - 1)
        self._shift = np.uint64(64 - bits)
        self._keys = np.zeros(size, dtype=np.uint64)
        self._vals = np.full(size, -1, dtype=np.int64)
        pend_k = keys
        pend_v = np.asarray(values, dtype=np.int64)
        slots = self._hash(pend_k)
        while pend_k.size:
            free = np.flatnonzero(self._vals[slots] == -1)
            _, first = np.unique(slots[free], return_index=True)
            win = free[first]
            self._keys[slots[win]] = pend_k[win]
            self._vals[slots[win]] = pend_v[win]
            lose = np.ones(pend_k.size, dtype=bool)
            lose[win] = False
            pend_k, pend_v = pend_k[lose], pend_v[lose]
            slots = (slots[lose] + 1) & self._mask

    def _hash(self, q: np.ndarray) -> np.ndarray:
        return ((q * _GOLDEN) >> self._shift).astype(np.int64)

    def lookup(self, q) -> np.ndarray:
        """Values for each key in ``q``; -1 where absent."""
        q = np.atleast_1d(np.asarray(q, dtype=np.uint64))
        slots = self._hash(q)
        v = self._vals[slots]
        hit = self._keys[slots] == q
        out = np.where(hit, v, -1)
        # most keys sit in their home slot; probe onward only for the rest
        active = np.flatnonzero(~hit & (v != -1))
        slots = (slots[active] + 1) & self._mask
        while active.size:
            v = self._vals[slots]
            hit = (v != -1) & (self._keys[slots] == q[active])
            out[active[hit]] = v[hit]
            go_on = (v != -1) & ~hit
            active = active[go_on]
            slots = (slots[go_on] + 1) & self._mask
        return out


def _freeze(*arrays):
    for a in arrays:
        a.flags.writeable = False


@dataclass(eq=False)
class Graph:
    """Simple undirected graph; vertex ``i`` has id ``ids[i]`` and ids are ascending.

    ``eu[j] < ev[j]`` for every edge, edges sorted lexicographically, so the
    canonical edge list is ordered by id.
    """

    ids: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    eu: np.ndarray
    ev: np.ndarray
    _id_index: HashIndex = field(repr=False)
    _edge_index: HashIndex | None = field(default=None, repr=False)

    @classmethod
    def from_index_edges(cls, ids: np.ndarray, eu: np.ndarray, ev: np.ndarray) -> "Graph":
        """Build from sorted unique ``ids`` and index-level edges (any orientation)."""
        n = ids.size
        eu = np.asarray(eu, dtype=np.int64)
        ev = np.asarray(ev, dtype=np.int64)
        if np.any(eu == ev):
            raise SelfLoop("edge list contains a self-loop")
        lo, hi = np.minimum(eu, ev), np.maximum(eu, ev)
        key = (lo << 32) | hi
        key.sort()
        if key.size > 1 and np.any(key[1:] == key[:-1]):
            raise DuplicateEdge("edge list contains a repeated pair")
        eu = (key >> 32).astype(np.int32)
        ev = (key & _MASK32).astype(np.int32)
        del key, lo, hi
        arc = np.concatenate([eu.astype(np.int64) << 32 | ev, ev.astype(np.int64) << 32 | eu])
        arc.sort()
        deg = np.bincount(arc >> 32, minlength=n) if arc.size else np.zeros(n, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = (arc & _MASK32).astype(np.int32)
        del arc
        ids = np.ascontiguousarray(ids, dtype=np.uint64)
        _freeze(ids, indptr, indices, eu, ev)
        return cls(ids, indptr, indices, eu, ev, HashIndex(ids, spread=4))

    # basic statistics ---------------------------------------------------
    @property
    def n(self) -> int:
        return int(self.ids.size)

    @property
    def m(self) -> int:
        return int(self.eu.size)

    @property
    def d(self) -> float:
        return 2.0 * self.m / self.n

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def min_degree(self) -> int:
        return int(self.degrees.min()) if self.n else 0

    def index_of(self, vid) -> np.ndarray:
        """Indices of the given ids, -1 for ids not in the graph."""
        return self._id_index.lookup(vid)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    # adjacency tests ------------------------------------------------------
    def _edges_table(self) -> HashIndex:
        if self._edge_index is None:
            keys = (self.eu.astype(np.int64) << 32 | self.ev).astype(np.uint64)
            self._edge_index = HashIndex(keys)
        return self._edge_index

    def has_edges(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise adjacency of index arrays ``a`` and ``b``."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = (lo << 32 | hi).astype(np.uint64)
        return (self._edges_table().lookup(keys) >= 0) & (lo != hi)

    def count_induced(self, idx) -> int:
        """Number of edges with both endpoints in the distinct set ``idx``."""
        members = np.unique(np.asarray(idx, dtype=np.int64))
        k = members.size
        if k < 2:
            return 0
        deg = self.degrees[members]
        total = int(deg.sum())
        if k * (k - 1) // 2 <= total:
            iu, ju = np.triu_indices(k, 1)
            return int(np.count_nonzero(self.has_edges(members[iu], members[ju])))
        starts = self.indptr[members]
        offs = np.repeat(starts - np.concatenate([[0], np.cumsum(deg)[:-1]]), deg)
        nbrs = self.indices[offs + np.arange(total)]
        return int(np.count_nonzero(np.isin(nbrs, members, assume_unique=False))) // 2

    def edge_id_pairs(self) -> np.ndarray:
        return np.stack([self.ids[self.eu], self.ids[self.ev]], axis=1)


# ---------------------------------------------------------------------------
# ids

def random_ids(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` distinct ids drawn uniformly from the 64-bit space; collisions redrawn."""
    ids = rng.bit_generator.random_raw(n).astype(np.uint64)
    while True:
        _, first = np.unique(ids, return_index=True)
        if first.size == n:
            return ids
        dup = np.ones(n, dtype=bool)
        dup[first] = False
        ids[dup] = rng.bit_generator.random_raw(int(dup.sum())).astype(np.uint64)


def _from_labels(n: int, lu: np.ndarray, lv: np.ndarray, rng: np.random.Generator) -> Graph:
    ids = random_ids(n, rng)
    order = np.argsort(ids, kind="stable")
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    return Graph.from_index_edges(ids[order], rank[lu], rank[lv])


def build_from_edges(edges, n_hint: int | None = None, no_isolated: bool = True,
                     seed: int = 0) -> Graph:
    """Canonical graph from id pairs.

    Vertices are the union of endpoints.  With ``n_hint`` larger than that
    and ``no_isolated`` unset, the remainder is padded with isolated vertices
    whose ids come from ``seed``.
    """
    arr = np.asarray(edges, dtype=np.uint64).reshape(-1, 2)
    if np.any(arr[:, 0] == arr[:, 1]):
        raise SelfLoop("pair (x, x) is not allowed")
    vids = np.unique(arr)
    if n_hint is not None:
        if n_hint < vids.size:
            raise InconsistentNHint(f"n_hint={n_hint} below {vids.size} distinct endpoints")
        if n_hint > vids.size:
            if no_isolated:
                raise InconsistentNHint("n_hint implies isolated vertices but no_isolated is set")
            rng = np.random.Generator(np.random.Philox(seed))
            extra = []
            have = set(vids.tolist())
            while len(extra) < n_hint - vids.size:
                for x in rng.bit_generator.random_raw(n_hint - vids.size).tolist():
                    if x not in have:
                        have.add(x)
                        extra.append(x)
            vids = np.sort(np.concatenate([vids, np.asarray(extra[:n_hint - vids.size], dtype=np.uint64)]))
    eu = np.searchsorted(vids, arr[:, 0])
    ev = np.searchsorted(vids, arr[:, 1])
    return Graph.from_index_edges(vids, eu, ev)


# ---------------------------------------------------------------------------
# edge-list text format

def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    pairs = g.edge_id_pairs().tolist()
    lines.extend(f"{u} {v}" for u, v in pairs)
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str, no_isolated: bool = True) -> Graph:
    rows = text.split("\n")
    head = rows[0].split()
    if len(head) != 2:
        raise InvalidSpec("edge-list header must be 'n m'")
    n, m = int(head[0]), int(head[1])
    body = [r for r in rows[1:] if r.strip()]
    if len(body) != m:
        raise InvalidSpec(f"header declares {m} edges, found {len(body)}")
    pairs = [tuple(int(t) for t in r.split()) for r in body]
    for u, v in pairs:
        if u >= v:
            raise InvalidSpec("edge-list rows must satisfy u < v")
    g = build_from_edges(pairs, n_hint=n, no_isolated=no_isolated)
    return g


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g), encoding="utf-8", newline="\n")


def read_edge_list(path, no_isolated: bool = True) -> Graph:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"), no_isolated=no_isolated)


# ---------------------------------------------------------------------------
# ground truth (test oracle; never visible to estimators)

def ground_truth(g: Graph) -> dict:
    deg = g.degrees
    vals, counts = np.unique(deg, return_counts=True)
    return {
        "n": g.n,
        "m": g.m,
        "d": g.d,
        "D2": int(np.sum(deg.astype(np.int64) ** 2)),
        "deg_histogram": {int(a): int(b) for a, b in zip(vals, counts)},
    }


# ---------------------------------------------------------------------------
# synthetic families

FAMILIES = (
    "cycle",
    "regular",
    "clique-collection",
    "clique-matching-mix",
    "complete-bipartite",
    "star",
    "edge-list-file",
)


@dataclass(frozen=True)
class GraphFamilySpec:
    """Family tag plus size parameters.

    clique-matching-mix lays out ``gamma*k`` cliques of size ``s``, an
    optional extra clique of size ``extra``, and a perfect matching on the
    remaining vertices.  ``matching`` (pairs) may be given instead of ``n``.
    """

    family: str
    n: int | None = None
    d: int | None = None
    k: int | None = None
    s: int | None = None
    matching: int | None = None
    extra: int = 0
    gamma: int = 1
    a: int | None = None
    b: int | None = None
    path: str | None = None
    seed: int = 0

    def mix_counts(self) -> tuple[int, int, int, int]:
        """(clique count, clique size, extra clique size, matching vertices)."""
        k = self.k or 0
        s = self.s or 0
        cliques = self.gamma * k
        used = cliques * s + self.extra
        if self.n is None:
            if self.matching is None:
                raise InvalidSpec("clique-matching-mix needs n or matching")
            rest = 2 * self.matching
        else:
            rest = self.n - used
            if self.matching is not None and 2 * self.matching != rest:
                raise InvalidSpec("matching pairs disagree with n")
        return cliques, s, self.extra, rest

    def expected_nm(self) -> tuple[int, int]:
        """Closed-form (n, m) for the families that have one."""
        f = self.family
        if f == "cycle":
            return self.n, self.n
        if f == "regular":
            return self.n, self.n * self.d // 2
        if f == "clique-collection":
            return self.k * self.s, self.k * self.s * (self.s - 1) // 2
        if f == "clique-matching-mix":
            q, s, e, rest = self.mix_counts()
            return q * s + e + rest, q * s * (s - 1) // 2 + e * (e - 1) // 2 + rest // 2
        if f == "complete-bipartite":
            return self.a + self.b, self.a * self.b
        if f == "star":
            return self.n, self.n - 1
        raise InvalidSpec(f"no closed form for family {f!r}")


def _clique_edges(count: int, size: int, offset: int) -> tuple[np.ndarray, np.ndarray]:
    if count <= 0 or size < 2:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    iu, ju = np.triu_indices(size, 1)
    base = offset + size * np.arange(count, dtype=np.int64)[:, None]
    return (base + iu).ravel(), (base + ju).ravel()


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidSpec(msg)


def _labels(spec: GraphFamilySpec) -> tuple[int, np.ndarray, np.ndarray]:
    f = spec.family
    if f == "cycle":
        n = spec.n or 0
        _need(n >= 3, "cycle needs n >= 3")
        u = np.arange(n, dtype=np.int64)
        return n, u, (u + 1) % n
    if f == "regular":
        # circulant: i ~ i+j for j <= d/2, plus the antipodal chord when d is odd
        n, d = spec.n or 0, spec.d or 0
        _need(1 <= d < n, "regular needs 1 <= d < n")
        _need(d % 2 == 0 or n % 2 == 0, "odd degree needs even n")
        u = np.arange(n, dtype=np.int64)
        us, vs = [], []
        for j in range(1, d // 2 + 1):
            us.append(u)
            vs.append((u + j) % n)
        if d % 2:
            h = np.arange(n // 2, dtype=np.int64)
            us.append(h)
            vs.append(h + n // 2)
        return n, np.concatenate(us), np.concatenate(vs)
    if f == "clique-collection":
        k, s = spec.k or 0, spec.s or 0
        _need(k >= 1 and s >= 2, "clique-collection needs k >= 1 and s >= 2")
        lu, lv = _clique_edges(k, s, 0)
        return k * s, lu, lv
    if f == "clique-matching-mix":
        q, s, e, rest = spec.mix_counts()
        _need(q == 0 or s >= 2, "clique size must be >= 2")
        _need(e == 0 or e >= 2, "extra clique size must be 0 or >= 2")
        _need(rest >= 0, "cliques do not fit in n (gamma*s*k + extra > n)")
        _need(rest % 2 == 0, "matching remainder is odd")
        n = q * s + e + rest
        _need(n >= 2, "empty graph")
        cu, cv = _clique_edges(q, s, 0)
        xu, xv = _clique_edges(1 if e else 0, e, q * s)
        mu = q * s + e + 2 * np.arange(rest // 2, dtype=np.int64)
        return n, np.concatenate([cu, xu, mu]), np.concatenate([cv, xv, mu + 1])
    if f == "complete-bipartite":
        a, b = spec.a or 0, spec.b or 0
        _need(a >= 1 and b >= 1, "complete-bipartite needs a, b >= 1")
        lu = np.repeat(np.arange(a, dtype=np.int64), b)
        lv = a + np.tile(np.arange(b, dtype=np.int64), a)
        return a + b, lu, lv
    if f == "star":
        n = spec.n or 0
        _need(n >= 2, "star needs n >= 2")
        return n, np.zeros(n - 1, dtype=np.int64), np.arange(1, n, dtype=np.int64)
    raise InvalidSpec(f"unknown family {f!r}")


def generate(spec: GraphFamilySpec) -> Graph:
    """Deterministic in ``spec`` (which carries the seed)."""
    if spec.family == "edge-list-file":
        _need(spec.path is not None, "edge-list-file needs a path")
        return read_edge_list(spec.path)
    n, lu, lv = _labels(spec)
    rng = np.random.Generator(np.random.Philox(spec.seed))
    return _from_labels(n, lu, lv, rng)
