import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from avgdeg import AccessPolicy, OracleSession, build_from_edges
from avgdeg.errors import BudgetExhausted, IsolatedVertices, OracleDisabled, UnknownVertex
from avgdeg.oracle import OP_SHORT, OPS, PRESETS, QueryMeter

from helpers import family, session

ALL_ON = AccessPolicy(rand_edge=True, pair=True, additive=True, full_nbrhood=True)


def chi2_ok(counts, probs, sigma=5.0):
    n = counts.sum()
    exp = n * np.asarray(probs)
    z = (counts - exp) / np.sqrt(exp * (1 - np.asarray(probs)))
    return np.all(np.abs(z) < sigma)


def test_presets_are_cumulative():
    base = PRESETS["base"]
    assert (base.rand_vert, base.rand_nbr, base.degree) == (True, True, True)
    assert not (base.pair or base.additive or base.rand_edge or base.full_nbrhood)
    assert PRESETS["standard"].pair and not PRESETS["standard"].additive
    assert PRESETS["advanced"].additive
    assert PRESETS["edge-only"].rand_vert is False
    assert set(OP_SHORT) == set(OPS)


def test_rand_vert_two_vertices():
    g = build_from_edges([(3, 8)])
    s = session(g, "base", seed=5)
    draws = s.rand_vert_many(20000)
    assert abs(np.count_nonzero(draws == 3) - 10000) < 5 * 71


def test_rand_vert_uniform_on_cycle():
    g = family("cycle", n=100)
    s = session(g, "base", seed=2)
    idx = g.index_of(s.rand_vert_many(10 ** 6))
    assert chi2_ok(np.bincount(idx, minlength=100), np.full(100, 0.01))


def test_disabled_ops_raise(k4):
    s = OracleSession(k4, AccessPolicy(rand_vert=False))
    with pytest.raises(OracleDisabled):
        s.rand_vert()
    with pytest.raises(OracleDisabled):
        s.pair(1, 2)
    with pytest.raises(OracleDisabled):
        s.additive([1, 2])
    assert s.meter.total == 0


def test_rand_nbr_path_and_star(star4):
    path = build_from_edges([(1, 2), (2, 3)])
    s = session(path, "base", seed=1)
    got = s.rand_nbr_many(np.full(10000, 2, dtype=np.uint64))
    assert set(got.tolist()) == {1, 3}
    assert abs(np.count_nonzero(got == 1) - 5000) < 5 * 50
    s2 = session(star4, "base")
    assert all(s2.rand_nbr(leaf) == 10 for leaf in (1, 2, 3, 4))


def test_unknown_vertex(k4):
    s = session(k4, "base")
    with pytest.raises(UnknownVertex):
        s.rand_nbr(99)
    with pytest.raises(UnknownVertex):
        s.degree(99)


def test_pair_rand_edge_full(k4, star4):
    s = session(k4, ALL_ON, seed=3)
    assert s.pair(1, 2) == 1 and s.pair(2, 4) == 1
    u, v = s.rand_edge_many(10 ** 5)
    key = np.minimum(u, v) * 10 + np.maximum(u, v)
    _, counts = np.unique(key, return_counts=True)
    assert counts.size == 6 and chi2_ok(counts, np.full(6, 1 / 6))
    t = session(star4, ALL_ON)
    assert sorted(t.full_nbrhood(10)) == [1, 2, 3, 4]
    assert t.meter.costs["full_nbrhood"] == 1


def test_additive_examples(k4):
    path = build_from_edges([(1, 2), (2, 3)])
    s = session(k4, "advanced")
    assert s.additive([1, 2, 3, 4]) == 6 and s.meter.total == 4
    p = session(path, "advanced")
    assert p.additive([1, 3]) == 0 and p.meter.total == 2
    assert p.additive([1, 1, 2]) == 1 and p.meter.total == 5


def test_additive_rectangular_matches_list():
    g = family("clique-matching-mix", n=200, k=3, s=8, seed=4)
    s = session(g, "advanced", seed=1)
    sets = s.rand_vert_many(30 * 6).reshape(30, 6).copy()
    sets[::3, 1] = sets[::3, 0]   # force some duplicates
    a = s.additive_many(sets)
    b = s.additive_many([row for row in sets])
    assert np.array_equal(a, b)
    idx = g.index_of(sets.ravel()).reshape(sets.shape)
    assert np.array_equal(a, [g.count_induced(r) for r in idx])
    assert s.meter.costs["additive"] == 2 * sets.size


def test_n_hidden_when_unknown(k4):
    s = OracleSession(k4, AccessPolicy.base(n_known=False))
    with pytest.raises(OracleDisabled):
        _ = s.n
    assert OracleSession(k4, AccessPolicy.base()).n == 4


def test_isolated_vertices_rejected():
    g = build_from_edges([(1, 2)], n_hint=3, no_isolated=False)
    with pytest.raises(IsolatedVertices):
        OracleSession(g, PRESETS["base"])


def test_batch_equals_scalar_sequence():
    g = family("clique-matching-mix", n=120, k=2, s=9, seed=3)
    a = session(g, ALL_ON, seed=11)
    b = session(g, ALL_ON, seed=11)
    xs = a.rand_vert_many(50)
    ys = [b.rand_vert() for _ in range(50)]
    assert xs.tolist() == ys
    assert a.rand_nbr_many(xs).tolist() == [b.rand_nbr(x) for x in ys]
    ea = a.rand_edge_many(40)
    eb = [b.rand_edge() for _ in range(40)]
    assert list(zip(ea[0].tolist(), ea[1].tolist())) == eb
    assert a.meter.snapshot() == b.meter.snapshot()


def test_budget_is_atomic(k4):
    s = session(k4, "advanced", budget=5)
    s.additive([1, 2, 3])
    with pytest.raises(BudgetExhausted):
        s.additive([1, 2, 3])
    assert s.meter.total == 3
    s.degree(1)
    s.degree(2)
    with pytest.raises(BudgetExhausted):
        s.degree(3)
    assert s.meter.total == 5


def test_budget_partial_batch(k4):
    s = session(k4, "base", budget=7)
    with pytest.raises(BudgetExhausted):
        s.rand_vert_many(10)
    assert s.meter.total == 7 and s.meter.counts["rand_vert"] == 7


def test_spawn_shares_meter_and_splits_streams():
    g = family("cycle", n=1000)
    s = session(g, "base", seed=4)
    c1, c2 = s.spawn(), s.spawn()
    a, b = c1.rand_vert_many(20), c2.rand_vert_many(20)
    assert not np.array_equal(a, b)
    assert s.meter.total == 40 and c1.meter is s.meter


_OP_STRAT = st.lists(st.tuples(st.sampled_from(["rv", "rn", "deg", "re", "pair", "add", "full"]),
                               st.integers(1, 6)), min_size=1, max_size=25)


@given(ops=_OP_STRAT, seed=st.integers(0, 2 ** 32))
def test_accounting_replay_exact(ops, seed):
    """Costs in the transcript sum to the meter, per op and in total."""
    g = family("clique-matching-mix", n=40, k=2, s=5, seed=1)
    s = OracleSession(g, ALL_ON, seed=seed, transcript=True)
    expected = dict.fromkeys(OPS, 0)
    for op, k in ops:
        x = s.rand_vert()
        expected["rand_vert"] += 1
        if op == "rv":
            s.rand_vert_many(k)
            expected["rand_vert"] += k
        elif op == "rn":
            s.rand_nbr_many(np.full(k, x, dtype=np.uint64))
            expected["rand_nbr"] += k
        elif op == "deg":
            s.degree_many(np.full(k, x, dtype=np.uint64))
            expected["degree"] += k
        elif op == "re":
            s.rand_edge_many(k)
            expected["rand_edge"] += k
        elif op == "pair":
            s.pair_many(x, s.rand_vert_many(k))
            expected["rand_vert"] += k
            expected["pair"] += k
        elif op == "add":
            s.additive(s.rand_vert_many(k))
            expected["rand_vert"] += k
            expected["additive"] += k
        else:
            s.full_nbrhood(x)
            expected["full_nbrhood"] += 1
    replay = dict.fromkeys(OPS, 0)
    for line in s.transcript:
        op, _, _, cost = line.split(";")
        replay[op] += int(cost)
    assert replay == expected == s.meter.costs
    assert s.meter.total == sum(replay.values())


def test_transcripts_deterministic():
    g = family("cycle", n=50)
    logs = []
    for _ in range(2):
        s = OracleSession(g, ALL_ON, seed=9, transcript=True)
        xs = s.rand_vert_many(5)
        s.rand_nbr_many(xs)
        s.degree_many(xs)
        s.additive(xs)
        logs.append(list(s.transcript))
    assert logs[0] == logs[1]


def _clique_ids(base, size):
    return [base + i for i in range(size)]


def _cliques(groups):
    edges = []
    for grp in groups:
        edges += [(a, b) for i, a in enumerate(grp) for b in grp[i + 1:]]
    return edges


def test_transcript_identical_on_shared_clique():
    """YES/NO n-estimation instances look identical when queries stay inside one clique."""
    shared = _clique_ids(1000, 6)
    yes = build_from_edges(_cliques([shared] + [_clique_ids(2000 + 10 * j, 6) for j in range(3)]))
    no = build_from_edges(_cliques([shared] + [_clique_ids(5000 + 10 * j, 6) for j in range(9)]))
    pol = AccessPolicy.advanced(n_known=False)
    logs = []
    for g in (yes, no):
        s = OracleSession(g, pol, seed=3, transcript=True)
        x = shared[0]
        for _ in range(10):
            y = s.rand_nbr(x)
            s.degree(y)
            s.pair(x, y)
            s.additive([x, y, shared[3]])
            x = y
        logs.append("\n".join(s.transcript).encode())
    assert logs[0] == logs[1]


def test_meter_snapshot_fields():
    m = QueryMeter(budget=10)
    m.charge("additive", 1, 4)
    snap = m.snapshot()
    assert snap["total"] == 4 and snap["costs"]["additive"] == 4 and snap["counts"]["additive"] == 1
    assert m.remaining() == 6
