import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from avgdeg import OracleSession, build_from_edges, ground_truth
from avgdeg.errors import InvalidP, NoDensePair, OracleDisabled
from avgdeg.known_n import (ADDITIVE, PAIR, DensePair, count_cross_edges, degree_bin,
                            edge_degrees, est_avg_deg_edge_only, est_dens_high_deg,
                            est_num_edges, estimate_average_degree, estimate_density,
                            find_dense_pair, harmonic_estimator)
from avgdeg.oracle import PRESETS
from avgdeg.primitives import ABORT, DegreeClass, EstimatorConfig, IdSet

from helpers import family, session

TEST_GRAPHS = [
    ("cycle", dict(n=300)),
    ("regular", dict(n=200, d=7)),
    ("clique-collection", dict(k=6, s=9)),
    ("clique-matching-mix", dict(n=600, gamma=2, k=5, s=12, extra=40)),
    ("complete-bipartite", dict(a=40, b=6)),
    ("star", dict(n=80)),
]


def biclique(a, b, keep=None, seed=0):
    left = list(range(1, a + 1))
    right = list(range(1000, 1000 + b))
    edges = [(x, y) for x in left for y in right]
    if keep is not None:
        rng = np.random.default_rng(seed)
        edges = [edges[i] for i in sorted(rng.choice(len(edges), keep, replace=False))]
    return build_from_edges(edges), left, right


def test_high_deg_regular_and_cycle():
    k16 = family("clique-collection", k=1, s=16)
    h = est_dens_high_deg(session(k16, "base+re"), 0.5)
    assert (h.delta, h.f, h.f_prime) == (15, 1.0, 0.0)
    h = est_dens_high_deg(session(family("cycle", n=64), "base+re"), 1.0)
    assert (h.delta, h.f, h.f_prime) == (2, 1.0, 0.0)
    for p in (0, -1, 1.5):
        with pytest.raises(InvalidP):
            est_dens_high_deg(session(k16, "base+re"), p)


def test_high_deg_heavy_set_not_tiny():
    g = family("clique-matching-mix", n=256, gamma=1, k=4, s=8)
    deg = g.degrees
    small = 0
    for seed in range(200):
        h = est_dens_high_deg(session(g, "base+re", seed=seed), 0.25)
        small += np.count_nonzero(deg >= h.delta) <= 256 * 0.25 / 4
    assert small / 200 <= 0.05


def test_edge_degree_is_min_endpoint():
    g = family("clique-matching-mix", n=400, gamma=1, k=5, s=10)
    s = session(g, "base+re", seed=1)
    ed = edge_degrees(s, 2000)
    truth = set(np.minimum(g.degrees[g.eu], g.degrees[g.ev]).tolist())
    assert set(ed.tolist()) <= truth and set(ed.tolist()) == truth


def test_harmonic_regular_exact():
    g = family("regular", n=500, d=6)
    cfg = EstimatorConfig(eps=0.3)
    for delta in (1, 6):
        est = harmonic_estimator(session(g, "base+re", seed=3), delta, 1.0, cfg)
        assert est.value == 6.0 and est.trace["Z"] == pytest.approx(1 / 6, abs=0)


def test_harmonic_cycle_accuracy():
    g = family("cycle", n=1024)
    cfg = EstimatorConfig(eps=0.1)
    vals = [harmonic_estimator(session(g, "base+re", seed=s), 2, 1.0, cfg).value for s in range(100)]
    assert sum(abs(v / 2 - 1) <= 0.1 for v in vals) >= 90


def test_harmonic_empty_heavy_set_aborts():
    g = family("cycle", n=64)
    assert harmonic_estimator(session(g, "base+re"), 3, 1.0, EstimatorConfig()).status == ABORT


@given(deg=st.lists(st.integers(0, 10 ** 6), min_size=1, max_size=50), delta=st.integers(0, 5000))
def test_bins_partition_heavy_set(deg, delta):
    deg = np.array(deg)
    bins = degree_bin(deg, delta)
    for x, b in zip(deg.tolist(), bins.tolist()):
        if x < delta + 1:
            assert b == 0
        else:
            lo = (1 << (b - 1)) * (delta + 1)
            assert lo <= x < 2 * lo


@pytest.mark.parametrize("name,kw", TEST_GRAPHS)
def test_light_edges_bound_average_degree(name, kw):
    """|E[H']| < 3m/4 implies d <= 8 Delta, for every Delta in the degree set."""
    g = family(name, **kw)
    deg = g.degrees
    du, dv = deg[g.eu], deg[g.ev]
    for delta in np.unique(deg).tolist():
        heavy_edges = np.count_nonzero((du >= delta + 1) & (dv >= delta + 1))
        if heavy_edges < 0.75 * g.m:
            assert g.d <= 8 * delta


def test_dense_pair_biclique_sides_split():
    g, left, right = biclique(256, 32)
    for seed in range(5):
        dp = find_dense_pair(session(g, "base+re", seed=seed), 0)
        assert {dp.i, dp.j} == {6, 9}
        deg = g.degrees
        inA = dp.A.contains(g.ids, deg)
        inB = dp.B.contains(g.ids, deg)
        between = np.count_nonzero((inA[g.eu] & inB[g.ev]) | (inA[g.ev] & inB[g.eu]))
        assert between >= g.m / dp.alpha


def test_dense_pair_single_class_on_clique():
    g = family("clique-collection", k=1, s=64)
    dp = find_dense_pair(session(g, "base+re", seed=2), 20)
    assert dp.i == dp.j and dp.A.color == 0 and dp.B.color == 1


def test_dense_pair_missing_on_matching():
    g = family("clique-matching-mix", n=512, k=0, s=0)
    with pytest.raises(NoDensePair):
        find_dense_pair(session(g, "base+re"), 1)


def _pair(A, B, k, l, alpha=1.0):
    return DensePair(1, 2, A, B, k, l, alpha)


def test_density_exact_on_complete_biclique():
    g, left, right = biclique(4, 4)
    dp = _pair(IdSet(left), IdSet(right), 4, 4)
    d = estimate_density(session(g, "base+re"), dp, EstimatorConfig(eps=0.5))
    assert (d.rho_A, d.rho_B) == (4.0, 4.0)


def test_density_unbalanced_biclique():
    g, left, right = biclique(8, 2)
    dp = _pair(DegreeClass(2, 4), DegreeClass(8, 16), 2, 8)
    cfg = EstimatorConfig(eps=0.2)
    d = estimate_density(session(g, "base+re", seed=1), dp, cfg)
    # rho_A = 16/8 = 2 exactly (every neighbor of a left vertex is on the right)
    assert d.rho_A == 2.0 and d.rho_B == 8.0


def test_density_colored_clique():
    g = family("clique-collection", k=1, s=8)
    A, B = DegreeClass(7, 14, color=0, salt=11), DegreeClass(7, 14, color=1, salt=11)
    ca = A.contains(g.ids, g.degrees)
    a, b = ca.sum(), (~ca).sum()
    assert a and b
    cfg = EstimatorConfig(eps=0.1)
    d = estimate_density(session(g, "base+re", seed=4), _pair(A, B, 7, 7), cfg)
    assert d.rho_A == pytest.approx(a * b / a, rel=0.1)
    assert d.rho_B == pytest.approx(a * b / b, rel=0.1)


def test_num_edges_exact_small_biclique():
    g, left, right = biclique(4, 4)
    dp = _pair(IdSet(left), IdSet(right), 4, 4)
    est = est_num_edges(session(g, "standard+re", seed=0), dp, 2, EstimatorConfig(eps=0.5), PAIR)
    assert est.value == 16.0 and est.trace["Zs"] == 4.0


def test_num_edges_aborts_without_cross_edges():
    g = build_from_edges([(a, b) for grp in (range(1, 5), range(10, 18))
                          for a in grp for b in grp if a < b])
    dp = _pair(DegreeClass(3, 6), DegreeClass(7, 14), 3, 7)
    for seed in range(10):
        for mode, pre in ((PAIR, "standard+re"), (ADDITIVE, "advanced+re")):
            assert est_num_edges(session(g, pre, seed=seed), dp, 3, EstimatorConfig(), mode).status == ABORT


def test_num_edges_half_full_biclique():
    g, left, right = biclique(32, 32, keep=512, seed=3)
    deg = g.degrees
    kL = int(deg[g.index_of(np.array(left, dtype=np.uint64))].min())
    kR = int(deg[g.index_of(np.array(right, dtype=np.uint64))].min())
    dp = _pair(IdSet(left), IdSet(right), kL, kR)
    cfg = EstimatorConfig(eps=0.2)
    s = 4   # s^2 mu = 16 * 0.5 = 8
    out = [est_num_edges(session(g, "standard+re", seed=t), dp, s, cfg, PAIR) for t in range(100)]
    aborts = sum(not e.ok for e in out)
    good = sum(e.ok and abs(e.value / 512 - 1) <= 3 * cfg.eps for e in out)
    assert aborts <= 10 and good >= 80


def test_cross_edges_modes_agree_without_duplicates():
    g, left, right = biclique(16, 16, keep=128, seed=1)
    s = session(g, PRESETS["advanced+re"], seed=0)
    rng = np.random.default_rng(0)
    X = np.array([rng.choice(left, 5, replace=False) for _ in range(20)], dtype=np.uint64)
    Y = np.array([rng.choice(right, 5, replace=False) for _ in range(20)], dtype=np.uint64)
    before = s.meter.costs["additive"]
    add = count_cross_edges(s, X, Y, ADDITIVE)
    assert s.meter.costs["additive"] - before == 20 * 4 * 5
    pair = count_cross_edges(s, X, Y, PAIR)
    assert np.array_equal(add, pair)


def test_estimate_needs_mode_oracle():
    g = family("cycle", n=64)
    with pytest.raises(OracleDisabled):
        estimate_average_degree(session(g, "base+re"), EstimatorConfig(), PAIR)
    with pytest.raises(ValueError):
        estimate_average_degree(session(g, "advanced+re"), EstimatorConfig(), "bogus")


@pytest.mark.parametrize("mode,preset", [(PAIR, "standard+re"), (ADDITIVE, "advanced+re")])
def test_estimate_k256(mode, preset):
    g = family("clique-collection", k=1, s=256)
    cfg = EstimatorConfig(eps=0.1)
    vals = [estimate_average_degree(session(g, preset, seed=s), cfg, mode).value for s in range(100)]
    assert sum(abs(v / 255 - 1) <= 0.15 for v in vals) >= 80


@pytest.mark.parametrize("mode,preset", [(PAIR, "standard+re"), (ADDITIVE, "advanced+re")])
def test_estimate_reaches_dense_branch(mode, preset):
    # one big clique holds almost every edge, a matching holds almost every vertex
    g = family("clique-matching-mix", n=2 ** 14, k=0, s=0, extra=1000)
    cfg = EstimatorConfig(eps=0.2)
    out = [estimate_average_degree(session(g, preset, seed=s), cfg, mode) for s in range(10)]
    assert all(e.trace["branch"] == "dense" for e in out)
    assert sum(abs(e.value / g.d - 1) <= 0.2 for e in out) >= 8
    assert out[0].cost["costs"][mode] > 0


def test_mix_takes_harmonic_branch_in_both_modes():
    """At g = n the heavy edges of this mix are a minority, so both modes run the
    same harmonic branch and spend exactly the same queries."""
    n = 2 ** 18
    g = family("clique-matching-mix", n=n, gamma=2, k=round(math.sqrt(n) / 4), s=round(n ** 0.25))
    cfg = EstimatorConfig(eps=0.2)
    for seed in range(3):
        p = estimate_average_degree(session(g, "standard+re", seed=seed), cfg, PAIR)
        a = estimate_average_degree(session(g, "advanced+re", seed=seed), cfg, ADDITIVE)
        assert p.trace["branch"] == a.trace["branch"] == "harmonic"
        assert p.cost == a.cost and p.value == a.value


def test_edge_only_gate_and_paths():
    g = family("cycle", n=4096)
    with pytest.raises(OracleDisabled):
        est_avg_deg_edge_only(session(g, "advanced+re"), EstimatorConfig())
    est = est_avg_deg_edge_only(OracleSession(g, PRESETS["edge-only"], seed=1), EstimatorConfig())
    assert est.trace["branch"] == "bt" and est.value == 2.0


def test_edge_only_dense_path_k256():
    g = family("clique-collection", k=1, s=256)
    cfg = EstimatorConfig(eps=0.1)
    out = [est_avg_deg_edge_only(OracleSession(g, PRESETS["edge-only"], seed=s), cfg)
           for s in range(100)]
    assert all(e.trace["branch"] == "dense" for e in out)
    assert sum(abs(e.value / 255 - 1) <= 0.15 for e in out) >= 80
