"""Average degree with n known: pair queries against additive queries."""
from avgdeg import EstimatorConfig, GraphFamilySpec, OracleSession, PRESETS, generate
from avgdeg.known_n import ADDITIVE, PAIR, estimate_average_degree

g = generate(GraphFamilySpec("clique-matching-mix", n=2 ** 16, gamma=2, k=64, s=16, seed=1))
print(f"n={g.n} m={g.m} true d={g.d:.4f}")
cfg = EstimatorConfig(eps=0.2, median_reps=9)
for mode in (PAIR, ADDITIVE):
    sess = OracleSession(g, PRESETS["advanced+re"], seed=4)
    est = estimate_average_degree(sess, cfg, mode)
    print(f"{mode:9s} estimate {est.value:.4f} branch {est.trace.get('branch')} cost {sess.meter.total}")
