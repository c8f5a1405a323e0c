"""Average degree and vertex count with n hidden from the estimator."""
from avgdeg import EstimatorConfig, GraphFamilySpec, OracleSession, PRESETS, generate
from avgdeg.unknown_n import AdvancedMode, ReMode, unknown_n_pipeline

g = generate(GraphFamilySpec("cycle", n=2 ** 16, seed=1))
cfg = EstimatorConfig(eps=0.2, constants={"a_const": 64})

sess = OracleSession(g, PRESETS["advanced"].with_(n_known=False), seed=2)
est = unknown_n_pipeline(sess, cfg, AdvancedMode())
print(f"advanced: d={est.value:.4f} n_hat={est.trace['n_hat']:.0f} via {est.trace['kind']} "
      f"cost {sess.meter.total}")

sess = OracleSession(g, PRESETS["base+re"].with_(n_known=False), seed=2)
est = unknown_n_pipeline(sess, cfg, ReMode())
print(f"random edges: d={est.value:.4f} cost {sess.meter.total} trace keys {sorted(est.trace)}")
