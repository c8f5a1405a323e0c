"""Metered oracle: per-operation costs, a budget, and a replayable transcript."""
from avgdeg import GraphFamilySpec, OracleSession, PRESETS, generate
from avgdeg.errors import BudgetExhausted

g = generate(GraphFamilySpec("clique-matching-mix", n=2000, gamma=2, k=5, s=20, seed=1))
sess = OracleSession(g, PRESETS["advanced+re"], seed=0, transcript=True)
xs = sess.rand_vert_many(5)
print("degrees", sess.degree_many(xs).tolist())
print("edges inside the sample", sess.additive(xs))
print("costs", sess.meter.costs, "total", sess.meter.total)
print("transcript head", sess.transcript[:3])

tight = OracleSession(g, PRESETS["base"], seed=0, budget=10)
try:
    tight.rand_vert_many(11)
except BudgetExhausted as exc:
    print("budget stop:", exc, "charged", tight.meter.total)
