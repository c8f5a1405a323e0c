"""Vertex count from birthday collisions among uniform vertex samples."""
import numpy as np

from avgdeg import EstimatorConfig, GraphFamilySpec, OracleSession, PRESETS, generate
from avgdeg.primitives import est_num_coll

g = generate(GraphFamilySpec("cycle", n=10 ** 4, seed=1))
cfg = EstimatorConfig(eps=0.2, delta=0.05)
vals = [est_num_coll(OracleSession(g, PRESETS["base"].with_(n_known=False), seed=s), cfg)
        for s in range(30)]
print(f"true n={g.n}; median estimate {np.median(vals):.0f}; range {min(vals):.0f}..{max(vals):.0f}")
