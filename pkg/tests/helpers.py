"""Shared builders for the test modules."""
from avgdeg import OracleSession
from avgdeg.graph_model import GraphFamilySpec, generate
from avgdeg.oracle import PRESETS


def family(name, seed=1, **kw):
    return generate(GraphFamilySpec(name, seed=seed, **kw))


def session(g, preset="advanced+re", seed=0, **kw):
    pol = PRESETS[preset] if isinstance(preset, str) else preset
    return OracleSession(g, pol, seed=seed, **kw)


def closed_form_m(spec):
    """Cliques plus extra clique plus matching, counted from the spec parameters alone."""
    if spec.family == "clique-collection":
        return spec.k * spec.s * (spec.s - 1) // 2
    q = spec.gamma * (spec.k or 0)
    s = spec.s or 0
    e = spec.extra
    if spec.n is not None:
        rest = spec.n - q * s - e
    else:
        rest = 2 * spec.matching
    return q * s * (s - 1) // 2 + e * (e - 1) // 2 + rest // 2
