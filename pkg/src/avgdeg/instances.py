"""Lower-bound instance families as GraphFamilySpec presets.

Every family is a collection of cliques plus a perfect matching, so each
side maps onto ``clique-matching-mix`` (or ``clique-collection``).  The YES
side has the smaller average degree; the NO side is the one an estimator
has to tell apart from it.

Rounding: clique sizes that feed a matching remainder are rounded to the
nearest even integer (so the remainder stays even); clique counts are
rounded to the nearest integer, at least 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ScaleTooSmall
from .graph_model import Graph, GraphFamilySpec, generate, ground_truth

__all__ = ["LB_FAMILIES", "YES", "NO", "LBFamily", "lb_spec", "lb_instance", "gap_report"]

YES, NO = "YES", "NO"
LB_FAMILIES = (
    "lb-known-base", "lb-known-pair", "lb-known-full", "lb-apple", "lb-banana",
    "lb-cherry", "lb-date", "lb-elderberry", "lb-additive-elderberry",
)


@dataclass(frozen=True)
class LBFamily:
    name: str
    side: str
    n: int
    c: int = 2
    d: int = 8      # clique size for apple, banana and cherry

    def __post_init__(self):
        if self.name not in LB_FAMILIES:
            raise ValueError(f"unknown lower-bound family {self.name!r}")
        if self.side not in (YES, NO):
            raise ValueError("side must be YES or NO")
        if self.c < 1:
            raise ValueError("c must be >= 1")

    @property
    def gap_kind(self) -> str:
        return "n" if self.name == "lb-cherry" else "d"


def _even(x: float) -> int:
    return 2 * int(round(x / 2))


def _count(x: float) -> int:
    return max(1, int(round(x)))


def _check(ok: bool, fam: LBFamily, why: str) -> None:
    if not ok:
        raise ScaleTooSmall(f"{fam.name} at n={fam.n}: {why}")


def _known(fam: LBFamily, s: int, k: int, seed: int) -> GraphFamilySpec:
    gamma = 1 if fam.side == YES else fam.c + 1
    _check(s >= 2 and k >= 1, fam, "clique size below 2")
    _check(gamma * s * k <= fam.n, fam, "cliques do not fit")
    _check(fam.n % 2 == 0, fam, "n must be even for the matching")
    return GraphFamilySpec("clique-matching-mix", n=fam.n, k=k, s=s, gamma=gamma, seed=seed)


def lb_spec(fam: LBFamily, seed: int = 0) -> GraphFamilySpec:
    n, c = fam.n, fam.c
    name = fam.name
    if name == "lb-known-base":
        return _known(fam, _even(n ** (2 / 3)), 1, seed)
    if name == "lb-known-pair":
        return _known(fam, _even(n ** 0.5), _count(n ** 0.25), seed)
    if name == "lb-known-full":
        return _known(fam, _even(n ** 0.4), _count(n ** 0.4), seed)
    if name in ("lb-apple", "lb-banana"):
        # YES: n/d copies of K_d.  NO: the same plus one clique of about sqrt(c n d)
        # vertices, which lifts the average degree by a factor of about c+1.
        q = n // fam.d
        _check(fam.d >= 2 and q >= 1, fam, "fewer than one small clique")
        big = 0 if fam.side == YES else math.ceil(math.sqrt(c * n * fam.d))
        return GraphFamilySpec("clique-matching-mix", k=q, s=fam.d, extra=big, matching=0,
                               seed=seed)
    if name == "lb-cherry":
        q = n // fam.d
        _check(fam.d >= 2 and q >= 1, fam, "fewer than one clique")
        return GraphFamilySpec("clique-collection", k=q if fam.side == YES else (c + 1) * q,
                               s=fam.d, seed=seed)
    if name == "lb-date":
        # clique on round(n^(2/3)) vertices so that d is about n^(1/3); the
        # matching covers n (YES) or (c+1)n (NO) vertices
        size = _count(n ** (2 / 3))
        _check(size >= 2 and n % 2 == 0, fam, "clique size below 2 or odd n")
        rest = n if fam.side == YES else (c + 1) * n
        return GraphFamilySpec("clique-matching-mix", k=0, s=0, extra=size, matching=rest // 2,
                               seed=seed)
    if name in ("lb-elderberry", "lb-additive-elderberry"):
        if name == "lb-elderberry":
            size, count = _even(n ** 0.5), _count(n ** 0.5)
        else:
            size, count = _even(n ** (1 / 3)), _count(n ** (2 / 3))
        total = (c + 1) * n
        gamma = 1 if fam.side == YES else c
        _check(size >= 2, fam, "clique size below 2")
        _check(c * count * size <= total and total % 2 == 0, fam, "cliques do not fit")
        return GraphFamilySpec("clique-matching-mix", n=total, k=count, s=size, gamma=gamma,
                               seed=seed)
    raise ValueError(name)


def lb_instance(fam: LBFamily, seed: int = 0) -> Graph:
    """Build one side of a lower-bound family with seeded random ids."""
    return generate(lb_spec(fam, seed))


def gap_report(fam: LBFamily, seed: int = 0) -> dict:
    """Ground-truth gap between the two sides (d ratio, or n ratio for lb-cherry)."""
    yes = ground_truth(lb_instance(LBFamily(fam.name, YES, fam.n, fam.c, fam.d), seed))
    no = ground_truth(lb_instance(LBFamily(fam.name, NO, fam.n, fam.c, fam.d), seed))
    d_ratio = max(yes["d"], no["d"]) / min(yes["d"], no["d"])
    n_ratio = max(yes["n"], no["n"]) / min(yes["n"], no["n"])
    return {"family": fam.name, "n_scale": fam.n, "c": fam.c,
            "n_yes": yes["n"], "n_no": no["n"], "m_yes": yes["m"], "m_no": no["m"],
            "d_yes": yes["d"], "d_no": no["d"], "d_ratio": d_ratio, "n_ratio": n_ratio,
            "gap_kind": fam.gap_kind, "ratio": n_ratio if fam.gap_kind == "n" else d_ratio}
