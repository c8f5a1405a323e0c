"""Full-scan check of the one-hop heavy-vertex inequality on a few graphs."""
from avgdeg import GraphFamilySpec, generate
from avgdeg.unknown_n import onehop_check

for spec in (GraphFamilySpec("star", n=10001), GraphFamilySpec("cycle", n=1000),
             GraphFamilySpec("clique-matching-mix", n=4000, gamma=1, k=1, s=60, extra=0)):
    for C in (1, 2):
        r = onehop_check(generate(spec), C)
        print(f"{spec.family:20s} C={C} premises={r['premises_hold']!s:5s} "
              f"conclusion={r['conclusion_holds']!s:5s} sum={r['sum']:.1f} bound={r['bound']:.1f}")
