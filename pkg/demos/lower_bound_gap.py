"""YES/NO lower-bound instance pairs and the gap in d or n between them."""
from avgdeg.instances import LB_FAMILIES, YES, LBFamily, gap_report

for name in LB_FAMILIES:
    rep = gap_report(LBFamily(name, YES, 2 ** 14, c=2))
    print(f"{name:24s} gap in {rep['gap_kind']}: {rep['ratio']:.3f}  "
          f"(n {rep['n_yes']} / {rep['n_no']}, m {rep['m_yes']} / {rep['m_no']})")
