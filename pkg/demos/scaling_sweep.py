"""Cost sweep over n from an INI config, then a log-log slope fit of median cost."""
from pathlib import Path

from avgdeg.harness import fit_scaling, load_config, run_trials, write_csv

cfg = load_config(str(Path(__file__).with_name("ers_sweep.ini")))
recs = run_trials(cfg)
print(write_csv(recs).splitlines()[0])
rep = fit_scaling(recs)
print(f"fitted exponent {rep.fitted:.3f} (residual {rep.residual:.3f})")
for n, cost in rep.points:
    print(f"  n={n:>8d} median cost {cost:.0f}")
