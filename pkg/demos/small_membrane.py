"""A quick membrane convergence study on the embedded-square mesh.

Uses degrees 1 and 2 and three refinements over a short time, so it runs
in well under a minute.  The full study is ``ncdg membrane-convergence``.
"""
import sys

from ncdg.diagnostics import GLOBAL, INNER, OUTER
from ncdg.scenarios import default_config, run_membrane_convergence

overrides = ["degree=1,2", "refinement=0,1,2", "end_time=0.05"] + sys.argv[1:]
cfg = default_config("membrane-convergence").with_overrides(overrides)
res = run_membrane_convergence(cfg)

for row in res.rows:
    print(f"k={row['k']} r={row['r']}  eps_p {row['eps_p_global']:.3e}  eps_u {row['eps_u_global']:.3e}")
for k in cfg.degrees:
    for reg in (GLOBAL, INNER, OUTER):
        rp, ru = res.rates[k, reg, "p"], res.rates[k, reg, "u"]
        print(f"k={k} {reg:6s} observed order p {rp[-1]:.2f}  u {ru[-1]:.2f}  (expected {k + 1})")
