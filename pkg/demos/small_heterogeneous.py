"""Pulse crossing a material interface, on a coarsened grid.

Left half rho=1, c=1; right half rho=1, c=3, meshed three times coarser.
Compares the non-conforming run against all-fine and all-coarse references
along the x1 axis and writes the probe files to the given directory.
"""
import sys

from ncdg.scenarios import default_config, run_heterogeneous_application

out = sys.argv[1] if len(sys.argv) > 1 else "het_demo"
cfg = default_config("heterogeneous").with_overrides([
    "mesh.h_left=0.03333333333333333", "mesh.h_right=0.1", "mesh.pulse_sharpness=400", "degree=2",
    "end_time=0.2", "probe.axis.points=201",
])
res = run_heterogeneous_application(cfg, out)
print("DoFs:", res.dofs, f"reduction {res.dof_reduction:.1%}")
print(f"deviation from fine reference: nci {res.max_deviation:.3f}, coarse {res.coarse_deviation:.3f}")
if res.measured_R is not None:
    print(f"R = {res.measured_R:.3f} (expected {res.expected_R}), T = {res.measured_T:.3f} (expected {res.expected_T})")
print("probe and field files in", out)
