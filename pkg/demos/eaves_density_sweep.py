"""
Secrecy rate vs. eavesdropper density, flying-BS case
=====================================================

Both strategies share every drop, so the per-point gap between them is a
paired difference. The CSV goes to stdout; pipe it into any plotter.
"""

import sys

from duavsim.config import SweepSpec, preset
from duavsim.engine import emit_csv, run_sweep

cfg = preset("flying-bs", full_scale=False, n_drops=50)
sweep = SweepSpec("eaves_density_per_m2", (0.001, 0.04, 0.08, 0.12, 0.154))
rows = run_sweep(cfg, sweep, ["traditional", "new"])

for r in rows:
    if r.link == "overlay":
        print(f"{r.sweep_value:>6} {r.strategy.value:>11}  {r.mean_bps:12.4g} +- {r.ci_half_width:.3g}",
              file=sys.stderr)

# Note the cellular rows: with ~1 m peer distances every ground UE picks D2D,
# so the cellular tagged link never exists here (n_effective == 0).
emit_csv(rows, sys.stdout)
