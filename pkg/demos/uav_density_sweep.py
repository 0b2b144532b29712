"""
Secrecy rate vs. number of UAVs, aerial-UE case
===============================================
"""

from duavsim.config import SweepSpec, preset
from duavsim.engine import run_sweep

cfg = preset("aerial-ue", full_scale=False, n_drops=100)
rows = run_sweep(cfg, SweepSpec("uav_density_per_m2", (1e-3, 2e-3, 3.5e-3, 5.5e-3)), ["traditional", "new"])

print(f"{'lambda_U':>9} {'strategy':>11} {'link':>9} {'mean [bit/s]':>14} {'n_eff':>6}")
for r in rows:
    print(f"{r.sweep_value:>9} {r.strategy.value:>11} {r.link:>9} {r.mean_bps:14.4g} {r.n_effective:>6}")
