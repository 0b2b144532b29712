"""
One drop, step by step
======================

Walks a single desk-scale drop of the aerial-UE case through placement,
mode selection, the spectrum plan and the two tagged secrecy rates.
"""

import numpy as np

from duavsim import seeding
from duavsim.config import preset
from duavsim.deployment import ROLE_NAMES, Role
from duavsim.engine import simulate_drop
from duavsim.spectrum import PATTERN_NAMES

cfg = preset("aerial-ue", full_scale=False, master_seed=3)
state = simulate_drop(cfg, ["traditional", "new"], drop_index=0)
dep = state.deployment

# node counts per role
for role in Role:
    print(f"{ROLE_NAMES[role]:>14}: {dep.counts[role]}")
print("drop seed", seeding.drop_seed(cfg.master_seed, 0))

for strategy, plan in state.plans.items():
    counts = np.bincount(plan.pattern, minlength=4)
    print(f"\n{strategy.value}:", {PATTERN_NAMES[k]: int(c) for k, c in enumerate(counts)})
    print("  tagged", plan.tagged, "jammers", {k: len(v) for k, v in plan.jammers.items()})
    r = state.results[strategy]
    print(f"  overlay SR  {r.sr_overlay_bps}")
    print(f"  cellular SR {r.sr_cellular_bps}")
