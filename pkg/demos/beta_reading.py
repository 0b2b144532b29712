"""
How the decode threshold is read changes who jams
=================================================

With beta as a received-power floor (-120 dBm) almost no D2D link fails, so
there are no idle UEs and no jammers. Reading beta as an SINR threshold
(beta - noise dB) makes idle UEs common and the jammers show up.
"""

import numpy as np

from duavsim.config import BetaInterpretation, preset
from duavsim.engine import run_ensemble

for reading in BetaInterpretation:
    cfg = preset("flying-bs", full_scale=False, n_drops=30, beta_interpretation=reading,
                  eaves_density_per_m2=0.08)
    out = run_ensemble(cfg, ["traditional", "new"])
    trad = np.array([r.sr_overlay_bps for r in out["traditional"]], dtype=float)
    new = np.array([r.sr_overlay_bps for r in out["new"]], dtype=float)
    idle = np.mean([r.n_idle for r in out["new"]])
    jam = np.mean([r.n_jammers_active for r in out["new"]])
    print(f"{reading.value:>8}: idle/drop {idle:8.1f}  jammers/drop {jam:6.1f}  "
          f"overlay trad {np.nanmean(trad):.4g}  new {np.nanmean(new):.4g}")
