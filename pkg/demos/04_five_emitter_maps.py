"""Occupation maps for five spectrally distinct emitters.

One shaped pulse drives five two-level emitters sitting on five notch
centers.  The map of final occupation versus pulse area and notch
spacing shows robust simultaneous inversion wherever the notches fit
inside the pulse bandwidth; the line cut at 3.4 meV spacing shows the
rise-then-plateau shape for all five emitters at once.

Coarsened grids keep this demo around a minute; raise the resolutions
for production maps (the figure presets use 81 x 51).
"""

import os
from dataclasses import replace

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from multinarp import preset, run_sweep

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

spec = preset("fig2")
spec = replace(
    spec,
    theta_grid_rad=tuple(np.linspace(0, 20 * np.pi, 41)),
    spacing_grid_mev=tuple(np.linspace(1.0, 6.0, 11)),
)

map_ = run_sweep(spec, progress=lambda d, t: print(f"\r{d}/{t} cells",
                                                   end="", flush=True),
                 workers=2)
print()

fig, axes = plt.subplots(1, 3, figsize=(13, 3.4), constrained_layout=True)
extent = [map_.theta_rad[0] / np.pi, map_.theta_rad[-1] / np.pi,
          map_.axis_values_mev[0], map_.axis_values_mev[-1]]
for ax, k in zip(axes, (0, 1, 2)):
    im = ax.imshow(map_.occupations[:, :, k].T, origin="lower",
                   aspect="auto", extent=extent, vmin=0, vmax=1,
                   cmap="viridis")
    ax.set_title(f"emitter {k + 1} (of 5, pairs mirror)")
    ax.set_xlabel("pulse area (units of pi)")
axes[0].set_ylabel("notch spacing (meV)")
fig.colorbar(im, ax=axes, label="final occupation", shrink=0.9)
fig.savefig(os.path.join(OUT, "04_five_emitter_maps.png"), dpi=140)

# line cut at the optimal spacing
cut_spec = replace(spec, spacing_grid_mev=(3.4,),
                   theta_grid_rad=tuple(np.linspace(0, 20 * np.pi, 81)))
cut = run_sweep(cut_spec)
fig2, ax = plt.subplots(figsize=(5.5, 3.6))
for k in range(5):
    ax.plot(cut.theta_rad / np.pi, cut.occupations[:, 0, k],
            label=f"emitter {k + 1}", lw=1)
ax.set_xlabel("pulse area (units of pi)")
ax.set_ylabel("final occupation")
ax.legend(fontsize=8)
fig2.tight_layout()
fig2.savefig(os.path.join(OUT, "04_line_cut_3p4meV.png"), dpi=140)

sel = (cut.theta_rad >= 8 * np.pi) & (cut.theta_rad <= 16 * np.pi)
print("plateau (min occupation, 8-16 pi, all emitters):",
      cut.occupations[sel, 0, :].min())
print(f"figures saved to {OUT}/")
