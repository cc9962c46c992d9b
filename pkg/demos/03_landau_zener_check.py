"""Landau-Zener check of the integrator.

A flat-top drive of constant Rabi frequency Omega0 whose instantaneous
frequency sweeps linearly through resonance is the textbook level
crossing: the final occupation must follow
P = 1 - exp(-pi Omega0^2 / (2 |d Delta/dt|)) with d Delta/dt = 2 alpha.
This is an analytic end-to-end oracle for the propagation machinery,
completely independent of the spectral-synthesis path.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from multinarp import EmitterParams, TemporalPulse, integrate

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

ALPHA = 1.0  # ps^-2
T_FLAT, SIG_EDGE = 30.0, 1.5


def flattop(omega0):
    def fn(t):
        t = np.asarray(t, dtype=float)
        a = np.ones_like(t)
        m = np.abs(t) > T_FLAT
        a[m] = np.exp(-((np.abs(t[m]) - T_FLAT) ** 2) / (2 * SIG_EDGE ** 2))
        return omega0 * a * np.exp(-1j * ALPHA * t ** 2)

    t = np.arange(-45.0, 45.0 + 0.002, 0.004)
    return TemporalPulse(times_ps=t, envelope=fn(t), alpha_ps2=ALPHA,
                         theta_nominal_rad=0.0, tau0_ps=0.120, envelope_fn=fn)


omegas = np.linspace(0.2, 2.2, 15)
numeric = [integrate(flattop(om), EmitterParams(0.0), refine=4).final_occupation
           for om in omegas]
analytic = 1 - np.exp(-np.pi * omegas ** 2 / (2 * abs(2 * ALPHA)))

for om, num, ana in zip(omegas, numeric, analytic):
    print(f"Omega0 = {om:4.2f} rad/ps   P_num = {num:.4f}   P_LZ = {ana:.4f}")

fig, ax = plt.subplots(figsize=(5.5, 3.6))
ax.plot(omegas, analytic, "k-", lw=1, label="Landau-Zener formula")
ax.plot(omegas, numeric, "o", ms=4, label="integrator")
ax.set_xlabel(r"$\Omega_0$ (rad/ps)")
ax.set_ylabel("transition probability")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "03_landau_zener.png"), dpi=140)
print(f"figure saved to {OUT}/03_landau_zener.png")
