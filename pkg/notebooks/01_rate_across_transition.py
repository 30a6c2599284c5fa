"""
Emission rate across the transition
===================================

Broken side: the photon mass opens a gap and the rate falls as
sqrt(1 - x^2).  Symmetric side: fluctuations renormalize the propagator
and the rate climbs toward a pole just above Tc.
"""

# %%
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from critpurcell import physics, sweep

# %% [markdown]
# Three exponents, unit amplitude.  Smaller beta means the mass rises faster
# away from Tc, so the rate drops faster.

# %%
curves = sweep.fig2_curves()
fig, ax = plt.subplots()
for label, c in curves.items():
    ax.plot(c.t, c.ratio, label=f"beta = {label}")
ax.set_xlabel("t = 1 - T/Tc")
ax.set_ylabel("rate / vacuum rate")
ax.legend()
fig.savefig("rate_broken.png", dpi=120)

# %%
for label, c in curves.items():
    print(label, sweep.summarize(c))

# %% [markdown]
# Both phases together.  An amplitude of 2 pushes the gap edge to t = 1/4,
# leaving a window where nothing is emitted.

# %%
scenario = sweep.fig4_scenario()
full = sweep.sweep_full(sweep.fig4_grid(scenario), scenario)
print("pole at |t| =", full.metadata["pole_t"], " gap from t =", full.metadata["gap_t"])

fig, ax = plt.subplots()
ax.semilogy(full.t, np.where(full.ratio > 0, full.ratio, np.nan), ".")
ax.axvline(0, color="k", lw=0.5)
ax.set_xlabel("t")
ax.set_ylabel("rate / vacuum rate")
fig.savefig("rate_both_phases.png", dpi=120)

# %% [markdown]
# Absolute rate for a concrete emitter: 2 eV transition, 1 e*angstrom dipole.

# %%
const = physics.PhysicalConstants.codata()
omega0 = 2 * 1.602176634e-19 / const.hbar
emitter = physics.EmitterSpec(omega0=omega0, mu=1.602176634e-19 * 1e-10)
g0 = physics.gamma_vacuum(emitter, const)
print(f"vacuum rate {g0:.3e} 1/s, lifetime {1e9 / g0:.2f} ns")
