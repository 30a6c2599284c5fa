"""
Checking the closed form by brute force
=======================================

The suppression law follows from integrating a sharp spectral function
over all photon momenta.  Broaden the peak by eta, integrate numerically,
and extrapolate eta -> 0.
"""

# %%
import numpy as np

from critpurcell import spectral

# %% [markdown]
# The raw integral is cutoff dependent: it grows like eta * k_max.  The
# growth is linear in eta, so it drops out of the extrapolation.

# %%
quad = spectral.QuadratureConfig()
for eta in spectral.EtaLadder().etas:
    print(f"eta={eta:<5} R(0)={spectral.integrate_rate(0.0, eta, quad):.6f}")

est = spectral.oracle_rate(0.0)
print("extrapolated:", est.value, "+/-", est.error)

# %% [markdown]
# Ratio against the closed form over the whole range.  Points just below
# the gap edge are flagged: there the broadened line straddles the
# threshold and the ladder cannot resolve it.

# %%
rows = spectral.oracle_check([0.0, 0.3, 0.6, 0.9, 0.95, 0.99, 1.0, 1.2, 2.0])
print(spectral.report_to_csv(rows))
print("flagged:", [r.x for r in rows if r.flagged])

# %% [markdown]
# Density of states with and without the gap.

# %%
w = np.linspace(0, 2, 9)
print(spectral.dos_curve(0.5, w))
