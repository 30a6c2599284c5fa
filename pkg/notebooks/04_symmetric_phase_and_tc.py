"""
Above Tc, and when Tc is unknown
================================

Fit the correlation-length law from the enhancement above Tc, then locate
Tc itself from absolute temperatures below it.
"""

# %%
import numpy as np

from critpurcell import estimator, physics, sweep

# %% [markdown]
# An exponential correlation length gives a strong divergence.  A power
# law barely moves the rate: the logarithm tames it.

# %%
ts = -np.geomspace(1.0, 0.01, 40)
for law in (physics.SymmetricPhaseLaw.exponential(10.0), physics.SymmetricPhaseLaw.power_law(1.0, 1.0)):
    curve = sweep.RateCurve(ts, [physics.gamma_ratio_symmetric(t, law) for t in ts])
    res = estimator.fit_symmetric(curve, law.kind.value)
    print(law.kind.value, "max ratio", curve.ratio.max(), "fit", res.params)

print("pole at |t| =", physics.pole_location(physics.SymmetricPhaseLaw.exponential(10.0)))

# %% [markdown]
# Scan trial Tc values.  The right one makes ln(1 - r^2) linear in ln t.

# %%
T = np.linspace(5, 95, 60)
ratio = sweep.sweep_broken(1 - T / 100.0, physics.BrokenPhaseLaw(0.8, 0.25)).ratio
scan = estimator.tc_scan(T, ratio, np.arange(96, 104.5, 0.5))
print("Tc:", scan.best_tc, " beta there:", scan.beta_at_best)
for tc, r2 in scan.profile[::4]:
    print(f"  Tc={tc:6.1f}  R^2={r2:.8f}")
