r"""Closed-form emission rates on both sides of a second-order transition.

Everything except :func:`gamma_vacuum` works with dimensionless ratios:

* reduced temperature ``t = 1 - T/Tc`` (``t > 0`` broken/Higgs phase,
  ``t < 0`` symmetric phase),
* photon mass ratio ``x = M c^2 / (hbar omega0)``,
* correlation-length ratio ``xi / xi0``,
* rate ratio ``Gamma / Gamma0``.

Broken phase:

.. math::

    x(t) = x_0 |t|^\beta, \qquad
    \Gamma/\Gamma_0 = \sqrt{1 - x^2}\ (x < 1), \quad 0\ (x \ge 1)

Symmetric phase:

.. math::

    \Pi = \frac{\alpha}{6\pi}\ln(\xi/\xi_0), \qquad
    \Gamma/\Gamma_0 = Z = \frac{1}{1 - \Pi}
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants as _sc
from scipy.optimize import bisect

from .errors import CriticalPoint, PhaseError, PoleReached

__all__ = [
    "ALPHA_DEFAULT",
    "POLE_GUARD",
    "T_MIN_DEFAULT",
    "PhysicalConstants",
    "EmitterSpec",
    "BrokenPhaseLaw",
    "CorrelationKind",
    "SymmetricPhaseLaw",
    "PhaseScenario",
    "gamma_vacuum",
    "mass_ratio",
    "gamma_ratio_higgs",
    "correlation_ratio",
    "log_correlation_ratio",
    "vacuum_polarization",
    "z_factor",
    "gamma_ratio_symmetric",
    "gamma_ratio",
    "pole_location",
    "gap_temperature",
]

ALPHA_DEFAULT = 1.0 / 137.0
POLE_GUARD = 1e-9
T_MIN_DEFAULT = 1e-12


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants entering the vacuum rate, plus the fine-structure constant.

    ``alpha`` defaults to exactly 1/137; pass ``scipy.constants.alpha`` for
    the CODATA value.
    """

    hbar: float = _sc.hbar
    c: float = _sc.c
    eps0: float = _sc.epsilon_0
    alpha: float = ALPHA_DEFAULT

    def __post_init__(self):
        for name in ("hbar", "c", "eps0", "alpha"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v!r}")
        if self.alpha >= 1:
            raise ValueError(f"alpha must be < 1, got {self.alpha!r}")

    @classmethod
    def codata(cls) -> "PhysicalConstants":
        return cls(alpha=_sc.alpha)


@dataclass(frozen=True)
class EmitterSpec:
    """Two-level emitter: angular transition frequency (rad/s) and dipole (C m)."""

    omega0: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise ValueError(f"omega0 must be positive, got {self.omega0!r}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be positive, got {self.mu!r}")


@dataclass(frozen=True)
class BrokenPhaseLaw:
    """Photon-mass law ``x(t) = x0 * |t|**beta`` below Tc.

    ``Tc`` is only carried along for data given in absolute temperature.
    """

    x0: float
    beta: float
    Tc: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.x0) and self.x0 >= 0):
            raise ValueError(f"x0 must be >= 0, got {self.x0!r}")
        if not (0 < self.beta <= 1):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta!r}")
        if self.Tc is not None and not self.Tc > 0:
            raise ValueError(f"Tc must be positive, got {self.Tc!r}")


class CorrelationKind(str, enum.Enum):
    POWER_LAW = "power_law"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class SymmetricPhaseLaw:
    """Correlation-length law above Tc.

    Power law: ``xi = A |t|**-nu + xi0``; exponential: ``xi = xi0 exp(delta/|t|)``.
    Only ``A / xi0`` enters the rate, so that is what is stored.
    Use :meth:`power_law` / :meth:`exponential` to build one.
    """

    kind: CorrelationKind
    a_over_xi0: float = 0.0
    nu: float = 1.0
    delta: float = 1.0
    xi0: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CorrelationKind(self.kind))
        if not self.xi0 > 0:
            raise ValueError(f"xi0 must be positive, got {self.xi0!r}")
        if self.kind is CorrelationKind.POWER_LAW:
            if not self.a_over_xi0 >= 0:
                raise ValueError(f"A must be >= 0, got {self.a_over_xi0!r}")
            if not self.nu > 0:
                raise ValueError(f"nu must be positive, got {self.nu!r}")
        elif not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta!r}")

    @classmethod
    def power_law(cls, A: float, nu: float, xi0: float = 1.0) -> "SymmetricPhaseLaw":
        return cls(CorrelationKind.POWER_LAW, a_over_xi0=A / xi0, nu=nu, xi0=xi0)

    @classmethod
    def exponential(cls, delta: float, xi0: float = 1.0) -> "SymmetricPhaseLaw":
        return cls(CorrelationKind.EXPONENTIAL, delta=delta, xi0=xi0)


@dataclass(frozen=True)
class PhaseScenario:
    broken: BrokenPhaseLaw
    symmetric: SymmetricPhaseLaw
    emitter: EmitterSpec | None = None
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)


def gamma_vacuum(emitter: EmitterSpec, constants: PhysicalConstants = PhysicalConstants()) -> float:
    """Free-space spontaneous emission rate in 1/s.

    ``omega0**3 mu**2 / (3 pi eps0 hbar c**3)``.
    """
    k = constants
    return emitter.omega0**3 * emitter.mu**2 / (3 * math.pi * k.eps0 * k.hbar * k.c**3)


def mass_ratio(t: float, law: BrokenPhaseLaw) -> float:
    """Dimensionless photon mass ``x0 * t**beta`` in the broken phase (``t >= 0``)."""
    t = float(t)
    if not t >= 0:
        raise PhaseError(f"mass_ratio needs t >= 0 (broken phase), got {t!r}")
    if t == 0:
        return 0.0
    return law.x0 * t**law.beta


def gamma_ratio_higgs(x):
    """Rate ratio for a photon of mass ratio ``x``.

    Returns ``sqrt(1 - x**2)`` below the gap and exactly 0 for ``x >= 1``.
    Accepts scalars or arrays.
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("mass ratio must be finite")
    if np.any(xa < 0):
        raise ValueError("mass ratio must be >= 0")
    out = np.sqrt(np.clip(1.0 - xa * xa, 0.0, None))
    out = np.where(xa >= 1.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def _check_symmetric_t(t: float, t_min: float) -> float:
    t = float(t)
    if not t < 0:
        raise PhaseError(f"symmetric phase needs t < 0, got {t!r}")
    at = -t
    if at < t_min:
        raise PhaseError(f"|t| = {at!r} is below the divergence floor t_min = {t_min!r}")
    return at


def log_correlation_ratio(t: float, law: SymmetricPhaseLaw, t_min: float = T_MIN_DEFAULT) -> float:
    """``ln(xi/xi0)``; finite even where ``xi/xi0`` itself overflows."""
    at = _check_symmetric_t(t, t_min)
    if law.kind is CorrelationKind.EXPONENTIAL:
        return law.delta / at
    if law.a_over_xi0 == 0:
        return 0.0
    return float(np.logaddexp(0.0, math.log(law.a_over_xi0) - law.nu * math.log(at)))


def correlation_ratio(t: float, law: SymmetricPhaseLaw, t_min: float = T_MIN_DEFAULT) -> float:
    """``xi/xi0`` at reduced temperature ``t < 0``.

    Raises :class:`OverflowError` when the ratio is not representable;
    use :func:`log_correlation_ratio` close to Tc.
    """
    return math.exp(log_correlation_ratio(t, law, t_min))


def vacuum_polarization(xi_ratio: float, alpha: float = ALPHA_DEFAULT) -> float:
    """One-loop polarization with the cutoff pinned at ``1/xi0``.

    ``(alpha / 12 pi) ln((xi/xi0)**2)``, zero far from Tc.
    """
    if not xi_ratio >= 1:
        raise ValueError(f"xi_ratio must be >= 1, got {xi_ratio!r}")
    return alpha / (12 * math.pi) * 2.0 * math.log(xi_ratio)


def z_factor(pi_value: float, guard: float = POLE_GUARD) -> float:
    """Propagator renormalization ``1 / (1 - Pi)``.

    Raises
    ------
    PoleReached
        If ``pi_value >= 1 - guard``.
    """
    if not pi_value >= 0:
        raise ValueError(f"vacuum polarization must be >= 0, got {pi_value!r}")
    if pi_value >= 1.0 - guard:
        raise PoleReached(pi_value, guard)
    return 1.0 / (1.0 - pi_value)


def gamma_ratio_symmetric(
    t: float,
    law: SymmetricPhaseLaw,
    alpha: float = ALPHA_DEFAULT,
    t_min: float = T_MIN_DEFAULT,
    guard: float = POLE_GUARD,
) -> float:
    """Rate ratio ``Z`` in the symmetric phase (``t < 0``)."""
    # log form of vacuum_polarization(correlation_ratio(t)); the ratio itself
    # overflows long before the pole for the exponential law
    pi_value = alpha / (6 * math.pi) * log_correlation_ratio(t, law, t_min)
    return z_factor(pi_value, guard)


def gamma_ratio(t: float, scenario: PhaseScenario, t_min: float = T_MIN_DEFAULT) -> float:
    """Rate ratio on either side of the transition.

    Raises
    ------
    CriticalPoint
        At ``t == 0``, where the two phases disagree (1 vs. divergence).
    """
    t = float(t)
    if t == 0:
        raise CriticalPoint("emission rate is undefined exactly at Tc")
    if t > 0:
        return gamma_ratio_higgs(mass_ratio(t, scenario.broken))
    return gamma_ratio_symmetric(t, scenario.symmetric, scenario.constants.alpha, t_min)


def pole_location(law: SymmetricPhaseLaw, alpha: float = ALPHA_DEFAULT, guard: float = 0.0) -> float:
    """``|t*|`` where the polarization reaches ``1 - guard``, found by bisection.

    Returns 0.0 when there is no pole (``A == 0``) or when it underflows.
    """
    if law.kind is CorrelationKind.POWER_LAW and law.a_over_xi0 == 0:
        return 0.0
    target = 1.0 - guard
    k = alpha / (6 * math.pi)

    def excess(s):
        # s = ln|t|
        if law.kind is CorrelationKind.EXPONENTIAL:
            log_xi = law.delta * math.exp(-s)
        else:
            log_xi = float(np.logaddexp(0.0, math.log(law.a_over_xi0) - law.nu * s))
        return k * log_xi - target

    hi = 0.0
    while excess(hi) >= 0:
        hi += 8.0
    lo = hi - 8.0
    while excess(lo) < 0:
        lo -= 8.0
        if lo < -1e6:
            return 0.0
    s = bisect(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.exp(s)


def gap_temperature(law: BrokenPhaseLaw) -> float | None:
    """Smallest ``t`` with zero emission, ``(1/x0)**(1/beta)``; ``None`` if ``x0 < 1``.

    Only values ``t <= 1`` correspond to temperatures above absolute zero.
    """
    if law.x0 < 1:
        return None
    return (1.0 / law.x0) ** (1.0 / law.beta)
