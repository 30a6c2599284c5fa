r"""Quadrature route to the emission rate, independent of the closed forms.

Units: frequencies in units of the emitter frequency ``omega0``, wave numbers
in ``omega0 / c``. The delta functions of the photon spectral function are
replaced by unit-area Lorentzians of width ``eta``

.. math::

    A_\eta(\omega_k, \omega) = \frac{1}{\omega_k}
        \left[L_\eta(\omega - \omega_k) - L_\eta(\omega + \omega_k)\right],
    \qquad \omega_k = \sqrt{k^2 + x^2},

and the raw rate is the radial integral

.. math::

    R(x, \eta) = \int_0^{k_{max}} k^2 \omega_k^2 A_\eta(\omega_k, \omega_0)\, dk .

For ``eta > 0`` the integrand tends to the constant ``4 eta / pi`` at large
``k``, so ``R`` grows linearly with the cutoff. That growth is linear in
``eta`` and disappears when the ladder is extrapolated to ``eta -> 0``; the
cutoff only has to sit far enough from the resonance that the remaining
``eta`` dependence is a clean power series (see :func:`tail_bound`).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import ConvergenceFailure, IllConditioned, TailTooFat
from .physics import gamma_ratio_higgs

__all__ = [
    "BroadenedSpectral",
    "QuadratureConfig",
    "EtaLadder",
    "Extrapolation",
    "OracleRow",
    "lorentzian",
    "dispersion",
    "spectral_value",
    "sum_rule",
    "tail_bound",
    "integrate_rate",
    "extrapolate_eta",
    "oracle_rate",
    "oracle_ratio",
    "dos_curve",
    "dos_quadrature",
    "oracle_check",
    "report_to_csv",
]


@dataclass(frozen=True)
class BroadenedSpectral:
    """Photon mass ratio ``x`` and Lorentzian width ``eta`` (units of omega0)."""

    x: float
    eta: float

    def __post_init__(self):
        if not self.x >= 0:
            raise ValueError(f"x must be >= 0, got {self.x!r}")
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta!r}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for the radial k integral.

    ``tail_tol`` bounds the part of the truncated tail that is *not* linear
    in eta, relative to the accumulated value.
    """

    k_max: float = 50.0
    rel_tol: float = 1e-10
    max_subdivisions: int = 500
    tail_tol: float = 1e-4

    def __post_init__(self):
        if not self.k_max > 1:
            raise ValueError(f"k_max must be > 1, got {self.k_max!r}")
        # QUADPACK floor for a pure relative tolerance
        if not self.rel_tol >= 50 * np.finfo(float).eps:
            raise ValueError(f"rel_tol must be >= 50 machine epsilons, got {self.rel_tol!r}")
        if self.max_subdivisions < 2:
            raise ValueError("max_subdivisions must be >= 2")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be > 0, got {self.tail_tol!r}")


@dataclass(frozen=True)
class EtaLadder:
    etas: tuple[float, ...] = (0.08, 0.04, 0.02, 0.01)
    extrapolation_order: int = 2

    def __post_init__(self):
        etas = tuple(float(e) for e in self.etas)
        object.__setattr__(self, "etas", etas)
        if len(etas) < 3:
            raise ValueError("an eta ladder needs at least 3 rungs")
        if any(e <= 0 for e in etas):
            raise ValueError("all broadening widths must be positive")
        if any(b >= a for a, b in zip(etas, etas[1:])):
            raise ValueError("broadening widths must be strictly decreasing")
        if self.extrapolation_order < 0 or self.extrapolation_order + 1 > len(etas):
            raise ValueError("extrapolation order needs order + 1 <= number of rungs")


def lorentzian(d, eta):
    """Unit-area Lorentzian of half width ``eta`` at offset ``d``."""
    return eta / (math.pi * (d * d + eta * eta))


def dispersion(k, x):
    """Massive photon dispersion ``sqrt(k**2 + x**2)`` (dimensionless)."""
    return np.sqrt(k * k + x * x)


def spectral_value(omega_k, omega, spec: BroadenedSpectral):
    """Broadened spectral function at mode frequency ``omega_k``, probe ``omega``.

    Antisymmetric under ``omega -> -omega``.
    """
    eta = spec.eta
    return (lorentzian(omega - omega_k, eta) - lorentzian(omega + omega_k, eta)) / omega_k


def sum_rule(omega_k: float, eta: float) -> float:
    """First frequency moment of the broadened spectral function over ``omega > 0``.

    Equal to 1 for every ``eta`` up to quadrature error.
    """
    spec = BroadenedSpectral(0.0, eta)

    def f(w):
        return w * spectral_value(omega_k, w, spec)

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        near = quad(f, 0.0, 2 * omega_k, points=[omega_k], limit=500, epsabs=0, epsrel=1e-12)[0]
        far = quad(f, 2 * omega_k, np.inf, limit=500, epsabs=1e-14, epsrel=1e-12)[0]
    return near + far


def tail_bound(x: float, eta: float, quad_cfg: QuadratureConfig, omega: float = 1.0) -> float:
    """Upper bound on the non-linear-in-eta part of the integral beyond the cutoff.

    Beyond ``W = omega_k(k_max)`` the Lorentzian difference deviates from its
    O(eta) asymptote by a relative amount below ``2 eta**2 / (w - omega)**2``
    and the O(eta) integrand is bounded by its value at ``W``. The linear part
    is removed exactly by the eta extrapolation; this remainder is not.
    """
    W = math.sqrt(quad_cfg.k_max**2 + x * x)
    if W <= omega:
        return math.inf
    lin = 4 * eta * omega * W**4 / (math.pi * (W * W - omega * omega) ** 2)
    return lin * 2 * eta * eta / (W - omega)


def integrate_rate(
    x: float, eta: float, quad_cfg: QuadratureConfig = QuadratureConfig(), omega: float = 1.0
) -> float:
    """Raw broadened rate ``R(x, eta)`` at emission frequency ``omega``.

    Raises
    ------
    ConvergenceFailure
        If the adaptive quadrature runs out of subdivisions.
    TailTooFat
        If the cutoff is too close to the resonance for extrapolation.
    """
    spec = BroadenedSpectral(x, eta)
    x2 = x * x

    def integrand(k):
        wk = math.sqrt(k * k + x2)
        # k^2 w_k^2 A(w_k, omega) with the 1/w_k of A folded in
        return k * k * wk * (lorentzian(omega - wk, eta) - lorentzian(omega + wk, eta))

    points = None
    if omega > x:
        kp = math.sqrt(omega * omega - x2)
        if 0 < kp < quad_cfg.k_max:
            points = [kp]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, abserr, info, *msg = quad(
            integrand,
            0.0,
            quad_cfg.k_max,
            points=points,
            limit=quad_cfg.max_subdivisions,
            epsabs=0.0,
            epsrel=quad_cfg.rel_tol,
            full_output=1,
        )
    # ier 2 (roundoff) with the requested accuracy met is fine
    if msg and abserr > quad_cfg.rel_tol * abs(value):
        raise ConvergenceFailure(
            f"quadrature for x={x}, eta={eta} failed: {msg[0]} "
            f"(estimate {value!r} +- {abserr!r})"
        )
    bound = tail_bound(spec.x, spec.eta, quad_cfg, omega)
    if not bound <= quad_cfg.tail_tol * max(abs(value), 1e-300):
        raise TailTooFat(
            f"k_max={quad_cfg.k_max} leaves a non-linear tail of up to {bound:.3g} "
            f"against an accumulated {value:.6g} (x={x}, eta={eta})"
        )
    return value


@dataclass(frozen=True)
class Extrapolation:
    """Zero-broadening estimate with its uncertainty."""

    value: float
    error: float
    basis: str
    order: int


def _design(etas, order, basis):
    if basis == "integer":
        powers = np.arange(order + 1, dtype=float)
    elif basis == "half":
        powers = np.arange(order + 1, dtype=float) / 2.0
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return etas[:, None] ** powers[None, :]


def _fit_intercept(etas, vals, order, basis):
    V = _design(etas, order, basis)
    # column scaling keeps the condition number meaningful
    scale = np.linalg.norm(V, axis=0)
    Vs = V / scale
    cond = np.linalg.cond(Vs)
    if not np.isfinite(cond) or cond > 1e12:
        raise IllConditioned(f"eta ladder gives condition number {cond:.3g}")
    coef, *_ = np.linalg.lstsq(Vs, vals, rcond=None)
    resid = vals - Vs @ coef
    cov_unit = np.linalg.inv(Vs.T @ Vs)
    return coef[0] / scale[0], resid, cov_unit[0, 0] / scale[0] ** 2


def extrapolate_eta(
    values: Iterable[tuple[float, float]], order: int = 2, basis: str = "integer"
) -> Extrapolation:
    """Polynomial extrapolation of ``(eta, R)`` pairs to ``eta = 0``.

    ``basis="integer"`` fits powers ``eta**0 .. eta**order``; ``basis="half"``
    fits ``eta**(j/2)`` for ``j = 0 .. order`` (threshold behaviour).

    The error bar is the residual-based standard error of the intercept when
    the fit has spare degrees of freedom, otherwise the change of the
    intercept when the highest power is dropped.
    """
    pairs = sorted(((float(e), float(r)) for e, r in values), key=lambda p: -p[0])
    if len(pairs) < order + 1:
        raise IllConditioned(f"need at least {order + 1} ladder points, got {len(pairs)}")
    etas = np.array([p[0] for p in pairs])
    vals = np.array([p[1] for p in pairs])
    if np.any(etas <= 0) or np.any(np.diff(etas) >= 0):
        raise IllConditioned("ladder widths must be positive and distinct")
    c0, resid, var_unit = _fit_intercept(etas, vals, order, basis)
    dof = len(etas) - (order + 1)
    if dof > 0:
        s2 = float(resid @ resid) / dof
        err = math.sqrt(s2 * var_unit)
    elif order > 0:
        # highest-order term dropped, fitted on the narrowest rungs
        c_lo, _, _ = _fit_intercept(etas[1:], vals[1:], order - 1, basis)
        err = abs(c0 - c_lo)
    else:
        err = 0.0
    return Extrapolation(float(c0), float(err), basis, order)


def _at_threshold(x, omega):
    return abs(x - omega) <= 1e-12 * omega


def oracle_rate(
    x: float,
    ladder: EtaLadder = EtaLadder(),
    quad_cfg: QuadratureConfig = QuadratureConfig(),
    omega: float = 1.0,
) -> Extrapolation:
    """Extrapolated ``R(x, eta -> 0)``.

    When the gap edge coincides with ``omega`` the broadened rate goes as
    ``sqrt(eta)``, so the ladder is fitted in half-integer powers using every
    rung.
    """
    values = [(eta, integrate_rate(x, eta, quad_cfg, omega)) for eta in ladder.etas]
    if _at_threshold(x, omega):
        return extrapolate_eta(values, len(ladder.etas) - 1, basis="half")
    return extrapolate_eta(values, ladder.extrapolation_order)


def oracle_ratio(
    x: float, ladder: EtaLadder = EtaLadder(), quad_cfg: QuadratureConfig = QuadratureConfig()
) -> tuple[float, float]:
    """Quadrature estimate of ``Gamma/Gamma0`` and its error bar.

    Normalized by the massless run with identical ladder and settings, so the
    polarization and angular prefactors cancel.
    """
    ref = oracle_rate(0.0, ladder, quad_cfg)
    est = oracle_rate(x, ladder, quad_cfg)
    ratio = est.value / ref.value
    err = math.hypot(est.error / ref.value, ratio * ref.error / ref.value)
    return ratio, err


def dos_curve(x: float, omega_grid: Sequence[float]) -> np.ndarray:
    """Closed-form photon DOS, normalized so the massless curve is ``omega**2``.

    Returns an ``(n, 2)`` array of ``(omega, rho)``; rows with ``omega <= x``
    are exactly zero.
    """
    w = np.asarray(omega_grid, dtype=float)
    if np.any(w < 0):
        raise ValueError("frequencies must be >= 0")
    if x == 0:
        rho = w * w
    else:
        rho = np.where(w > x, w * np.sqrt(np.clip(w * w - x * x, 0.0, None)), 0.0)
    return np.column_stack([w, rho])


def dos_quadrature(
    x: float,
    omega_grid: Sequence[float],
    ladder: EtaLadder = EtaLadder(),
    quad_cfg: QuadratureConfig = QuadratureConfig(),
) -> np.ndarray:
    """Quadrature DOS on the same normalization as :func:`dos_curve`.

    Returns an ``(n, 3)`` array of ``(omega, rho, error)``.
    """
    rows = []
    for w in np.asarray(omega_grid, dtype=float):
        if not w > 0:
            raise ValueError("quadrature DOS needs omega > 0")
        est = oracle_rate(x, ladder, quad_cfg, omega=float(w))
        rows.append((w, est.value / w, est.error / w))
    return np.array(rows, dtype=float).reshape(-1, 3)


@dataclass(frozen=True)
class OracleRow:
    x: float
    closed_form: float
    oracle: float
    abs_diff: float
    eta_error_bar: float
    flagged: bool


def oracle_check(
    x_list: Sequence[float],
    ladder: EtaLadder = EtaLadder(),
    quad_cfg: QuadratureConfig = QuadratureConfig(),
    tolerance: float = 1e-3,
    workers: int | None = None,
) -> list[OracleRow]:
    """Compare the quadrature route against the closed form for each ``x``.

    Rows with ``abs_diff > tolerance`` are flagged, not dropped.
    """
    xs = [float(x) for x in x_list]
    ref = oracle_rate(0.0, ladder, quad_cfg)

    def one(x):
        est = ref if x == 0 else oracle_rate(x, ladder, quad_cfg)
        ratio = est.value / ref.value
        err = math.hypot(est.error / ref.value, ratio * ref.error / ref.value)
        closed = gamma_ratio_higgs(x)
        diff = abs(ratio - closed)
        return OracleRow(x, closed, ratio, diff, err, diff > tolerance)

    if workers and workers > 1 and len(xs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, xs))
    return [one(x) for x in xs]


def report_to_csv(rows: Sequence[OracleRow]) -> str:
    """CSV text with columns ``x,closed_form,oracle,abs_diff,eta_error_bar``."""
    lines = ["x,closed_form,oracle,abs_diff,eta_error_bar"]
    for r in rows:
        lines.append(
            ",".join(repr(float(v)) for v in (r.x, r.closed_form, r.oracle, r.abs_diff, r.eta_error_bar))
        )
    return "\n".join(lines) + "\n"
