r"""Critical-exponent estimation from rate-vs-temperature data.

Broken phase model

.. math::

    \Gamma/\Gamma_0 = \sqrt{\max(0,\ 1 - x_0^2 t^{2\beta})}

which linearizes to ``ln(1 - r**2) = 2 ln x0 + 2 beta ln t``.

Symmetric phase, exponential correlation length: ``1 - 1/r = (alpha delta / 6 pi) / |t|``.
Power law: ``1 - 1/r = (alpha / 6 pi) ln((A/xi0) |t|**-nu + 1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import AllMasked, DegenerateJacobian, InsufficientData
from .lm import levenberg_marquardt
from .physics import ALPHA_DEFAULT, CorrelationKind
from .sweep import RateCurve

__all__ = [
    "GAP_THRESHOLD",
    "FLAT_THRESHOLD",
    "FitResult",
    "CandidateSet",
    "Classification",
    "SymmetricFit",
    "Linearized",
    "TcScan",
    "broken_model",
    "linearize_broken",
    "fit_broken",
    "classify",
    "fit_symmetric",
    "tc_scan",
]

GAP_THRESHOLD = 1e-3
FLAT_THRESHOLD = 1.0 - 1e-6


def _to_json(d: dict) -> str:
    return json.dumps(d, sort_keys=True, indent=1, allow_nan=False) + "\n"


@dataclass
class FitResult:
    params: dict[str, float]
    residual_ss: float
    dof: int
    param_stderr: dict[str, float] = field(default_factory=dict)
    converged: bool = True
    iterations: int = 0
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "residual_ss": self.residual_ss,
            "dof": self.dof,
            "param_stderr": dict(self.param_stderr),
            "converged": self.converged,
            "iterations": self.iterations,
            "diagnostics": dict(self.diagnostics),
        }

    def to_json(self) -> str:
        return _to_json(self.to_dict())


NAMED_EXPONENTS = {0.5: "mean field", 0.125: "Ising model"}


def exponent_label(beta: float) -> str:
    if beta in NAMED_EXPONENTS:
        return NAMED_EXPONENTS[beta]
    frac = Fraction(beta).limit_denominator(64)
    if abs(float(frac) - beta) < 1e-12:
        return f"{frac.numerator}/{frac.denominator}"
    return repr(beta)


@dataclass(frozen=True)
class CandidateSet:
    """Labelled candidate exponents, e.g. mean field, Ising, 1/4."""

    betas: tuple[tuple[str, float], ...] = (
        ("mean field", 0.5),
        ("1/4", 0.25),
        ("Ising model", 0.125),
    )

    def __post_init__(self):
        betas = tuple((str(lbl), float(b)) for lbl, b in self.betas)
        object.__setattr__(self, "betas", betas)
        if not betas:
            raise ValueError("candidate set is empty")
        vals = [b for _, b in betas]
        if len(set(vals)) != len(vals):
            raise ValueError("candidate exponents must be distinct")
        if any(not 0 < b <= 1 for b in vals):
            raise ValueError("candidate exponents must lie in (0, 1]")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "CandidateSet":
        return cls(tuple((exponent_label(float(v)), float(v)) for v in values))


@dataclass
class Classification:
    best: str
    scores: dict[str, dict[str, float]]
    margin: float | None
    fits: dict[str, FitResult] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {"best": self.best, "scores": self.scores, "margin": self.margin}

    def to_json(self) -> str:
        return _to_json(self.to_dict())


@dataclass
class SymmetricFit:
    kind: CorrelationKind
    params: dict[str, float]
    residual_ss: float
    converged: bool
    dof: int = 0
    param_stderr: dict[str, float] = field(default_factory=dict)
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": CorrelationKind(self.kind).value,
            "params": dict(self.params),
            "residual_ss": self.residual_ss,
            "dof": self.dof,
            "param_stderr": dict(self.param_stderr),
            "converged": self.converged,
            "iterations": self.iterations,
        }

    def to_json(self) -> str:
        return _to_json(self.to_dict())


@dataclass
class Linearized:
    """Transformed broken-phase data: ``x = ln t``, ``y = ln(1 - r**2)``."""

    log_t: np.ndarray
    log_one_minus_r2: np.ndarray
    weights: np.ndarray
    # indices into the broken-phase samples that survived the mask
    used: np.ndarray
    n_gap: int
    n_flat: int


def broken_model(t, beta: float, x0: float) -> np.ndarray:
    """``sqrt(max(0, 1 - x0**2 t**(2 beta)))`` elementwise."""
    u = x0 * x0 * np.asarray(t, dtype=float) ** (2.0 * beta)
    return np.sqrt(np.clip(1.0 - u, 0.0, None))


def _sigma_rel(curve: RateCurve, sigma_rel: float | None) -> float | None:
    if sigma_rel is not None:
        return float(sigma_rel) if sigma_rel > 0 else None
    noise = curve.metadata.get("noise") if curve.metadata else None
    if isinstance(noise, dict) and noise.get("sigma_rel", 0) > 0:
        return float(noise["sigma_rel"])
    return None


def _broken_samples(curve: RateCurve):
    m = curve.t > 0
    return curve.t[m], curve.ratio[m]


def _mask(r):
    gap = r < GAP_THRESHOLD
    flat = r > FLAT_THRESHOLD
    return ~(gap | flat), int(gap.sum()), int(flat.sum())


def linearize_broken(curve: RateCurve, sigma_rel: float | None = None) -> Linearized:
    """Log-log transform of the broken-phase samples with propagated weights.

    Samples in the gap (``r < 1e-3``) or indistinguishable from 1
    (``r > 1 - 1e-6``) carry no usable slope information and are masked.

    Raises
    ------
    AllMasked
        If samples exist but every one is masked.
    InsufficientData
        If fewer than 3 samples survive.
    """
    t, r = _broken_samples(curve)
    keep, n_gap, n_flat = _mask(r)
    if t.size and not keep.any():
        raise AllMasked(f"all {t.size} broken-phase samples masked ({n_gap} gap, {n_flat} flat)")
    if keep.sum() < 3:
        raise InsufficientData(f"need 3 usable broken-phase samples, have {int(keep.sum())}")
    tk, rk = t[keep], r[keep]
    one_minus_r2 = (1.0 - rk) * (1.0 + rk)
    sig = _sigma_rel(curve, sigma_rel)
    sigma_abs = sig * rk if sig is not None else np.ones_like(rk)
    # var(ln(1 - r^2)) = (2 r sigma / (1 - r^2))^2
    w = (one_minus_r2 / (2.0 * rk * sigma_abs)) ** 2
    return Linearized(np.log(tk), np.log(one_minus_r2), w, np.flatnonzero(keep), n_gap, n_flat)


def _weighted_line(x, y, w):
    """Weighted least-squares line; returns slope, intercept, weighted R^2."""
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    if sxx <= 0:
        raise InsufficientData("abscissae are all equal")
    slope = (w * (x - xm) * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    ss_res = (w * (y - intercept - slope * x) ** 2).sum()
    ss_tot = (w * (y - ym) ** 2).sum()
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return slope, intercept, r2


def linear_estimate(lin: Linearized) -> tuple[float, float]:
    """``(beta, x0)`` from the weighted log-log line."""
    slope, intercept, _ = _weighted_line(lin.log_t, lin.log_one_minus_r2, lin.weights)
    return slope / 2.0, math.exp(intercept / 2.0)


def _prepare(curve, sigma_rel):
    t, r = _broken_samples(curve)
    if t.size and np.all(r < GAP_THRESHOLD):
        raise DegenerateJacobian("every sample sits on the zero-emission plateau")
    lin = linearize_broken(curve, sigma_rel)
    tk, rk = t[lin.used], r[lin.used]
    sig = _sigma_rel(curve, sigma_rel)
    sqrt_w = 1.0 / (sig * rk) if sig is not None else np.ones_like(rk)
    return lin, tk, rk, sqrt_w, sig


def _broken_residuals(tk, rk, sqrt_w, fixed_beta=None):
    lt = np.log(tk)

    def unpack(p):
        return (fixed_beta, p[0]) if fixed_beta is not None else (p[0], p[1])

    def fun(p):
        beta, x0 = unpack(p)
        return sqrt_w * (broken_model(tk, beta, x0) - rk)

    def jac(p):
        beta, x0 = unpack(p)
        s = tk ** (2.0 * beta)
        u = x0 * x0 * s
        m = np.sqrt(np.clip(1.0 - u, 0.0, None))
        inside = m > 0
        safe = np.where(inside, m, 1.0)
        d_x0 = np.where(inside, -x0 * s / safe, 0.0)
        d_beta = np.where(inside, -u * lt / safe, 0.0)
        cols = [d_x0] if fixed_beta is not None else [d_beta, d_x0]
        return sqrt_w[:, None] * np.column_stack(cols)

    return fun, jac


def fit_broken(
    curve: RateCurve,
    init: FitResult | dict | str = "auto",
    sigma_rel: float | None = None,
    max_iter: int = 200,
) -> FitResult:
    """Nonlinear weighted fit of ``(beta, x0)`` to broken-phase data.

    ``init="auto"`` seeds from :func:`linearize_broken`. Weights are
    ``1/(sigma_rel r)**2`` when the relative noise level is known (argument
    or curve metadata), else uniform. Standard errors come from the
    Gauss-Newton covariance scaled by ``rss/dof`` and are reported only on
    convergence.

    Raises
    ------
    DegenerateJacobian
        If the data sit on the zero plateau or the Jacobian is singular.
    InsufficientData, AllMasked
        If fewer than 3 samples are usable.
    """
    lin, tk, rk, sqrt_w, sig = _prepare(curve, sigma_rel)
    if init == "auto":
        beta0, x00 = linear_estimate(lin)
    else:
        params = init.params if isinstance(init, FitResult) else init
        beta0, x00 = float(params["beta"]), float(params["x0"])
    beta0 = min(max(beta0, 1e-3), 1.0)

    fun, jac = _broken_residuals(tk, rk, sqrt_w)
    res = levenberg_marquardt(
        fun, jac, [beta0, x00], max_iter=max_iter, feasible=lambda p: p[0] > 0
    )
    beta, x0 = float(res.params[0]), abs(float(res.params[1]))
    dof = tk.size - 2
    stderr = {}
    if res.converged:
        cov = res.covariance(scale=True)
        stderr = {"beta": float(math.sqrt(max(cov[0, 0], 0.0))), "x0": float(math.sqrt(max(cov[1, 1], 0.0)))}
    init_rss = float(np.sum(fun(np.array([beta0, x00])) ** 2))
    return FitResult(
        params={"beta": beta, "x0": x0},
        residual_ss=res.rss,
        dof=dof,
        param_stderr=stderr,
        converged=res.converged,
        iterations=res.iterations,
        diagnostics={
            "n_used": int(tk.size),
            "n_masked_gap": lin.n_gap,
            "n_masked_flat": lin.n_flat,
            "init": {"beta": float(beta0), "x0": float(x00)},
            "init_residual_ss": init_rss,
            "weighted": sig is not None,
            "stop": res.message,
        },
    )


def aic(rss: float, n: int, k: int) -> float:
    """Gaussian-likelihood AIC ``n ln(rss/n) + 2k``."""
    rss = max(rss, np.finfo(float).tiny)
    return n * math.log(rss / n) + 2 * k


def classify(
    curve: RateCurve,
    candidates: CandidateSet = CandidateSet(),
    sigma_rel: float | None = None,
) -> Classification:
    """Pick the candidate exponent that best explains the broken-phase data.

    Each candidate is fitted with ``beta`` held fixed and ``x0`` free, and
    scored by AIC. ``margin`` is the AIC gap to the runner-up (``None`` with a
    single candidate).
    """
    lin, tk, rk, sqrt_w, _ = _prepare(curve, sigma_rel)
    n = tk.size
    scores: dict[str, dict[str, float]] = {}
    fits: dict[str, FitResult] = {}
    errors: dict[str, Exception] = {}
    for label, beta in candidates.betas:
        # x0 seed: intercept of the log-log line with the slope pinned
        ln_x0 = np.sum(lin.weights * (lin.log_one_minus_r2 - 2 * beta * lin.log_t)) / (2 * lin.weights.sum())
        fun, jac = _broken_residuals(tk, rk, sqrt_w, fixed_beta=beta)
        try:
            res = levenberg_marquardt(fun, jac, [math.exp(ln_x0)])
        except DegenerateJacobian as exc:
            errors[label] = exc
            continue
        stderr = {}
        if res.converged:
            stderr = {"x0": float(math.sqrt(max(res.covariance()[0, 0], 0.0)))}
        fits[label] = FitResult(
            params={"beta": beta, "x0": abs(float(res.params[0]))},
            residual_ss=res.rss,
            dof=n - 1,
            param_stderr=stderr,
            converged=res.converged,
            iterations=res.iterations,
        )
        scores[label] = {"beta": beta, "residual_ss": res.rss, "aic": aic(res.rss, n, 1)}
    if not scores:
        raise DegenerateJacobian(f"every candidate fit failed: {errors}")
    ranked = sorted(scores, key=lambda lbl: scores[lbl]["aic"])
    margin = scores[ranked[1]]["aic"] - scores[ranked[0]]["aic"] if len(ranked) > 1 else None
    return Classification(best=ranked[0], scores=scores, margin=margin, fits=fits)


def _symmetric_samples(curve: RateCurve):
    m = curve.t < 0
    t, r = curve.t[m], curve.ratio[m]
    if np.any(r < 1):
        raise ValueError("symmetric-phase rate ratios must be >= 1")
    return -t, r


def fit_symmetric(
    curve: RateCurve,
    kind: CorrelationKind | str = CorrelationKind.EXPONENTIAL,
    alpha: float = ALPHA_DEFAULT,
    sigma_rel: float | None = None,
    max_iter: int = 200,
) -> SymmetricFit:
    """Fit the correlation-length law behind symmetric-phase data.

    Exponential: weighted regression of ``1 - 1/r`` on ``1/|t|`` through the
    origin, slope ``alpha delta / 6 pi``. Power law: nonlinear fit of
    ``(6 pi / alpha)(1 - 1/r) = ln((A/xi0) |t|**-nu + 1)``.
    """
    kind = CorrelationKind(kind)
    at, r = _symmetric_samples(curve)
    if at.size < 2:
        raise InsufficientData(f"need at least 2 symmetric-phase samples, have {at.size}")
    pi_val = 1.0 - 1.0 / r
    sig = _sigma_rel(curve, sigma_rel)
    # sd(1 - 1/r) = sigma_rel / r
    w = (r / sig) ** 2 if sig is not None else np.ones_like(r)
    k = alpha / (6 * math.pi)

    if kind is CorrelationKind.EXPONENTIAL:
        x = 1.0 / at
        sxx = float(np.sum(w * x * x))
        slope = float(np.sum(w * x * pi_val)) / sxx
        resid = pi_val - slope * x
        rss = float(np.sum(w * resid * resid))
        dof = at.size - 1
        se = math.sqrt(rss / dof / sxx) if dof > 0 else 0.0
        return SymmetricFit(
            kind, {"delta": slope / k}, rss, True, dof=dof, param_stderr={"delta": se / k}
        )

    # power law, in units where the model is a softplus of ln a - nu ln|t|
    y = pi_val / k
    lt = np.log(at)
    sw = np.sqrt(w) * k
    pos = y > 0
    if pos.sum() < 2:
        raise InsufficientData("power-law fit needs at least 2 samples with r > 1")
    z = np.log(np.expm1(y[pos]))
    ww = w[pos]
    slope, intercept, _ = _weighted_line(lt[pos], z, ww)
    p0 = np.array([intercept, -slope])

    def fun(p):
        return sw * (np.logaddexp(0.0, p[0] - p[1] * lt) - y)

    def jac(p):
        s = 0.5 * (1.0 + np.tanh(0.5 * (p[0] - p[1] * lt)))
        return sw[:, None] * np.column_stack([s, -lt * s])

    res = levenberg_marquardt(fun, jac, p0, max_iter=max_iter)
    ln_a, nu = float(res.params[0]), float(res.params[1])
    stderr = {}
    if res.converged:
        cov = res.covariance()
        stderr = {
            "A_over_xi0": math.exp(ln_a) * math.sqrt(max(cov[0, 0], 0.0)),
            "nu": math.sqrt(max(cov[1, 1], 0.0)),
        }
    return SymmetricFit(
        kind,
        {"A_over_xi0": math.exp(ln_a), "nu": nu},
        res.rss,
        res.converged,
        dof=at.size - 2,
        param_stderr=stderr,
        iterations=res.iterations,
    )


@dataclass
class TcScan:
    best_tc: float
    profile: list[tuple[float, float]]
    beta_at_best: float

    def to_dict(self) -> dict:
        return {
            "best_tc": self.best_tc,
            "beta_at_best": self.beta_at_best,
            "profile": [[tc, (None if math.isnan(q) else q)] for tc, q in self.profile],
        }


def tc_scan(
    temperatures: Sequence[float],
    ratios: Sequence[float],
    tc_grid: Sequence[float],
    sigma_rel: float | None = None,
) -> TcScan:
    """Scan candidate critical temperatures by log-log linearity.

    For each ``Tc`` the samples with ``T < Tc`` are converted to ``t`` and
    the weighted log-log line is scored by R^2. Candidates where the
    linearization fails score NaN.

    Raises
    ------
    InsufficientData
        If no candidate yields a usable fit.
    """
    T = np.asarray(temperatures, dtype=float)
    r = np.asarray(ratios, dtype=float)
    profile = []
    best = (-math.inf, math.nan, math.nan)
    for tc in np.asarray(tc_grid, dtype=float).tolist():
        curve = RateCurve(1.0 - T / tc, r)
        try:
            lin = linearize_broken(curve, sigma_rel)
            slope, _, r2 = _weighted_line(lin.log_t, lin.log_one_minus_r2, lin.weights)
        except InsufficientData:
            r2, slope = math.nan, math.nan
        profile.append((tc, r2))
        if not math.isnan(r2) and r2 > best[0]:
            best = (r2, tc, slope / 2.0)
    if math.isnan(best[1]):
        raise InsufficientData("no candidate Tc produced a usable log-log fit")
    return TcScan(best_tc=best[1], profile=profile, beta_at_best=best[2])
