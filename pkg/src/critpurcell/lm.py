"""Small dense Levenberg-Marquardt solver used by the exponent fits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateJacobian

GTOL = 1e-10
XTOL = 1e-12
MAX_ITER = 200


@dataclass
class LMResult:
    params: np.ndarray
    residuals: np.ndarray
    jacobian: np.ndarray
    rss: float
    iterations: int
    converged: bool
    message: str

    def covariance(self, scale: bool = True) -> np.ndarray:
        """Gauss-Newton covariance ``(J^T J)^-1``, scaled by ``rss/dof`` if asked."""
        J = self.jacobian
        cov = np.linalg.pinv(J.T @ J)
        dof = J.shape[0] - J.shape[1]
        if scale and dof > 0:
            cov = cov * (self.rss / dof)
        return cov


def levenberg_marquardt(
    fun: Callable[[np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray], np.ndarray],
    p0,
    max_iter: int = MAX_ITER,
    gtol: float = GTOL,
    xtol: float = XTOL,
    feasible: Callable[[np.ndarray], bool] | None = None,
) -> LMResult:
    """Minimize ``sum(fun(p)**2)`` by damped Gauss-Newton steps.

    Marquardt's diagonal scaling with Nielsen's damping update. ``fun``
    returns (already weighted) residuals and ``jac`` their Jacobian.
    Steps landing outside ``feasible`` are rejected like uphill steps.

    Converged when ``max|J^T r| < gtol * (1 + rss)`` or an accepted step has
    ``|dp| < xtol * (1 + |p|)``. On budget exhaustion the best point seen so
    far is returned with ``converged=False``.

    Raises
    ------
    DegenerateJacobian
        If ``J^T J`` is singular at the starting point.
    """
    p = np.asarray(p0, dtype=float).copy()
    r = np.asarray(fun(p), dtype=float)
    J = np.asarray(jac(p), dtype=float)
    rss = float(r @ r)
    A = J.T @ J
    diag = np.diag(A).copy()
    if np.any(diag <= 0) or np.linalg.matrix_rank(A) < p.size:
        raise DegenerateJacobian("model is locally constant along some parameter direction")

    mu = 1e-3 * float(diag.max())
    nu = 2.0
    for it in range(1, max_iter + 1):
        g = J.T @ r
        if np.max(np.abs(g)) < gtol * (1.0 + rss):
            return LMResult(p, r, J, rss, it - 1, True, "gradient")
        D = np.maximum(np.diag(A), 1e-300)
        try:
            dp = np.linalg.solve(A + mu * np.diag(D), -g)
        except np.linalg.LinAlgError:
            mu *= nu
            nu *= 2.0
            continue
        p_new = p + dp
        ok = feasible is None or feasible(p_new)
        if ok:
            r_new = np.asarray(fun(p_new), dtype=float)
            rss_new = float(r_new @ r_new)
            predicted = float(dp @ (mu * D * dp - g))
            gain = (rss - rss_new) / predicted if predicted > 0 else -1.0
        if ok and np.isfinite(rss_new) and gain > 0:
            small = np.linalg.norm(dp) < xtol * (1.0 + np.linalg.norm(p))
            p, r, rss = p_new, r_new, rss_new
            J = np.asarray(jac(p), dtype=float)
            A = J.T @ J
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * gain - 1.0) ** 3)
            nu = 2.0
            if small:
                return LMResult(p, r, J, rss, it, True, "step")
        else:
            if np.linalg.norm(dp) < xtol * (1.0 + np.linalg.norm(p)):
                # rounding floor: nothing left to gain
                return LMResult(p, r, J, rss, it, True, "step")
            mu *= nu
            nu *= 2.0
            if not np.isfinite(mu) or mu > 1e300:
                break
    return LMResult(p, r, J, rss, max_iter, False, "iteration budget exhausted")
