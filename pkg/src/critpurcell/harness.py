"""Seeded Monte-Carlo studies of the exponent estimator.

Trial ``i`` uses noise seed ``seed0 + i``, so every run is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PurcellError
from .estimator import CandidateSet, classify, fit_broken
from .physics import BrokenPhaseLaw
from .sweep import NoiseSpec, add_noise, linear_grid, sweep_broken


@dataclass
class TrialStats:
    beta_true: float
    trials: int
    correct_class: int = 0
    within_3se: int = 0
    failures: int = 0
    beta_hat: list[float] = field(default_factory=list)
    beta_se: list[float] = field(default_factory=list)

    @property
    def class_rate(self) -> float:
        return self.correct_class / self.trials

    @property
    def coverage(self) -> float:
        return self.within_3se / self.trials


def run_trials(
    beta: float,
    x0: float = 0.8,
    sigma_rel: float = 0.01,
    n_points: int = 50,
    trials: int = 500,
    seed0: int = 0,
    t_range: tuple[float, float] = (0.05, 0.95),
    candidates: CandidateSet | None = CandidateSet(),
) -> TrialStats:
    """Fit and classify ``trials`` noisy realizations of one broken-phase curve.

    Failed fits count against both rates.
    """
    clean = sweep_broken(linear_grid(t_range[0], t_range[1], n_points), BrokenPhaseLaw(x0, beta))
    stats = TrialStats(beta, trials)
    for i in range(trials):
        noisy = add_noise(clean, NoiseSpec(sigma_rel, seed0 + i))
        try:
            fit = fit_broken(noisy)
        except PurcellError:
            stats.failures += 1
            continue
        if fit.converged:
            b, se = fit.params["beta"], fit.param_stderr["beta"]
            stats.beta_hat.append(b)
            stats.beta_se.append(se)
            if abs(b - beta) <= 3 * se:
                stats.within_3se += 1
        else:
            stats.failures += 1
        if candidates is not None:
            try:
                cls = classify(noisy, candidates)
            except PurcellError:
                continue
            if cls.scores[cls.best]["beta"] == beta:
                stats.correct_class += 1
    return stats


def stderr_scaling(
    beta: float = 0.25,
    x0: float = 0.8,
    sigma_rel: float = 0.01,
    sizes=(25, 50, 100, 200, 400),
    trials: int = 40,
    seed0: int = 0,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Mean reported stderr of beta versus sample size, and the log-log slope."""
    means = []
    for n in sizes:
        st = run_trials(beta, x0, sigma_rel, n, trials, seed0, candidates=None)
        means.append(float(np.mean(st.beta_se)))
    sizes = np.asarray(sizes, dtype=float)
    means = np.asarray(means)
    slope = float(np.polyfit(np.log(sizes), np.log(means), 1)[0])
    return sizes, means, slope
