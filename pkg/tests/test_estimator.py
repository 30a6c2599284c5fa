import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critpurcell.errors import AllMasked, DegenerateJacobian, InsufficientData
from critpurcell.estimator import (
    CandidateSet,
    classify,
    fit_broken,
    fit_symmetric,
    linear_estimate,
    linearize_broken,
    tc_scan,
)
from critpurcell.harness import run_trials, stderr_scaling
from critpurcell.physics import BrokenPhaseLaw, SymmetricPhaseLaw, gamma_ratio_symmetric
from critpurcell.sweep import NoiseSpec, RateCurve, add_noise, linear_grid, sweep_broken

GRID50 = linear_grid(0.05, 0.95, 50)


def clean(beta, x0, grid=GRID50):
    return sweep_broken(grid, BrokenPhaseLaw(x0, beta))


# --- linearization -------------------------------------------------------------

def test_linearized_slope_noiseless():
    lin = linearize_broken(clean(0.5, 0.9))
    beta, x0 = linear_estimate(lin)
    assert abs(beta - 0.5) < 1e-10
    assert abs(x0 - 0.9) < 1e-10


def test_linearize_masks_gap_points():
    c = sweep_broken(linear_grid(0.05, 0.95, 50), BrokenPhaseLaw(1.5, 0.5))
    lin = linearize_broken(c)
    n_zero = int(np.sum(c.ratio == 0))
    assert n_zero > 0
    assert lin.n_gap == n_zero
    assert lin.used.size == len(c) - n_zero


def test_linearize_masks_flat_points():
    c = RateCurve([0.1, 0.2, 0.3, 0.4], [1.0, 0.9, 0.8, 0.7])
    lin = linearize_broken(c)
    assert lin.n_flat == 1 and lin.used.size == 3


def test_linearize_errors():
    with pytest.raises(AllMasked):
        linearize_broken(RateCurve([0.1, 0.2, 0.3], [0.0, 0.0, 0.0]))
    with pytest.raises(InsufficientData):
        linearize_broken(RateCurve([0.1, 0.2], [0.9, 0.8]))
    with pytest.raises(InsufficientData):
        linearize_broken(RateCurve([-0.1, -0.2, -0.3], [1.1, 1.2, 1.3]))


def test_slope_invariant_under_t_rescaling():
    c = clean(0.25, 0.7)
    scaled = RateCurve(c.t * 3.0, c.ratio)
    b1, x1 = linear_estimate(linearize_broken(c))
    b2, x2 = linear_estimate(linearize_broken(scaled))
    assert b2 == pytest.approx(b1, abs=1e-12)
    # intercept absorbs the rescaling: x0' = x0 * 3**-beta
    assert x2 == pytest.approx(x1 * 3.0**-b1, rel=1e-10)


# --- nonlinear fit ---------------------------------------------------------------

@pytest.mark.parametrize("beta", [0.125, 0.25, 0.5])
def test_fit_broken_noiseless_from_poor_seed(beta):
    res = fit_broken(clean(beta, 0.8), init={"beta": 0.6, "x0": 0.5})
    assert res.converged
    assert abs(res.params["beta"] - beta) < 1e-6
    assert abs(res.params["x0"] - 0.8) < 1e-6
    assert res.iterations > 0


@pytest.mark.parametrize("beta", np.round(np.arange(0.05, 1.0001, 0.05), 2).tolist())
@pytest.mark.parametrize("x0", [0.5, 0.8, 0.95])
def test_round_trip_grid(beta, x0):
    res = fit_broken(clean(beta, x0))
    assert res.converged
    assert abs(res.params["beta"] - beta) < 1e-6


def test_fit_broken_plateau_is_degenerate():
    c = sweep_broken(linear_grid(0.5, 0.9, 20), BrokenPhaseLaw(3.0, 0.5))
    assert np.all(c.ratio == 0)
    with pytest.raises(DegenerateJacobian):
        fit_broken(c)


def test_fit_broken_budget_exhausted():
    res = fit_broken(clean(0.25, 0.8), init={"beta": 0.9, "x0": 0.2}, max_iter=1)
    assert not res.converged
    assert res.param_stderr == {}
    assert res.residual_ss <= res.diagnostics["init_residual_ss"]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_nonlinear_step_never_worsens_seed(seed):
    noisy = add_noise(clean(0.25, 0.8), NoiseSpec(0.02, seed))
    res = fit_broken(noisy)
    assert res.residual_ss <= res.diagnostics["init_residual_ss"] * (1 + 1e-12)


def test_masked_points_do_not_influence_beta():
    base = add_noise(sweep_broken(linear_grid(0.02, 0.2, 30), BrokenPhaseLaw(2.0, 0.5)), NoiseSpec(0.01, 1))
    plateau = RateCurve(np.linspace(0.3, 0.9, 10), np.zeros(10), base.metadata)
    both = RateCurve(np.r_[base.t, plateau.t], np.r_[base.ratio, plateau.ratio], base.metadata)
    a, b = fit_broken(base), fit_broken(both)
    assert a.params == b.params
    assert b.diagnostics["n_masked_gap"] == 10


def test_weights_from_metadata():
    noisy = add_noise(clean(0.25, 0.8), NoiseSpec(0.01, 3))
    assert fit_broken(noisy).diagnostics["weighted"]
    assert not fit_broken(RateCurve(noisy.t, noisy.ratio)).diagnostics["weighted"]


def test_fit_result_json_stable():
    res = fit_broken(clean(0.5, 0.8))
    text = res.to_json()
    assert text == res.to_json()
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    assert doc["params"]["beta"] == pytest.approx(0.5)


def test_noisy_beta_quarter_coverage():
    # 1 % noise, 50 points on [0.05, 0.95], 200 seeded trials
    stats = run_trials(0.25, trials=200, candidates=None)
    assert stats.failures == 0
    assert stats.coverage >= 0.95


def test_stderr_shrinks_like_inverse_sqrt_n():
    _, _, slope = stderr_scaling(trials=30)
    assert abs(slope + 0.5) <= 0.15 * 0.5


# --- classification ------------------------------------------------------------

def test_classify_noiseless_ising():
    cls = classify(clean(0.125, 0.8))
    assert cls.best == "Ising model"
    rss = sorted(s["residual_ss"] for s in cls.scores.values())
    assert rss[1] > 10 * rss[0]
    assert cls.margin > 0


def test_classify_quarter_label():
    cls = classify(clean(0.25, 0.8), CandidateSet.from_values([0.125, 0.25, 0.5]))
    assert cls.best == "1/4"


def test_classify_single_candidate():
    cls = classify(clean(0.5, 0.8), CandidateSet((("mean field", 0.5),)))
    assert cls.best == "mean field"
    assert cls.margin is None


def test_classify_weight_scaling_invariant():
    noisy = add_noise(clean(0.25, 0.8), NoiseSpec(0.01, 11))
    a = classify(noisy, sigma_rel=0.01)
    b = classify(noisy, sigma_rel=0.07)
    assert a.best == b.best
    assert a.margin == pytest.approx(b.margin, rel=1e-8)


def test_candidate_set_validation():
    with pytest.raises(ValueError):
        CandidateSet((("a", 0.5), ("b", 0.5)))
    with pytest.raises(ValueError):
        CandidateSet((("a", 1.5),))


# --- symmetric phase -------------------------------------------------------------

def _symmetric(law, n=40):
    ts = -np.geomspace(1.0, 0.01, n)
    return RateCurve(ts, [gamma_ratio_symmetric(t, law) for t in ts])


def test_fit_symmetric_exponential():
    res = fit_symmetric(_symmetric(SymmetricPhaseLaw.exponential(10.0)), "exponential")
    assert abs(res.params["delta"] - 10.0) < 1e-8


def test_fit_symmetric_flat():
    c = RateCurve(-np.linspace(1, 5, 10), np.ones(10))
    res = fit_symmetric(c, "exponential")
    assert res.params["delta"] == 0.0
    assert res.residual_ss == 0.0


def test_fit_symmetric_power_law():
    res = fit_symmetric(_symmetric(SymmetricPhaseLaw.power_law(1.0, 1.0)), "power_law")
    assert res.converged
    assert abs(res.params["nu"] - 1.0) < 1e-4
    assert abs(res.params["A_over_xi0"] - 1.0) < 1e-4


def test_fit_symmetric_errors():
    with pytest.raises(InsufficientData):
        fit_symmetric(RateCurve([-1.0], [1.1]))
    with pytest.raises(ValueError):
        fit_symmetric(RateCurve([-1.0, -2.0], [0.9, 1.1]))


# --- unknown Tc ------------------------------------------------------------------

def _absolute(tc=100.0, beta=0.25, x0=0.8):
    T = np.linspace(5.0, 95.0, 60)
    t = 1 - T / tc
    return T, sweep_broken(t, BrokenPhaseLaw(x0, beta)).ratio


def test_tc_scan_recovers_tc():
    T, r = _absolute()
    grid = np.arange(96.0, 104.01, 0.5)
    scan = tc_scan(T, r, grid)
    assert abs(scan.best_tc - 100.0) <= 0.5
    assert scan.beta_at_best == pytest.approx(0.25, abs=1e-6)
    assert len(scan.profile) == grid.size


def test_tc_scan_flat_curve():
    T = np.linspace(5, 95, 30)
    with pytest.raises(InsufficientData):
        tc_scan(T, np.ones_like(T), [100.0, 110.0])


def test_tc_offset_biases_beta():
    T, r = _absolute()
    scan = tc_scan(T, r, [100.0, 105.0])
    r2 = dict(scan.profile)
    assert r2[105.0] < r2[100.0]
    wrong = tc_scan(T, r, [105.0])
    assert abs(wrong.beta_at_best - 0.25) > 0.01
