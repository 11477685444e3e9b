import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from fracsheet.errors import DomainError, NonConvergenceError
from fracsheet.fraccalc import Grid2D
from fracsheet.girsanov import DriftSpec, builtin_drift
from fracsheet.kernels import HurstPair
from fracsheet.sde_solver import (
    apriori_bound,
    comparison_test,
    gaussian_oracle,
    krylov_estimate,
    law_samples_case_a,
    linear_series_continuous,
    linear_series_discrete,
    solve_picard,
    uniqueness_surrogate,
    weighted_ks_2samp,
)
from fracsheet.simulate import McConfig, sample_noise_pair, zero_noise

LO = HurstPair(0.2, 0.3)
HI = HurstPair(0.5, 0.5)


def arctan_pair():
    return builtin_drift("arctan", -2.0), builtin_drift("arctan", 2.0)


def test_zero_drift_one_iteration():
    noise = sample_noise_pair(LO, HI, Grid2D(1.0, 17), seed=3)
    res = solve_picard(builtin_drift("zero"), noise, 0.7)
    assert res.iterations == 1 and res.converged
    assert np.array_equal(res.X.values, 0.7 + noise.total)


def test_unit_drift_no_noise():
    g = Grid2D(1.0, 17)
    res = solve_picard(builtin_drift("const", 1.0), zero_noise(LO, HI, g), 0.5)
    np.testing.assert_allclose(res.X.values, 0.5 + np.outer(g.x, g.x), atol=1e-14)


@pytest.mark.parametrize("n", [9, 33])
def test_linear_drift_matches_discrete_series(n):
    g = Grid2D(1.0, n)
    res = solve_picard(builtin_drift("linear", 1.0), zero_noise(LO, HI, g), 1.0)
    np.testing.assert_allclose(res.X.values, linear_series_discrete(1.0, g), rtol=1e-12)


def test_linear_drift_converges_first_order():
    errs = []
    for n in (33, 65, 129):
        g = Grid2D(1.0, n)
        X = solve_picard(builtin_drift("linear", 1.0), zero_noise(LO, HI, g), 1.0).X.values
        s, t = g.mesh()
        errs.append(np.max(np.abs(X - linear_series_continuous(1.0, s, t))))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 1.8) & (ratios < 2.2))


def test_continuous_series_values():
    assert linear_series_continuous(1.0, 0.0, 5.0) == 1.0
    # sum 1 / (k!)^2 = I_0(2)
    assert linear_series_continuous(1.0, 1.0, 1.0) == pytest.approx(2.2795853023360673, rel=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_axis_condition_and_apriori_bound(seed):
    noise = sample_noise_pair(LO, HI, Grid2D(1.0, 33), seed=seed)
    for b in (builtin_drift("cos", 1.5), builtin_drift("linear", 0.8), builtin_drift("arctan", 1.0)):
        X = solve_picard(b, noise, -0.3).X.values
        assert np.all(X[0, :] == -0.3) and np.all(X[:, 0] == -0.3)
        assert np.max(np.abs(X)) <= apriori_bound(b, noise, -0.3)


def test_comparison_examples():
    noise = sample_noise_pair(LO, HI, Grid2D(1.0, 33), seed=1)
    same = comparison_test(builtin_drift("arctan"), builtin_drift("arctan"), noise, 0.0)
    assert same.violations == 0 and same.worst == 0.0
    M = 1.5
    lo_b, hi_b = builtin_drift("const", -M), builtin_drift("const", M)
    X1 = solve_picard(lo_b, noise, 0.0).X.values
    X2 = solve_picard(hi_b, noise, 0.0).X.values
    s, t = noise.grid.mesh()
    np.testing.assert_allclose(X2 - X1, 2 * M * s * t, atol=1e-13)
    for seed in range(10):
        rep = comparison_test(*arctan_pair(), sample_noise_pair(LO, HI, noise.grid, seed=seed), 0.0)
        assert rep.passed and rep.min_gap >= 0


def test_comparison_preconditions():
    noise = sample_noise_pair(LO, HI, Grid2D(1.0, 9), seed=1)
    with pytest.raises(DomainError):
        comparison_test(builtin_drift("cos"), builtin_drift("arctan"), noise, 0.0)
    with pytest.raises(DomainError):
        comparison_test(builtin_drift("arctan", 2.0), builtin_drift("arctan", -2.0), noise, 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_uniqueness_surrogate(seed):
    noise = sample_noise_pair(LO, HI, Grid2D(1.0, 33), seed=seed)
    assert uniqueness_surrogate(builtin_drift("cos", 2.0), noise, 0.0).passed


def test_solver_errors():
    noise = sample_noise_pair(LO, HI, Grid2D(1.0, 33), seed=0)
    with pytest.raises(DomainError):
        solve_picard(DriftSpec(lambda s, t, x: x), noise, 0.0)
    with pytest.raises(NonConvergenceError):
        solve_picard(builtin_drift("cos", 1.0), noise, 0.0, max_iter=2)


def test_weighted_ks_reduces_to_scipy():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=400), rng.normal(0.1, 1.0, size=300)
    ours = weighted_ks_2samp(x, y, np.ones_like(y))
    ref = stats.ks_2samp(x, y, method="asymp")
    assert ours.statistic == pytest.approx(ref.statistic, abs=1e-15)
    assert ours.n2_effective == pytest.approx(300.0)
    # scipy's asymptotic branch applies a small-sample correction
    assert ours.pvalue == pytest.approx(ref.pvalue, rel=0.1)


def test_weighted_ks_importance_weights():
    # N(0, 1) reweighted by exp(y - 1/2) is N(1, 1)
    rng = np.random.default_rng(1)
    x = rng.normal(1.0, 1.0, size=5000)
    y = rng.normal(size=5000)
    assert weighted_ks_2samp(x, y, np.exp(y - 0.5)).passed(0.01)
    assert not weighted_ks_2samp(x, y, np.ones_like(y)).passed(0.01)
    with pytest.raises(DomainError):
        weighted_ks_2samp(x, y, -np.ones_like(y))


@settings(max_examples=25)
@given(st.integers(0, 2**31), st.integers(5, 60), st.integers(5, 60))
def test_weighted_ks_statistic_bounds(seed, n1, n2):
    rng = np.random.default_rng(seed)
    res = weighted_ks_2samp(rng.normal(size=n1), rng.normal(size=n2), rng.uniform(0.1, 2.0, size=n2))
    assert 0.0 < res.statistic <= 1.0
    assert 0.0 <= res.pvalue <= 1.0
    assert 1.0 <= res.n2_effective <= n2 + 1e-9


def test_law_samples_small_run():
    g = Grid2D(1.0, 17)
    ls = law_samples_case_a(builtin_drift("cos", 1.0), LO, g, 0.0, McConfig(paths=2000, master_seed=5))
    assert ls.picard.shape == (2000,) and ls.reweighted.shape == (2000,)
    assert ls.weights.max() == 1.0 and np.all(ls.weights > 0)
    assert weighted_ks_2samp(ls.picard, ls.reweighted, ls.weights).pvalue > 0.001


def test_krylov_trivial_and_preconditions():
    g = Grid2D(1.0, 9)
    lo, hi = HurstPair(0.3, 0.3), HurstPair(0.4, 0.4)
    res = krylov_estimate(builtin_drift("zero"), lo, hi, g, 0.0, [0.0], 2.0, McConfig(paths=50, master_seed=0))
    assert res[0].lhs == 0.0 and res[0].rhs == 0.0
    with pytest.raises(DomainError):
        krylov_estimate(builtin_drift("linear"), lo, hi, g, 0.0, [1.0], 2.0, McConfig(paths=10, master_seed=0))
    with pytest.raises(DomainError):
        krylov_estimate(builtin_drift("zero"), lo, hi, g, 0.0, [1.0], 1.2, McConfig(paths=10, master_seed=0))


def test_krylov_oracle_small():
    g = Grid2D(1.0, 17)
    lo, hi = HurstPair(0.3, 0.3), HurstPair(0.4, 0.4)
    radii = [1.0, 0.25]
    res = krylov_estimate(
        builtin_drift("zero"), lo, hi, g, 0.0, radii, 2.0, McConfig(paths=4000, master_seed=3), with_oracle=True
    )
    for r in res:
        assert abs(r.oracle_z) <= 3.0
    # a huge radius covers the whole square
    assert gaussian_oracle(lo, hi, g, 1e6) == pytest.approx(1.0, rel=1e-12)
