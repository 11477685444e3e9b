import numpy as np
import pytest

from fracsheet.errors import OrderingError
from fracsheet.fraccalc import Grid2D
from fracsheet.kernels import HurstPair, covariance
from fracsheet.simulate import (
    McConfig,
    cell_weight_matrix,
    covariance_and_se,
    sample_noise_pair,
    sample_sheet_increments,
    sheet_values,
    simulate_pairs,
    volterra_values,
    zero_noise,
)

LO = HurstPair(0.2, 0.3)
HI = HurstPair(0.5, 0.5)


def test_increments_deterministic_and_distinct():
    g = Grid2D(1.0, 9)
    a = sample_sheet_increments(g, 3, 5)
    assert np.array_equal(a, sample_sheet_increments(g, 3, 5))
    assert not np.array_equal(a, sample_sheet_increments(g, 3, 6))
    assert not np.array_equal(a, sample_sheet_increments(g, 4, 5))
    assert a.shape == (8, 8)


def test_half_pair_is_the_sheet():
    g = Grid2D(1.0, 17)
    dW = sample_sheet_increments(g, 1)
    out = volterra_values(dW, HurstPair(0.5, 0.5), g)
    np.testing.assert_allclose(out, sheet_values(dW), atol=1e-13)


def test_axes_vanish():
    g = Grid2D(1.0, 17)
    pair = sample_noise_pair(LO, HI, g, seed=2)
    for f in (pair.B_lo.values, pair.B_hi.values):
        assert np.all(f[0, :] == 0) and np.all(f[:, 0] == 0)


def test_ordering_enforced():
    with pytest.raises(OrderingError):
        sample_noise_pair(HI, LO, Grid2D(1.0, 5), seed=0)


def test_zero_noise():
    z = zero_noise(LO, HI, Grid2D(1.0, 5))
    assert np.all(z.total == 0)


def test_batch_matches_single_paths():
    g = Grid2D(1.0, 9)
    dW, b_lo, b_hi = simulate_pairs(LO, HI, g, McConfig(paths=5, master_seed=9), chunk=2)
    for k in range(5):
        pair = sample_noise_pair(LO, HI, g, seed=9, path=k)
        assert np.array_equal(dW[k], pair.dW)
        np.testing.assert_allclose(b_lo[k], pair.B_lo.values, rtol=1e-13, atol=1e-15)


def test_worker_count_independence():
    g = Grid2D(1.0, 9)
    one = simulate_pairs(LO, HI, g, McConfig(paths=50, master_seed=4, workers=1), chunk=8)
    many = simulate_pairs(LO, HI, g, McConfig(paths=50, master_seed=4, workers=4), chunk=8)
    for a, b in zip(one, many):
        assert np.array_equal(a, b)


def test_no_paths():
    dW, b_lo, b_hi = simulate_pairs(LO, HI, Grid2D(1.0, 5), McConfig(paths=0, master_seed=0))
    assert dW.shape == (0, 4, 4) and b_lo.shape == (0, 5, 5)


@pytest.mark.parametrize("H", [0.2, 0.3, 0.4])
def test_weights_reproduce_variance(H):
    # the sampled variance at node t_i is h * sum_k m[i, k]^2
    n = 129
    m = cell_weight_matrix(H, 1.0, n)
    x = np.linspace(0.0, 1.0, n)
    var = (m**2).sum(axis=1) / (n - 1)
    assert abs(var[-1] - 1.0) < 0.01
    # the first node is scale-invariant, so its error does not shrink with n
    assert np.max(np.abs(var[1:] / x[1:] ** (2 * H) - 1)) < 0.035


def test_mc_covariance_matches_discrete_law():
    # the sampled field is exactly Gaussian with covariance built from the weights
    g = Grid2D(1.0, 17)
    hp = HurstPair(0.3, 0.3)
    _, b_lo, _ = simulate_pairs(hp, HI, g, McConfig(paths=20000, master_seed=11), chunk=2048)
    m = cell_weight_matrix(0.3, 1.0, 17)
    axis = m @ m.T * g.h
    for (i, j), (k, l) in [((8, 8), (16, 16)), ((16, 16), (16, 16)), ((4, 12), (12, 4))]:
        exact = axis[i, k] * axis[j, l]
        emp, se = covariance_and_se(b_lo[:, i, j], b_lo[:, k, l])
        assert abs(emp - exact) <= 3.5 * se
        # and the discrete law is close to the continuous covariance
        ref = covariance(hp, (g.x[i], g.x[j]), (g.x[k], g.x[l]))
        assert abs(exact - ref) <= 0.02 * max(ref, 0.1)
