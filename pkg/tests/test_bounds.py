import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracsheet import bounds
from fracsheet.errors import DomainError
from fracsheet.fraccalc import FracOrder, Grid2D
from fracsheet.girsanov import DriftSpec, builtin_drift
from fracsheet.kernels import HurstPair
from fracsheet.simulate import zero_noise
from fracsheet.specfun import gamma

EXP = bounds.ExponentPack(0.3, 0.3, 0.2, 0.2)
# mpmath at 30 digits
C3 = 0.0295109121197822736160739095881
D5 = 10.4914658448414250406067548751
D1_0 = 0.113943988497368350109724526147


def test_exponent_pack():
    assert EXP.gamma == pytest.approx(0.2)
    assert EXP.p == pytest.approx(0.8)
    assert EXP.eta == pytest.approx(0.2)
    assert EXP.gamma_s(0) == pytest.approx(0.3)
    assert EXP.gamma_s(2) == pytest.approx(3 * 0.3 - 2 * 0.2)
    for bad in ((0.2, 0.3, 0.3, 0.2), (0.3, 0.3, 0.0, 0.2), (0.6, 0.3, 0.2, 0.2)):
        with pytest.raises(DomainError):
            bounds.ExponentPack(*bad)


def test_constants():
    c = bounds.compute_constants(EXP)
    assert c.c1 == c.c2
    assert c.c3 == pytest.approx(C3, rel=1e-12)
    assert c.c3 == pytest.approx(0.04 / gamma(0.8) ** 2, rel=1e-12)
    assert c.d5 == pytest.approx(D5, rel=1e-10)
    assert abs(bounds.d5_fixed_grid(0.3, 0.2) - c.d5) <= 1e-6


def test_d_sequence_oracles():
    d1, d2 = bounds.d_sequence(EXP, 0)
    assert d1 == d2
    assert d1 == pytest.approx(D1_0, rel=1e-10)
    assert abs(bounds.d_riemann_oracle(0.3, 0.2, 0) - d1) <= 1e-5
    assert abs(bounds.d_riemann_oracle(0.3, 0.2, 7) - bounds.d_sequence(EXP, 7)[0]) <= 1e-5
    with pytest.raises(DomainError):
        bounds.d_sequence(EXP, -1)


def test_recursion_base_cases():
    seq = bounds.run_recursions(EXP, 2.5, 50)
    assert seq.C[0] == 2.5
    cstar0 = gamma(0.3) * gamma(0.3) * 2.5 / (4 * gamma(0.6) * gamma(0.6))
    assert seq.Cstar[0] == pytest.approx(cstar0, rel=1e-12)
    # r, m, l run over n = 0..N-1; C, C* over 0..N
    np.testing.assert_allclose(seq.C[1:], seq.r * seq.C[:-1], rtol=1e-12)
    np.testing.assert_allclose(seq.Cstar[1:], seq.m * seq.Cstar[:-1] + seq.l * seq.C[:-1], rtol=1e-12)


def test_kappa_family_positive_and_log_domain():
    seq = bounds.run_recursions(EXP, 1.0, 10_000)
    for arr in (seq.kappa, seq.kappa_t, seq.kappa_p, seq.kappa_tp):
        assert np.all(np.isfinite(arr)) and np.all(arr > 0)
    assert np.all(np.isfinite(seq.logC)) and np.all(np.isfinite(seq.logCstar))


def test_wendel_cross_check():
    ok, worst = bounds.wendel_kappa_check(bounds.run_recursions(EXP, 1.0, 500))
    assert ok and worst <= 1.0


def test_summability_tail():
    seq = bounds.run_recursions(EXP, 1.0, 200)
    idx = bounds.tail_index(seq, 1.0, 1e-6)
    assert idx is not None and idx <= 100
    assert 1 <= bounds.choose_truncation(EXP, 1.0) <= 200


def test_asymptotic_trends():
    checks = bounds.asymptotic_checks(EXP)
    assert len(checks) == 7
    for c in checks:
        assert c.passed, c


def test_bounded_trend_detects_growth():
    ns = bounds.trend_ns()
    assert bounds.bounded_trend("flat", 1.0 / ns**0.0).passed
    assert not bounds.bounded_trend("growing", np.sqrt(ns)).passed


@pytest.mark.parametrize("drift", ["const", "cos"])
def test_neumann_bounds_nodewise(drift):
    lo, hi = HurstPair(0.2, 0.2), HurstPair(0.3, 0.3)
    noise = zero_noise(lo, hi, Grid2D(1.0, 129))
    if drift == "const":
        b = builtin_drift("const", 1.0)
    else:
        b = DriftSpec(lambda s, t, x: np.cos(3 * s + 2 * t), bound_M=1.0)
    report = bounds.verify_neumann_bounds(EXP, noise, b, n_max=3, slack=1.1)
    assert len(report) == 8
    for chk in report:
        assert chk.passed, chk
    # n = 0 is the exact bound |s^a t^b b| <= ||b|| s^a t^b, tight where |b| peaks
    assert 0.999 <= report[0].worst_ratio <= 1.0 + 1e-12


def test_difference_estimate_coincident_points():
    order = FracOrder(0.3, 0.4)
    delta, bound = bounds.constant_field_difference(order, 2.0, 0.6, 0.6, 0.7, 0.7)
    assert delta == 0.0 and bound == 0.0


@given(
    st.floats(0.1, 10.0),
    st.floats(0.05, 1.0),
    st.floats(0.0, 1.0),
    st.floats(0.05, 1.0),
    st.floats(0.0, 1.0),
)
def test_difference_estimate_constant_field(M, x1, fx, y1, fy):
    x2, y2 = x1 * fx, y1 * fy
    delta, bound = bounds.constant_field_difference(FracOrder(0.3, 0.4), M, x1, x2, y1, y2)
    assert delta <= bound
    if (x2, y2) != (x1, y1):
        assert delta < bound


def test_difference_estimate_randomized():
    rep = bounds.check_rl_difference_estimate(FracOrder(0.3, 0.4), 2000, seed=1)
    assert rep.violations_A1 == 0
    assert rep.violations_RF1_sharp == 0 and rep.violations_RF2_sharp == 0
    assert rep.worst_RF1_sharp <= 1.0 and rep.worst_RF2_sharp <= 1.0


def test_one_sided_bounds_fail_as_displayed():
    # f = -M below v and +M above gives the supremum
    # M u^al (2|t-v|^be - |t^be - v^be|) / (al be Gamma(al) Gamma(be)),
    # which beats the displayed M u^al (|t-v|^be + |t^be - v^be|) / (...) when t - v is small
    al, be = 0.3, 0.2
    u, t, v, M = 1.0, 1.0, 0.99, 1.0
    pref = M * u**al / (al * be * math.gamma(al) * math.gamma(be))
    exact = pref * (2 * (t - v) ** be - (t**be - v**be))
    displayed = pref * ((t - v) ** be + (t**be - v**be))
    assert exact > 1.9 * displayed
    rep = bounds.check_rl_difference_estimate(FracOrder(0.3, 0.4), 2000, seed=1)
    assert rep.violations_RF1 > 0 and rep.violations_RF2 > 0


def test_case_a_bounds_ordering():
    s = np.linspace(0.1, 1.0, 5)
    pw = bounds.case_a_power_bound(0.3, 0.2, s, s, 1.0)
    assert np.all(pw >= 1.0)
    assert np.all(np.diff(pw) > 0)
