"""Acceptance criteria 1-10 at their stated tolerances.

Each criterion records one PASS/FAIL line, printed after the run by the
hook in ``conftest.py``. Parts that are known to fail are marked
``xfail(strict=True)``: the line still reads FAIL and the suite stays green,
but an unexpected pass breaks it.
"""

import time

import numpy as np
import pytest

from fracsheet import bounds as bnd
from fracsheet import girsanov as gir
from fracsheet import sde_solver as sde
from fracsheet import simulate as sim
from fracsheet.cli import COV_PROBES, main
from fracsheet.fraccalc import FracOrder, Grid2D, Integral, Weight, relative_l2, rl_derivative, rl_integral, weighted_chain
from fracsheet.kernels import HurstPair, covariance, kernel_moment
from fracsheet.specfun import gamma

pytestmark = pytest.mark.acceptance

SHEET = HurstPair(0.5, 0.5)
LO = HurstPair(0.2, 0.3)
EXP = bnd.ExponentPack(0.3, 0.3, 0.2, 0.2)


def test_criterion_1_variance_identity(acceptance_report):
    start = time.perf_counter()
    worst = 0.0
    for H in (0.1, 0.2, 0.3, 0.4, 0.5):
        for t in (0.25, 0.5, 1.0):
            worst = max(worst, abs(kernel_moment(H, H, t) - t ** (2 * H)) / t ** (2 * H))
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-3 and elapsed < 10
    acceptance_report[1] = (passed, f"kernel variance identity: worst rel err {worst:.2e}, {elapsed:.1f} s")
    assert passed


def test_criterion_2_sheet_covariance(acceptance_report):
    start = time.perf_counter()
    g = Grid2D(1.0, 33)
    _, b_lo, _ = sim.simulate_pairs(LO, SHEET, g, sim.McConfig(paths=20_000, master_seed=0))
    worst = 0.0
    for z, zp in COV_PROBES:
        i, j = (round(f * (g.n - 1)) for f in z)
        k, l = (round(f * (g.n - 1)) for f in zp)
        emp, se = sim.covariance_and_se(b_lo[:, i, j], b_lo[:, k, l])
        exact = covariance(LO, (g.x[i], g.x[j]), (g.x[k], g.x[l]))
        worst = max(worst, abs(emp - exact) / se)
    elapsed = time.perf_counter() - start
    passed = worst <= 3.0 and elapsed < 300
    acceptance_report[2] = (passed, f"covariance at 5 probes: worst |z| {worst:.2f}, {elapsed:.1f} s")
    assert passed


def test_criterion_3_fractional_calculus(acceptance_report):
    o = FracOrder(0.3, 0.4)
    inv, comp = [], []
    for n in (65, 129, 257):
        g = Grid2D(1.0, n)
        f = g.from_function(lambda s, t: np.sin(s) * np.cos(t))
        inv.append(relative_l2(rl_derivative(rl_integral(f, o), o), f))
        p = g.from_function(lambda s, t: s * t)
        lhs = rl_integral(rl_integral(p, FracOrder(0.2, 0.3)), FracOrder(0.3, 0.2))
        comp.append(relative_l2(lhs, weighted_chain(p, [Integral(0.5, 0.5)])))
    a, b = 0.3, 0.2
    g = Grid2D(1.0, 257)
    s, t = g.mesh()
    out = weighted_chain(g.from_function(lambda s, t: np.ones_like(s)), [Weight(a, b), Integral(a, b), Weight(-a, -b)])
    ref = 0.25 * gamma(a) * gamma(b) / (gamma(2 * a) * gamma(2 * b)) * s**a * t**b
    closed = relative_l2(out, ref)
    decreasing = all(x > y for x, y in zip(inv, inv[1:])) and all(x > y for x, y in zip(comp, comp[1:]))
    passed = inv[-1] <= 0.01 and comp[-1] <= 0.01 and decreasing and closed <= 0.01
    acceptance_report[3] = (
        passed,
        f"inversion {inv[-1]:.2e}, composition {comp[-1]:.2e}, closed form {closed:.2e} at n=257; "
        f"decreasing {decreasing}",
    )
    assert passed


def test_criterion_4_girsanov(acceptance_report):
    b = gir.builtin_drift("cos", 1.0)
    g = Grid2D(1.0, 33)
    mc = sim.McConfig(paths=50_000, master_seed=11)

    def task(r):
        dW = sim.increments_batch(g, mc.master_seed, r)
        return np.exp(gir.log_density(gir.psi_batch(b, LO, SHEET, dW, g, 0.0), dW, g.h))

    lt = np.concatenate(sim.run_chunks(task, mc, 2048))
    mean, se = sim.mean_and_se(lt)
    z = (mean - 1.0) / se
    # each grid draws its own sheet, so the gap is averaged over paths before comparing grids
    defects, gaps = [], []
    for n in (65, 129):
        gn = Grid2D(1.0, n)
        per_path = []
        for k in range(8):
            noise = sim.sample_noise_pair(LO, SHEET, gn, seed=11, path=k)
            pair = gir.build_drift_pair(b, LO, SHEET, noise, 0.0)
            defects.append(float(np.max(np.abs(pair.u.values + pair.v.values - gir.drift_on_path(b, noise, 0.0)))))
            per_path.append(pair.psi_gap)
        gaps.append(float(np.mean(per_path)))
    passed = abs(z) <= 3 and max(defects) <= 1e-8 and gaps[1] <= 0.1 and gaps[1] < gaps[0]
    acceptance_report[4] = (
        passed,
        f"E[L_T] = {mean:.5f} +- {se:.5f} (z {z:.2f}); u+v defect {max(defects):.1e}; "
        f"mean psi gap {gaps[0]:.2e} -> {gaps[1]:.2e} (n = 65, 129)",
    )
    assert passed


def test_criterion_5_neumann_bounds(acceptance_report):
    g = Grid2D(1.0, 129)
    noise = sim.zero_noise(HurstPair(0.2, 0.2), HurstPair(0.3, 0.3), g)
    drifts = (gir.builtin_drift("const", 1.0), gir.DriftSpec(lambda s, t, x: np.cos(3 * s + 2 * t), bound_M=1.0))
    checks = [c for b in drifts for c in bnd.verify_neumann_bounds(EXP, noise, b, n_max=3, slack=1.1)]
    violations = sum(c.violations for c in checks)
    worst = max(c.worst_ratio for c in checks)
    passed = violations == 0
    acceptance_report[5] = (passed, f"{len(checks)} nodewise checks, {violations} violations, worst ratio {worst:.3f}")
    assert passed


def test_criterion_6_sequence_asymptotics(acceptance_report):
    checks = bnd.asymptotic_checks(EXP)
    idx = bnd.tail_index(bnd.run_recursions(EXP, 1.0, 200), 1.0, 1e-6)
    failed = [c.name for c in checks if not c.passed]
    passed = not failed and idx is not None and idx <= 200
    acceptance_report[6] = (passed, f"{len(checks) - len(failed)}/{len(checks)} bounded trends; C* tail < 1e-6 at n={idx}")
    assert passed


@pytest.fixture(scope="module")
def difference_estimates():
    start = time.perf_counter()
    rep = bnd.check_rl_difference_estimate(FracOrder(0.3, 0.4), 10_000, seed=0)
    return rep, time.perf_counter() - start


def test_criterion_7_a1(difference_estimates, acceptance_report):
    rep, elapsed = difference_estimates
    displayed_ok = rep.violations_RF1 == 0 and rep.violations_RF2 == 0
    acceptance_report[7] = (
        rep.violations_A1 == 0 and displayed_ok and elapsed < 120,
        f"A1 {rep.violations_A1}/{rep.trials}, RF1 {rep.violations_RF1}/{rep.trials}, "
        f"RF2 {rep.violations_RF2}/{rep.trials} violations; exact suprema "
        f"{rep.violations_RF1_sharp + rep.violations_RF2_sharp} violations; {elapsed:.1f} s",
    )
    assert rep.violations_A1 == 0 and elapsed < 120
    assert rep.violations_RF1_sharp == 0 and rep.violations_RF2_sharp == 0


@pytest.mark.xfail(strict=True, reason="the one-sided estimates as displayed admit counterexamples")
def test_criterion_7_displayed_one_sided(difference_estimates):
    rep, _ = difference_estimates
    assert rep.violations_RF1 == 0 and rep.violations_RF2 == 0


@pytest.fixture(scope="module")
def solver_results():
    out = {}
    g = Grid2D(1.0, 33)
    zero = sim.zero_noise(LO, SHEET, g)
    lin = sde.solve_picard(gir.builtin_drift("linear", 1.0), zero, 1.0).X.values
    s, t = g.mesh()
    out["discrete"] = float(np.max(np.abs(lin - sde.linear_series_discrete(1.0, g))))
    out["continuous"] = float(np.max(np.abs(lin - sde.linear_series_continuous(1.0, s, t))))
    lo_b, hi_b = gir.builtin_drift("arctan", -2.0), gir.builtin_drift("arctan", 2.0)
    out["comparison"] = sum(
        sde.comparison_test(lo_b, hi_b, sim.sample_noise_pair(LO, SHEET, g, 0, 1000 + k), 0.0).violations
        for k in range(100)
    )
    b = gir.builtin_drift("cos", 1.0)
    out["uniqueness"] = sum(
        not sde.uniqueness_surrogate(b, sim.sample_noise_pair(LO, SHEET, g, 0, 2000 + k), 0.0).passed for k in range(50)
    )
    law = sde.law_samples_case_a(b, LO, Grid2D(1.0, 65), 0.0, sim.McConfig(paths=10_000, master_seed=1))
    out["ks"] = sde.weighted_ks_2samp(law.picard, law.reweighted, law.weights)
    return out


def test_criterion_8_solver(solver_results, acceptance_report):
    r = solver_results
    rest_ok = r["discrete"] <= 1e-8 and r["comparison"] == 0 and r["uniqueness"] == 0 and r["ks"].passed(0.01)
    acceptance_report[8] = (
        rest_ok and r["continuous"] <= 1e-8,
        f"linear series error {r['continuous']:.2e} (scheme vs its own discrete series {r['discrete']:.1e}); "
        f"comparison {r['comparison']} violations / 100 seeds; uniqueness {r['uniqueness']} failures / 50 seeds; "
        f"KS p = {r['ks'].pvalue:.3f}",
    )
    assert rest_ok


@pytest.mark.xfail(strict=True, reason="the cell scheme is first order, so the continuum series is off by O(h)")
def test_criterion_8_linear_continuum_series(solver_results):
    assert solver_results["continuous"] <= 1e-8


def test_criterion_9_krylov(acceptance_report):
    g = Grid2D(1.0, 33)
    radii = [2.0**-k for k in range(6)]
    res = sde.krylov_estimate(
        gir.builtin_drift("zero"), HurstPair(0.3, 0.3), HurstPair(0.4, 0.4), g, 0.0, radii, 2.0,
        sim.McConfig(paths=20_000, master_seed=2), with_oracle=True,
    )
    worst_z = max(abs(r.oracle_z) for r in res)
    ratios = np.array([r.ratio for r in res])
    trend = bnd.bounded_trend("Krylov ratio", ratios)
    passed = worst_z <= 3 and trend.passed
    acceptance_report[9] = (
        passed,
        f"worst |z| vs oracle {worst_z:.2f}; lhs/rhs {ratios.max():.3f} -> {ratios[-1]:.3f}, bounded {trend.passed}",
    )
    assert passed


SMALL = {
    "simulate": "grid = 9\npaths = 300\ncsv_paths = 3\n",
    "girsanov-check": "grid = 9\npaths = 300\n",
    "bounds": "bounds_N = 20\nneumann_grid = 17\ntrials = 200\n",
    "solve": "grid = 9\ncomparison_seeds = 2\nuniqueness_seeds = 2\nks_paths = 200\nkrylov_paths = 400\nkrylov_k = 1\n",
}


def test_criterion_10_reproducibility(tmp_path, acceptance_report):
    mismatches = []
    for command, text in SMALL.items():
        cfg = tmp_path / f"{command}.cfg"
        cfg.write_text(text)
        runs = []
        for k, workers in enumerate(("1", "1", "3")):
            out = tmp_path / f"{command}-{k}"
            code = main([command, "--config", str(cfg), "--out", str(out), "--seed", "5", "--workers", workers, "--quiet"])
            runs.append((code, {p.name: p.read_bytes() for p in sorted(out.iterdir())}))
        if not runs[0] == runs[1] == runs[2]:
            mismatches.append(command)
    passed = not mismatches
    acceptance_report[10] = (passed, f"4 commands x 3 runs (workers 1, 1, 3): mismatches {mismatches or 'none'}")
    assert passed
