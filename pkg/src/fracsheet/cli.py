"""Command-line front end: ``fracsheet simulate | girsanov-check | bounds | solve``.

Configuration comes from a flat ``key=value`` file (``--config``) with flag
overrides. Every output is a deterministic function of the configuration and
the seed: JSON is written with sorted keys and CSV with 17 significant
digits, so reruns are byte-identical for any worker count.

Exit codes: 0 all checks pass, 1 a check failed, 2 invalid configuration,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from fracsheet import bounds as bnd
from fracsheet import girsanov as gir
from fracsheet import sde_solver as sde
from fracsheet import simulate as sim
from fracsheet.errors import FracSheetError, NonConvergenceError, TruncationError
from fracsheet.fraccalc import FracOrder, Grid2D
from fracsheet.kernels import HurstOrdering, HurstPair, covariance, sigma2_grid

log = logging.getLogger("fracsheet")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NONCONV = 0, 1, 2, 3

# probes for the covariance summary, as fractions of T: (z, z')
COV_PROBES = (
    ((1.0, 1.0), (1.0, 1.0)),
    ((0.5, 0.5), (1.0, 1.0)),
    ((0.25, 0.75), (0.75, 0.25)),
    ((0.5, 1.0), (1.0, 0.5)),
    ((0.25, 0.25), (0.5, 0.75)),
)
Z_LIMIT = 3.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    T: float = 1.0
    grid: int = 33
    lo: tuple = (0.2, 0.3)
    hi: tuple = (0.5, 0.5)
    drift: str = "cos"
    drift_c: float = 1.0
    x0: float = 0.0
    paths: int = 2000
    seed: int = 0
    workers: int = 1
    N: Optional[int] = None
    tol: float = 1e-6
    picard_tol: float = 1e-10
    out: str = "out"
    csv_paths: int = 8
    refine: bool = True
    # bounds
    exponents: tuple = (0.3, 0.3, 0.2, 0.2)
    bounds_N: int = 200
    neumann_grid: int = 129
    neumann_n: int = 3
    neumann_slack: float = 1.1
    trials: int = 10000
    order: tuple = (0.3, 0.4)
    # solve
    comparison_seeds: int = 100
    uniqueness_seeds: int = 50
    ks_paths: int = 10000
    ks_level: float = 0.01
    krylov_paths: int = 20000
    krylov_lo: tuple = (0.3, 0.3)
    krylov_hi: tuple = (0.4, 0.4)
    krylov_k: int = 5
    rho: float = 2.0

    def validate(self) -> "RunConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.T > 0 and math.isfinite(self.T), "T must be positive")
        need(self.grid >= 3 and self.grid % 2 == 1, "grid must be an odd integer >= 3")
        need(self.paths >= 0 and self.csv_paths >= 0, "paths must be >= 0")
        need(0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer")
        need(self.workers >= 1, "workers must be >= 1")
        need(self.N is None or self.N >= 1, "N must be >= 1")
        need(0 < self.tol < 1 and 0 < self.picard_tol < 1, "tolerances must lie in (0, 1)")
        need(self.drift in ("zero", "const", "arctan", "cos", "linear"), f"unknown drift {self.drift!r}")
        for name in ("lo", "hi", "krylov_lo", "krylov_hi"):
            pair = getattr(self, name)
            need(len(pair) == 2 and all(0 < v <= 0.5 for v in pair), f"{name} must be two values in (0, 1/2]")
        for lo, hi in ((self.lo, self.hi), (self.krylov_lo, self.krylov_hi)):
            need(
                all(a < b for a, b in zip(lo, hi)),
                f"Hurst pairs must satisfy the strict order lo < hi componentwise (≺), got lo={lo} hi={hi}",
            )
        need(len(self.exponents) == 4, "exponents needs a,b,a',b'")
        a, b, ap, bp = self.exponents
        need(all(0 < v < 0.5 for v in self.exponents), "exponents must lie in (0, 1/2)")
        need(a > ap and b > bp, "exponents need a > a' and b > b'")
        need(self.bounds_N >= 0, "bounds_N must be >= 0")
        need(self.neumann_grid >= 3 and 0 <= self.neumann_n <= 4, "neumann_n must lie in 0..4")
        need(self.neumann_slack >= 1.0, "neumann_slack must be >= 1")
        need(self.trials >= 0, "trials must be >= 0")
        need(len(self.order) == 2 and all(0 < v < 1 for v in self.order), "order must be two values in (0, 1)")
        need(self.comparison_seeds >= 0 and self.uniqueness_seeds >= 0, "seed counts must be >= 0")
        need(self.ks_paths >= 0 and self.krylov_paths >= 0, "path counts must be >= 0")
        need(0 < self.ks_level < 1, "ks_level must lie in (0, 1)")
        need(self.krylov_k >= 0, "krylov_k must be >= 0")
        need(self.rho > 1.0 + max(self.krylov_lo), "rho must exceed 1 + max(krylov_lo)")
        return self

    @property
    def grid2d(self) -> Grid2D:
        return Grid2D(self.T, self.grid)

    @property
    def lo_pair(self) -> HurstPair:
        return HurstPair(*self.lo)

    @property
    def hi_pair(self) -> HurstPair:
        return HurstPair(*self.hi)

    @property
    def mc(self) -> sim.McConfig:
        return sim.McConfig(self.paths, self.seed, self.workers)

    @property
    def drift_spec(self) -> gir.DriftSpec:
        return gir.builtin_drift(self.drift, self.drift_c)


_FIELD_TYPES = {f.name: f for f in fields(RunConfig)}


def _parse_value(key: str, raw: str):
    default = getattr(RunConfig, key)
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.split(","))
        if isinstance(default, int) or key == "N":
            if key == "N" and raw.lower() in ("", "none", "auto"):
                return None
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _parse_value(key, raw)
    return out


def load_config(path: Optional[str], overrides: dict) -> RunConfig:
    values = {}
    if path:
        try:
            values.update(parse_config_text(Path(path).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values).validate()


# output helpers


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def config_doc(cfg: RunConfig) -> dict:
    """The configuration echoed into outputs, without settings that cannot change results."""
    doc = asdict(cfg)
    for key in ("workers", "out"):
        doc.pop(key)
    return doc


def write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header: list[str], rows: np.ndarray, int_cols: int) -> None:
    """RFC-4180 CSV; the first ``int_cols`` columns are integers, the rest use %.17g."""
    fmt = ["%d"] * int_cols + ["%.17g"] * (len(header) - int_cols)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\r\n")
        if len(rows):
            np.savetxt(fh, rows, fmt=fmt, delimiter=",", newline="\r\n")


def check(name: str, passed: bool, margin: float, worst_case, **extra) -> dict:
    doc = {"name": name, "status": "pass" if passed else "fail", "margin": margin, "worst_case": worst_case}
    doc.update(extra)
    return doc


def _status(checks: list[dict]) -> str:
    return "pass" if all(c["status"] == "pass" for c in checks) else "fail"


def _node(grid: Grid2D, frac: tuple) -> tuple[int, int]:
    return tuple(int(round(f * (grid.n - 1))) for f in frac)


# subcommands


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    grid = cfg.grid2d
    lo, hi = cfg.lo_pair, cfg.hi_pair
    dW, B_lo, B_hi = sim.simulate_pairs(lo, hi, grid, cfg.mc)
    W = sim.sheet_values(dW) if len(dW) else np.zeros((0, grid.n, grid.n))
    keep = min(cfg.csv_paths, cfg.paths)
    s, t = grid.mesh()
    ii, jj = np.meshgrid(np.arange(grid.n), np.arange(grid.n), indexing="ij")
    blocks = []
    for p in range(keep):
        blocks.append(
            np.column_stack(
                [np.full(ii.size, p), ii.ravel(), jj.ravel(), s.ravel(), t.ravel(), W[p].ravel(), B_lo[p].ravel(), B_hi[p].ravel()]
            )
        )
    rows = np.concatenate(blocks) if blocks else np.zeros((0, 8))
    write_csv(out / "paths.csv", ["path_id", "i", "j", "s", "t", "W", "B_lo", "B_hi"], rows, 3)

    checks = []
    if cfg.paths >= 2:
        var = sigma2_grid(lo, hi, grid.x)
        for name, hp, field_ in (("B_lo", lo, B_lo), ("B_hi", hi, B_hi)):
            for z, zp in COV_PROBES:
                i, j = _node(grid, z)
                k, l = _node(grid, zp)
                emp, se = sim.covariance_and_se(field_[:, i, j], field_[:, k, l])
                exact = covariance(hp, (grid.x[i], grid.x[j]), (grid.x[k], grid.x[l]))
                zscore = (emp - exact) / se if se > 0 else 0.0
                checks.append(
                    check(
                        f"cov {name} {z} {zp}", abs(zscore) <= Z_LIMIT, Z_LIMIT - abs(zscore), [i, j, k, l],
                        empirical=emp, analytic=exact, se=se, z=zscore,
                    )
                )
        total = B_lo + B_hi
        for z, _ in COV_PROBES[:3]:
            i, j = _node(grid, z)
            emp, se = sim.mean_and_se(total[:, i, j] ** 2)
            zscore = (emp - var[i, j]) / se if se > 0 else 0.0
            checks.append(
                check(f"sigma2 {z}", abs(zscore) <= Z_LIMIT, Z_LIMIT - abs(zscore), [i, j], empirical=emp,
                      analytic=var[i, j], se=se, z=zscore)
            )
    summary = {
        "command": "simulate",
        "config": config_doc(cfg),
        "paths": cfg.paths,
        "csv_paths": keep,
        "checks": checks,
        "status": _status(checks) if checks else "skipped",
    }
    write_json(out / "summary.json", summary)
    return EXIT_OK if summary["status"] != "fail" else EXIT_CHECK


def _density_mc(cfg: RunConfig, b: gir.DriftSpec, grid: Grid2D, N: Optional[int]):
    lo, hi = cfg.lo_pair, cfg.hi_pair

    def task(r: range):
        dW = sim.increments_batch(grid, cfg.seed, r)
        psi = gir.psi_batch(b, lo, hi, dW, grid, cfg.x0, N, cfg.tol)
        total = sim.volterra_values(dW, lo, grid) + sim.volterra_values(dW, hi, grid)
        lt = np.exp(gir.log_density(psi, dW, grid.h))
        psup = np.max(np.abs(psi), axis=(-2, -1))
        tsup = np.max(np.abs(total), axis=(-2, -1))
        return np.stack([lt, psup, tsup])

    parts = sim.run_chunks(task, cfg.mc, 1024)
    return np.concatenate(parts, axis=1) if parts else np.zeros((3, 0))


def cmd_girsanov_check(cfg: RunConfig, out: Path) -> int:
    grid = cfg.grid2d
    lo, hi = cfg.lo_pair, cfg.hi_pair
    b = cfg.drift_spec
    checks = []
    gaps = []
    grids = [grid, Grid2D(cfg.T, 2 * cfg.grid - 1)] if cfg.refine else [grid]
    pair = None
    for g in grids:
        noise = sim.sample_noise_pair(lo, hi, g, cfg.seed, 0)
        p = gir.build_drift_pair(b, lo, hi, noise, cfg.x0, cfg.N, cfg.tol)
        gaps.append({"grid": g.n, "psi_gap": p.psi_gap})
        if pair is None:
            pair = p
            bvals = gir.drift_on_path(b, noise, cfg.x0)
            defect = float(np.max(np.abs(p.u.values + p.v.values - bvals)))
    checks.append(check("u + v = b", defect <= 1e-8, 1e-8 - defect, defect))
    gap0 = gaps[0]["psi_gap"]
    checks.append(check("psi gap <= 10%", gap0 <= 0.1, 0.1 - gap0, gap0))
    if len(gaps) > 1:
        checks.append(
            check("psi gap shrinks", gaps[1]["psi_gap"] < gap0 or gap0 == 0.0, gap0 - gaps[1]["psi_gap"], gaps)
        )
    mc = _density_mc(cfg, b, grid, pair.truncation_N)
    lt = mc[0]
    mean, se = sim.mean_and_se(lt)
    doc = {
        "command": "girsanov-check",
        "config": config_doc(cfg),
        "case": pair.case,
        "truncation_N": pair.truncation_N,
        "residual": pair.residual,
        "psi_gaps": gaps,
        "u_plus_v_defect": defect,
        "E_LT": {"mean": mean, "se": se, "paths": int(lt.size)},
    }
    if lt.size >= 2:
        if se > 0:
            zscore = (mean - 1.0) / se
            passed = abs(zscore) <= Z_LIMIT
        else:
            zscore = 0.0
            passed = abs(mean - 1.0) <= 1e-12
        doc["E_LT"]["z"] = zscore
        checks.append(check("E[L_T] = 1", passed, Z_LIMIT - abs(zscore), mean))
        ratios = mc[1] / (1.0 + mc[2])
        half = ratios.size // 2
        doc["novikov_fit"] = {
            "c_all": float(ratios.max()),
            "c_first_half": float(ratios[:half].max()) if half else 0.0,
            "c_second_half": float(ratios[half:].max()),
        }
    doc["checks"] = checks
    doc["status"] = _status(checks)
    write_json(out / "girsanov.json", doc)
    return EXIT_OK if doc["status"] == "pass" else EXIT_CHECK


def bounds_checks(cfg: RunConfig) -> dict:
    exp = bnd.ExponentPack(*cfg.exponents)
    N = cfg.bounds_N
    seq = bnd.run_recursions(exp, 1.0, N)
    checks = []
    doc = {
        "command": "bounds",
        "exponents": list(cfg.exponents),
        "N": N,
        "C": seq.C.tolist(),
        "Cstar": seq.Cstar.tolist(),
        "constants": asdict(seq.constants),
        "derived": {"gamma": exp.gamma, "p": exp.p, "gamma0": exp.gamma0, "eta": exp.eta},
    }
    if N == 0:
        doc["checks"] = checks
        doc["status"] = "pass"
        return doc
    ok, worst = bnd.wendel_kappa_check(seq)
    checks.append(check("wendel kappa bound", ok, 1.0 - worst, worst))
    if N >= 200:
        for tc in bnd.asymptotic_checks(exp, 1.0, 200):
            checks.append(check(f"trend {tc.name}", tc.passed, tc.margin, tc.last_max, first_max=tc.first_max))
        idx = bnd.tail_index(seq, cfg.T)
        checks.append(check("C* tail < 1e-6 by n <= 200", idx is not None and idx <= 200, 0 if idx is None else 200 - idx, idx))
    ngrid = Grid2D(cfg.T, cfg.neumann_grid)
    s, t = ngrid.mesh()
    for label, bvals in (("b=1", np.ones_like(s)), ("b=cos(3s+2t)", np.cos(3 * s + 2 * t))):
        for nc in bnd.verify_neumann_bounds_values(exp, ngrid, bvals, cfg.neumann_n, cfg.neumann_slack):
            checks.append(
                check(f"neumann {label} {nc.name}", nc.passed, cfg.neumann_slack - nc.worst_ratio, list(nc.worst_node),
                      worst_ratio=nc.worst_ratio, violations=nc.violations)
            )
    if cfg.trials > 0:
        rep = bnd.check_rl_difference_estimate(FracOrder(*cfg.order), cfg.trials, cfg.seed)
        for name, v, w in (
            ("A1", rep.violations_A1, rep.worst_A1),
            ("RF1", rep.violations_RF1, rep.worst_RF1),
            ("RF2", rep.violations_RF2, rep.worst_RF2),
            ("RF1 exact supremum", rep.violations_RF1_sharp, rep.worst_RF1_sharp),
            ("RF2 exact supremum", rep.violations_RF2_sharp, rep.worst_RF2_sharp),
        ):
            checks.append(check(f"difference estimate {name}", v == 0, 1.0 - w, w, violations=v, trials=rep.trials))
        doc["A1_empirical_constant"] = rep.empirical_constant_A1
    doc["checks"] = checks
    doc["status"] = _status(checks)
    return doc


def cmd_bounds(cfg: RunConfig, out: Path) -> int:
    doc = bounds_checks(cfg)
    write_json(out / "bounds.json", doc)
    return EXIT_OK if doc["status"] == "pass" else EXIT_CHECK


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    grid = cfg.grid2d
    lo, hi = cfg.lo_pair, cfg.hi_pair
    b = cfg.drift_spec
    checks = []
    noise = sim.sample_noise_pair(lo, hi, grid, cfg.seed, 0)
    res = sde.solve_picard(b, noise, cfg.x0, cfg.picard_tol)
    X = res.X.values
    s, t = grid.mesh()
    ii, jj = np.meshgrid(np.arange(grid.n), np.arange(grid.n), indexing="ij")
    rows = np.column_stack([ii.ravel(), jj.ravel(), s.ravel(), t.ravel(), X.ravel(), noise.B_lo.values.ravel(), noise.B_hi.values.ravel()])
    write_csv(out / "solution.csv", ["i", "j", "s", "t", "X", "B_lo", "B_hi"], rows, 2)

    axis = float(max(np.max(np.abs(X[0] - cfg.x0)), np.max(np.abs(X[:, 0] - cfg.x0))))
    checks.append(check("axis condition", axis == 0.0, -axis, axis))
    bound = sde.apriori_bound(b, noise, cfg.x0)
    xs = float(np.max(np.abs(X)))
    checks.append(check("a-priori bound", xs <= bound, bound - xs, xs, bound=bound))

    # linear drift, no noise: the discrete scheme against its exact series
    zero = sim.zero_noise(lo, hi, grid)
    lin = sde.solve_picard(gir.builtin_drift("linear", 1.0), zero, 1.0, cfg.picard_tol).X.values
    err_d = float(np.max(np.abs(lin - sde.linear_series_discrete(1.0, grid))))
    err_c = float(np.max(np.abs(lin - sde.linear_series_continuous(1.0, s, t))))
    checks.append(check("linear drift vs discrete series", err_d <= 1e-8, 1e-8 - err_d, err_d, continuous_series_error=err_c))

    violations = 0
    worst = -math.inf
    for seed in range(cfg.comparison_seeds):
        nz = sim.sample_noise_pair(lo, hi, grid, cfg.seed, 1000 + seed)
        rep = sde.comparison_test(gir.builtin_drift("arctan", -2.0), gir.builtin_drift("arctan", 2.0), nz, cfg.x0)
        violations += rep.violations
        worst = max(worst, rep.worst)
    if cfg.comparison_seeds:
        checks.append(check("comparison ordering", violations == 0, -worst, worst, violations=violations, seeds=cfg.comparison_seeds))

    gap = 0.0
    for seed in range(cfg.uniqueness_seeds):
        nz = sim.sample_noise_pair(lo, hi, grid, cfg.seed, 2000 + seed)
        gap = max(gap, sde.uniqueness_surrogate(b, nz, cfg.x0, cfg.picard_tol).max_gap)
    if cfg.uniqueness_seeds:
        checks.append(check("pathwise uniqueness", gap <= 2 * cfg.picard_tol, 2 * cfg.picard_tol - gap, gap, seeds=cfg.uniqueness_seeds))

    doc = {"command": "solve", "config": config_doc(cfg), "iterations": res.iterations, "residual": res.residual}
    if cfg.ks_paths and hi.is_sheet:
        ks_mc = sim.McConfig(cfg.ks_paths, cfg.seed + 1, cfg.workers)
        law = sde.law_samples_case_a(b, lo, grid, cfg.x0, ks_mc)
        ks = sde.weighted_ks_2samp(law.picard, law.reweighted, law.weights)
        checks.append(
            check("KS Picard vs reweighted", ks.passed(cfg.ks_level), ks.pvalue - cfg.ks_level, ks.statistic,
                  pvalue=ks.pvalue, n_effective=ks.n2_effective)
        )
    else:
        doc["ks"] = "skipped (needs hi = (0.5, 0.5) and ks_paths > 0)"

    if cfg.krylov_paths:
        klo, khi = HurstPair(*cfg.krylov_lo), HurstPair(*cfg.krylov_hi)
        radii = [2.0**-k for k in range(cfg.krylov_k + 1)]
        kmc = sim.McConfig(cfg.krylov_paths, cfg.seed + 2, cfg.workers)
        kres = sde.krylov_estimate(gir.builtin_drift("zero"), klo, khi, grid, cfg.x0, radii, cfg.rho, kmc, with_oracle=True)
        worst_z = max(abs(r.oracle_z) for r in kres)
        checks.append(check("Krylov MC vs Gaussian oracle", worst_z <= Z_LIMIT, Z_LIMIT - worst_z, worst_z))
        trend = bnd.bounded_trend("Krylov ratio", np.array([r.ratio for r in kres]))
        checks.append(check("Krylov ratio bounded", trend.passed, trend.margin, trend.last_max, first_max=trend.first_max))
        doc["krylov"] = [
            {"radius": r.radius, "lhs": r.lhs, "se": r.lhs_se, "rhs": r.rhs, "oracle": r.oracle, "ratio": r.ratio}
            for r in kres
        ]
    doc["checks"] = checks
    doc["status"] = _status(checks)
    write_json(out / "solve.json", doc)
    return EXIT_OK if doc["status"] == "pass" else EXIT_CHECK


COMMANDS = {
    "simulate": cmd_simulate,
    "girsanov-check": cmd_girsanov_check,
    "bounds": cmd_bounds,
    "solve": cmd_solve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracsheet", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--paths", type=int, help="Monte Carlo paths")
    parser.add_argument("--grid", type=int, help="grid points per axis (odd)")
    parser.add_argument("--workers", type=int, help="worker threads (capped by FRACSHEET_THREADS)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    overrides = {"seed": args.seed, "out": args.out, "paths": args.paths, "grid": args.grid, "workers": args.workers}
    try:
        cfg = load_config(args.config, overrides)
        HurstOrdering(cfg.lo_pair, cfg.hi_pair)
    except (ConfigError, FracSheetError, TypeError) as exc:
        print(f"fracsheet: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"fracsheet: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("fracsheet %s: grid %d, seed %d, output in %s", args.command, cfg.grid, cfg.seed, out)
    try:
        code = COMMANDS[args.command](cfg, out)
    except (NonConvergenceError, TruncationError) as exc:
        print(f"fracsheet: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except FracSheetError as exc:
        # domain errors that only surface once the computation sees the configuration
        print(f"fracsheet: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("fracsheet %s: %s", args.command, "pass" if code == EXIT_OK else "check failed")
    return code


if __name__ == "__main__":
    sys.exit(main())
