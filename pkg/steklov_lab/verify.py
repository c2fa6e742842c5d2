"""Named verification suites, exponent fitting and machine-readable reports."""

from __future__ import annotations

import csv
import json
import logging
import platform
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import curve_fit
from scipy.stats import linregress

from .config import Config
from .errors import DataError, SteklovError
from .geometry import TWO_PI, build_interior_grid, build_quadrature, curve_from_spec
from .kernels import symbol_q, symbol_q_numeric
from .layer import BoundaryOperators, assemble_boundary_ops, jump_test
from .nodal import (
    OracleField,
    admissible_level_bound,
    boundary_ibp_residual,
    boundary_zeros,
    field_on_grid,
    interior_energy,
    interior_flux_check,
    interior_ibp_residual,
    level_set_extract,
    sigma_exponent,
)
from .oracle_disk import (
    oracle_eigenvalue,
    oracle_eval,
    oracle_layer_multiplier,
    oracle_operator_multiplier,
    oracle_spectrum,
)
from .steklov import (
    ProblemKind,
    Solution,
    boundary_energy,
    cauchy_data,
    cauchy_data_from_trace,
    l1_l2_ratio,
    mixed_reciprocity,
    norm_equivalence,
    reciprocity_residual,
    solve_problem,
)

logger = logging.getLogger(__name__)

SUITE_NAMES = ("symbols", "layers", "disk", "identities", "scaling")
BUILTIN_DOMAINS = ("disk", "ellipse:2,1", "kite", "star:0.05,4")
SYMBOL_XN = (0.0, 0.1, 1.0)
SYMBOL_XI = (0.5, 1.0, 2.0, 4.0)
SCALING_N = 512
SCALING_K = (8, 32)
ENERGY_GRID = 151
JUMP_POINTS = 8
RECIPROCITY_PAIRS = 10
DISK_MODES_K = 10
IDENTITY_K = range(1, 9)
BOUNDARY_IBP_K = range(1, 17)
NODAL_K = range(4, 17)

PROBLEMS = (ProblemKind.THETA, ProblemKind.XI, ProblemKind.PI)


# --- fitting ------------------------------------------------------------------


@dataclass(frozen=True)
class PowerFit:
    slope: float
    intercept: float
    r2: float
    shift: float = 0.0


def _check_fit_data(xs: ArrayLike, ys: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 4:
        raise DataError(f"need at least 4 matching (x, y) pairs (got {xs.size} and {ys.size})")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DataError("power-law fits need strictly positive data")
    return xs, ys


def fit_scaling_exponent(xs: ArrayLike, ys: ArrayLike) -> PowerFit:
    """Ordinary least squares of log y on log x."""
    xs, ys = _check_fit_data(xs, ys)
    res = linregress(np.log(xs), np.log(ys))
    return PowerFit(slope=float(res.slope), intercept=float(res.intercept), r2=float(res.rvalue**2))


def fit_shifted_power_law(xs: ArrayLike, ys: ArrayLike) -> PowerFit:
    """Fit y = A (x + c)^s; s is the exponent with the O(1/x) offset removed."""
    xs, ys = _check_fit_data(xs, ys)
    plain = fit_scaling_exponent(xs, ys)
    log_y = np.log(ys)

    def model(x, log_a, s, c):
        return log_a + s * np.log(x + c)

    lower = [-np.inf, -np.inf, -0.9 * xs.min()]
    upper = [np.inf, np.inf, 10.0 * xs.max()]
    (log_a, s, c), _ = curve_fit(
        model, xs, log_y, p0=[plain.intercept, plain.slope, 0.0], bounds=(lower, upper)
    )
    resid = log_y - model(xs, log_a, s, c)
    total = np.sum((log_y - log_y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2) / total) if total > 0 else 1.0
    return PowerFit(slope=float(s), intercept=float(log_a), r2=r2, shift=float(c))


# --- reports --------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    id: str
    description: str
    measured: float
    expected: float
    tolerance: float
    passed: bool
    comparison: str = "abs"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "measured": _finite(self.measured),
            "expected": self.expected,
            "tolerance": self.tolerance,
            "comparison": self.comparison,
            "pass": self.passed,
        }


def _compare(measured: float, expected: float, tolerance: float, comparison: str) -> bool:
    if not np.isfinite(measured):
        return False
    if comparison == "abs":
        return abs(measured - expected) <= tolerance
    if comparison == "rel":
        return abs(measured - expected) <= tolerance * abs(expected)
    if comparison == "min":
        return measured >= expected - tolerance
    if comparison == "max":
        return measured <= expected + tolerance
    raise ValueError(f"unknown comparison {comparison!r}")


@dataclass
class SuiteReport:
    suite: str
    environment: Dict[str, object]
    checks: List[Check] = field(default_factory=list)
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(
        self,
        id: str,
        description: str,
        measured: float,
        expected: float,
        tolerance: float,
        comparison: str = "abs",
    ) -> Check:
        measured = float(measured)
        check = Check(
            id=id,
            description=description,
            measured=measured,
            expected=float(expected),
            tolerance=float(tolerance),
            passed=_compare(measured, float(expected), float(tolerance), comparison),
            comparison=comparison,
        )
        if not check.passed:
            logger.warning("check %s failed: measured %.6g expected %.6g", id, measured, expected)
        self.checks.append(check)
        return check

    def failed(self, id: str, description: str, error: Exception) -> None:
        logger.error("check %s raised %s: %s", id, type(error).__name__, error)
        self.checks.append(
            Check(id, f"{description} [{type(error).__name__}: {error}]", float("nan"), 0.0, 0.0, False)
        )

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "environment": self.environment,
            "checks": [c.to_dict() for c in self.checks],
            "metadata": self.metadata,
        }

    def write_json(self, path: Union[str, Path], deterministic: bool = False) -> Path:
        payload = self.to_dict()
        if deterministic:
            payload = strip_metadata(payload)
        path = Path(path)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            write_check_rows(csv.writer(fh), self.suite, [c.to_dict() for c in self.checks], header=True)
        return path


def _finite(value: float) -> Optional[float]:
    return value if np.isfinite(value) else None


def _fmt(value: Optional[float], spec: str) -> str:
    return "" if value is None else format(value, spec)


CSV_COLUMNS = ("suite", "id", "description", "measured", "expected", "tolerance", "comparison", "pass")


def write_check_rows(writer, suite: str, checks: List[dict], header: bool = False) -> None:
    if header:
        writer.writerow(CSV_COLUMNS)
    for c in checks:
        writer.writerow(
            [
                suite,
                c["id"],
                c["description"],
                _fmt(c["measured"], ".17g"),
                _fmt(c["expected"], ".17g"),
                _fmt(c["tolerance"], ".3g"),
                c.get("comparison", "abs"),
                "pass" if c["pass"] else "FAIL",
            ]
        )


def strip_metadata(report: dict) -> dict:
    """Copy of a report dict without its non-reproducible metadata block."""
    return {k: v for k, v in report.items() if k != "metadata"}


def run_metadata(started: float) -> dict:
    """Timestamp, wall clock since ``started`` (perf_counter) and library versions."""
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_clock_s": time.perf_counter() - started,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


# --- shared state ------------------------------------------------------------------


class SuiteContext:
    """Caches boundary operators and solutions across the checks of one run."""

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self._ops: Dict[Tuple[str, int], BoundaryOperators] = {}
        self._solutions: Dict[Tuple[str, int, ProblemKind, int], Solution] = {}

    def ops(self, domain: str, n: int) -> BoundaryOperators:
        key = (domain, n)
        if key not in self._ops:
            curve = curve_from_spec(domain)
            self._ops[key] = assemble_boundary_ops(curve, build_quadrature(curve, n))
        return self._ops[key]

    def solution(self, domain: str, n: int, kind: ProblemKind, count: int) -> Solution:
        key = (domain, n, kind, count)
        if key not in self._solutions:
            self._solutions[key] = solve_problem(kind, self.ops(domain, n), count)
        return self._solutions[key]

    def delta(self, domain: str) -> float:
        return self.cfg.collar_width(curve_from_spec(domain))

    @property
    def field_options(self) -> Dict[str, int]:
        return {"upsample": self.cfg.field_upsample, "threads": self.cfg.threads}


def _guard(report: SuiteReport, id: str, description: str, fn: Callable[[], None]) -> None:
    try:
        fn()
    except (SteklovError, RuntimeError, np.linalg.LinAlgError) as e:
        report.failed(id, description, e)


def _trig(n: int, k: int, parity: str = "cos") -> np.ndarray:
    t = TWO_PI * np.arange(n) / n
    return np.cos(k * t) if parity == "cos" else np.sin(k * t)


# --- suites --------------------------------------------------------------------------


def _symbols_suite(ctx: SuiteContext, report: SuiteReport) -> None:
    for j in (1, 2, 3):
        for x_n in SYMBOL_XN:
            for xi in SYMBOL_XI:
                cid = f"symbols.q{j}.x{x_n:g}.xi{xi:g}"
                desc = f"numeric q{j}({x_n:g}, {xi:g}) against the closed form"

                def run(j=j, x_n=x_n, xi=xi, cid=cid, desc=desc):
                    numeric = symbol_q_numeric(j, x_n, xi)
                    report.add(cid, desc, numeric.value, symbol_q(j, x_n, xi), 1e-7)

                _guard(report, cid, desc, run)


def _layers_suite(ctx: SuiteContext, report: SuiteReport) -> None:
    n = ctx.cfg.n
    disk = ctx.ops("disk", n)
    for name, op in disk.as_dict().items():
        for k in range(17):
            report.add(
                f"layers.multiplier.{name}.k{k}",
                f"disk {name} multiplier on cos {k}t",
                op.multiplier(k),
                oracle_layer_multiplier(name, k),
                1e-7,
            )
    for domain in BUILTIN_DOMAINS:
        ops = ctx.ops(domain, n)
        tol = 1e-8 if domain == "disk" else 1e-6
        # the double-layer N is symmetric only on the circle
        names = ("S1", "S3", "N", "Lambda") if domain == "disk" else ("S1", "S3", "Lambda")
        for name in names:
            report.add(
                f"layers.asymmetry.{domain}.{name}",
                f"weighted asymmetry of {name} on {domain}",
                getattr(ops, name).asymmetry,
                0.0,
                tol,
                "max",
            )
        for i, t in enumerate(np.linspace(0.0, TWO_PI, JUMP_POINTS, endpoint=False)):
            cid = f"layers.jump.{domain}.t{i}"
            desc = f"jump relations of L1-L4 at t={t:.4f} on {domain}"

            def run(ops=ops, t=t, cid=cid, desc=desc):
                density = _trig(n, 2) + 0.5
                res = jump_test(ops.curve, ops.grid, density, t, ops=ops).residuals
                for key in ("L4_interior", "L4_exterior", "L4_jump"):
                    report.add(f"{cid}.{key}", f"{desc}: {key}", res[key], 0.0, 1e-5, "max")
                for key in ("L1", "L2", "L3"):
                    report.add(
                        f"{cid}.{key}_continuity",
                        f"{desc}: {key} continuity",
                        res[f"{key}_continuity"],
                        0.0,
                        1e-6,
                        "max",
                    )

            _guard(report, cid, desc, run)
    s3 = disk.S3
    for k in (8, 16):
        report.add(
            f"layers.decay.S3.k{k}",
            f"S3 multiplier times 4k^3 at k={k}",
            4.0 * k**3 * s3.multiplier(k),
            k * k / (k * k - 1.0),
            1e-6,
        )
        report.add(
            f"layers.decay.S1.k{k}",
            f"S1 multiplier times -2k at k={k}",
            -2.0 * k * disk.S1.multiplier(k),
            1.0,
            1e-7,
        )


def _disk_suite(ctx: SuiteContext, report: SuiteReport) -> None:
    n = ctx.cfg.n
    count = 2 * DISK_MODES_K + 1
    ops = ctx.ops("disk", n)
    for kind in PROBLEMS:
        sol = ctx.solution("disk", n, kind, count)
        mus = sol.spectrum.eigenvalues
        for j, (mu, k, parity) in enumerate(oracle_spectrum(kind, count)):
            cid = f"disk.{kind.value}.mode{j}"
            desc = f"disk {kind.operator_name} eigenvalue {j} (k={k}, {parity})"
            if mu == 0.0:
                report.add(cid, desc, mus[j], 0.0, 1e-8)
            else:
                report.add(cid, desc, mus[j], mu, 1e-6, "rel")
        violations = 0
        for k in range(1, DISK_MODES_K + 1):
            a, b = mus[2 * k - 1], mus[2 * k]
            if abs(a - b) > 1e-6 * abs(b):
                violations += 1
            if k < DISK_MODES_K and not mus[2 * k + 1] > b * (1 + 1e-3):
                violations += 1
        if mus[0] >= mus[1] * (1 - 1e-3) and mus[1] > 0:
            violations += 1
        report.add(
            f"disk.{kind.value}.multiplicity",
            f"{kind.operator_name}: k=0 simple, k>=1 double",
            violations,
            0,
            0,
        )
        report.add(
            f"disk.{kind.value}.asymmetry",
            f"{kind.operator_name} asymmetry before symmetrisation",
            sol.operator.raw_asymmetry,
            0.0,
            1e-6,
            "max",
        )

    for k in range(33):
        s1 = oracle_layer_multiplier("S1", k)
        system = oracle_layer_multiplier("S2", k) - oracle_layer_multiplier("S3", k) * k
        report.add(
            f"disk.oracle.xi_equation.k{k}",
            "S1 = (S2 - S3 Lambda) Xi on circle multipliers",
            system * oracle_operator_multiplier("Xi", k),
            s1,
            1e-14,
        )
        report.add(
            f"disk.oracle.theta_equation.k{k}",
            "(1/2 - N) = (S2 - S3 Lambda) theta on circle multipliers",
            system * oracle_operator_multiplier("theta", k),
            0.5 - oracle_layer_multiplier("N", k),
            1e-12,
        )

    theta = ctx.solution("disk", n, ProblemKind.THETA, count).theta
    delta = ctx.delta("disk")
    grid = build_interior_grid(ops.curve, ctx.cfg.grid, delta)
    points = grid.active_points()
    for kind in PROBLEMS:
        for k in IDENTITY_K:
            cid = f"disk.field.{kind.value}.k{k}"
            desc = f"BEM {kind.value} field k={k} against the disk oracle (sup error off the collar)"

            def run(kind=kind, k=k, cid=cid, desc=desc):
                lam, _ = oracle_eigenvalue(kind, k)
                cd = cauchy_data_from_trace(kind, _trig(n, k), lam, ops, theta)
                e_bem = field_on_grid(cd, lam, grid, "e", **ctx.field_options).values[grid.active]
                lap_bem = field_on_grid(cd, lam, grid, "lap", **ctx.field_options).values[grid.active]
                e, _, lap, _ = oracle_eval(kind, k, "cos", points)
                for label, bem, exact in (("e", e_bem, e), ("lap", lap_bem, lap)):
                    err = np.max(np.abs(bem - exact))
                    report.add(f"{cid}.{label}", f"{desc}: {label}", err, 0.0, 1e-6, "max")

            _guard(report, cid, desc, run)


def _identities_suite(ctx: SuiteContext, report: SuiteReport) -> None:
    cfg = ctx.cfg
    n = cfg.n
    domain = cfg.domain
    modes = min(16, n // 8)
    count = min(10, modes)
    paired = min(RECIPROCITY_PAIRS + 1, modes)
    ops = ctx.ops(domain, n)
    for kind in PROBLEMS:
        sol = ctx.solution(domain, n, kind, modes)
        cds = [cauchy_data(kind, sol.spectrum.pairs[i], ops, sol.theta) for i in range(paired)]
        for i, cd in enumerate(cds[:count]):
            report.add(
                f"identities.energy.{kind.value}.mode{i}",
                f"boundary energy of {kind.operator_name} mode {i} is non-negative",
                boundary_energy(cd),
                0.0,
                1e-8,
                "min",
            )
        for i in range(paired - 1):
            report.add(
                f"identities.reciprocity.{kind.value}.modes{i}_{i + 1}",
                f"reciprocity between {kind.operator_name} modes {i} and {i + 1}",
                reciprocity_residual(cds[i], cds[i + 1]),
                0.0,
                1e-6,
                "max",
            )
        pair = sol.spectrum.pairs[3]
        report.add(
            f"identities.norm_equivalence.{kind.value}",
            f"L2 norm ratio of Delta e to its boundary datum, {kind.operator_name} mode 3",
            norm_equivalence(kind, cds[3], pair.lam, 2.0),
            0.0,
            0.0,
            "min",
        )
        report.add(
            f"identities.l1_l2.{kind.value}",
            f"||phi||_1/||phi||_2 against c lambda^0, {kind.operator_name} mode 3",
            l1_l2_ratio(ops.grid, pair.phi),
            cfg.admissibility_c,
            0.0,
            "min",
        )

        egrid = build_interior_grid(ops.curve, min(cfg.grid, ENERGY_GRID), ctx.delta(domain))
        for i in range(1, count):
            cid = f"identities.interior_energy.{kind.value}.mode{i}"
            desc = f"interior energy of {kind.operator_name} mode {i} against the boundary energy"

            def run(i=i, cid=cid, desc=desc, cd=cds[i], lam=sol.spectrum.pairs[i].lam):
                lap = field_on_grid(cd, lam, egrid, "lap", **ctx.field_options)
                report.add(cid, desc, interior_energy(lap).total, boundary_energy(cd), 0.02, "rel")

            _guard(report, cid, desc, run)

    theta_sol = ctx.solution(domain, n, ProblemKind.THETA, modes)
    xi_sol = ctx.solution(domain, n, ProblemKind.XI, modes)
    for i in (1, 2):
        a = cauchy_data(ProblemKind.THETA, theta_sol.spectrum.pairs[i], ops, theta_sol.theta)
        b = cauchy_data(ProblemKind.XI, xi_sol.spectrum.pairs[i], ops)
        report.add(
            f"identities.mixed_reciprocity.mode{i}",
            f"reciprocity between Theta mode {i} and Xi mode {i}",
            mixed_reciprocity(a, b),
            0.0,
            1e-6,
            "max",
        )

    kite = ctx.ops("kite", n)
    xi_kite = ctx.solution("kite", n, ProblemKind.XI, modes)
    pi_kite = ctx.solution("kite", n, ProblemKind.PI, modes)
    f = _trig(n, 3) + _trig(n, 1, "sin")
    diff = xi_kite.operator.apply(f) - pi_kite.operator.apply(f) - kite.grid.curvature * f
    report.add(
        "identities.xi_pi_h.kite",
        "Xi f - Pi f - H f on the kite, relative to |Xi f|",
        np.max(np.abs(diff)) / np.max(np.abs(xi_kite.operator.apply(f))),
        0.0,
        1e-10,
        "max",
    )
    report.add(
        "identities.asymmetry.kite.Xi",
        "Xi asymmetry before symmetrisation on the kite",
        xi_kite.operator.raw_asymmetry,
        0.0,
        1e-6,
        "max",
    )

    disk = ctx.ops("disk", n)
    theta = ctx.solution("disk", n, ProblemKind.THETA, modes).theta
    grid = build_interior_grid(disk.curve, cfg.grid, ctx.delta("disk"))
    for kind in PROBLEMS:
        for k in IDENTITY_K:
            cid = f"identities.interior_ibp.{kind.value}.k{k}"
            desc = f"2 int |grad Delta e| over the nodal set of Delta e, disk {kind.value} k={k}"

            def run(kind=kind, k=k, cid=cid, desc=desc):
                lam, _ = oracle_eigenvalue(kind, k)
                cd = cauchy_data_from_trace(kind, _trig(n, k), lam, disk, theta)
                rep = interior_ibp_residual(kind, cd, lam, grid, **ctx.field_options)
                report.add(cid, desc, rep.residual, 0.0, 0.05, "max")
                if kind is ProblemKind.XI and k == 2:
                    report.add(
                        "identities.interior_ibp.fixture_B",
                        "boundary side B for disk XI k=2",
                        rep.boundary_side,
                        48.0,
                        1e-6,
                        "rel",
                    )

            _guard(report, cid, desc, run)

    for k in IDENTITY_K:
        cid = f"identities.flux.theta.k{k}"
        desc = f"nodal flux ratio F / ((lambda^3/2) ||e||_1), disk theta k={k}"

        def run(k=k, cid=cid, desc=desc):
            lam, mu = oracle_eigenvalue(ProblemKind.THETA, k)
            cd = cauchy_data_from_trace(ProblemKind.THETA, _trig(n, k), lam, disk, theta)
            rep = interior_flux_check(ProblemKind.THETA, cd, lam, grid, **ctx.field_options)
            report.add(cid, desc, rep.ratio, 0.9, 0.0, "min")
            report.add(f"{cid}.residual", f"{desc}: boundary side = 2F", rep.residual, 0.0, 0.05, "max")
            if k == 2:
                report.add("identities.flux.fixture_F", "F for disk theta k=2", rep.interior_side, 48.0, 0.05, "rel")

        _guard(report, cid, desc, run)

    xi_ratios = []

    def run_xi_flux():
        for k in range(1, 11):
            lam, _ = oracle_eigenvalue(ProblemKind.XI, k)
            cd = cauchy_data_from_trace(ProblemKind.XI, _trig(n, k), lam, disk)
            xi_ratios.append(interior_flux_check(ProblemKind.XI, cd, lam, grid, **ctx.field_options).ratio)
        report.add(
            "identities.flux.xi.min_ratio",
            "min over k=1..10 of F / (lambda^2 ||d_nu e||_1), disk xi",
            min(xi_ratios),
            0.1,
            0.0,
            "min",
        )

    _guard(report, "identities.flux.xi.min_ratio", "disk xi flux ratios", run_xi_flux)

    for k in BOUNDARY_IBP_K:
        rep = boundary_ibp_residual(disk.grid, _trig(n, k))
        report.add(
            f"identities.boundary_ibp.k{k}",
            f"boundary identity for cos {k}t, both sides 4k^2",
            rep.residual,
            0.0,
            1e-8,
            "max",
        )
        report.add(
            f"identities.boundary_ibp.value.k{k}",
            f"-int sign(phi) Delta_T phi for cos {k}t",
            rep.boundary_side,
            4.0 * k * k,
            1e-8,
            "rel",
        )

    phi = _trig(n, 3)
    lam_xi, _ = oracle_eigenvalue(ProblemKind.XI, 3)
    alpha = 0.5 * admissible_level_bound(phi, disk.grid, lam_xi, cfg.admissibility_c)
    rep = boundary_ibp_residual(disk.grid, phi, alpha, lam=lam_xi, c=cfg.admissibility_c)
    report.add(
        "identities.boundary_ibp.level",
        f"boundary identity at admissible level alpha={alpha:.4f}, cos 3t",
        rep.residual,
        0.0,
        1e-8,
        "max",
    )

    def run_level():
        cd = cauchy_data_from_trace(ProblemKind.XI, phi, lam_xi, disk)
        level = 0.5 * admissible_level_bound(cd.lap_u, disk.grid, lam_xi, cfg.admissibility_c)
        rep = interior_ibp_residual(
            ProblemKind.XI, cd, lam_xi, grid, level, c=cfg.admissibility_c, **ctx.field_options
        )
        report.add(
            "identities.interior_ibp.level",
            f"interior identity on the level set Delta e = {level:.4f}, disk xi k=3",
            rep.residual,
            0.0,
            0.05,
            "max",
        )

    _guard(report, "identities.interior_ibp.level", "level-set interior identity", run_level)


def _scaling_suite(ctx: SuiteContext, report: SuiteReport) -> None:
    n = SCALING_N
    count = n // 8
    lo, hi = SCALING_K
    idx = np.arange(2 * lo - 1, 2 * hi)
    ks = np.ceil(idx / 2.0)
    for domain in ("ellipse:2,1", "kite"):
        for kind, expected in ((ProblemKind.THETA, 3.0), (ProblemKind.XI, 1.0), (ProblemKind.PI, 1.0)):
            cid = f"scaling.{domain}.{kind.value}"
            desc = f"{kind.operator_name} eigenvalue growth exponent on {domain}, k in [{lo}, {hi}]"

            def run(domain=domain, kind=kind, expected=expected, cid=cid, desc=desc):
                mus = ctx.solution(domain, n, kind, count).spectrum.eigenvalues[idx]
                plain = fit_scaling_exponent(ks, mus)
                shifted = fit_shifted_power_law(ks, mus)
                report.add(f"{cid}.ols", f"{desc} (plain OLS, carries an O(1/k) offset bias)", plain.slope, expected, 0.25)
                report.add(cid, f"{desc} (offset-corrected)", shifted.slope, expected, 0.05)

            _guard(report, cid, desc, run)

    def run_disk_ratio():
        mus = ctx.solution("disk", n, ProblemKind.THETA, count).spectrum.eigenvalues
        for k in range(1, 21):
            report.add(
                f"scaling.disk.theta_ratio.k{k}",
                f"mu_k(Theta)/(2k^3) against 1 + 1/k, k={k}",
                mus[2 * k] / (2.0 * k**3),
                1.0 + 1.0 / k,
                1e-4,
            )

    _guard(report, "scaling.disk.theta_ratio", "disk Theta ratio", run_disk_ratio)

    def run_disk_xi():
        mus = ctx.solution("disk", n, ProblemKind.XI, count).spectrum.eigenvalues
        k = np.arange(4, 33)
        fit = fit_shifted_power_law(k, mus[2 * k - 1])
        report.add("scaling.disk.xi_slope", "Xi eigenvalue exponent on the disk, k in [4, 32]", fit.slope, 1.0, 0.02)

    _guard(report, "scaling.disk.xi_slope", "disk Xi slope", run_disk_xi)

    def run_zero_counts(domain: str):
        sol = ctx.solution(domain, n, ProblemKind.XI, count)
        counts, lams = [], []
        for k in NODAL_K:
            pair = sol.spectrum.pairs[2 * k]
            counts.append(boundary_zeros(pair.phi).count)
            lams.append(pair.lam)
        fit = fit_shifted_power_law(lams, counts)
        report.add(
            f"scaling.{domain}.boundary_zero_exponent",
            f"boundary zero count against lambda on {domain}, xi k=4..16",
            fit.slope,
            1.0,
            0.05,
        )
        report.add(
            f"scaling.{domain}.boundary_zero_ratio",
            f"min count/lambda on {domain}",
            min(c / l for c, l in zip(counts, lams)),
            ctx.cfg.admissibility_c,
            0.0,
            "min",
        )

    for domain in ("disk", "kite"):
        _guard(report, f"scaling.{domain}.boundary_zero_exponent", "zero counts", lambda d=domain: run_zero_counts(d))

    def run_nodal_lengths():
        curve = curve_from_spec("disk")
        delta = ctx.delta("disk")
        grid = build_interior_grid(curve, ctx.cfg.grid, delta)
        lengths, lap_lengths, lams = [], [], []
        for k in NODAL_K:
            lam, _ = oracle_eigenvalue(ProblemKind.XI, k)
            source = OracleField(ProblemKind.XI, k)
            e = field_on_grid(source, lam, grid, "e")
            geo = level_set_extract(e, 0.0)
            report.add(
                f"scaling.disk.nodal_length.k{k}",
                f"interior nodal length of disk xi k={k} against 2k(1-delta)",
                geo.raw_length,
                2 * k * (1 - delta),
                0.05,
                "rel",
            )
            lap = field_on_grid(source, lam, grid, "lap")
            lengths.append(geo.raw_length)
            lap_lengths.append(level_set_extract(lap, 0.0).raw_length)
            lams.append(lam)
        report.add(
            "scaling.disk.nodal_length.min",
            "interior nodal length stays above c",
            min(lengths),
            ctx.cfg.admissibility_c,
            0.0,
            "min",
        )
        report.add(
            "scaling.disk.laplacian_nodal_exponent",
            "exponent of the Delta e nodal length against lambda",
            fit_scaling_exponent(lams, lap_lengths).slope,
            0.0,
            0.05,
            "min",
        )

    _guard(report, "scaling.disk.nodal_length", "disk nodal lengths", run_nodal_lengths)

    report.add("scaling.sigma.2_2", "sigma(2, 2)", sigma_exponent(2, 2), 0.0, 1e-15)
    report.add("scaling.sigma.2_inf", "sigma(2, inf)", sigma_exponent(2, np.inf), 0.0, 1e-15)
    report.add("scaling.sigma.3_inf", "sigma(3, inf)", sigma_exponent(3, np.inf), 0.5, 1e-15)
    report.add("scaling.sigma.4_4", "sigma(4, 4)", sigma_exponent(4, 4), 0.25, 1e-15)
    for dim in range(3, 9):
        p = 2.0 * dim / (dim - 2)
        first = (dim - 1) * (0.5 - 1.0 / p) - 0.5
        report.add(
            f"scaling.sigma.continuity.n{dim}",
            f"sigma branches agree at p = 2n/(n-2), n={dim}",
            sigma_exponent(dim, p),
            first,
            1e-14,
        )


SUITES: Dict[str, Callable[[SuiteContext, SuiteReport], None]] = {
    "symbols": _symbols_suite,
    "layers": _layers_suite,
    "disk": _disk_suite,
    "identities": _identities_suite,
    "scaling": _scaling_suite,
}


def run_suite(name: str, cfg: Optional[Config] = None, ctx: Optional[SuiteContext] = None) -> SuiteReport:
    """Run one named suite, or all of them, and return its report.

    Args:
        name: symbols, layers, disk, identities, scaling or all.
        cfg: Validated configuration; defaults to Config().
        ctx: Shared operator cache, created when omitted.
    """
    if name != "all" and name not in SUITES:
        raise DataError(f"unknown suite '{name}'; choose from {', '.join(SUITE_NAMES + ('all',))}")
    cfg = (cfg or Config()).validate()
    ctx = ctx or SuiteContext(cfg)
    curve = curve_from_spec(cfg.domain)
    report = SuiteReport(
        suite=name,
        environment={
            "domain": cfg.domain,
            "N": cfg.n,
            "grid": cfg.grid,
            "delta": cfg.collar_width(curve),
            "c": cfg.admissibility_c,
        },
    )
    start = time.perf_counter()
    for suite in SUITE_NAMES if name == "all" else (name,):
        logger.info("running suite %s", suite)
        _guard(report, suite, f"suite {suite} aborted", lambda s=suite: SUITES[s](ctx, report))
    report.metadata = run_metadata(start)
    logger.info("suite %s: %d checks, pass=%s", name, len(report.checks), report.passed)
    return report
