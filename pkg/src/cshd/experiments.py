"""Experiment drivers behind the CLI: single approximations, h sweeps,
small-h limit studies, and reproduction of the bundled reference
experiments with their expected values.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    BoundBreakdown,
    absolute_error,
    convergence_order,
    error_bound,
    relative_error,
)
from .calculus import (
    DiagHessianEstimate,
    EvaluatedStencil,
    GradientEstimate,
    centered_gradient,
    centered_hessian_diagonal,
    evaluate_stencil,
)
from .exceptions import ParameterError
from .registry import RegistryFunction
from .report import ExperimentReport, ReportRow, fmt_float, fmt_point
from .sets import SampleDirections, SetKind, build_set

__all__ = [
    "ApproxResult",
    "SweepResult",
    "LimitStudyResult",
    "ReproCheck",
    "ReproduceResult",
    "REPRO_TARGETS",
    "DEFAULT_LIMIT_GRID",
    "build_scaled_set",
    "parse_h_grid",
    "run_approx",
    "run_sweep",
    "run_limit_study",
    "run_reproduce",
]

_EPS = float(np.finfo(float).eps)

# Exponents 10^0.5 .. 10^-6 in steps of 1/16: wide enough to catch interior
# minima near h ~ 1.5 and deep enough to expose the round-off branch.
DEFAULT_LIMIT_GRID = 10.0 ** np.arange(0.5, -6.0 - 1e-12, -0.0625)

# Window over which the small-h limit of the relative error is estimated as
# a median: low enough that the h^2 truncation term is negligible, high
# enough that round-off has not taken over (double precision).
PLATEAU_WINDOW = (1e-4, 1e-2)

# The non-monotonicity flag: the grid minimum sits strictly inside the grid
# and the error at the smallest h exceeds the minimum by at least this factor.
NONMONOTONE_FACTOR = 1.1


def build_scaled_set(
    kind: SetKind, n: int, h: float, custom: SampleDirections | None = None
) -> SampleDirections:
    """A named set built at scale h, or the custom matrix scaled by h."""
    if kind is SetKind.CUSTOM:
        if custom is None:
            raise ParameterError("a custom direction matrix is required for kind=custom")
        return custom.scaled(h) if h != 1.0 else custom
    return build_set(kind, n, h)


def parse_h_grid(spec: str) -> np.ndarray:
    """Parse a geometric grid spec ``START:STOP:FACTOR`` into descending hs."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ParameterError(f"h-grid must look like START:STOP:FACTOR, got {spec!r}")
    try:
        start, stop, factor = (float(p) for p in parts)
    except ValueError as exc:
        raise ParameterError(f"h-grid values must be numeric, got {spec!r}") from exc
    if not (start > stop > 0):
        raise ParameterError(f"h-grid needs START > STOP > 0, got {spec!r}")
    if not (0 < factor < 1):
        raise ParameterError(f"h-grid FACTOR must lie in (0, 1), got {spec!r}")
    hs = [start]
    while hs[-1] * factor >= stop * (1.0 - 1e-12):
        hs.append(hs[-1] * factor)
        if len(hs) > 100_000:
            raise ParameterError(f"h-grid {spec!r} produces too many points")
    return np.array(hs)


@dataclass(frozen=True)
class ApproxResult:
    gradient: GradientEstimate
    diag: DiagHessianEstimate
    stencil: EvaluatedStencil
    row: ReportRow
    bound: BoundBreakdown | None = None
    objective: object = None  # the counting Objective that was evaluated


def _error_columns(func: RegistryFunction, point: np.ndarray, g: np.ndarray, d: np.ndarray):
    truth_diag = func.diag_hessian(point)
    truth_grad = func.gradient(point)
    abs_diag = absolute_error(d, truth_diag)
    rer_diag = (
        relative_error(d, truth_diag) if np.linalg.norm(truth_diag) > 0.0 else None
    )
    rer_grad = (
        relative_error(g, truth_grad) if np.linalg.norm(truth_grad) > 0.0 else None
    )
    return rer_diag, abs_diag, rer_grad


def _certified_lipschitz(func: RegistryFunction, point: np.ndarray, radius: float) -> float:
    if func.lipschitz_d3 is None:
        raise ParameterError(f"no certified third-derivative Lipschitz bound for {func.name}")
    return float(func.lipschitz_d3(point, radius))


def run_approx(
    func: RegistryFunction,
    point,
    S: SampleDirections,
    h: float = 1.0,
    with_bound: bool = False,
    known_f0: float | None = None,
) -> ApproxResult:
    """One gradient + Hessian-diagonal approximation over S, with errors
    against the analytic truth and (optionally) the error-bound breakdown."""
    point = np.asarray(point, dtype=float)
    if point.shape != (func.dim,):
        raise ParameterError(
            f"{func.name} expects a point in R^{func.dim}, got {point.shape}"
        )
    obj = func.objective()
    stencil = evaluate_stencil(obj, point, S, known_f0=known_f0)
    g = centered_gradient(stencil, S)
    d = centered_hessian_diagonal(stencil, S)
    rer_diag, abs_diag, rer_grad = _error_columns(func, point, g.value, d.value)
    bound = None
    if with_bound:
        lip = _certified_lipschitz(func, point, S.radius)
        bound = error_bound(S, lip, func.hessian(point))
    row = ReportRow(
        function=func.name,
        point=fmt_point(point),
        set_name=S.kind.value,
        h=h,
        delta_s=S.radius,
        rer_diag=rer_diag,
        abs_err_diag=abs_diag,
        rer_grad=rer_grad,
        bound_total=bound.total if bound else None,
        bound_cross=bound.cross_term if bound else None,
        evals=stencil.evals_used,
    )
    return ApproxResult(g, d, stencil, row, bound, obj)


def _grid_rows(
    func: RegistryFunction,
    point: np.ndarray,
    kind: SetKind,
    hs: np.ndarray,
    custom: SampleDirections | None,
    with_bound: bool,
):
    """Rows for a descending-h grid, sharing a single f(x0) evaluation."""
    obj = func.objective()
    f0 = obj(point)
    truth_diag = func.diag_hessian(point)
    truth_norm = float(np.linalg.norm(truth_diag))
    rows = []
    abs_errs = []
    for h in hs:
        S = build_scaled_set(kind, func.dim, float(h), custom)
        stencil = evaluate_stencil(obj, point, S, known_f0=f0)
        g = centered_gradient(stencil, S)
        d = centered_hessian_diagonal(stencil, S)
        rer_diag, abs_diag, rer_grad = _error_columns(func, point, g.value, d.value)
        bound = None
        if with_bound:
            lip = _certified_lipschitz(func, point, S.radius)
            bound = error_bound(S, lip, func.hessian(point))
        rows.append(
            ReportRow(
                function=func.name,
                point=fmt_point(point),
                set_name=kind.value,
                h=float(h),
                delta_s=S.radius,
                rer_diag=rer_diag,
                abs_err_diag=abs_diag,
                rer_grad=rer_grad,
                bound_total=bound.total if bound else None,
                bound_cross=bound.cross_term if bound else None,
                evals=stencil.evals_used,
            )
        )
        abs_errs.append(abs_diag)
    return rows, np.array(abs_errs), f0, truth_norm


def _metric(row: ReportRow) -> float:
    """Relative error when defined, absolute error otherwise."""
    return row.rer_diag if row.rer_diag is not None else row.abs_err_diag


@dataclass(frozen=True)
class SweepResult:
    report: ExperimentReport
    fitted_order: float | None
    best_h: float
    best_metric: float


def run_sweep(
    func: RegistryFunction,
    point,
    kind: SetKind,
    hs,
    custom: SampleDirections | None = None,
    with_bound: bool = False,
) -> SweepResult:
    """Approximate over a descending h grid, fit the convergence order on the
    truncation-dominated rows, and locate the grid minimum of the error."""
    point = np.asarray(point, dtype=float)
    if point.shape != (func.dim,):
        raise ParameterError(f"{func.name} expects a point in R^{func.dim}, got {point.shape}")
    hs = np.sort(np.asarray(hs, dtype=float))[::-1]
    if hs.size < 1 or np.any(hs <= 0):
        raise ParameterError("the h grid must contain positive values")
    if np.unique(hs).size != hs.size:
        raise ParameterError("the h grid contains duplicate values")
    rows, abs_errs, f0, truth_norm = _grid_rows(func, point, kind, hs, custom, with_bound)

    # Keep rows whose error is credibly truncation (above the round-off
    # floor eps*|f0| / delta^2 and above noise relative to the truth).
    deltas = np.array([r.delta_s for r in rows])
    floor = 100.0 * _EPS * np.maximum(abs(f0) / deltas**2, truth_norm)
    kept = abs_errs > floor
    fitted = None
    if int(kept.sum()) >= 3:
        fitted = convergence_order(hs[kept], abs_errs[kept])

    metrics = np.array([_metric(r) for r in rows])
    best = int(np.argmin(metrics))
    comments = []
    if fitted is not None:
        comments.append(f"fitted_order={fmt_float(fitted)}")
    else:
        comments.append("fitted_order=")
    comments.append(f"best_h={fmt_float(hs[best])}")
    comments.append(f"best_rer={fmt_float(metrics[best])}")
    report = ExperimentReport(rows, comments).sort()
    return SweepResult(report, fitted, float(hs[best]), float(metrics[best]))


@dataclass(frozen=True)
class LimitStudyResult:
    report: ExperimentReport
    plateau: float
    grid_inf: float
    grid_inf_h: float
    nonmonotone: bool


def run_limit_study(
    func: RegistryFunction,
    point,
    kind: SetKind,
    hs=None,
    custom: SampleDirections | None = None,
) -> LimitStudyResult:
    """Estimate the small-h limit of the relative error as the median over
    the plateau window, report the grid infimum, and flag non-monotone
    behavior (error growing again as h shrinks past the grid minimum)."""
    point = np.asarray(point, dtype=float)
    if point.shape != (func.dim,):
        raise ParameterError(f"{func.name} expects a point in R^{func.dim}, got {point.shape}")
    hs = DEFAULT_LIMIT_GRID if hs is None else np.sort(np.asarray(hs, dtype=float))[::-1]
    if np.any(hs <= 0):
        raise ParameterError("the h grid must contain positive values")
    rows, _, _, _ = _grid_rows(func, point, kind, hs, custom, with_bound=False)
    metrics = np.array([_metric(r) for r in rows])

    lo, hi = PLATEAU_WINDOW
    window = (hs >= lo * (1.0 - 1e-9)) & (hs <= hi * (1.0 + 1e-9))
    if int(window.sum()) < 3:
        raise ParameterError(
            f"h grid has fewer than 3 points in the plateau window [{lo:g}, {hi:g}]"
        )
    plateau = float(np.median(metrics[window]))

    best = int(np.argmin(metrics))
    nonmonotone = best < len(rows) - 1 and metrics[-1] >= NONMONOTONE_FACTOR * metrics[best]
    comments = [
        f"plateau_rer={fmt_float(plateau)}",
        f"inf_rer={fmt_float(metrics[best])}",
        f"inf_h={fmt_float(hs[best])}",
        f"nonmonotone={'true' if nonmonotone else 'false'}",
    ]
    report = ExperimentReport(rows, comments).sort()
    return LimitStudyResult(report, plateau, float(metrics[best]), float(hs[best]), bool(nonmonotone))


# ---------------------------------------------------------------------------
# Reference reproductions

REPRO_HEADER = [
    "target",
    "function",
    "point",
    "set",
    "h",
    "quantity",
    "computed",
    "reference",
    "tolerance",
    "status",
]

POINT_X1 = np.array([1.1, 1.1**2 + 1e-5])
POINT_X2 = np.array([0.9, 0.81])
POINT_E41 = np.array([3.0, 2.0, 1.0])

_SETS = [SetKind.CB, SetKind.RB, SetKind.CMPB, SetKind.RMPB]

# (point, h) -> per-set reference relative errors of the Hessian diagonal.
_TABLE1 = {
    ("x1", 1e-3): {SetKind.CB: 2.02e-7, SetKind.RB: 3.14e-1, SetKind.CMPB: 4.19e-1, SetKind.RMPB: 1.78e-7},
    ("x2", 1e-6): {SetKind.CB: 1.18e-9, SetKind.RB: 3.74e-1, SetKind.CMPB: 4.99e-1, SetKind.RMPB: 3.39e-9},
}
# Round-off-dominated entries are only expected to match within a factor.
_TABLE1_FACTOR3 = {("x2", SetKind.CB), ("x2", SetKind.RMPB)}

# Small-h limit and grid infimum references per (point, set); None marks
# values computed in exact arithmetic that double precision cannot reach.
_TABLE2 = {
    ("x1", SetKind.CB): (0.0, 0.0),
    ("x2", SetKind.CB): (0.0, 0.0),
    ("x1", SetKind.RB): (3.14e-1, 3.14e-1),
    ("x2", SetKind.RB): (3.74e-1, 3.74e-1),
    ("x1", SetKind.CMPB): (4.19e-1, 2.96e-1),
    ("x2", SetKind.CMPB): (5.00e-1, 3.53e-1),
    ("x1", SetKind.RMPB): (None, None),  # limit diverges; infimum 5.71e-10
    ("x2", SetKind.RMPB): (None, None),  # limit 4.65e-10, below the fp plateau
}

_TABLE3_H = [1.0, 1e-1, 1e-2, 1e-3, 1e-4]
_TABLE3 = {
    SetKind.RMPB: [5.93e1, 1.31e-1, 1.33e-1, 1.33e-1, 1.33e-1],
    SetKind.CB: [9.79e0, 2.93e-2, 2.90e-4, 2.90e-6, 2.95e-8],
}

REPRO_TARGETS = ("table1", "table2", "table3", "example41")

_PLATEAU_CAP = 1e-5  # "vanishing limit" acceptance level for lonely sets


@dataclass(frozen=True)
class ReproCheck:
    target: str
    function: str
    point: str
    set_name: str
    h: str
    quantity: str
    computed: float
    reference: str
    tolerance: str
    status: str

    def as_record(self) -> list[str]:
        return [
            self.target,
            self.function,
            self.point,
            self.set_name,
            self.h,
            self.quantity,
            fmt_float(self.computed),
            self.reference,
            self.tolerance,
            self.status,
        ]


def _check_rel(computed: float, reference: float, rel: float) -> str:
    return "pass" if abs(computed - reference) <= rel * abs(reference) else "fail"


def _check_factor(computed: float, reference: float, factor: float) -> str:
    ok = reference / factor <= computed <= reference * factor
    return "pass" if ok else "fail"


def _check_below(computed: float, cap: float) -> str:
    return "pass" if computed < cap else "fail"


@dataclass
class ReproduceResult:
    checks: list[ReproCheck] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(1 for c in self.checks if c.status == "fail")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPRO_HEADER)
        for c in self.checks:
            writer.writerow(c.as_record())
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = ["| " + " | ".join(REPRO_HEADER) + " |", "|" + "---|" * len(REPRO_HEADER)]
        lines.extend("| " + " | ".join(c.as_record()) + " |" for c in self.checks)
        return "\n".join(lines) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "md":
            return self.to_markdown()
        raise ParameterError(f"unknown report format {fmt!r} (expected csv or md)")


def _reproduce_table1(rosen: RegistryFunction) -> list[ReproCheck]:
    checks = []
    for (label, h), refs in _TABLE1.items():
        point = POINT_X1 if label == "x1" else POINT_X2
        for kind in _SETS:
            S = build_set(kind, rosen.dim, h)
            result = run_approx(rosen, point, S, h=h)
            ref = refs[kind]
            if (label, kind) in _TABLE1_FACTOR3:
                status = _check_factor(result.row.rer_diag, ref, 3.0)
                tol = "factor<=3"
            else:
                status = _check_rel(result.row.rer_diag, ref, 0.05)
                tol = "rel<=5%"
            checks.append(
                ReproCheck(
                    "table1", rosen.name, fmt_point(point), kind.value, fmt_float(h),
                    "rer_diag", result.row.rer_diag, fmt_float(ref), tol, status,
                )
            )
    return checks


def _reproduce_table2(rosen: RegistryFunction) -> list[ReproCheck]:
    checks = []
    for label, point in (("x1", POINT_X1), ("x2", POINT_X2)):
        for kind in _SETS:
            study = run_limit_study(rosen, point, kind)
            ref_limit, ref_inf = _TABLE2[(label, kind)]
            pt = fmt_point(point)
            if kind is SetKind.CB:
                checks.append(
                    ReproCheck("table2", rosen.name, pt, kind.value, "", "limit_rer",
                               study.plateau, "0", f"<{_PLATEAU_CAP:g}",
                               _check_below(study.plateau, _PLATEAU_CAP))
                )
                checks.append(
                    ReproCheck("table2", rosen.name, pt, kind.value, "", "inf_rer",
                               study.grid_inf, "0", f"<{_PLATEAU_CAP:g}",
                               _check_below(study.grid_inf, _PLATEAU_CAP))
                )
            elif ref_limit is not None:
                checks.append(
                    ReproCheck("table2", rosen.name, pt, kind.value, "", "limit_rer",
                               study.plateau, fmt_float(ref_limit), "rel<=5%",
                               _check_rel(study.plateau, ref_limit, 0.05))
                )
                checks.append(
                    ReproCheck("table2", rosen.name, pt, kind.value, "", "inf_rer",
                               study.grid_inf, fmt_float(ref_inf), "rel<=5%",
                               _check_rel(study.grid_inf, ref_inf, 0.05))
                )
            else:
                # Exact-arithmetic references beyond double precision: report
                # the computed values without judging them.
                ref_str = "divergent" if label == "x1" else "4.65e-10"
                checks.append(
                    ReproCheck("table2", rosen.name, pt, kind.value, "", "limit_rer",
                               study.plateau, ref_str, "not reproducible in fp64", "skip")
                )
                checks.append(
                    ReproCheck("table2", rosen.name, pt, kind.value, "", "inf_rer",
                               study.grid_inf, "5.71e-10" if label == "x1" else "4.65e-10",
                               "not reproducible in fp64", "skip")
                )
            if label == "x1" and kind is SetKind.RMPB:
                checks.append(
                    ReproCheck("table2", rosen.name, pt, kind.value, "", "nonmonotone",
                               1.0 if study.nonmonotone else 0.0, "1", "flag",
                               "pass" if study.nonmonotone else "fail")
                )
    return checks


def _reproduce_table3(expprod: RegistryFunction) -> list[ReproCheck]:
    checks = []
    pt = fmt_point(POINT_E41)
    for kind in (SetKind.RMPB, SetKind.CB):
        for h, ref in zip(_TABLE3_H, _TABLE3[kind]):
            S = build_set(kind, expprod.dim, h)
            result = run_approx(expprod, POINT_E41, S, h=h)
            checks.append(
                ReproCheck("table3", expprod.name, pt, kind.value, fmt_float(h),
                           "rer_diag", result.row.rer_diag, fmt_float(ref), "rel<=10%",
                           _check_rel(result.row.rer_diag, ref, 0.10))
            )
        study = run_limit_study(expprod, POINT_E41, kind)
        if kind is SetKind.RMPB:
            checks.append(
                ReproCheck("table3", expprod.name, pt, kind.value, "", "limit_rer",
                           study.plateau, fmt_float(1.33e-1), "rel<=5%",
                           _check_rel(study.plateau, 1.33e-1, 0.05))
            )
        else:
            checks.append(
                ReproCheck("table3", expprod.name, pt, kind.value, "", "limit_rer",
                           study.plateau, "0", f"<{_PLATEAU_CAP:g}",
                           _check_below(study.plateau, _PLATEAU_CAP))
            )
    return checks


def _reproduce_example41(expprod: RegistryFunction) -> list[ReproCheck]:
    study = run_limit_study(expprod, POINT_E41, SetKind.RMPB)
    pt = fmt_point(POINT_E41)
    return [
        ReproCheck("example41", expprod.name, pt, "rmpb", "", "limit_rer",
                   study.plateau, fmt_float(1.33e-1), "rel<=5%",
                   _check_rel(study.plateau, 1.33e-1, 0.05)),
        ReproCheck("example41", expprod.name, pt, "rmpb", "", "min_rer",
                   study.grid_inf, fmt_float(1.30e-1), "rel<=5%",
                   _check_rel(study.grid_inf, 1.30e-1, 0.05)),
        ReproCheck("example41", expprod.name, pt, "rmpb", "", "argmin_h",
                   study.grid_inf_h, "0.0883", "info", "info"),
    ]


def run_reproduce(target: str) -> ReproduceResult:
    """Re-run one of the bundled reference experiments and compare against
    its expected values under the per-target tolerance policy."""
    from . import registry

    if target == "table1":
        checks = _reproduce_table1(registry.get("rosenbrock2"))
    elif target == "table2":
        checks = _reproduce_table2(registry.get("rosenbrock2"))
    elif target == "table3":
        checks = _reproduce_table3(registry.get("expprod3"))
    elif target == "example41":
        checks = _reproduce_example41(registry.get("expprod3"))
    else:
        known = ", ".join(REPRO_TARGETS)
        raise ParameterError(f"unknown reproduction target {target!r}; expected one of {known}")
    return ReproduceResult(checks)
