"""Sweeps, Fig. 3 style curves, regime maps and closed-form validation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import closed_form as cf
from .circuit import SearchParams, ThetaMode, initial_record, run_search

DEFAULT_N = (2, 4, 8, 15, 16, 32, 64)
DEFAULT_M = (2, 3, 4, 8, 9, 12, 16, 32)
VALIDATION_THRESHOLD = 1e-10
PLATEAU_TOL = 1e-12
SEARCH_SCALE = 4.0


@dataclass(frozen=True)
class SweepGrid:
    """Grid of (N, M) points; k runs over 0..k_max(N).

    ``k_max`` fixes the range for every N; otherwise it is ceil(k_scale * sqrt(N)).
    """

    n_values: tuple[int, ...] = DEFAULT_N
    m_values: tuple[int, ...] = DEFAULT_M
    k_max: int | None = None
    k_scale: float = 2.0
    theta_mode: ThetaMode = ThetaMode.PI_OVER_M

    def __post_init__(self):
        if not self.n_values or not self.m_values:
            raise ValueError("n_values and m_values must be non-empty")
        if self.k_max is not None and self.k_max < 0:
            raise ValueError(f"k_max must be >= 0, got {self.k_max}")
        if self.k_max is None and self.k_scale <= 0:
            raise ValueError(f"k_scale must be positive, got {self.k_scale}")
        object.__setattr__(self, "n_values", tuple(sorted(set(self.n_values))))
        object.__setattr__(self, "m_values", tuple(sorted(set(self.m_values))))
        object.__setattr__(self, "theta_mode", ThetaMode(self.theta_mode))

    def k_limit(self, n_boxes: int) -> int:
        if self.k_max is not None:
            return self.k_max
        return math.ceil(self.k_scale * math.sqrt(n_boxes))

    def pairs(self):
        return [(n, m) for n in self.n_values for m in self.m_values]

    def to_dict(self) -> dict:
        return {
            "n_values": list(self.n_values),
            "m_values": list(self.m_values),
            "k_max": self.k_max,
            "k_scale": self.k_scale,
            "theta_mode": self.theta_mode.value,
        }


@dataclass(frozen=True)
class ValidationRow:
    n: int
    m: int
    k: int
    diff_tau: float
    diff_survival: float


@dataclass
class ValidationReport:
    grid: SweepGrid
    max_abs_diff_tau: float
    max_abs_diff_survival: float
    worst_point: tuple[int, int, int] | None
    passed: bool
    rows: list[ValidationRow] = field(default_factory=list)
    # (n, m, reason) for points where the closed form does not apply
    skipped: list[tuple[int, int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "max_abs_diff_tau": self.max_abs_diff_tau,
            "max_abs_diff_survival": self.max_abs_diff_survival,
            "worst_point": list(self.worst_point) if self.worst_point else None,
            "passed": self.passed,
            "skipped": [list(s) for s in self.skipped],
            "rows": [vars(r) for r in self.rows],
        }


@dataclass(frozen=True)
class Fig3Row:
    m: int
    k: int
    tau: float
    survival: float
    success: float


@dataclass
class Fig3Dataset:
    n_boxes: int
    rows: list[Fig3Row]
    regimes: dict[int, cf.PhaseParameter]

    def curve(self, m: int, column: str) -> list[float]:
        return [getattr(r, column) for r in self.rows if r.m == m]


@dataclass(frozen=True)
class SweepRow:
    n: int
    m: int
    k: int
    theta: float
    tau: float
    survival: float
    success: float


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _compare_point(n, m, k_max):
    theta = math.pi / m
    try:
        expected = cf.trajectory(n, m, theta, k_max)
    except cf.DegenerateLeak as exc:
        return [], (n, m, str(exc))
    records = [initial_record(n)] + run_search(SearchParams(n, m, theta, k_max))
    rows = []
    for rec, (tau, surv, _) in zip(records, expected):
        rows.append(
            ValidationRow(
                n, m, rec.cycle_index,
                abs(rec.tau - tau),
                abs(rec.cumulative_survival - surv),
            )
        )
    return rows, None


def validate_grid(grid: SweepGrid | None = None, workers: int = 1) -> ValidationReport:
    """Run circuit simulation and closed form on every grid point and compare.

    Points where the closed form does not apply (cos(pi/M)**M <= 0) are
    listed in ``skipped``; a closed form that breaks anywhere else counts as
    a failure.
    """
    grid = grid or SweepGrid()
    if grid.theta_mode is not ThetaMode.PI_OVER_M:
        raise ValueError("validation needs theta = pi/M")

    def job(pair):
        n, m = pair
        try:
            return _compare_point(n, m, grid.k_limit(n))
        except (cf.NormalizationUnderflow, cf.BranchResidue) as exc:
            bad = ValidationRow(n, m, -1, math.inf, math.inf)
            return [bad], (n, m, f"closed form failed: {exc}")

    rows, skipped = [], []
    for point_rows, skip in _map(job, grid.pairs(), workers):
        rows.extend(point_rows)
        if skip is not None and not point_rows:
            skipped.append(skip)
    rows.sort(key=lambda r: (r.n, r.m, r.k))
    skipped.sort()

    max_tau = max((r.diff_tau for r in rows), default=0.0)
    max_surv = max((r.diff_survival for r in rows), default=0.0)
    worst = max(rows, key=lambda r: max(r.diff_tau, r.diff_survival), default=None)
    return ValidationReport(
        grid=grid,
        max_abs_diff_tau=max_tau,
        max_abs_diff_survival=max_surv,
        worst_point=(worst.n, worst.m, worst.k) if worst else None,
        passed=max_tau <= VALIDATION_THRESHOLD and max_surv <= VALIDATION_THRESHOLD,
        rows=rows,
        skipped=skipped,
    )


def survival_bound_margins(grid: SweepGrid | None = None) -> list[tuple[int, int, int, float]]:
    """(n, m, k, P(k) - cos(pi/M)**(2kM)) from the circuit simulation."""
    grid = grid or SweepGrid()
    out = []
    for n, m in grid.pairs():
        theta = math.pi / m
        c = cf.leak_factor(m, theta)
        records = [initial_record(n)] + run_search(SearchParams(n, m, theta, grid.k_limit(n)))
        for rec in records:
            out.append((n, m, rec.cycle_index, rec.cumulative_survival - c ** (2 * rec.cycle_index)))
    return out


def fig3_dataset(n_boxes: int = 64, m_values=(9, 12, 32), k_max: int = 20) -> Fig3Dataset:
    rows, regimes = [], {}
    for m in sorted(set(m_values)):
        theta = math.pi / m
        regimes[m] = cf.phase_parameter(n_boxes, m, theta)
        for k, (tau, surv, success) in enumerate(cf.trajectory(n_boxes, m, theta, k_max)):
            rows.append(Fig3Row(m, k, tau, surv, success))
    return Fig3Dataset(n_boxes, rows, regimes)


def optimal_k(n_boxes: int, small_cycles: int) -> tuple[int, float]:
    """Best number of large cycles for theta = pi/M, scanning k up to ceil(4 sqrt(N)).

    Among values within PLATEAU_TOL of the maximum the smallest k wins.
    """
    k_max = math.ceil(SEARCH_SCALE * math.sqrt(n_boxes))
    rows = cf.trajectory(n_boxes, small_cycles, math.pi / small_cycles, k_max)
    success = [r[2] for r in rows]
    best = max(success)
    k_star = next(k for k, p in enumerate(success) if p >= best - PLATEAU_TOL)
    return k_star, success[k_star]


def optimal_k_trend(grid: SweepGrid | None = None) -> list[dict]:
    """Places where raising M pushes the optimal k up by more than one.

    These are findings to look at, not errors.
    """
    grid = grid or SweepGrid()
    findings = []
    for n in grid.n_values:
        previous = None
        for m in grid.m_values:
            try:
                k_star, _ = optimal_k(n, m)
            except cf.DegenerateLeak:
                continue
            if previous is not None and k_star > previous[1] + 1:
                findings.append({"n": n, "m_from": previous[0], "m_to": m,
                                 "k_from": previous[1], "k_to": k_star})
            previous = (m, k_star)
    return findings


def asymptotic_probe(n_boxes: int, k: int, m_values) -> list[tuple[int, float]]:
    return [(m, cf.success_probability(n_boxes, m, math.pi / m, k)) for m in m_values]


def sweep(grid: SweepGrid, target: int = 0, workers: int = 1) -> list[SweepRow]:
    """Circuit-simulation success over the grid for any theta preset."""

    def job(pair):
        n, m = pair
        params = SearchParams.preset(n, m, grid.k_limit(n), grid.theta_mode, target)
        records = [initial_record(n)] + run_search(params)
        return [
            SweepRow(n, m, r.cycle_index, params.theta, r.tau,
                     r.cumulative_survival, r.success_probability)
            for r in records
        ]

    rows = [row for chunk in _map(job, grid.pairs(), workers) for row in chunk]
    rows.sort(key=lambda r: (r.n, r.m, r.k))
    return rows
