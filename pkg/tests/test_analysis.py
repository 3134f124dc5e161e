import json
import math

import pytest

from ifm_search import closed_form as cf
from ifm_search.analysis import (
    SweepGrid,
    asymptotic_probe,
    fig3_dataset,
    optimal_k,
    optimal_k_trend,
    survival_bound_margins,
    sweep,
    validate_grid,
)
from ifm_search.baselines import grover_success
from ifm_search.circuit import SearchParams, final_success, run_search


def test_grid_defaults_and_limits():
    grid = SweepGrid()
    assert grid.n_values == (2, 4, 8, 15, 16, 32, 64)
    assert grid.k_limit(64) == 16
    assert grid.k_limit(15) == 8
    assert SweepGrid(k_max=3).k_limit(64) == 3
    with pytest.raises(ValueError):
        SweepGrid(n_values=())


def test_fig3_regimes_and_shapes():
    data = fig3_dataset(64, (9, 12, 32), 20)
    assert len(data.rows) == 63
    assert data.regimes[9].regime is cf.Regime.SATURATION
    assert data.regimes[12].regime is cf.Regime.OSCILLATION
    assert data.regimes[32].regime is cf.Regime.OSCILLATION
    tau9 = data.curve(9, "tau")
    assert all(b >= a - 1e-12 for a, b in zip(tau9, tau9[1:]))
    for m in (12, 32):
        tau = data.curve(m, "tau")
        steps = [b - a for a, b in zip(tau, tau[1:])]
        assert max(steps) > 0 and min(steps) < 0


def test_fig3_row_identity():
    data = fig3_dataset(64, (9, 12, 32), 20)
    for row in data.rows:
        assert row.success == pytest.approx(row.survival * row.tau**2, abs=1e-12)


def test_fig3_m32_peak_matches_circuit():
    data = fig3_dataset(64, (32,), 20)
    success = data.curve(32, "success")
    peak = max(range(len(success)), key=success.__getitem__)
    brute = [final_success(SearchParams.preset(64, 32, k)) for k in range(21)]
    assert peak == max(range(21), key=brute.__getitem__)
    assert peak == 5


def test_validate_default_grid_passes():
    report = validate_grid()
    assert report.passed
    assert report.max_abs_diff_tau <= 1e-10
    assert report.max_abs_diff_survival <= 1e-10
    assert not report.skipped
    keys = [(r.n, r.m, r.k) for r in report.rows]
    assert keys == sorted(keys)


def test_validate_single_point():
    report = validate_grid(SweepGrid((15,), (3,), k_max=1))
    assert [(r.n, r.m, r.k) for r in report.rows] == [(15, 3, 0), (15, 3, 1)]
    (rec,) = run_search(SearchParams.preset(15, 3, 1))
    tau2 = cf.amplitudes(15, 3, math.pi / 3, 1).tau ** 2
    assert abs(rec.tau**2 - tau2) < 1e-12
    assert report.passed


def test_validate_k_zero_only():
    report = validate_grid(SweepGrid((4, 15), (3, 8), k_max=0))
    assert report.max_abs_diff_tau == 0.0
    assert report.max_abs_diff_survival == 0.0


def test_validate_skips_degenerate_points():
    report = validate_grid(SweepGrid((4, 8), (1, 3)))
    assert [(n, m) for n, m, _ in report.skipped] == [(4, 1), (8, 1)]
    assert report.passed
    assert all(r.m == 3 for r in report.rows)


def test_validate_parallel_is_identical():
    grid = SweepGrid((4, 15, 32), (3, 9, 12))
    a = json.dumps(validate_grid(grid).to_dict())
    b = json.dumps(validate_grid(grid, workers=4).to_dict())
    assert a == b


def test_survival_bound_margins():
    margins = survival_bound_margins()
    assert margins
    assert min(m for *_, m in margins) >= -1e-12


def test_optimal_k_examples():
    k_star, success = optimal_k(64, 32)
    assert k_star == 5
    assert success == pytest.approx(final_success(SearchParams.preset(64, 32, 5)), abs=1e-12)

    k_star, success = optimal_k(64, 9)
    scan = [cf.success_probability(64, 9, math.pi / 9, k) for k in range(33)]
    assert success == pytest.approx(max(scan), abs=1e-15)
    assert k_star == min(k for k, p in enumerate(scan) if p >= max(scan) - 1e-12)

    k_star, success = optimal_k(2, 8)
    assert k_star in (0, 1)
    assert success == pytest.approx(max(cf.success_probability(2, 8, math.pi / 8, k) for k in range(7)))


def test_optimal_k_trend_on_default_grid():
    # a report, not an assertion of the trend; the default grid has no findings
    assert optimal_k_trend() == []


def test_asymptotic_probe():
    probe = asymptotic_probe(1024, 25, (100, 400, 1600))
    values = [p for _, p in probe]
    assert values[0] < values[1] < values[2]
    assert values[2] > 0.9
    assert grover_success(1024, 25) == pytest.approx(0.9995, abs=1e-3)

    gaps = [grover_success(64, 6) - p for _, p in asymptotic_probe(64, 6, (32, 128, 512))]
    assert gaps[0] > gaps[1] > gaps[2] > 0

    for m, p in asymptotic_probe(50, 0, (3, 30, 300)):
        assert p == pytest.approx(1 / 50)


def test_sweep_any_theta_mode():
    rows = sweep(SweepGrid((4,), (1, 2), k_max=1, theta_mode="pi-over-2m"))
    assert [(r.n, r.m, r.k) for r in rows] == [(4, 1, 0), (4, 1, 1), (4, 2, 0), (4, 2, 1)]
    assert rows[1].success == pytest.approx(0.5625, abs=1e-12)
