# tests/test_nodal.py

import json

import numpy as np
import pytest

from steklov_lab.errors import DataError, InadmissibleLevelError
from steklov_lab.geometry import build_interior_grid
from steklov_lab.nodal import (
    OracleField,
    ScalingExponents,
    admissible_level_bound,
    boundary_ibp_residual,
    boundary_zeros,
    field_on_grid,
    five_point_laplacian,
    interior_energy,
    interior_flux_check,
    interior_ibp_residual,
    mode_level_set,
    sigma_exponent,
    signed_boundary_integral,
)
from steklov_lab.oracle_disk import oracle_eval
from steklov_lab.steklov import ProblemKind, cauchy_data_from_trace, solve_problem

COLLAR = 0.04


@pytest.fixture(scope="module")
def oracle_grid(disk):
    return build_interior_grid(disk, 151, COLLAR)


def test_sigma_exponent_branches():
    assert sigma_exponent(2, 2) == 0.0
    assert sigma_exponent(2, np.inf) == 0.0
    assert sigma_exponent(3, np.inf) == pytest.approx(0.5)
    assert sigma_exponent(4, 4) == pytest.approx(0.25)
    for n in range(3, 9):
        p = 2.0 * n / (n - 2)
        assert sigma_exponent(n, p) == pytest.approx((n - 1) * (0.5 - 1.0 / p) - 0.5, abs=1e-14)
    with pytest.raises(DataError):
        sigma_exponent(2, 1.5)
    with pytest.raises(DataError):
        sigma_exponent(1, 2)


def test_planar_scaling_exponents():
    exps = ScalingExponents()
    assert exps.boundary == 1.0
    assert exps.laplacian_vanishing == 0.0
    assert exps.interior(ProblemKind.THETA) == -1.0
    assert exps.interior("xi") == 0.0


def test_boundary_zeros(disk_ops):
    t = disk_ops.grid.t
    zeros = boundary_zeros(np.cos(3 * t))
    assert zeros.count == 6
    np.testing.assert_allclose(zeros.params, (2 * np.arange(6) + 1) * np.pi / 6, atol=1e-12)
    level = boundary_zeros(np.cos(t), 0.5, disk_ops.curve)
    np.testing.assert_allclose(level.params, [np.pi / 3, 5 * np.pi / 3], atol=1e-12)
    np.testing.assert_allclose(level.points[0], [0.5, np.sqrt(3) / 2], atol=1e-12)


def test_signed_boundary_integral(disk_ops):
    t = disk_ops.grid.t
    phi = np.cos(3 * t)
    assert signed_boundary_integral(disk_ops.grid, phi, phi) == pytest.approx(4.0, rel=1e-10)
    assert signed_boundary_integral(disk_ops.grid, np.ones_like(t) + 2.0, phi) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 5, 9])
def test_boundary_identity_on_circle(disk_ops, k):
    phi = np.cos(k * disk_ops.grid.t)
    report = boundary_ibp_residual(disk_ops.grid, phi)
    assert report.boundary_side == pytest.approx(4.0 * k * k, rel=1e-10)
    assert report.interior_side == pytest.approx(4.0 * k * k, rel=1e-10)
    assert report.residual < 1e-8


def test_boundary_identity_at_admissible_level(disk_ops):
    phi = np.cos(3 * disk_ops.grid.t)
    bound = admissible_level_bound(phi, disk_ops.grid, 8.0, 0.1)
    assert bound == pytest.approx(0.1 * np.sqrt(np.pi))
    report = boundary_ibp_residual(disk_ops.grid, phi, 0.5 * bound, lam=8.0, c=0.1)
    assert report.residual < 1e-8
    with pytest.raises(InadmissibleLevelError):
        boundary_ibp_residual(disk_ops.grid, phi, 2 * bound, lam=8.0, c=0.1)


def test_bem_field_matches_oracle(disk_ops, disk, criteria):
    grid = build_interior_grid(disk, 41, 0.1)
    phi = np.cos(2 * disk_ops.grid.t)
    cd = cauchy_data_from_trace(ProblemKind.XI, phi, 6.0, disk_ops)
    e = field_on_grid(cd, 6.0, grid, "e", derivatives=True)
    lap = field_on_grid(cd, 6.0, grid, "lap")
    exact_e, exact_grad, exact_lap, _ = oracle_eval(ProblemKind.XI, 2, "cos", grid.active_points())
    np.testing.assert_allclose(e.values[grid.active], exact_e, atol=criteria["field_abs"])
    np.testing.assert_allclose(lap.values[grid.active], exact_lap, atol=criteria["field_abs"])
    np.testing.assert_allclose(e.gradient[grid.active], exact_grad, atol=1e-7)
    assert np.isnan(e.values[~grid.active]).all()
    assert e.provenance == "bem"


def test_field_refuses_narrow_collar(disk_ops, disk):
    grid = build_interior_grid(disk, 21, 0.01)
    cd = cauchy_data_from_trace(ProblemKind.XI, np.cos(disk_ops.grid.t), 4.0, disk_ops)
    with pytest.raises(DataError):
        field_on_grid(cd, 4.0, grid)
    with pytest.raises(DataError):
        field_on_grid(OracleField(ProblemKind.XI, 1), 4.0, grid, "grad")


def test_five_point_laplacian(oracle_grid):
    source = OracleField(ProblemKind.THETA, 2)
    e = field_on_grid(source, np.cbrt(24.0), oracle_grid, "e")
    lap = field_on_grid(source, np.cbrt(24.0), oracle_grid, "lap")
    discrete = five_point_laplacian(e)
    mask = np.isfinite(discrete) & np.isfinite(lap.values)
    np.testing.assert_allclose(discrete[mask], lap.values[mask], atol=1e-2)


def test_nodal_line_of_first_xi_mode(oracle_grid):
    geo = mode_level_set(ProblemKind.XI, OracleField(ProblemKind.XI, 1), 4.0, oracle_grid)
    assert geo.raw_length == pytest.approx(2 * (1 - COLLAR), rel=0.03)
    assert geo.length == pytest.approx(2.0, rel=0.02)
    assert len(geo.bridges) == 2
    assert geo.components == 1
    assert geo.boundary_zero_count == 2


def test_inadmissible_level_is_rejected(oracle_grid):
    with pytest.raises(InadmissibleLevelError):
        mode_level_set(ProblemKind.XI, OracleField(ProblemKind.XI, 2), 6.0, oracle_grid, "lap", 10.0)


def test_geometry_exports(oracle_grid, disk, tmp_path):
    geo = mode_level_set(ProblemKind.XI, OracleField(ProblemKind.XI, 2), 6.0, oracle_grid, "lap")
    data = json.loads(geo.write_json(tmp_path / "nodal.json").read_text())
    assert data["length"] == pytest.approx(geo.length)
    assert len(data["segments"]) == len(geo.segments)
    svg = geo.write_svg(tmp_path / "nodal.svg", disk).read_text()
    assert "<svg" in svg
    assert len(geo.component_labels()) == len(geo.segments)


def test_interior_identity_fixture(oracle_grid, criteria):
    report = interior_ibp_residual(ProblemKind.XI, OracleField(ProblemKind.XI, 2), 6.0, oracle_grid)
    assert report.boundary_side == pytest.approx(48.0, rel=1e-6)
    assert report.residual < criteria["identity_rel"]
    assert not report.inconsistent


@pytest.mark.parametrize(
    "kind, k, lam",
    [(ProblemKind.THETA, 2, np.cbrt(24.0)), (ProblemKind.THETA, 3, np.cbrt(72.0)), (ProblemKind.PI, 2, 5.0), (ProblemKind.PI, 3, 7.0)],
)
def test_interior_identity_for_theta_and_pi(oracle_grid, criteria, kind, k, lam):
    report = interior_ibp_residual(kind, OracleField(kind, k), lam, oracle_grid)
    assert report.boundary_side > 0
    assert report.residual < criteria["identity_rel"]
    assert report.geometry.boundary_zero_count == 2 * k


def test_identity_checks_take_field_settings(disk_ops, disk, criteria):
    grid = build_interior_grid(disk, 101, 0.1)
    cd = cauchy_data_from_trace(ProblemKind.XI, np.cos(2 * disk_ops.grid.t), 6.0, disk_ops)
    with pytest.raises(DataError):
        interior_ibp_residual(ProblemKind.XI, cd, 6.0, grid, upsample=1)
    with pytest.raises(DataError):
        interior_flux_check(ProblemKind.XI, cd, 6.0, grid, upsample=1)
    report = interior_ibp_residual(ProblemKind.XI, cd, 6.0, grid, upsample=8, threads=2)
    assert report.boundary_side == pytest.approx(48.0, rel=1e-8)
    assert report.residual < criteria["identity_rel"]


def test_bem_nodal_set_on_kite(kite_ops, kite, criteria):
    sol = solve_problem(ProblemKind.XI, kite_ops, 2)
    pair = sol.spectrum.pairs[1]
    cd = sol.cauchy_data(1, kite_ops)
    grid = build_interior_grid(kite, 81, 0.15)
    geo = mode_level_set(ProblemKind.XI, cd, pair.lam, grid)
    assert geo.boundary_zero_count == 2
    assert not geo.is_empty
    assert geo.components == 1
    report = interior_ibp_residual(ProblemKind.XI, cd, pair.lam, grid)
    assert report.residual < criteria["identity_rel"]


def test_interior_flux_fixture(oracle_grid, criteria):
    lam = np.cbrt(24.0)
    report = interior_flux_check(ProblemKind.THETA, OracleField(ProblemKind.THETA, 2), lam, oracle_grid)
    assert report.interior_side == pytest.approx(48.0, rel=criteria["identity_rel"])
    assert report.boundary_side == pytest.approx(96.0, rel=1e-6)
    assert report.residual < criteria["identity_rel"]
    assert report.ratio > 0.9


def test_interior_energy_matches_boundary_energy(oracle_grid, criteria):
    lap = field_on_grid(OracleField(ProblemKind.XI, 2), 6.0, oracle_grid, "lap")
    energy = interior_energy(lap)
    assert energy.total == pytest.approx(6 * np.pi, rel=criteria["energy_rel"])
    assert energy.grid_part > 0 and energy.strip_part > 0
    e = field_on_grid(OracleField(ProblemKind.XI, 2), 6.0, oracle_grid, "e")
    with pytest.raises(DataError):
        interior_energy(e)
