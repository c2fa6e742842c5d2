# tests/test_layer.py

import numpy as np
import pytest

from steklov_lab.errors import CollarPointError, DataError
from steklov_lab.geometry import TWO_PI, build_quadrature, curve_from_spec
from steklov_lab.layer import (
    assemble_boundary_ops,
    eval_potentials,
    jump_test,
    kress_weights,
)
from steklov_lab.oracle_disk import oracle_layer_multiplier


def test_kress_weights_integrate_log_kernel():
    n = 32
    weights = kress_weights(n)
    t = TWO_PI * np.arange(n) / n
    np.testing.assert_allclose(weights, weights.T, atol=1e-15)
    np.testing.assert_allclose(weights.sum(axis=1), 0.0, atol=1e-12)
    assert weights[0] @ np.cos(3 * t) == pytest.approx(-TWO_PI / 3, rel=1e-12)


@pytest.mark.parametrize("name", ["S1", "S2", "S3", "N", "Lambda"])
def test_disk_multipliers(disk_ops, name, criteria):
    op = getattr(disk_ops, name)
    for k in range(9):
        for parity in ("cos", "sin"):
            if k == 0 and parity == "sin":
                continue
            assert op.multiplier(k, parity) == pytest.approx(
                oracle_layer_multiplier(name, k), abs=criteria["multiplier_abs"]
            )


def test_symmetric_operators_on_disk(disk_ops):
    for name in ("S1", "S3", "N", "Lambda"):
        assert getattr(disk_ops, name).asymmetry < 1e-12


@pytest.mark.parametrize("domain", ["kite", "ellipse:2,1", "star:0.05,4"])
def test_symmetric_operators_off_the_disk(domain):
    curve = curve_from_spec(domain)
    ops = assemble_boundary_ops(curve, build_quadrature(curve, 128))
    assert ops.S1.asymmetry < 1e-12
    assert ops.S3.asymmetry < 1e-12
    assert ops.Lambda.asymmetry < 1e-6
    assert ops.fine.grid.n == 256


def test_restriction_keeps_low_modes_and_halves_nyquist(disk_ops):
    n = disk_ops.grid.n
    assert disk_ops.Lambda.multiplier(n // 2 - 1) == pytest.approx(n // 2 - 1, rel=1e-10)
    assert disk_ops.Lambda.multiplier(n // 2) == pytest.approx(n // 4, rel=1e-10)
    native = assemble_boundary_ops(disk_ops.curve, disk_ops.grid, anti_alias=False)
    assert native.fine is None
    np.testing.assert_array_equal(native.restrict(native.S3.matrix), native.S3.matrix)


def test_dirichlet_to_neumann_annihilates_constants(disk_ops, kite_ops):
    for ops in (disk_ops, kite_ops):
        np.testing.assert_allclose(ops.Lambda.apply(np.ones(ops.grid.n)), 0.0, atol=1e-10)
    t = disk_ops.grid.t
    np.testing.assert_allclose(disk_ops.Lambda.apply(np.cos(3 * t)), 3 * np.cos(3 * t), atol=1e-10)
    assert kite_ops.bordered_condition < 1e12


def test_symmetrized_operator(kite_ops):
    op = kite_ops.S2.symmetrized()
    assert op.is_symmetrized
    assert op.asymmetry < 1e-14
    assert op.raw_asymmetry == pytest.approx(kite_ops.S2.asymmetry)


def test_operator_csv_export(disk_ops, tmp_path):
    path = disk_ops.S3.to_csv(tmp_path / "S3.csv")
    matrix = np.loadtxt(path, delimiter=",")
    np.testing.assert_array_equal(matrix, disk_ops.S3.matrix)


def test_boundary_ops_need_enough_nodes(disk):
    with pytest.raises(DataError):
        assemble_boundary_ops(disk, build_quadrature(disk, 16))


def test_potentials_of_unit_density_at_centre(disk_ops):
    field = eval_potentials(np.ones(disk_ops.grid.n), [0.0, 0.0], disk_ops.grid)
    assert field.L1[0] == pytest.approx(0.0, abs=1e-14)
    assert field.L2[0] == pytest.approx(0.25)
    assert field.L3[0] == pytest.approx(1.0)
    assert field.L4[0] == pytest.approx(1.0)


def test_potentials_refuse_collar_points(disk_ops):
    with pytest.raises(CollarPointError):
        eval_potentials(np.ones(disk_ops.grid.n), [[0.0, 0.0], [0.999, 0.0]], disk_ops.grid)


def test_jump_relations_on_disk(disk_ops, criteria):
    t = disk_ops.grid.t
    density = np.cos(2 * t) + 0.5
    report = jump_test(disk_ops.curve, disk_ops.grid, density, 0.7, ops=disk_ops)
    assert report.residuals["L4_interior"] < criteria["jump_abs"]
    assert report.residuals["L4_exterior"] < criteria["jump_abs"]
    assert report.residuals["L4_jump"] < criteria["jump_abs"]
    for name in ("L1", "L2", "L3"):
        assert report.residuals[f"{name}_continuity"] < 1e-6
    assert report.density == pytest.approx(np.cos(1.4) + 0.5)


def test_jump_test_rejects_distances_inside_fine_spacing(disk_ops):
    f = np.ones(disk_ops.grid.n)
    with pytest.raises(DataError):
        jump_test(disk_ops.curve, disk_ops.grid, f, 0.0, distances=(0.01, 0.001), ops=disk_ops)
