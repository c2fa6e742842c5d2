# tests/test_steklov.py

import json

import numpy as np
import pytest

from steklov_lab.errors import DataError
from steklov_lab.geometry import build_quadrature
from steklov_lab.layer import assemble_boundary_ops
from steklov_lab.oracle_disk import oracle_spectrum
from steklov_lab.steklov import (
    ProblemKind,
    assemble_operator,
    boundary_energy,
    cauchy_data,
    cauchy_data_from_trace,
    l1_l2_ratio,
    lp_norm,
    mixed_reciprocity,
    norm_equivalence,
    reciprocity_residual,
    solve_problem,
    spectrum,
)

DISK_SPECTRA = {
    ProblemKind.THETA: [0, 4, 4, 24, 24, 72, 72, 160],
    ProblemKind.XI: [2, 4, 4, 6, 6, 8, 8, 10],
    ProblemKind.PI: [1, 3, 3, 5, 5, 7, 7, 9],
    ProblemKind.HARMONIC: [0, 1, 1, 2, 2, 3, 3, 4],
}


@pytest.mark.parametrize("kind", list(ProblemKind))
def test_disk_spectra_match_closed_forms(disk_ops, kind, criteria):
    sol = solve_problem(kind, disk_ops, 8)
    expected = np.array(DISK_SPECTRA[kind], dtype=float)
    np.testing.assert_allclose(
        sol.spectrum.eigenvalues, expected, rtol=criteria["disk_eigenvalue_rel"], atol=1e-8
    )
    oracle = [mu for mu, _, _ in oracle_spectrum(kind, 8)]
    np.testing.assert_allclose(expected, oracle)


def test_zero_modes_are_clamped(disk_ops):
    sol = solve_problem(ProblemKind.THETA, disk_ops, 3)
    first = sol.spectrum.pairs[0]
    assert first.clamped and first.mu == 0.0 and first.lam == 0.0
    assert sol.spectrum.to_dict()["clamped"] == [0]


def test_theta_eigenvalue_is_cube_root(disk_ops):
    pair = solve_problem(ProblemKind.THETA, disk_ops, 4).spectrum.pairs[3]
    assert pair.lam == pytest.approx(24.0 ** (1.0 / 3.0), rel=1e-8)


def test_eigenvectors_are_weight_normalised(kite_ops):
    spec = solve_problem(ProblemKind.XI, kite_ops, 4).spectrum
    w = kite_ops.grid.weights
    for pair in spec.pairs:
        assert np.dot(w * pair.phi, pair.phi) == pytest.approx(1.0, rel=1e-10)
        assert pair.phi[np.argmax(np.abs(pair.phi))] > 0


def test_spectrum_validation(disk_ops):
    with pytest.raises(DataError):
        spectrum(disk_ops.S1, 2)
    op = assemble_operator(ProblemKind.XI, disk_ops)
    with pytest.raises(DataError):
        spectrum(op, 9)


def test_spectrum_infers_the_problem_kind(disk_ops):
    theta = assemble_operator(ProblemKind.THETA, disk_ops)
    spec = spectrum(theta, 4)
    assert spec.kind is ProblemKind.THETA
    assert spec.pairs[3].lam == pytest.approx(24.0 ** (1.0 / 3.0), rel=1e-8)
    assert spectrum(assemble_operator("pi", disk_ops), 2).kind is ProblemKind.PI
    with pytest.raises(DataError):
        spectrum(theta, 4, ProblemKind.XI)
    s3 = disk_ops.S3.symmetrized()
    with pytest.raises(DataError):
        spectrum(s3, 2)
    assert spectrum(s3, 2, ProblemKind.HARMONIC).kind is ProblemKind.HARMONIC


def test_composite_operators_are_nearly_symmetric_on_kite(kite):
    ops = assemble_boundary_ops(kite, build_quadrature(kite, 128))
    for kind in (ProblemKind.THETA, ProblemKind.XI, ProblemKind.PI):
        assert assemble_operator(kind, ops).raw_asymmetry < 1e-6


def test_xi_minus_pi_is_curvature_on_kite(kite_ops):
    xi = assemble_operator(ProblemKind.XI, kite_ops)
    pi = assemble_operator(ProblemKind.PI, kite_ops)
    np.testing.assert_allclose(xi.matrix - pi.matrix, np.diag(kite_ops.grid.curvature), atol=1e-9)
    assert xi.is_symmetrized and xi.raw_asymmetry is not None


def test_cauchy_data_from_traces(disk_ops):
    t = disk_ops.grid.t
    phi = np.cos(2 * t)
    cd = cauchy_data_from_trace(ProblemKind.XI, phi, 6.0, disk_ops)
    np.testing.assert_allclose(cd.u, 0.0)
    np.testing.assert_allclose(cd.lap_u, 6 * phi)
    np.testing.assert_allclose(cd.dn_lap_u, 12 * phi, atol=1e-9)

    lam = np.cbrt(24.0)
    cd = cauchy_data_from_trace(ProblemKind.THETA, phi, lam, disk_ops)
    np.testing.assert_allclose(cd.lap_u, -12 * phi, atol=1e-8)
    np.testing.assert_allclose(cd.dn_lap_u, -24 * phi, rtol=1e-12)

    cd = cauchy_data_from_trace(ProblemKind.PI, phi, 5.0, disk_ops)
    np.testing.assert_allclose(cd.lap_u, 6 * phi, atol=1e-12)


def test_boundary_energies(disk_ops):
    t = disk_ops.grid.t
    phi = np.cos(2 * t)
    xi = cauchy_data_from_trace(ProblemKind.XI, phi, 6.0, disk_ops)
    theta = cauchy_data_from_trace(ProblemKind.THETA, phi, np.cbrt(24.0), disk_ops)
    assert boundary_energy(xi) == pytest.approx(6 * np.pi, rel=1e-10)
    assert boundary_energy(theta) == pytest.approx(24 * np.pi, rel=1e-8)
    assert boundary_energy(xi.scaled(2.0)) == pytest.approx(24 * np.pi, rel=1e-10)


def test_reciprocity_between_modes(kite_ops):
    sol = solve_problem(ProblemKind.XI, kite_ops, 6)
    a = cauchy_data(ProblemKind.XI, sol.spectrum.pairs[1], kite_ops)
    b = sol.cauchy_data(4, kite_ops)
    assert reciprocity_residual(a, b) < 1e-6


def test_mixed_reciprocity_on_disk(disk_ops):
    phi = np.cos(2 * disk_ops.grid.t)
    a = cauchy_data_from_trace(ProblemKind.THETA, phi, np.cbrt(24.0), disk_ops)
    b = cauchy_data_from_trace(ProblemKind.XI, phi, 6.0, disk_ops)
    assert mixed_reciprocity(a, b) < 1e-8


def test_norms(disk_ops):
    grid = disk_ops.grid
    t = grid.t
    assert lp_norm(grid, np.cos(t), 2) == pytest.approx(np.sqrt(np.pi))
    assert lp_norm(grid, np.cos(t), np.inf) == pytest.approx(1.0)
    assert l1_l2_ratio(grid, np.cos(t)) == pytest.approx(4.0 / np.sqrt(np.pi), rel=5e-3)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_norm_equivalence_on_disk(disk_ops, k):
    t = disk_ops.grid.t
    mu = 2.0 * k * k * (k + 1)
    cd = cauchy_data_from_trace(ProblemKind.THETA, np.cos(k * t), np.cbrt(mu), disk_ops)
    expected = 2.0 * k * (k + 1) / mu ** (2.0 / 3.0)
    assert norm_equivalence(ProblemKind.THETA, cd, np.cbrt(mu), 2.0) == pytest.approx(expected, rel=1e-8)
    cd = cauchy_data_from_trace(ProblemKind.XI, np.cos(k * t), 2.0 * (k + 1), disk_ops)
    assert norm_equivalence(ProblemKind.XI, cd, 2.0 * (k + 1), 2.0) == pytest.approx(1.0)
    with pytest.raises(DataError):
        norm_equivalence(ProblemKind.XI, cd, 1.0, 0.5)


def test_spectrum_exports(disk_ops, tmp_path):
    spec = solve_problem(ProblemKind.XI, disk_ops, 5).spectrum
    data = json.loads(spec.write_json(tmp_path / "xi.json").read_text())
    assert data["problem"] == "xi" and data["domain"] == "disk" and data["N"] == 64
    np.testing.assert_allclose(data["eigenvalues"], [2, 4, 4, 6, 6], rtol=1e-8)
    rows = (tmp_path / "traces.csv")
    spec.write_traces(rows)
    lines = rows.read_text().splitlines()
    assert lines[0].split(",") == ["t"] + [f"phi_{i}" for i in range(5)]
    assert len(lines) == 65
