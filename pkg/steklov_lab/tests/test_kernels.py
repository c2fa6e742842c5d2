# tests/test_kernels.py

import numpy as np
import pytest

from steklov_lab.errors import CoincidentPointsError, DataError
from steklov_lab.geometry import build_quadrature
from steklov_lab.kernels import (
    Kernel,
    kernel_gradients,
    kernel_values,
    principal_symbol,
    split_kernel,
    symbol_q,
    symbol_q_numeric,
)

X = np.array([0.1, -0.2])
Y = np.array([0.7, 0.4])
NU = np.array([0.6, 0.8])


def test_kernel_values_at_unit_distance():
    k = kernel_values([0.0, 0.0], [1.0, 0.0], [1.0, 0.0])
    assert k.E == pytest.approx(0.0)
    assert k.E_hat == pytest.approx(0.0)
    assert k.lap_E_hat == pytest.approx(1.0 / (2 * np.pi))
    assert k.dn_E_hat == pytest.approx(1.0 / (8 * np.pi))
    assert k.dn_lap_E_hat == pytest.approx(1.0 / (2 * np.pi))


def test_coincident_points_raise():
    with pytest.raises(CoincidentPointsError):
        kernel_values([[0.0, 0.0], [1.0, 1.0]], [[0.5, 0.5], [1.0, 1.0]], [1.0, 0.0])


def _fd_gradient(name, h=1e-6):
    grad = np.zeros(2)
    for i in range(2):
        step = np.zeros(2)
        step[i] = h
        plus = getattr(kernel_values(X + step, Y, NU), name)
        minus = getattr(kernel_values(X - step, Y, NU), name)
        grad[i] = (plus - minus) / (2 * h)
    return grad


@pytest.mark.parametrize("name", ["E", "E_hat", "lap_E_hat", "dn_E_hat", "dn_lap_E_hat"])
def test_gradients_match_finite_differences(name):
    analytic = getattr(kernel_gradients(X, Y, NU), name)
    np.testing.assert_allclose(analytic, _fd_gradient(name), rtol=1e-6, atol=1e-9)


def test_laplacian_of_biharmonic_kernel():
    """The five-point Laplacian of E_hat in x reproduces lap_E_hat."""
    h = 1e-3
    e = lambda p: kernel_values(p, Y, NU).E_hat
    lap = (
        e(X + [h, 0]) + e(X - [h, 0]) + e(X + [0, h]) + e(X - [0, h]) - 4 * e(X)
    ) / h**2
    assert lap == pytest.approx(kernel_values(X, Y, NU).lap_E_hat, rel=1e-5)


@pytest.mark.parametrize("which", [Kernel.E, Kernel.E_HAT, Kernel.LAP_E_HAT, Kernel.DN_E_HAT, Kernel.DN_LAP_E_HAT])
def test_split_kernel_reassembles_off_diagonal(kite, which):
    grid = build_quadrature(kite, 32)
    split = split_kernel(which, kite, 32)
    off = ~np.eye(32, dtype=bool)
    direct = _offdiag(grid, which.value)
    np.testing.assert_allclose(split.values()[off], direct[off], rtol=1e-10, atol=1e-13)


def _offdiag(grid, attr):
    n = grid.n
    out = np.zeros((n, n))
    for i in range(n):
        others = np.delete(np.arange(n), i)
        k = kernel_values(grid.points[i], grid.points[others], grid.normals[others])
        out[i, others] = getattr(k, attr)
    return out


def test_double_layer_diagonal_is_curvature_limit(disk):
    split = split_kernel(Kernel.DN_LAP_E_HAT, disk, 32)
    np.testing.assert_allclose(np.diag(split.k2), 1.0 / (4 * np.pi))


@pytest.mark.parametrize("xi", [0.5, 1.0, 4.0])
def test_closed_form_symbols_at_boundary(xi):
    assert symbol_q(3, 0.0, xi) == pytest.approx(0.25 * xi**-3)
    assert symbol_q(1, 0.0, xi) == pytest.approx(-0.5 / xi)
    assert symbol_q(2, 0.0, xi) == 0.0


@pytest.mark.parametrize(
    "j, x_n, xi", [(3, 0.0, 1.0), (3, 0.1, 2.0), (1, 0.1, 2.0), (1, 1.0, 0.5), (2, 1.0, 0.5), (2, 0.1, 4.0)]
)
def test_numeric_symbols_match_closed_form(j, x_n, xi, criteria):
    result = symbol_q_numeric(j, x_n, xi)
    assert result.value == pytest.approx(symbol_q(j, x_n, xi), abs=criteria["symbol_abs"])
    assert abs(result.imag) < 1e-8
    assert result.cutoff == pytest.approx(200 * xi)


def test_symbol_validation():
    with pytest.raises(DataError):
        symbol_q(4, 0.0, 1.0)
    with pytest.raises(DataError):
        symbol_q_numeric(1, 0.0, 0.0)


def test_principal_symbols():
    assert principal_symbol("Theta", 2.0) == pytest.approx(16.0)
    assert principal_symbol("Xi", 3.0) == pytest.approx(6.0)
    np.testing.assert_allclose(principal_symbol("S3", [1.0, 2.0]), [0.25, 0.25 / 8])
    with pytest.raises(DataError):
        principal_symbol("Q", 1.0)
