"""Closed-form unit-disk eigenvalues, eigenfunctions and Fourier multipliers.

Disk modes are u = (a + b r^2) h_k with h_k = Re z^k (cos parity) or Im z^k
(sin parity), so that Delta u = 4 b (k + 1) h_k.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DataError
from .steklov import ProblemKind

logger = logging.getLogger(__name__)

PARITIES = ("cos", "sin")


@dataclass(frozen=True)
class DiskMode:
    kind: ProblemKind
    k: int
    parity: str
    a: float
    b: float


def _check_index(k: int) -> None:
    if k < 0 or int(k) != k:
        raise DataError(f"angular index must be a non-negative integer (got {k})")


def disk_mode(kind: Union[ProblemKind, str], k: int, parity: str = "cos") -> DiskMode:
    kind = ProblemKind(kind)
    _check_index(k)
    if parity not in PARITIES:
        raise DataError(f"parity must be 'cos' or 'sin' (got {parity!r})")
    if kind is ProblemKind.THETA:
        a, b = (k + 2) / 2.0, -k / 2.0
    elif kind is ProblemKind.HARMONIC:
        a, b = 1.0, 0.0
    else:
        a, b = -0.5, 0.5
    return DiskMode(kind, int(k), parity, a, b)


def oracle_eigenvalue(kind: Union[ProblemKind, str], k: int) -> Tuple[float, float]:
    """Physical eigenvalue lambda and raw operator eigenvalue mu of mode k."""
    kind = ProblemKind(kind)
    _check_index(k)
    if kind is ProblemKind.THETA:
        mu = 2.0 * k * k * (k + 1)
        return float(np.cbrt(mu)), mu
    if kind is ProblemKind.XI:
        lam = 2.0 * (k + 1)
    elif kind is ProblemKind.PI:
        lam = 2.0 * k + 1
    else:
        lam = float(k)
    return lam, lam


def oracle_spectrum(kind: Union[ProblemKind, str], count: int) -> List[Tuple[float, int, str]]:
    """Lowest ``count`` (mu, k, parity) triples in ascending order.

    k = 0 is simple; every k ≥ 1 contributes a cos and a sin mode.
    """
    modes: List[Tuple[float, int, str]] = []
    k = 0
    while len(modes) < count:
        mu = oracle_eigenvalue(kind, k)[1]
        for parity in PARITIES[: 1 if k == 0 else 2]:
            modes.append((mu, k, parity))
        k += 1
    return modes[:count]


def oracle_layer_multiplier(name: str, k: int) -> float:
    """Fourier multiplier of S1, S2, S3, N or Lambda on trig(k theta)."""
    _check_index(k)
    if name == "Lambda":
        return float(k)
    if name == "N":
        return 0.5 if k == 0 else 0.0
    if name == "S1":
        return 1.0 if k == 0 else -1.0 / (2 * k)
    if name in ("S2", "S3"):
        if k == 0:
            return 0.5 if name == "S2" else 0.25
        if k == 1:
            return -5.0 / 16.0 if name == "S2" else -3.0 / 16.0
        return 1.0 / (4.0 * k * (k * k - 1))
    raise DataError(f"unknown layer operator '{name}'")


def oracle_operator_multiplier(name: str, k: int) -> float:
    """Multiplier of any boundary operator, layer or Steklov, on trig(k theta)."""
    _check_index(k)
    if name == "theta":
        return -2.0 * k * (k + 1)
    if name == "Theta":
        return 2.0 * k * k * (k + 1)
    if name == "Xi":
        return 2.0 * (k + 1)
    if name == "Pi":
        return 2.0 * k + 1
    return oracle_layer_multiplier(name, k)


def _harmonic(k: int, parity: str, p: NDArray) -> Tuple[NDArray, NDArray]:
    """h_k and its gradient at points p (..., 2)."""
    z = p[..., 0] + 1j * p[..., 1]
    zk = z**k
    if k == 0:
        dz = np.zeros_like(z)
    else:
        dz = k * z ** (k - 1)
    if parity == "cos":
        h = zk.real
        grad = np.stack([dz.real, -dz.imag], axis=-1)
    else:
        h = zk.imag
        grad = np.stack([dz.imag, dz.real], axis=-1)
    return h, grad


def oracle_eval(
    kind: Union[ProblemKind, str], k: int, parity: str, p: ArrayLike
) -> Tuple[NDArray, NDArray, NDArray, NDArray]:
    """Exact (e, grad e, Delta e, grad Delta e) of a disk mode at points in the closed disk."""
    mode = disk_mode(kind, k, parity)
    p = np.asarray(p, dtype=float)
    r2 = np.einsum("...i,...i->...", p, p)
    if np.any(r2 > 1.0 + 1e-12):
        raise DataError("disk oracle evaluated outside the unit disk")
    h, grad_h = _harmonic(mode.k, parity, p)
    radial = mode.a + mode.b * r2
    lap_scale = 4.0 * mode.b * (mode.k + 1)
    e = radial * h
    grad_e = 2.0 * mode.b * h[..., None] * p + radial[..., None] * grad_h
    return e, grad_e, lap_scale * h, lap_scale * grad_h


def oracle_boundary_data(
    kind: Union[ProblemKind, str], k: int, parity: str, t: ArrayLike
) -> Tuple[NDArray, NDArray, NDArray, NDArray]:
    """Exact Cauchy data (u, d_nu u, Delta u, d_nu Delta u) on the unit circle."""
    mode = disk_mode(kind, k, parity)
    t = np.asarray(t, dtype=float)
    trig = np.cos(mode.k * t) if parity == "cos" else np.sin(mode.k * t)
    a, b = mode.a, mode.b
    lap_scale = 4.0 * b * (mode.k + 1)
    return (
        (a + b) * trig,
        (2.0 * b + mode.k * (a + b)) * trig,
        lap_scale * trig,
        lap_scale * mode.k * trig,
    )
