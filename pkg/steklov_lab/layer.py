"""Nyström discretisation of the boundary layer operators and the potentials L1-L4.

Boundary operators act on nodal values of a density f:

    S3 f = int f E_hat,   S2 f = int f dn_E_hat,   S1 f = int f lap_E_hat,
    N f  = int f dn_lap_E_hat,   Lambda = Dirichlet-to-Neumann map.

Log-singular kernels use the Kress product quadrature. Operators are assembled
natively on a doubled grid and brought back to the N nodes by the Galerkin
restriction W^-1 P^T W_2N M P, with P the trigonometric interpolation from N
to 2N nodes. The restriction keeps the weighted symmetry of the fine matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import circulant, lu_factor, lu_solve
from scipy.signal import resample

from .errors import CollarPointError, DataError, IllConditionedError
from .geometry import (
    TWO_PI,
    BoundaryCurve,
    Location,
    QuadratureGrid,
    TrigInterpolant,
    classify_points,
    resample_periodic,
)
from .kernels import Kernel, kernel_values, split_kernel

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
DEFAULT_JUMP_DISTANCES = (0.04, 0.032, 0.024, 0.016, 0.008)
JUMP_UPSAMPLE = 64
COLLAR_FLOOR_FACTOR = 5.0
POINT_CHUNK = 256

LAYER_KERNELS = {
    "S1": Kernel.LAP_E_HAT,
    "S2": Kernel.DN_E_HAT,
    "S3": Kernel.E_HAT,
    "N": Kernel.DN_LAP_E_HAT,
}


def kress_weights(n: int) -> NDArray:
    """Product-quadrature matrix R with R[i, j] = R(t_i - t_j) for log(4 sin^2)."""
    half = n // 2
    tau = TWO_PI * np.arange(n) / n
    m = np.arange(1, half)
    column = -(TWO_PI / half) * (np.cos(np.outer(tau, m)) / m).sum(axis=1)
    column -= (np.pi / half**2) * np.cos(half * tau)
    return circulant(column)


def interpolation_matrix(n: int, m: int) -> NDArray:
    """Matrix of trigonometric interpolation from n to m equispaced nodes."""
    return resample(np.eye(n), m, axis=0)


def assemble_kernel(which: Kernel, curve: BoundaryCurve, n: int) -> NDArray:
    """Native N x N Nyström matrix of f -> int K(x_i, y) f(y) ds(y)."""
    split = split_kernel(which, curve, n)
    speed = split.speed[None, :]
    matrix = split.k2 * speed * (TWO_PI / n)
    if np.any(split.k1):
        matrix += kress_weights(n) * split.k1 * speed
    return matrix


def galerkin_restriction(
    matrix: NDArray, prolongation: NDArray, fine_weights: NDArray, weights: NDArray
) -> NDArray:
    """W^-1 P^T W_fine M P: the coarse matrix acting on trigonometric interpolants."""
    return (prolongation.T @ (fine_weights[:, None] * matrix) @ prolongation) / weights[:, None]


@dataclass(frozen=True)
class DiscreteOperator:
    """Nodal matrix of a boundary operator with its arclength weights.

    Attributes:
        name: Operator label (S1, S2, S3, N, Lambda, theta, Theta, Xi, Pi).
        matrix: (N, N) array mapping nodal values to nodal values.
        weights: Arclength quadrature weights w_j.
        is_symmetrized: True once replaced by the symmetric part of its
            weight conjugation.
        raw_asymmetry: Asymmetry measured before symmetrisation.
        condition_number: Condition number of the system solved to build it.
    """

    name: str
    matrix: NDArray
    weights: NDArray
    is_symmetrized: bool = False
    raw_asymmetry: Optional[float] = None
    condition_number: Optional[float] = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, f: ArrayLike) -> NDArray:
        return self.matrix @ np.asarray(f, dtype=float)

    def conjugated(self) -> NDArray:
        root = np.sqrt(self.weights)
        return root[:, None] * self.matrix / root[None, :]

    @property
    def asymmetry(self) -> float:
        a = self.conjugated()
        return float(np.linalg.norm(a - a.T) / np.linalg.norm(a))

    def symmetrized(self) -> "DiscreteOperator":
        a = self.conjugated()
        sym = 0.5 * (a + a.T)
        root = np.sqrt(self.weights)
        return replace(
            self,
            matrix=sym / root[:, None] * root[None, :],
            is_symmetrized=True,
            raw_asymmetry=self.asymmetry,
        )

    def multiplier(self, k: int, parity: str = "cos") -> float:
        """Rayleigh quotient of trig(k t) in the weighted inner product."""
        t = TWO_PI * np.arange(self.n) / self.n
        f = np.cos(k * t) if parity == "cos" else np.sin(k * t)
        return float(np.dot(self.weights * f, self.apply(f)) / np.dot(self.weights * f, f))

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        np.savetxt(path, self.matrix, delimiter=",", fmt="%.17g")
        return path


@dataclass(frozen=True)
class BoundaryOperators:
    curve: BoundaryCurve
    grid: QuadratureGrid
    S1: DiscreteOperator
    S2: DiscreteOperator
    S3: DiscreteOperator
    N: DiscreteOperator
    Lambda: DiscreteOperator
    bordered_condition: float
    fine: Optional["BoundaryOperators"] = field(default=None, repr=False)
    prolongation: Optional[NDArray] = field(default=None, repr=False)

    @property
    def assembly(self) -> "BoundaryOperators":
        """Operators that composite operators are built from (the doubled grid when present)."""
        return self.fine if self.fine is not None else self

    def restrict(self, matrix: NDArray) -> NDArray:
        """Bring a matrix built on ``assembly`` back to these nodes."""
        if self.fine is None:
            return matrix
        return galerkin_restriction(matrix, self.prolongation, self.fine.grid.weights, self.grid.weights)

    def as_dict(self) -> Dict[str, DiscreteOperator]:
        return {
            "S1": self.S1,
            "S2": self.S2,
            "S3": self.S3,
            "N": self.N,
            "Lambda": self.Lambda,
        }


def dirichlet_to_neumann(curve: BoundaryCurve, grid: QuadratureGrid) -> Tuple[NDArray, float]:
    """Lambda via a harmonic single layer with a bordered mean-zero constraint.

    The extension u = S sigma + c solves [[S, 1], [w^T, 0]] [sigma; c] = [f; 0],
    and Lambda f is the interior normal derivative (D' - I/2) sigma.
    """
    n = grid.n
    single = assemble_kernel(Kernel.E, curve, n)
    bordered = np.zeros((n + 1, n + 1))
    bordered[:n, :n] = single
    bordered[:n, n] = 1.0
    bordered[n, :n] = grid.weights
    cond = float(np.linalg.cond(bordered))
    if cond > CONDITION_LIMIT:
        raise IllConditionedError("bordered single-layer system is singular", cond)
    rhs = np.zeros((n + 1, n))
    rhs[:n] = np.eye(n)
    density = lu_solve(lu_factor(bordered), rhs)[:n]
    adjoint = assemble_kernel(Kernel.DN_X_E, curve, n)
    return (adjoint - 0.5 * np.eye(n)) @ density, cond


def assemble_boundary_ops(
    curve: BoundaryCurve, grid: QuadratureGrid, *, anti_alias: bool = True
) -> BoundaryOperators:
    """Assemble S1, S2, S3, N and Lambda on the nodes of ``grid``.

    With ``anti_alias`` the operators are assembled on 2N nodes and restricted,
    and the doubled set is kept on ``fine`` for building composite operators.
    Modes below N/2 are reproduced; the Nyquist mode carries half its multiplier.
    """
    if grid.n < 32:
        raise DataError(f"boundary operators need N ≥ 32 (got {grid.n})")
    if not anti_alias:
        ops = {
            name: DiscreteOperator(name, assemble_kernel(kernel, curve, grid.n), grid.weights)
            for name, kernel in LAYER_KERNELS.items()
        }
        dtn, cond = dirichlet_to_neumann(curve, grid)
        ops["Lambda"] = DiscreteOperator("Lambda", dtn, grid.weights, condition_number=cond)
        return BoundaryOperators(curve=curve, grid=grid, bordered_condition=cond, **ops)

    fine = assemble_boundary_ops(curve, grid.upsample(2), anti_alias=False)
    prolongation = interpolation_matrix(grid.n, fine.grid.n)
    cond = fine.bordered_condition
    ops = {
        name: replace(
            op,
            matrix=galerkin_restriction(op.matrix, prolongation, fine.grid.weights, grid.weights),
            weights=grid.weights,
        )
        for name, op in fine.as_dict().items()
    }
    for name, op in ops.items():
        logger.info(
            "assembled %s on %s N=%d asymmetry=%.3e",
            name,
            curve.descriptor,
            grid.n,
            op.asymmetry,
        )
    return BoundaryOperators(
        curve=curve,
        grid=grid,
        bordered_condition=cond,
        fine=fine,
        prolongation=prolongation,
        **ops,
    )


# --- off-boundary potentials ------------------------------------------------


@dataclass(frozen=True)
class PotentialField:
    """L1..L4 of the given densities at a batch of points."""

    points: NDArray
    locations: NDArray
    L1: NDArray
    L2: NDArray
    L3: NDArray
    L4: NDArray


def _as_densities(densities, n: int) -> Tuple[NDArray, NDArray, NDArray, NDArray]:
    arr = np.asarray(densities, dtype=float)
    if arr.ndim == 1:
        arr = np.broadcast_to(arr, (4, arr.size))
    if arr.shape != (4, n):
        raise DataError(f"expected one or four densities of length {n}, got shape {arr.shape}")
    return tuple(arr)


def eval_potentials(
    densities: Union[ArrayLike, Sequence[ArrayLike]],
    points: ArrayLike,
    grid: QuadratureGrid,
    *,
    upsample: int = 1,
    delta: Optional[float] = None,
) -> PotentialField:
    """Plain quadrature of L1..L4 at points off the boundary.

    Args:
        densities: One density used for all four potentials, or four densities
            (for L1, L2, L3, L4) as nodal values on ``grid``.
        points: (P, 2) evaluation points, or a single point.
        grid: Quadrature grid the densities live on.
        upsample: Spectral refinement factor applied to the densities first.
        delta: Collar width; defaults to two fine node spacings.

    Raises:
        CollarPointError: if a point lies within ``delta`` of the boundary.
    """
    fine = grid.upsample(upsample) if upsample > 1 else grid
    delta = 2.0 * fine.spacing if delta is None else delta
    dens = [resample_periodic(f, fine.n) * fine.weights for f in _as_densities(densities, grid.n)]
    points = np.atleast_2d(np.asarray(points, dtype=float))
    locations, distance = classify_points(grid.curve, points, delta)
    if np.any(locations == Location.COLLAR):
        worst = float(distance[locations == Location.COLLAR].min())
        raise CollarPointError(
            f"potential requested at distance {worst:.3e} from the boundary (collar {delta:.3e})"
        )
    out = np.empty((4, len(points)))
    for start in range(0, len(points), POINT_CHUNK):
        sl = slice(start, start + POINT_CHUNK)
        k = kernel_values(points[sl, None, :], fine.points[None, :, :], fine.normals[None, :, :])
        out[0, sl] = k.E_hat @ dens[0]
        out[1, sl] = k.dn_E_hat @ dens[1]
        out[2, sl] = k.lap_E_hat @ dens[2]
        out[3, sl] = k.dn_lap_E_hat @ dens[3]
    return PotentialField(points, locations, *out)


# --- jump relations ---------------------------------------------------------


@dataclass(frozen=True)
class JumpReport:
    t: float
    distances: Tuple[float, ...]
    density: float
    interior: Dict[str, float]
    exterior: Dict[str, float]
    expected: Dict[str, float]
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "distances": list(self.distances),
            "density": self.density,
            "interior": self.interior,
            "exterior": self.exterior,
            "expected": self.expected,
            "residuals": self.residuals,
        }


def _extrapolate(distances: NDArray, values: NDArray) -> float:
    degree = min(len(distances) - 1, 4)
    return float(np.polynomial.polynomial.polyfit(distances, values, degree)[0])


def jump_test(
    curve: BoundaryCurve,
    grid: QuadratureGrid,
    f: ArrayLike,
    t: float,
    distances: Sequence[float] = DEFAULT_JUMP_DISTANCES,
    *,
    ops: Optional[BoundaryOperators] = None,
    upsample: int = JUMP_UPSAMPLE,
) -> JumpReport:
    """Approach x(t) along the normal from both sides and extrapolate to s = 0.

    L4 must tend to +-f/2 + Nf (interior +, exterior -); L1, L2 and L3 must be
    continuous with boundary values S3 f, S2 f and S1 f.
    """
    f = np.asarray(f, dtype=float)
    s = np.asarray(sorted(distances, reverse=True), dtype=float)
    if len(s) < 2:
        raise DataError("jump test needs at least two distances")
    fine_spacing = grid.spacing / upsample
    if s.min() < COLLAR_FLOOR_FACTOR * fine_spacing:
        raise DataError(
            f"smallest distance {s.min():.3e} is below {COLLAR_FLOOR_FACTOR:g}× "
            f"the fine node spacing {fine_spacing:.3e}"
        )
    ops = ops or assemble_boundary_ops(curve, grid)
    sample = curve.sample(np.array([t]))
    base, normal = sample.points[0], sample.normals[0]
    inner = base - s[:, None] * normal
    outer = base + s[:, None] * normal
    field_in = eval_potentials(f, inner, grid, upsample=upsample, delta=0.5 * s.min())
    field_out = eval_potentials(f, outer, grid, upsample=upsample, delta=0.5 * s.min())

    def nodal(values: NDArray) -> float:
        return float(TrigInterpolant(values)(t))

    density = nodal(f)
    boundary = {
        "L1": nodal(ops.S3.apply(f)),
        "L2": nodal(ops.S2.apply(f)),
        "L3": nodal(ops.S1.apply(f)),
    }
    nf = nodal(ops.N.apply(f))
    interior = {name: _extrapolate(s, getattr(field_in, name)) for name in ("L1", "L2", "L3", "L4")}
    exterior = {name: _extrapolate(s, getattr(field_out, name)) for name in ("L1", "L2", "L3", "L4")}
    expected = dict(boundary, L4_interior=0.5 * density + nf, L4_exterior=-0.5 * density + nf)

    residuals = {
        "L4_interior": abs(interior["L4"] - expected["L4_interior"]),
        "L4_exterior": abs(exterior["L4"] - expected["L4_exterior"]),
        "L4_jump": abs(interior["L4"] - exterior["L4"] - density),
    }
    for name in ("L1", "L2", "L3"):
        residuals[f"{name}_continuity"] = abs(interior[name] - exterior[name])
        residuals[f"{name}_boundary"] = abs(interior[name] - boundary[name])
    report = JumpReport(
        t=float(t),
        distances=tuple(float(v) for v in s),
        density=density,
        interior=interior,
        exterior=exterior,
        expected=expected,
        residuals=residuals,
    )
    logger.info("jump test %s t=%.4f max residual %.3e", curve.descriptor, t, report.max_residual)
    return report


