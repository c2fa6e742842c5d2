"""Biharmonic Steklov operators theta, Theta, Xi, Pi and their spectra.

For the Dirichlet datum f of a biharmonic u with zero Neumann datum,
(I/2 - N) f = (S2 - S3 Lambda) theta f and Theta = -Lambda theta. For the
Neumann datum f of a biharmonic u vanishing on the boundary,
S1 f = (S2 - S3 Lambda) Xi f and Pi = Xi - H.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import LinAlgError, eigh, solve

from .errors import DataError, EigenSolverError, IllConditionedError
from .geometry import QuadratureGrid
from .layer import CONDITION_LIMIT, BoundaryOperators, DiscreteOperator

logger = logging.getLogger(__name__)

ZERO_MODE_TOL = 1e-8
POSITIVITY_TOL = 1e-8


class ProblemKind(str, enum.Enum):
    THETA = "theta"
    XI = "xi"
    PI = "pi"
    HARMONIC = "harmonic"

    @property
    def operator_name(self) -> str:
        return {"theta": "Theta", "xi": "Xi", "pi": "Pi", "harmonic": "Lambda"}[self.value]

    @property
    def is_cubic(self) -> bool:
        return self is ProblemKind.THETA


OPERATOR_KINDS = {kind.operator_name: kind for kind in ProblemKind}


def _biharmonic_system(ops: BoundaryOperators) -> tuple:
    system = ops.S2.matrix - ops.S3.matrix @ ops.Lambda.matrix
    cond = float(np.linalg.cond(system))
    logger.info("cond(S2 - S3 Lambda) = %.3e on %s N=%d", cond, ops.curve.descriptor, ops.grid.n)
    if cond > CONDITION_LIMIT:
        raise IllConditionedError("S2 - S3 Lambda is too ill-conditioned to invert", cond)
    return system, cond


def _theta_matrix(base: BoundaryOperators) -> tuple:
    system, cond = _biharmonic_system(base)
    return solve(system, 0.5 * np.eye(base.grid.n) - base.N.matrix), cond


def assemble_theta_small(ops: BoundaryOperators) -> DiscreteOperator:
    """theta: Dirichlet datum -> boundary Laplacian of the biharmonic extension."""
    theta, cond = _theta_matrix(ops.assembly)
    return DiscreteOperator("theta", ops.restrict(theta), ops.grid.weights, condition_number=cond)


def assemble_operator(kind: Union[ProblemKind, str], ops: BoundaryOperators) -> DiscreteOperator:
    """Assemble the symmetrised operator of a problem kind.

    Theta and Xi are built on ``ops.assembly`` and restricted to the nodes of
    ``ops``; Pi is Xi minus the curvature at those nodes, so Xi - Pi = H holds
    exactly.

    Args:
        kind: THETA, XI, PI or HARMONIC.
        ops: Boundary operators on a common grid.

    Returns:
        The symmetrised DiscreteOperator; ``raw_asymmetry`` keeps the
        asymmetry before symmetrisation.
    """
    kind = ProblemKind(kind)
    weights = ops.grid.weights
    base = ops.assembly
    if kind is ProblemKind.THETA:
        theta, cond = _theta_matrix(base)
        raw = DiscreteOperator(
            "Theta",
            ops.restrict(-base.Lambda.matrix @ theta),
            weights,
            condition_number=cond,
        )
    elif kind is ProblemKind.HARMONIC:
        raw = ops.Lambda
    else:
        system, cond = _biharmonic_system(base)
        xi = ops.restrict(solve(system, base.S1.matrix))
        if kind is ProblemKind.PI:
            xi = xi - np.diag(ops.grid.curvature)
        raw = DiscreteOperator(kind.operator_name, xi, weights, condition_number=cond)
    op = raw.symmetrized()
    logger.info("%s asymmetry before symmetrisation %.3e", op.name, op.raw_asymmetry)
    return op


# --- spectra ----------------------------------------------------------------


@dataclass(frozen=True)
class EigenPair:
    """One eigenpair; ``phi`` is weight-normalised so that sum(w phi^2) = 1."""

    index: int
    mu: float
    lam: float
    phi: NDArray
    clamped: bool = False


@dataclass(frozen=True)
class Spectrum:
    kind: ProblemKind
    domain: str
    n: int
    pairs: List[EigenPair]
    asymmetry: Optional[float]
    condition_number: Optional[float]
    t: NDArray = field(repr=False, default=None)

    @property
    def eigenvalues(self) -> NDArray:
        return np.array([p.mu for p in self.pairs])

    @property
    def lambdas(self) -> NDArray:
        return np.array([p.lam for p in self.pairs])

    def to_dict(self) -> dict:
        return {
            "problem": self.kind.value,
            "domain": self.domain,
            "N": self.n,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "lambda": [float(v) for v in self.lambdas],
            "clamped": [p.index for p in self.pairs if p.clamped],
            "asymmetry": self.asymmetry,
            "condition_number": self.condition_number,
        }

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    def write_traces(self, path: Union[str, Path]) -> Path:
        """Eigenfunction traces as CSV columns over the boundary nodes."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"phi_{p.index}" for p in self.pairs])
            for j, t in enumerate(self.t):
                writer.writerow([f"{t:.17g}"] + [f"{p.phi[j]:.17g}" for p in self.pairs])
        return path


def spectrum(
    op: DiscreteOperator,
    count: int,
    kind: Optional[Union[ProblemKind, str]] = None,
    domain: str = "",
) -> Spectrum:
    """Lowest ``count`` eigenpairs of a symmetrised operator.

    The problem kind follows from ``op.name`` (Theta, Xi, Pi or Lambda); an
    explicit ``kind`` must agree with it.

    Raises:
        DataError: if the operator is not symmetrised, its name does not match
            ``kind`` or count exceeds N/8.
        EigenSolverError: if the dense symmetric eigensolver fails.
    """
    if not op.is_symmetrized:
        raise DataError(f"operator {op.name} must be symmetrised before the eigen-solve")
    named = OPERATOR_KINDS.get(op.name)
    if kind is None:
        if named is None:
            raise DataError(f"cannot tell the problem kind of operator {op.name}")
        kind = named
    kind = ProblemKind(kind)
    if named is not None and named is not kind:
        raise DataError(f"operator {op.name} does not belong to problem {kind.value}")
    if not 1 <= count <= op.n // 8:
        raise DataError(f"mode count must lie in [1, N/8 = {op.n // 8}] (got {count})")
    try:
        values, vectors = eigh(op.conjugated(), subset_by_index=[0, count - 1])
    except LinAlgError as e:
        raise EigenSolverError(f"eigensolver failed for {op.name}: {e}") from e

    root = np.sqrt(op.weights)
    pairs = []
    for i, (mu, v) in enumerate(zip(values, vectors.T)):
        mu = float(mu)
        clamped = abs(mu) < ZERO_MODE_TOL
        if clamped:
            logger.info("%s mode %d: |mu| = %.3e clamped to 0", op.name, i, abs(mu))
            mu = 0.0
        elif mu < -POSITIVITY_TOL and kind in (ProblemKind.THETA, ProblemKind.XI):
            logger.warning("%s mode %d has negative eigenvalue %.6e", op.name, i, mu)
        phi = v / root
        if phi[np.argmax(np.abs(phi))] < 0:
            phi = -phi
        lam = float(np.cbrt(mu)) if kind.is_cubic else mu
        pairs.append(EigenPair(index=i, mu=mu, lam=lam, phi=phi, clamped=clamped))
    logger.info("%s: %d eigenpairs, lowest %.6g", op.name, count, pairs[0].mu)
    n = op.n
    return Spectrum(
        kind=kind,
        domain=domain,
        n=n,
        pairs=pairs,
        asymmetry=op.raw_asymmetry,
        condition_number=op.condition_number,
        t=2.0 * np.pi * np.arange(n) / n,
    )


# --- Cauchy data --------------------------------------------------------------


@dataclass(frozen=True)
class CauchyData:
    """Boundary quadruple (u, d_nu u, Delta u, d_nu Delta u) at the grid nodes."""

    grid: QuadratureGrid
    u: NDArray
    dn_u: NDArray
    lap_u: NDArray
    dn_lap_u: NDArray

    def scaled(self, factor: float) -> "CauchyData":
        return CauchyData(
            self.grid,
            factor * self.u,
            factor * self.dn_u,
            factor * self.lap_u,
            factor * self.dn_lap_u,
        )


def cauchy_data_from_trace(
    kind: Union[ProblemKind, str],
    phi: ArrayLike,
    lam: float,
    ops: BoundaryOperators,
    theta: Optional[DiscreteOperator] = None,
) -> CauchyData:
    """Cauchy data of the eigenfunction whose boundary trace is ``phi``.

    ``phi`` is e on the boundary for THETA and HARMONIC, and d_nu e for XI/PI.
    """
    kind = ProblemKind(kind)
    phi = np.asarray(phi, dtype=float)
    zero = np.zeros_like(phi)
    lam_op = ops.Lambda.matrix
    if kind is ProblemKind.THETA:
        theta = theta or assemble_theta_small(ops)
        return CauchyData(ops.grid, phi, zero, theta.apply(phi), -(lam**3) * phi)
    if kind is ProblemKind.HARMONIC:
        return CauchyData(ops.grid, phi, lam * phi, zero, zero.copy())
    lap = lam * phi
    if kind is ProblemKind.PI:
        lap = lap + ops.grid.curvature * phi
    return CauchyData(ops.grid, zero, phi, lap, lam_op @ lap)


def cauchy_data(
    kind: Union[ProblemKind, str],
    pair: EigenPair,
    ops: BoundaryOperators,
    theta: Optional[DiscreteOperator] = None,
) -> CauchyData:
    return cauchy_data_from_trace(kind, pair.phi, pair.lam, ops, theta)


# --- Green identities and diagnostics -----------------------------------------


def boundary_energy(cd: CauchyData) -> float:
    """Boundary side of int_M (Delta u)^2 = int (d_nu u Delta u - u d_nu Delta u)."""
    return cd.grid.integrate(cd.dn_u * cd.lap_u - cd.u * cd.dn_lap_u)


def _reciprocity_terms(a: CauchyData, b: CauchyData) -> NDArray:
    return np.array(
        [
            a.grid.integrate(a.dn_lap_u * b.u),
            -a.grid.integrate(a.lap_u * b.dn_u),
            a.grid.integrate(a.dn_u * b.lap_u),
            -a.grid.integrate(a.u * b.dn_lap_u),
        ]
    )


def reciprocity_residual(a: CauchyData, b: CauchyData) -> float:
    """Boundary integral of the biharmonic reciprocity pairing; zero in theory."""
    return float(abs(_reciprocity_terms(a, b).sum()))


def mixed_reciprocity(a: CauchyData, b: CauchyData) -> float:
    """Reciprocity residual relative to the largest individual term."""
    terms = _reciprocity_terms(a, b)
    scale = float(np.abs(terms).max())
    return float(abs(terms.sum()) / scale) if scale > 0 else 0.0


def lp_norm(grid: QuadratureGrid, values: ArrayLike, p: float) -> float:
    values = np.abs(np.asarray(values, dtype=float))
    if np.isinf(p):
        return float(values.max())
    return grid.integrate(values**p) ** (1.0 / p)


def norm_equivalence(
    kind: Union[ProblemKind, str], cd: CauchyData, lam: float, p: float = 2.0
) -> float:
    """||Delta e||_p / (lam^2 ||e||_p) for THETA and ||Delta e||_p / (lam ||d_nu e||_p) otherwise.

    Both ratios stay bounded above and below as lam grows; on the disk the
    THETA ratio tends to 2^(1/3) and the XI ratio to 1.
    """
    kind = ProblemKind(kind)
    if p < 1:
        raise DataError(f"norm exponent must be ≥ 1 (got {p})")
    lap = lp_norm(cd.grid, cd.lap_u, p)
    if kind is ProblemKind.THETA:
        return lap / (lam**2 * lp_norm(cd.grid, cd.u, p))
    return lap / (lam * lp_norm(cd.grid, cd.dn_u, p))


def l1_l2_ratio(grid: QuadratureGrid, phi: ArrayLike) -> float:
    """||phi||_1 / ||phi||_2 on the boundary."""
    return lp_norm(grid, phi, 1.0) / lp_norm(grid, phi, 2.0)


@dataclass(frozen=True)
class Solution:
    kind: ProblemKind
    operator: DiscreteOperator
    theta: Optional[DiscreteOperator]
    spectrum: Spectrum

    def cauchy_data(self, index: int, ops: BoundaryOperators) -> CauchyData:
        return cauchy_data(self.kind, self.spectrum.pairs[index], ops, self.theta)


def solve_problem(
    kind: Union[ProblemKind, str], ops: BoundaryOperators, count: int
) -> Solution:
    """Operator plus spectrum, sharing theta between the two when needed."""
    kind = ProblemKind(kind)
    theta = assemble_theta_small(ops) if kind is ProblemKind.THETA else None
    op = assemble_operator(kind, ops)
    spec = spectrum(op, count, kind, domain=ops.curve.descriptor)
    return Solution(kind=kind, operator=op, theta=theta, spectrum=spec)
