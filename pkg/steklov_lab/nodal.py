"""Interior fields, nodal and level sets, and the integration-by-parts identities.

The eigenfunction e is rebuilt from its Cauchy data with the biharmonic Green
representation; Delta e uses the harmonic representation with E. Level sets
are extracted by marching squares on the inside nodes of an InteriorGrid,
then joined to the boundary zeros across the excluded collar.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import PathPatch
from matplotlib.path import Path as MplPath
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from . import config
from .errors import DataError, InadmissibleLevelError
from .geometry import (
    TWO_PI,
    BoundaryCurve,
    InteriorGrid,
    QuadratureGrid,
    TrigInterpolant,
    build_quadrature,
    curve_from_spec,
    resample_periodic,
    tangential_laplacian,
)
from .kernels import kernel_gradients, kernel_values
from .oracle_disk import oracle_boundary_data, oracle_eval
from .steklov import CauchyData, ProblemKind, lp_norm

logger = logging.getLogger(__name__)

DIMENSION = 2
FIELD_CHUNK = 512
DEGENERATE_GRADIENT = 1e-12
REGULAR_VALUE_SHIFT = 1e-12
BRIDGE_REACH = 3.0
STRIP_ORDER = 16

Which = str  # "e" or "lap"


# --- field sources ------------------------------------------------------------


def _representation(
    points: NDArray, fine: QuadratureGrid, data: Tuple[NDArray, ...], which: Which, derivatives: bool
) -> Tuple[NDArray, Optional[NDArray]]:
    u, dn_u, lap_u, dn_lap_u = data
    y, nu = fine.points[None, :, :], fine.normals[None, :, :]
    x = points[:, None, :]
    k = kernel_values(x, y, nu)
    if which == "e":
        values = k.dn_lap_E_hat @ u - k.lap_E_hat @ dn_u + k.dn_E_hat @ lap_u - k.E_hat @ dn_lap_u
    else:
        values = k.dn_lap_E_hat @ lap_u - k.E @ dn_lap_u
    if not derivatives:
        return values, None
    g = kernel_gradients(x, y, nu)
    if which == "e":
        grad = (
            np.einsum("pmi,m->pi", g.dn_lap_E_hat, u)
            - np.einsum("pmi,m->pi", g.lap_E_hat, dn_u)
            + np.einsum("pmi,m->pi", g.dn_E_hat, lap_u)
            - np.einsum("pmi,m->pi", g.E_hat, dn_lap_u)
        )
    else:
        grad = np.einsum("pmi,m->pi", g.dn_E, lap_u) - np.einsum("pmi,m->pi", g.E, dn_lap_u)
    return values, grad


@dataclass(frozen=True)
class BemField:
    """Interior field reconstructed from boundary Cauchy data by quadrature."""

    cauchy: CauchyData
    upsample: int = config.FIELD_UPSAMPLE
    threads: int = config.THREADS
    provenance = "bem"

    @cached_property
    def fine(self) -> QuadratureGrid:
        grid = self.cauchy.grid
        return grid.upsample(self.upsample) if self.upsample > 1 else grid

    @cached_property
    def _weighted(self) -> Tuple[NDArray, ...]:
        cd = self.cauchy
        return tuple(
            resample_periodic(v, self.fine.n) * self.fine.weights
            for v in (cd.u, cd.dn_u, cd.lap_u, cd.dn_lap_u)
        )

    def evaluate(
        self, points: ArrayLike, which: Which = "e", derivatives: bool = False
    ) -> Tuple[NDArray, Optional[NDArray]]:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if len(points) == 0:
            return np.empty(0), (np.empty((0, 2)) if derivatives else None)
        chunks = [points[i : i + FIELD_CHUNK] for i in range(0, len(points), FIELD_CHUNK)]
        fine, data = self.fine, self._weighted

        def work(chunk: NDArray):
            return _representation(chunk, fine, data, which, derivatives)

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            results = list(pool.map(work, chunks))
        values = np.concatenate([r[0] for r in results])
        grads = np.concatenate([r[1] for r in results]) if derivatives else None
        return values, grads


@dataclass(frozen=True)
class OracleField:
    """Closed-form unit-disk mode, used as ground truth and for high modes."""

    kind: ProblemKind
    k: int
    parity: str = "cos"
    boundary_n: int = 256
    provenance = "disk-oracle"

    @cached_property
    def cauchy(self) -> CauchyData:
        grid = build_quadrature(curve_from_spec("disk"), self.boundary_n)
        return CauchyData(grid, *oracle_boundary_data(self.kind, self.k, self.parity, grid.t))

    def evaluate(
        self, points: ArrayLike, which: Which = "e", derivatives: bool = False
    ) -> Tuple[NDArray, Optional[NDArray]]:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        e, grad_e, lap, grad_lap = oracle_eval(self.kind, self.k, self.parity, points)
        if which == "e":
            return e, (grad_e if derivatives else None)
        return lap, (grad_lap if derivatives else None)


FieldSource = Union[BemField, OracleField]


@dataclass(frozen=True)
class ScalarField:
    """Field values on an InteriorGrid; NaN marks collar and outside nodes."""

    grid: InteriorGrid
    which: Which
    values: NDArray
    gradient: Optional[NDArray]
    source: FieldSource

    @property
    def provenance(self) -> str:
        return self.source.provenance

    def gradient_magnitude(self) -> NDArray:
        if self.gradient is None:
            raise DataError("field was evaluated without derivatives")
        return np.linalg.norm(self.gradient, axis=-1)

    def sup_norm(self) -> float:
        return float(np.nanmax(np.abs(self.values))) if np.any(self.grid.active) else 0.0


def _as_source(cd: Union[CauchyData, FieldSource], upsample: int, threads: int) -> FieldSource:
    if isinstance(cd, CauchyData):
        return BemField(cd, upsample=upsample, threads=threads)
    return cd


def field_on_grid(
    cd: Union[CauchyData, FieldSource],
    lam: float,
    grid: InteriorGrid,
    which: Which = "e",
    derivatives: bool = False,
    *,
    upsample: int = config.FIELD_UPSAMPLE,
    threads: int = config.THREADS,
) -> ScalarField:
    """Evaluate e or Delta e at the inside nodes of ``grid``.

    Args:
        cd: Cauchy data (BEM reconstruction) or a prepared field source.
        lam: Eigenvalue of the mode, kept with the field for reporting.
        grid: Interior lattice; collar and outside nodes stay NaN.
        which: "e" for the eigenfunction, "lap" for its Laplacian.
        derivatives: Also evaluate analytic-kernel gradients.
    """
    if which not in ("e", "lap"):
        raise DataError(f"field must be 'e' or 'lap' (got {which!r})")
    source = _as_source(cd, upsample, threads)
    if isinstance(source, BemField) and grid.delta < 2.0 * source.fine.spacing:
        raise DataError(
            f"collar {grid.delta:.3e} is narrower than twice the boundary node "
            f"spacing {source.fine.spacing:.3e}"
        )
    active = grid.active
    values = np.full(grid.shape, np.nan)
    gradient = np.full(grid.shape + (2,), np.nan) if derivatives else None
    v, g = source.evaluate(grid.active_points(), which, derivatives)
    values[active] = v
    if derivatives:
        gradient[active] = g
    logger.info(
        "%s field (%s) on %d nodes, lambda=%.6g, sup=%.4g",
        which,
        source.provenance,
        int(active.sum()),
        lam,
        float(np.max(np.abs(v))) if v.size else 0.0,
    )
    return ScalarField(grid, which, values, gradient, source)


def five_point_laplacian(field: ScalarField) -> NDArray:
    """Discrete Laplacian at nodes whose four neighbours all carry values."""
    v, h = field.values, field.grid.h
    out = np.full(v.shape, np.nan)
    out[1:-1, 1:-1] = (
        v[:-2, 1:-1] + v[2:, 1:-1] + v[1:-1, :-2] + v[1:-1, 2:] - 4.0 * v[1:-1, 1:-1]
    ) / (h * h)
    return out


# --- boundary zeros and signed integrals --------------------------------------


@dataclass(frozen=True)
class BoundaryZeros:
    alpha: float
    params: NDArray
    points: Optional[NDArray] = None

    @property
    def count(self) -> int:
        return int(self.params.size)


def boundary_zeros(
    trace: ArrayLike, alpha: float = 0.0, curve: Optional[BoundaryCurve] = None
) -> BoundaryZeros:
    """Parameters where the trigonometric interpolant of ``trace`` crosses alpha."""
    trace = np.asarray(trace, dtype=float)
    n = trace.size
    shifted = trace - alpha
    positive = shifted > 0
    changes = np.nonzero(positive != np.roll(positive, -1))[0]
    interp = TrigInterpolant(trace)
    t = TWO_PI * np.arange(n + 1) / n

    def g(s: float) -> float:
        return float(interp(s)) - alpha

    def root(j: int) -> float:
        a, b = t[j], t[j + 1]
        ga, gb = g(a), g(b)
        if ga == 0.0:
            return a
        if ga * gb > 0:
            # interpolant and nodal signs disagree at roundoff level
            fa, fb = shifted[j], shifted[(j + 1) % n]
            return a + (b - a) * fa / (fa - fb)
        return brentq(g, a, b, xtol=1e-15)

    params = np.array(sorted(root(j) % TWO_PI for j in changes))
    points = curve.point(params) if curve is not None and params.size else None
    return BoundaryZeros(alpha=alpha, params=params, points=points)


def signed_boundary_integral(
    grid: QuadratureGrid, g: ArrayLike, h: ArrayLike, alpha: float = 0.0
) -> float:
    """int sign(g - alpha) h ds, split at the zeros of g - alpha.

    Each piece is integrated with Gauss-Legendre on the trigonometric
    interpolants, so the result stays spectrally accurate although the sign
    factor jumps.
    """
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    zeros = boundary_zeros(g, alpha).params
    if zeros.size == 0:
        sign = 1.0 if g[0] > alpha else -1.0
        return sign * grid.integrate(h)
    g_interp, h_interp = TrigInterpolant(g), TrigInterpolant(h)
    edges = np.append(zeros, zeros[0] + TWO_PI)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        order = int(grid.n * (b - a) / TWO_PI) + 16
        nodes, weights = leggauss(order)
        s = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        speed = grid.curve.sample(s % TWO_PI).speed
        sign = 1.0 if g_interp(0.5 * (a + b)) > alpha else -1.0
        total += sign * 0.5 * (b - a) * float(np.dot(weights, h_interp(s) * speed))
    return total


def admissible_level_bound(
    trace: ArrayLike, grid: QuadratureGrid, lam: float, c: float = config.ADMISSIBILITY_C
) -> float:
    """c lam^((2-n)/4) ||trace||_L2(boundary); levels below it in modulus are admissible."""
    return c * lam ** ((2 - DIMENSION) / 4.0) * lp_norm(grid, trace, 2.0)


def _check_level(alpha: float, bound: float) -> None:
    if alpha != 0.0 and abs(alpha) >= bound:
        raise InadmissibleLevelError(f"level {alpha:g} is not admissible (|alpha| must be < {bound:.6g})")


# --- marching squares ---------------------------------------------------------


@dataclass(frozen=True)
class NodalGeometry:
    """Polyline level set with its measure and the collar bridges."""

    alpha: float
    alpha_used: float
    segments: NDArray
    edge_ids: NDArray
    raw_length: float
    length: float
    boundary_zero_count: int
    boundary_zeros: Tuple[float, ...]
    collar_cells: int
    saddle_cells: int
    components: int
    open_ends: NDArray
    bridges: NDArray
    bridge_params: Tuple[float, ...] = ()
    perturbed: bool = False

    @property
    def midpoints(self) -> NDArray:
        return 0.5 * (self.segments[:, 0] + self.segments[:, 1])

    @property
    def segment_lengths(self) -> NDArray:
        return np.linalg.norm(self.segments[:, 1] - self.segments[:, 0], axis=1)

    @property
    def is_empty(self) -> bool:
        return len(self.segments) == 0

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "alpha_used": self.alpha_used,
            "length": self.length,
            "raw_length": self.raw_length,
            "boundary_zero_count": self.boundary_zero_count,
            "boundary_zeros": list(self.boundary_zeros),
            "components": self.components,
            "collar_cells": self.collar_cells,
            "saddle_cells": self.saddle_cells,
            "bridges": [[float(v) for v in b.ravel()] for b in self.bridges],
            "segments": [[float(v) for v in s.ravel()] for s in self.segments],
        }

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    def component_labels(self) -> NDArray:
        if self.is_empty:
            return np.empty(0, dtype=int)
        _, inverse = np.unique(self.edge_ids, return_inverse=True)
        inverse = inverse.reshape(-1, 2)
        size = int(inverse.max()) + 1
        graph = coo_matrix((np.ones(len(inverse)), (inverse[:, 0], inverse[:, 1])), shape=(size, size))
        _, nodes = connected_components(graph, directed=False)
        return nodes[inverse[:, 0]]

    def write_svg(self, path: Union[str, Path], curve: BoundaryCurve) -> Path:
        """Stroke-only SVG: the domain outline plus one path per component."""
        path = Path(path)
        fig = Figure(figsize=(6, 6))
        ax = fig.add_subplot()
        outline = curve.point(np.linspace(0.0, TWO_PI, 721))
        ax.plot(outline[:, 0], outline[:, 1], color="black", linewidth=1.0)
        labels = self.component_labels()
        for label in np.unique(labels):
            segs = self.segments[labels == label]
            verts = segs.reshape(-1, 2)
            codes = np.tile([MplPath.MOVETO, MplPath.LINETO], len(segs))
            ax.add_patch(PathPatch(MplPath(verts, codes), fill=False, edgecolor="tab:blue", linewidth=0.8))
        for bridge in self.bridges:
            ax.plot(bridge[:, 0], bridge[:, 1], color="tab:red", linewidth=0.8)
        ax.set_aspect("equal")
        ax.set_axis_off()
        fig.savefig(path, format="svg", metadata={"Date": None})
        return path


def _edge_crossings(vals: NDArray, x: NDArray, y: NDArray, h: float):
    ny, nx = vals.shape
    with np.errstate(invalid="ignore", divide="ignore"):
        a, b = vals[:, :-1], vals[:, 1:]
        hc = np.isfinite(a) & np.isfinite(b) & ((a > 0) != (b > 0))
        hf = np.where(hc, a / (a - b), 0.0)
        a, b = vals[:-1, :], vals[1:, :]
        vc = np.isfinite(a) & np.isfinite(b) & ((a > 0) != (b > 0))
        vf = np.where(vc, a / (a - b), 0.0)
    hp = np.stack([x[None, :-1] + hf * h, np.broadcast_to(y[:, None], hf.shape)], axis=-1)
    vp = np.stack([np.broadcast_to(x[None, :], vf.shape), y[:-1, None] + vf * h], axis=-1)
    hid = np.arange(ny * (nx - 1)).reshape(ny, nx - 1)
    vid = ny * (nx - 1) + np.arange((ny - 1) * nx).reshape(ny - 1, nx)
    return (hc, hp, hid), (vc, vp, vid)


def _march(vals: NDArray, grid: InteriorGrid):
    (hc, hp, hid), (vc, vp, vid) = _edge_crossings(vals, grid.x, grid.y, grid.h)
    finite = np.isfinite(vals)
    corners = np.stack([finite[:-1, :-1], finite[:-1, 1:], finite[1:, 1:], finite[1:, :-1]])
    valid = corners.all(axis=0)
    partial = corners.any(axis=0) & ~valid
    # edge order per cell: bottom, right, top, left
    crossing = np.stack([hc[:-1, :], vc[:, 1:], hc[1:, :], vc[:, :-1]])
    count = crossing.sum(axis=0)

    segments: List[NDArray] = []
    ids: List[Tuple[int, int]] = []
    saddles = 0
    for j, i in np.argwhere(valid & (count > 0)):
        pts = (hp[j, i], vp[j, i + 1], hp[j + 1, i], vp[j, i])
        eids = (hid[j, i], vid[j, i + 1], hid[j + 1, i], vid[j, i])
        edges = np.nonzero(crossing[:, j, i])[0]
        if len(edges) == 2:
            pairs = [tuple(edges)]
        else:
            saddles += 1
            bl = vals[j, i] > 0
            centre = 0.25 * (vals[j, i] + vals[j, i + 1] + vals[j + 1, i + 1] + vals[j + 1, i]) > 0
            pairs = [(0, 1), (2, 3)] if centre == bl else [(3, 0), (1, 2)]
        for p, q in pairs:
            segments.append(np.array([pts[p], pts[q]]))
            ids.append((eids[p], eids[q]))
    if saddles:
        logger.info("marching squares resolved %d saddle cells by the cell average", saddles)
    segs = np.array(segments).reshape(-1, 2, 2)
    edge_ids = np.array(ids, dtype=int).reshape(-1, 2)
    return segs, edge_ids, int(saddles), int(partial.sum())


def _open_ends(segments: NDArray, edge_ids: NDArray) -> Tuple[int, NDArray]:
    if len(segments) == 0:
        return 0, np.empty((0, 2))
    unique, inverse, degree = np.unique(edge_ids, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1, 2)
    size = unique.size
    graph = coo_matrix((np.ones(len(inverse)), (inverse[:, 0], inverse[:, 1])), shape=(size, size))
    n_components, _ = connected_components(graph, directed=False)
    points = np.empty((size, 2))
    points[inverse.ravel()] = segments.reshape(-1, 2)
    return int(n_components), points[degree == 1]


def _match_bridges(
    ends: NDArray, zeros: BoundaryZeros, reach: float
) -> Tuple[NDArray, Tuple[float, ...]]:
    if zeros.count == 0 or len(ends) == 0 or zeros.points is None:
        return np.empty((0, 2, 2)), ()
    dist = cdist(zeros.points, ends)
    order = np.argsort(dist, axis=None, kind="stable")
    used_anchor, used_end = set(), set()
    bridges, params = [], []
    for flat in order:
        a, e = np.unravel_index(flat, dist.shape)
        if dist[a, e] > reach:
            break
        if a in used_anchor or e in used_end:
            continue
        used_anchor.add(a)
        used_end.add(e)
        bridges.append(np.array([zeros.points[a], ends[e]]))
        params.append(float(zeros.params[a]))
    return np.array(bridges).reshape(-1, 2, 2), tuple(params)


def level_set_extract(
    field: ScalarField, alpha: float = 0.0, anchors: Optional[BoundaryZeros] = None
) -> NodalGeometry:
    """Marching-squares level set {field = alpha} on the inside nodes.

    Args:
        field: Values on an InteriorGrid.
        alpha: Level; nudged by 1e-12 of the sup norm if a node hits it exactly.
        anchors: Boundary zeros the open polyline ends are bridged to across
            the collar. Without anchors ``length`` equals ``raw_length``.
    """
    values = field.values
    used = float(alpha)
    perturbed = False
    if np.any(values[np.isfinite(values)] == used):
        used = used + REGULAR_VALUE_SHIFT * max(field.sup_norm(), 1.0)
        perturbed = True
        logger.info("level %.6g hit a grid node exactly; using %.17g", alpha, used)
    segs, edge_ids, saddles, collar_cells = _march(values - used, field.grid)
    raw = float(np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1).sum()) if len(segs) else 0.0
    components, ends = _open_ends(segs, edge_ids)
    reach = field.grid.delta + BRIDGE_REACH * field.grid.h
    bridges, params = _match_bridges(ends, anchors, reach) if anchors is not None else (np.empty((0, 2, 2)), ())
    bridged = float(np.linalg.norm(bridges[:, 1] - bridges[:, 0], axis=1).sum()) if len(bridges) else 0.0
    return NodalGeometry(
        alpha=float(alpha),
        alpha_used=used,
        segments=segs,
        edge_ids=edge_ids,
        raw_length=raw,
        length=raw + bridged,
        boundary_zero_count=anchors.count if anchors is not None else 0,
        boundary_zeros=tuple(float(t) for t in anchors.params) if anchors is not None else (),
        collar_cells=collar_cells,
        saddle_cells=saddles,
        components=components,
        open_ends=ends,
        bridges=bridges,
        bridge_params=params,
        perturbed=perturbed,
    )


# --- identities ---------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    identity: str
    boundary_side: float
    interior_side: float
    residual: float
    ratio: Optional[float] = None
    skipped_segments: int = 0
    inconsistent: bool = False
    details: Dict[str, float] = field(default_factory=dict)
    geometry: Optional[NodalGeometry] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "boundary_side": self.boundary_side,
            "interior_side": self.interior_side,
            "residual": self.residual,
            "ratio": self.ratio,
            "skipped_segments": self.skipped_segments,
            "inconsistent": self.inconsistent,
            **self.details,
        }


def _relative(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def _bridge_integral(geometry: NodalGeometry, boundary_value, interior_value) -> float:
    """Trapezoid rule along each bridge between its boundary and interior ends."""
    if len(geometry.bridges) == 0:
        return 0.0
    lengths = np.linalg.norm(geometry.bridges[:, 1] - geometry.bridges[:, 0], axis=1)
    at_boundary = boundary_value(np.array(geometry.bridge_params))
    at_end = interior_value(geometry.bridges[:, 1])
    return float(np.dot(lengths, 0.5 * (at_boundary + at_end)))


def _boundary_sample(cd: CauchyData, trace: NDArray, t: NDArray, derivative: int = 0) -> NDArray:
    values = TrigInterpolant(trace)(t, derivative)
    if derivative:
        values = values / cd.grid.curve.sample(t).speed
    return values


def interior_ibp_residual(
    kind: Union[ProblemKind, str],
    cd: Union[CauchyData, FieldSource],
    lam: float,
    grid: InteriorGrid,
    alpha: float = 0.0,
    *,
    c: float = config.ADMISSIBILITY_C,
    lap_field: Optional[ScalarField] = None,
    upsample: int = config.FIELD_UPSAMPLE,
    threads: int = config.THREADS,
) -> IdentityReport:
    """int sigma_alpha(Delta e) d_nu Delta e over the boundary against 2 int |grad Delta e| on the level set."""
    kind = ProblemKind(kind)
    source = _as_source(cd, upsample, threads)
    bd = source.cauchy
    _check_level(alpha, admissible_level_bound(bd.lap_u, bd.grid, lam, c))
    lap_field = lap_field or field_on_grid(source, lam, grid, "lap")
    anchors = boundary_zeros(bd.lap_u, alpha, bd.grid.curve)
    geometry = level_set_extract(lap_field, alpha, anchors)

    b_side = signed_boundary_integral(bd.grid, bd.lap_u, bd.dn_lap_u, alpha)
    interior = 0.0
    if not geometry.is_empty:
        _, grad = source.evaluate(geometry.midpoints, "lap", derivatives=True)
        interior = 2.0 * float(np.dot(geometry.segment_lengths, np.linalg.norm(grad, axis=1)))

    def at_boundary(t: NDArray) -> NDArray:
        dn = _boundary_sample(bd, bd.dn_lap_u, t)
        ds = _boundary_sample(bd, bd.lap_u, t, derivative=1)
        return 2.0 * np.hypot(dn, ds)

    def at_end(p: NDArray) -> NDArray:
        return 2.0 * np.linalg.norm(source.evaluate(p, "lap", derivatives=True)[1], axis=1)

    interior += _bridge_integral(geometry, at_boundary, at_end)
    l1 = signed_boundary_integral(bd.grid, bd.lap_u, bd.lap_u)
    ratio = interior / (lam * l1) if lam > 0 and l1 > 0 else None
    inconsistent = geometry.is_empty and abs(b_side) > 1e-8
    if inconsistent:
        logger.warning("empty level set with boundary side %.3e", b_side)
    return IdentityReport(
        identity="interior_ibp",
        boundary_side=b_side,
        interior_side=interior,
        residual=_relative(b_side, interior),
        ratio=ratio,
        inconsistent=inconsistent,
        details={"length": geometry.length, "raw_length": geometry.raw_length, "alpha": alpha},
        geometry=geometry,
    )


def nodal_anchor_trace(kind: Union[ProblemKind, str], cd: CauchyData) -> NDArray:
    """Boundary trace whose zeros are where the interior nodal set of e meets the boundary."""
    kind = ProblemKind(kind)
    return cd.u if kind in (ProblemKind.THETA, ProblemKind.HARMONIC) else cd.dn_u


def mode_level_set(
    kind: Union[ProblemKind, str],
    cd: Union[CauchyData, FieldSource],
    lam: float,
    grid: InteriorGrid,
    which: Which = "e",
    alpha: float = 0.0,
    *,
    c: float = config.ADMISSIBILITY_C,
    upsample: int = config.FIELD_UPSAMPLE,
    threads: int = config.THREADS,
) -> NodalGeometry:
    """Level set {e = alpha} or {Delta e = alpha} of one mode, bridged to its boundary zeros.

    Raises:
        InadmissibleLevelError: if alpha is outside the admissible range of
            the boundary trace the level set is anchored to.
    """
    kind = ProblemKind(kind)
    source = _as_source(cd, upsample, threads)
    bd = source.cauchy
    trace = nodal_anchor_trace(kind, bd) if which == "e" else bd.lap_u
    _check_level(alpha, admissible_level_bound(trace, bd.grid, lam, c))
    values = field_on_grid(source, lam, grid, which, upsample=upsample, threads=threads)
    # e vanishes on the boundary for XI and PI, so only the zero level reaches it
    reaches_boundary = which == "lap" or alpha == 0.0 or kind in (ProblemKind.THETA, ProblemKind.HARMONIC)
    anchors = boundary_zeros(trace, alpha, bd.grid.curve) if reaches_boundary else None
    return level_set_extract(values, alpha, anchors)


def interior_flux_check(
    kind: Union[ProblemKind, str],
    cd: Union[CauchyData, FieldSource],
    lam: float,
    grid: InteriorGrid,
    *,
    e_field: Optional[ScalarField] = None,
    upsample: int = config.FIELD_UPSAMPLE,
    threads: int = config.THREADS,
) -> IdentityReport:
    """F = int over Z of |<grad Delta e, grad e / |grad e|>| against the boundary flux.

    The boundary side is -int sigma(e) d_nu Delta e for THETA; for XI and PI,
    where e vanishes on the boundary, sigma(e) is taken from the interior as
    -sigma(d_nu e). The identity says boundary side = 2 F.
    """
    kind = ProblemKind(kind)
    source = _as_source(cd, upsample, threads)
    bd = source.cauchy
    e_field = e_field or field_on_grid(source, lam, grid, "e")
    trace = nodal_anchor_trace(kind, bd)
    anchors = boundary_zeros(trace, 0.0, bd.grid.curve)
    geometry = level_set_extract(e_field, 0.0, anchors)

    flux = 0.0
    skipped = 0
    if not geometry.is_empty:
        mids = geometry.midpoints
        _, grad_e = source.evaluate(mids, "e", derivatives=True)
        _, grad_lap = source.evaluate(mids, "lap", derivatives=True)
        norm = np.linalg.norm(grad_e, axis=1)
        ok = norm >= DEGENERATE_GRADIENT
        skipped = int((~ok).sum())
        if skipped:
            logger.info("skipped %d nodal segments with degenerate gradient", skipped)
        normal = np.einsum("pi,pi->p", grad_lap[ok], grad_e[ok]) / norm[ok]
        flux = float(np.dot(geometry.segment_lengths[ok], np.abs(normal)))

    def at_boundary(t: NDArray) -> NDArray:
        return np.abs(_boundary_sample(bd, bd.lap_u, t, derivative=1))

    def at_end(p: NDArray) -> NDArray:
        _, ge = source.evaluate(p, "e", derivatives=True)
        _, gl = source.evaluate(p, "lap", derivatives=True)
        n = np.linalg.norm(ge, axis=1)
        return np.abs(np.einsum("pi,pi->p", gl, ge)) / np.where(n > 0, n, 1.0)

    flux += _bridge_integral(geometry, at_boundary, at_end)

    if kind in (ProblemKind.THETA, ProblemKind.HARMONIC):
        b_side = -signed_boundary_integral(bd.grid, bd.u, bd.dn_lap_u)
        norm1 = signed_boundary_integral(bd.grid, bd.u, bd.u)
        ratio = flux / (0.5 * lam**3 * norm1) if norm1 > 0 and lam > 0 else None
    else:
        b_side = signed_boundary_integral(bd.grid, bd.dn_u, bd.dn_lap_u)
        norm1 = signed_boundary_integral(bd.grid, bd.dn_u, bd.dn_u)
        ratio = flux / (lam**2 * norm1) if norm1 > 0 and lam > 0 else None
    return IdentityReport(
        identity="interior_flux",
        boundary_side=b_side,
        interior_side=flux,
        residual=_relative(b_side, 2.0 * flux),
        ratio=ratio,
        skipped_segments=skipped,
        details={"length": geometry.length, "raw_length": geometry.raw_length},
        geometry=geometry,
    )


def boundary_ibp_residual(
    grid: QuadratureGrid,
    phi: ArrayLike,
    alpha: float = 0.0,
    *,
    lam: Optional[float] = None,
    c: float = config.ADMISSIBILITY_C,
) -> IdentityReport:
    """-int sigma_alpha(phi) Delta_T phi ds against 2 sum over zeros of |d_s phi|."""
    phi = np.asarray(phi, dtype=float)
    if lam is not None:
        _check_level(alpha, admissible_level_bound(phi, grid, lam, c))
    lhs = -signed_boundary_integral(grid, phi, tangential_laplacian(grid, phi), alpha)
    zeros = boundary_zeros(phi, alpha)
    rhs = 0.0
    if zeros.count:
        slope = TrigInterpolant(phi)(zeros.params, 1) / grid.curve.sample(zeros.params).speed
        rhs = 2.0 * float(np.abs(slope).sum())
    scale = max(abs(lhs), abs(rhs), 1.0)
    return IdentityReport(
        identity="boundary_ibp",
        boundary_side=lhs,
        interior_side=rhs,
        residual=abs(lhs - rhs) / scale,
        details={"zero_count": zeros.count, "alpha": alpha},
    )


# --- interior energy ------------------------------------------------------------


def _blend(d: NDArray, delta: float) -> NDArray:
    q = np.clip((d - delta) / delta, 0.0, 1.0)
    return q**3 * (10.0 - 15.0 * q + 6.0 * q * q)


@dataclass(frozen=True)
class EnergyReport:
    grid_part: float
    strip_part: float

    @property
    def total(self) -> float:
        return self.grid_part + self.strip_part


def interior_energy(lap_field: ScalarField, order: int = STRIP_ORDER) -> EnergyReport:
    """int_M (Delta e)^2 dV from a blended grid sum plus a boundary-strip quadrature.

    Grid nodes are weighted by a smooth step rising from 0 at distance delta
    to 1 at 2 delta; the strip [0, 2 delta] carries the complementary weight,
    with values from the field source beyond delta and from a second-order
    normal Taylor expansion of the Cauchy data inside the collar.
    """
    if lap_field.which != "lap":
        raise DataError("interior energy needs the Delta e field")
    grid, source = lap_field.grid, lap_field.source
    delta = grid.delta
    active = grid.active
    f = lap_field.values[active]
    grid_part = grid.node_area * float(np.sum(f * f * _blend(grid.distance[active], delta)))

    bd = source.cauchy
    bgrid = bd.grid
    nodes, weights = leggauss(order)
    inner_s = 0.5 * delta * (nodes + 1.0)
    outer_s = delta + inner_s
    dt = TWO_PI / bgrid.n

    second = -tangential_laplacian(bgrid, bd.lap_u) - bgrid.curvature * bd.dn_lap_u
    taylor = (
        bd.lap_u[None, :]
        - inner_s[:, None] * bd.dn_lap_u[None, :]
        + 0.5 * inner_s[:, None] ** 2 * second[None, :]
    )
    pts = bgrid.points[None, :, :] - outer_s[:, None, None] * bgrid.normals[None, :, :]
    outer_vals, _ = source.evaluate(pts.reshape(-1, 2), "lap")
    outer_vals = outer_vals.reshape(order, bgrid.n)

    strip = 0.0
    for s, vals in ((inner_s, taylor), (outer_s, outer_vals)):
        jac = bgrid.speed[None, :] * (1.0 - s[:, None] * bgrid.curvature[None, :])
        w = (1.0 - _blend(s, delta))[:, None]
        per_s = (vals * vals * jac * w).sum(axis=1) * dt
        strip += 0.5 * delta * float(np.dot(weights, per_s))
    return EnergyReport(grid_part=grid_part, strip_part=strip)


# --- scaling exponents ----------------------------------------------------------


def sigma_exponent(n: int, p: float) -> float:
    """Piecewise L^p exponent sigma(n, p), p in [2, inf].

    Second branch ((n-2)/2)(1/2 - 1/p) for 2 ≤ p ≤ 2n/(n-2), first branch
    (n-1)(1/2 - 1/p) - 1/2 beyond. For n = 2 the branch point is infinite.
    """
    if n < 2 or int(n) != n:
        raise DataError(f"dimension must be an integer ≥ 2 (got {n})")
    if not p >= 2:
        raise DataError(f"exponent p must be ≥ 2 (got {p})")
    inv_p = 0.0 if np.isinf(p) else 1.0 / p
    if n == 2 or p <= 2.0 * n / (n - 2):
        return (n - 2) / 2.0 * (0.5 - inv_p)
    return (n - 1) * (0.5 - inv_p) - 0.5


@dataclass(frozen=True)
class ScalingExponents:
    n: int = DIMENSION

    @property
    def boundary(self) -> float:
        return (4 - self.n) / 2.0

    @property
    def laplacian_vanishing(self) -> float:
        return (2 - self.n) / 2.0

    def interior(self, kind: Union[ProblemKind, str]) -> float:
        if ProblemKind(kind) is ProblemKind.THETA:
            return -self.n / 2.0
        return (2 - self.n) / 2.0

    def sigma(self, p: float) -> float:
        return sigma_exponent(self.n, p)
