"""Planar Laplace and biharmonic fundamental solutions and their symbols.

Conventions: d = y - x, r = |d|, normals belong to the source point y unless a
kernel name says otherwise.

    E          = (1/2pi) log r
    E_hat      = (1/8pi) r^2 log r          (Delta_y E_hat = E + 1/2pi)
    lap_E_hat  = (1/2pi) (log r + 1)
    dn_E_hat   = (1/8pi) (2 log r + 1) <d, nu_y>
    dn_lap_E_hat = (1/2pi) <d, nu_y> / r^2  (also d/dnu_y of E)
    dn_x_E     = (1/2pi) <x - y, nu_x> / r^2  (adjoint double layer)
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import IntegrationWarning, quad

from .errors import CoincidentPointsError, DataError, SymbolIntegralError
from .geometry import TWO_PI, BoundaryCurve

logger = logging.getLogger(__name__)

INV_2PI = 1.0 / TWO_PI
INV_4PI = 1.0 / (4.0 * np.pi)
INV_8PI = 1.0 / (8.0 * np.pi)
INV_16PI = 1.0 / (16.0 * np.pi)

SYMBOL_CUTOFF_FACTOR = 200.0
SYMBOL_EPS = 1e-12
SYMBOL_ACCEPT_ERR = 1e-10


class Kernel(str, enum.Enum):
    E = "E"
    E_HAT = "E_hat"
    LAP_E_HAT = "lap_E_hat"
    DN_E_HAT = "dn_E_hat"
    DN_LAP_E_HAT = "dn_lap_E_hat"
    DN_X_E = "dn_x_E"


@dataclass(frozen=True)
class KernelBundle:
    E: NDArray
    E_hat: NDArray
    lap_E_hat: NDArray
    dn_E_hat: NDArray
    dn_lap_E_hat: NDArray


@dataclass(frozen=True)
class GradientBundle:
    """x-gradients of the kernels, each with a trailing axis of length 2."""

    E: NDArray
    dn_E: NDArray
    E_hat: NDArray
    lap_E_hat: NDArray
    dn_E_hat: NDArray
    dn_lap_E_hat: NDArray


def _pair_geometry(
    x: ArrayLike, y: ArrayLike, nu_y: ArrayLike
) -> Tuple[NDArray, NDArray, NDArray, NDArray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nu_y = np.asarray(nu_y, dtype=float)
    d = y - x
    r2 = np.einsum("...i,...i->...", d, d)
    if np.any(r2 == 0.0):
        raise CoincidentPointsError("kernel evaluated at coincident source and target")
    nd = np.einsum("...i,...i->...", d, np.broadcast_to(nu_y, d.shape))
    return d, r2, nd, np.broadcast_to(nu_y, d.shape)


def kernel_values(x: ArrayLike, y: ArrayLike, nu_y: ArrayLike) -> KernelBundle:
    """Evaluate the five kernels; inputs broadcast over leading axes.

    Raises:
        CoincidentPointsError: if any source coincides with its target.
    """
    _, r2, nd, _ = _pair_geometry(x, y, nu_y)
    log_r2 = np.log(r2)
    return KernelBundle(
        E=INV_4PI * log_r2,
        E_hat=INV_16PI * r2 * log_r2,
        lap_E_hat=INV_2PI * (0.5 * log_r2 + 1.0),
        dn_E_hat=INV_8PI * (log_r2 + 1.0) * nd,
        dn_lap_E_hat=INV_2PI * nd / r2,
    )


def kernel_gradients(x: ArrayLike, y: ArrayLike, nu_y: ArrayLike) -> GradientBundle:
    d, r2, nd, nu = _pair_geometry(x, y, nu_y)
    log_r2 = np.log(r2)[..., None]
    r2 = r2[..., None]
    nd = nd[..., None]
    grad_log = -d / r2
    grad_dn = INV_2PI * (-nu / r2 + 2.0 * nd * d / (r2 * r2))
    return GradientBundle(
        E=INV_2PI * grad_log,
        dn_E=grad_dn,
        E_hat=-INV_8PI * (log_r2 + 1.0) * d,
        lap_E_hat=INV_2PI * grad_log,
        dn_E_hat=INV_8PI * (-2.0 * nd * d / r2 - (log_r2 + 1.0) * nu),
        dn_lap_E_hat=grad_dn,
    )


# --- log splitting on the parameter torus -----------------------------------


@dataclass(frozen=True)
class SplitKernel:
    """K(t_i, s_j) = k1 * log(4 sin^2((t_i - s_j)/2)) + k2, speed factor excluded."""

    which: Kernel
    t: NDArray
    speed: NDArray
    k1: NDArray
    k2: NDArray

    def values(self) -> NDArray:
        """Reassembled kernel matrix; the diagonal carries the continuous limit."""
        tau = self.t[:, None] - self.t[None, :]
        off = ~np.eye(self.t.size, dtype=bool)
        out = self.k2.copy()
        out[off] += self.k1[off] * np.log(4.0 * np.sin(0.5 * tau[off]) ** 2)
        return out


def split_kernel(which: str, curve: BoundaryCurve, n: int) -> SplitKernel:
    """Split a kernel on n equispaced parameter nodes with exact diagonal limits.

    Args:
        which: A Kernel value.
        curve: The boundary curve.
        n: Number of parameter nodes.

    Returns:
        SplitKernel with k1 and k2 as (n, n) matrices indexed [target, source].
    """
    which = Kernel(which)
    t = TWO_PI * np.arange(n) / n
    s = curve.sample(t)
    d = s.points[None, :, :] - s.points[:, None, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    diag = np.eye(n, dtype=bool)
    r2_safe = np.where(diag, 1.0, r2)
    tau = t[:, None] - t[None, :]
    four_sin2 = np.where(diag, 1.0, 4.0 * np.sin(0.5 * tau) ** 2)
    log_ratio = np.log(r2_safe / four_sin2)
    log_ratio[diag] = 2.0 * np.log(s.speed)
    nd = np.einsum("ijk,jk->ij", d, s.normals)

    if which is Kernel.E:
        k1 = np.full((n, n), INV_4PI)
        k2 = INV_4PI * log_ratio
    elif which is Kernel.LAP_E_HAT:
        k1 = np.full((n, n), INV_4PI)
        k2 = INV_2PI * (0.5 * log_ratio + 1.0)
    elif which is Kernel.E_HAT:
        k1 = INV_16PI * r2
        k2 = INV_16PI * r2 * log_ratio
    elif which is Kernel.DN_E_HAT:
        k1 = INV_8PI * nd
        k2 = INV_8PI * (log_ratio + 1.0) * nd
    elif which is Kernel.DN_LAP_E_HAT:
        k1 = np.zeros((n, n))
        k2 = INV_2PI * nd / r2_safe
        k2[diag] = INV_4PI * s.curvature
    else:
        nd_x = -np.einsum("ijk,ik->ij", d, s.normals)
        k1 = np.zeros((n, n))
        k2 = INV_2PI * nd_x / r2_safe
        k2[diag] = INV_4PI * s.curvature
    return SplitKernel(which=which, t=t, speed=s.speed, k1=k1, k2=k2)


# --- half-space symbols -----------------------------------------------------


def _check_frequency(j: int, xi: float) -> None:
    if j not in (1, 2, 3):
        raise DataError(f"symbol index must be 1, 2 or 3 (got {j})")
    if not xi > 0:
        raise DataError(f"frequency xi' must be positive (got {xi})")


def symbol_q(j: int, x_n: float, xi: float) -> float:
    """Closed-form q_j(x_n, xi') of the half-space Fourier integrals."""
    _check_frequency(j, xi)
    decay = np.exp(-abs(x_n) * xi)
    if j == 3:
        return 0.25 * (xi**-3 + abs(x_n) * xi**-2) * decay
    if j == 2:
        return -x_n / (4.0 * xi) * decay
    return -decay / (2.0 * xi)


@dataclass(frozen=True)
class SymbolIntegral:
    j: int
    x_n: float
    xi: float
    value: float
    imag: float
    tail: float
    cutoff: float
    abserr: float


def _quad(f, a, b, weight=None, wvar=None) -> Tuple[float, float]:
    kwargs = dict(epsabs=SYMBOL_EPS, epsrel=SYMBOL_EPS, limit=400)
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar)
    if b == np.inf and weight is not None:
        kwargs.pop("epsrel")
        kwargs["limlst"] = 200
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, err = quad(f, a, b, **kwargs)
    if not np.isfinite(value) or (caught and err > SYMBOL_ACCEPT_ERR):
        message = caught[0].message if caught else "non-finite value"
        raise SymbolIntegralError(
            f"Fourier integral on [{a:g}, {b:g}] did not converge: {message}"
        )
    return value, err


def symbol_q_numeric(
    j: int, x_n: float, xi: float, cutoff_factor: float = SYMBOL_CUTOFF_FACTOR
) -> SymbolIntegral:
    """Evaluate q_j = (1/2pi) int p(xi', xi_n) exp(i x_n xi_n) d xi_n numerically.

    The symbols are p_3 = |xi|^-4, p_2 = i xi_n |xi|^-4 and p_1 = -|xi|^-2.
    The even part gives the real value on [0, cutoff] plus a separately
    reported oscillatory tail on [cutoff, inf); the imaginary part is the
    odd-part cancellation over [-cutoff, cutoff] and should vanish.
    """
    _check_frequency(j, xi)
    a2 = xi * xi
    cutoff = cutoff_factor * xi
    x = abs(x_n)
    sign = 1.0 if x_n >= 0 else -1.0

    if j == 3:
        amp, weight, scale = (lambda s: 1.0 / (a2 + s * s) ** 2), "cos", 1.0
    elif j == 1:
        amp, weight, scale = (lambda s: 1.0 / (a2 + s * s)), "cos", -1.0
    else:
        amp, weight, scale = (lambda s: s / (a2 + s * s) ** 2), "sin", -sign
    # the imaginary part pairs each amplitude with the other trigonometric factor
    partner = np.sin if weight == "cos" else np.cos

    def odd(s: float) -> float:
        return scale * amp(s) * partner(x_n * s)

    if x == 0.0:
        if weight == "sin":
            head = tail = err = 0.0
        else:
            head, e1 = _quad(amp, 0.0, cutoff)
            tail, e2 = _quad(amp, cutoff, np.inf)
            err = e1 + e2
    else:
        head, e1 = _quad(amp, 0.0, cutoff, weight=weight, wvar=x)
        tail, e2 = _quad(amp, cutoff, np.inf, weight=weight, wvar=x)
        err = e1 + e2

    imag_pos, _ = _quad(odd, 0.0, cutoff)
    imag_neg, _ = _quad(lambda s: odd(-s), 0.0, cutoff)
    result = SymbolIntegral(
        j=j,
        x_n=x_n,
        xi=xi,
        value=scale * (head + tail) / np.pi,
        imag=(imag_pos + imag_neg) / TWO_PI,
        tail=scale * tail / np.pi,
        cutoff=cutoff,
        abserr=err / np.pi,
    )
    logger.debug(
        "q_%d(%g, %g) = %.15g tail=%.3e imag=%.3e",
        j,
        x_n,
        xi,
        result.value,
        result.tail,
        result.imag,
    )
    return result


PRINCIPAL_SYMBOLS = {
    "S1": lambda xi: -0.5 / xi,
    "S2": lambda xi: 0.25 * xi**-3,
    "S3": lambda xi: 0.25 * xi**-3,
    "Lambda": lambda xi: xi,
    "theta": lambda xi: -2.0 * xi**2,
    "Theta": lambda xi: 2.0 * xi**3,
    "Xi": lambda xi: 2.0 * xi,
    "Pi": lambda xi: 2.0 * xi,
}


def principal_symbol(name: str, xi: ArrayLike) -> NDArray:
    """Leading multiplier of a boundary operator at tangential frequency xi."""
    try:
        return PRINCIPAL_SYMBOLS[name](np.asarray(xi, dtype=float))
    except KeyError:
        raise DataError(
            f"no principal symbol for '{name}'; choose from {sorted(PRINCIPAL_SYMBOLS)}"
        ) from None
