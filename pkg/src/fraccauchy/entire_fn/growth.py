"""Growth scale of entire functions: proximate order, order/type regression, zero densities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import NoLimit, SamplingOverflow
from .zeros import TWO_PI, ZeroSequence

DEFAULT_SAMPLES = 720


@dataclass(frozen=True)
class ProximateOrder:
    """rho(r) = order + log_coefficient / ln r.

    The logarithmic correction keeps both Valiron conditions by construction;
    it only rescales ``r**rho(r) = e**log_coefficient * r**order``.
    """

    order: float
    log_coefficient: float = 0.0

    def __post_init__(self) -> None:
        if not self.order > 0:
            raise ValueError("order must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.order + self.log_coefficient / np.log(r)

    def scale(self, r):
        """r ** rho(r)."""
        return math.exp(self.log_coefficient) * np.asarray(r, dtype=float) ** self.order

    @property
    def is_constant(self) -> bool:
        return self.log_coefficient == 0.0


def as_proximate(rho) -> ProximateOrder:
    return rho if isinstance(rho, ProximateOrder) else ProximateOrder(float(rho))


@dataclass(frozen=True)
class GrowthEstimate:
    order: float
    type: float
    proximate: ProximateOrder | None
    radii: np.ndarray
    log_max: np.ndarray
    residual: float

    @property
    def type_at_last_radius(self) -> float:
        return float(self.log_max[-1] / self.radii[-1] ** self.order)


def max_log_modulus(f: Callable, r: float, samples: int = DEFAULT_SAMPLES, log_values: bool = False) -> float:
    """ln M_f(r) from ``samples`` equally spaced points on |z| = r.

    With ``log_values=True`` the callable returns ln|f| (or a complex log f)
    directly, which keeps very large moduli representable.
    """
    z = r * np.exp(1j * TWO_PI * np.arange(samples) / samples)
    vals = np.asarray(f(z))
    if log_values:
        logs = np.real(vals)
    else:
        mags = np.abs(vals)
        if not np.all(np.isfinite(mags)):
            raise SamplingOverflow(f"|f| is not representable on |z| = {r:g}; shrink the ladder or pass log values")
        with np.errstate(divide="ignore"):
            logs = np.log(mags)
    if not np.all(np.isfinite(logs[~np.isneginf(logs)])):
        raise SamplingOverflow(f"non-finite samples on |z| = {r:g}")
    return float(np.max(logs))


def order_type_estimate(
    f,
    radii,
    samples: int = DEFAULT_SAMPLES,
    log_values: bool | None = None,
) -> GrowthEstimate:
    """Regress ln ln M_f(r) = ln sigma + rho ln r over ``radii``.

    ``f`` is a callable or an :class:`EntireFunctionSpec`; specs are sampled
    through their logarithm.  Radii where M_f(r) <= 1 carry no information
    about the order and are rejected.
    """
    from .product import EntireFunctionSpec

    if isinstance(f, EntireFunctionSpec):
        f, log_values = f.log_abs, True
    radii = np.asarray(sorted(radii), dtype=float)
    if radii.size < 2 or radii[0] <= 0:
        raise ValueError("need at least two positive radii")
    logm = np.array([max_log_modulus(f, r, samples, bool(log_values)) for r in radii])
    if np.any(logm <= 0):
        raise ValueError("M_f(r) <= 1 on the ladder; start the ladder at larger radii")
    x, y = np.log(radii), np.log(logm)
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(math.sqrt(res[0] / x.size)) if res.size else 0.0
    rho = float(slope)
    prox = ProximateOrder(rho) if rho > 0 else None
    return GrowthEstimate(rho, float(math.exp(intercept)), prox, radii, logm, resid)


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    radii: np.ndarray
    ratios: np.ndarray
    spread: float


def radius_ladder(r0: float, rungs: int) -> np.ndarray:
    return r0 * 2.0 ** np.arange(rungs)


def _ladder_limit(counts: Callable[[float], int], rho, r0: float, rungs: int, tol: float) -> DensityEstimate:
    prox = as_proximate(rho)
    radii = radius_ladder(r0, rungs)
    ratios = np.array([counts(r) / prox.scale(r) for r in radii])
    tail = ratios[-3:]
    spread = float(np.max(tail) - np.min(tail))
    value = float(ratios[-1])
    if spread > tol * max(1.0, abs(value)):
        raise NoLimit(f"ladder ratios do not settle (last-three spread {spread:.3g})", ratios)
    return DensityEstimate(value, radii, ratios, spread)


def angular_density(
    zeros: ZeroSequence,
    rho,
    phi: float,
    psi: float,
    r0: float = 1e4,
    rungs: int = 24,
    tol: float = 1e-2,
) -> DensityEstimate:
    """n(r, phi, psi) / r^rho(r) on the ladder r0 * 2^k.

    The sector is the open angle phi < arg z < psi taken modulo 2*pi, so a
    sector straddling the positive axis may be written as (-eps, eps).
    """
    if not phi < psi:
        raise ValueError("need phi < psi")
    return _ladder_limit(lambda r: zeros.sector_count(r, phi, psi), rho, r0, rungs, tol)


def upper_density(zeros: ZeroSequence, rho, r0: float = 1e4, rungs: int = 24, tol: float = 1e-2) -> DensityEstimate:
    """n(r) / r^rho(r) on the ladder r0 * 2^k (full-circle count)."""
    return _ladder_limit(zeros.counting, rho, r0, rungs, tol)
