"""Exceptional circles, ray clearance and lower bounds of Re f along a ray."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import BoundViolated, ConditionViolated, PreconditionError
from .growth import ProximateOrder, as_proximate
from .indicator import AngularDensity, IndicatorFunction, indicator_H
from .product import EntireFunctionSpec
from .zeros import TWO_PI, ZeroSequence

PREFIX = 4096
LADDER_POWERS = 50


def _wrap(x):
    return np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi


@dataclass(frozen=True)
class ExceptionalCircles:
    """Circles |z - a_n| <= r_n under condition (I) or (II).

    (I):  r_n = d |a_n|^{1 - rho(|a_n|)/2}
    (II): r_n = d |a_n|^{1 - rho(|a_n|)}
    ``verified_through`` is the number of leading zeros whose circles were
    checked pair by pair; families were additionally checked on the index
    ladder 2^k, k <= 50.
    """

    condition: str
    d: float
    zeros: ZeroSequence
    proximate: ProximateOrder
    verified_through: int

    def radius_at(self, modulus):
        m = np.asarray(modulus, dtype=float)
        s = self.proximate.scale(m)
        return self.d * m / (np.sqrt(s) if self.condition == "I" else s)

    def circles(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        centers = self.zeros.take(count)
        return centers, self.radius_at(np.abs(centers))


def _angle_groups(values: np.ndarray) -> dict[float, np.ndarray]:
    keys = np.round(np.mod(np.angle(values), TWO_PI), 12)
    return {float(k): np.flatnonzero(keys == k) for k in np.unique(keys)}


def _check_disjoint(centers, radii) -> None:
    mods = np.abs(centers)
    reach = mods + radii
    rmax = float(radii.max()) if radii.size else 0.0
    for i in range(centers.size):
        hi = int(np.searchsorted(mods, reach[i] + rmax, side="right"))
        if hi <= i + 1:
            continue
        j = np.arange(i + 1, hi)
        bad = np.abs(centers[j] - centers[i]) <= radii[i] + radii[j]
        if np.any(bad):
            k = int(j[np.argmax(bad)])
            raise ConditionViolated(f"circles around zeros {i + 1} and {k + 1} intersect", (i + 1, k + 1))


def _check_gaps(centers, circles: ExceptionalCircles) -> None:
    d, prox = circles.d, circles.proximate
    for idx in _angle_groups(centers).values():
        mods = np.abs(centers[idx])
        need = d * mods[:-1] / prox.scale(mods[:-1])
        bad = np.diff(mods) <= need
        if np.any(bad):
            k = int(np.argmax(bad))
            raise ConditionViolated(
                f"gap after zero {idx[k] + 1} is below d|a_n|^(1-rho)", (int(idx[k]) + 1, int(idx[k + 1]) + 1)
            )


def _ladder_check(circles: ExceptionalCircles) -> None:
    """Asymptotic check of a parametric family on the index ladder 2^k."""
    zs = circles.zeros
    P = len(zs.angles)
    if len(set(np.round(np.mod(zs.angles, TWO_PI), 12))) < P:
        return  # shared rays: only the explicit prefix is checked
    for k in range(int(math.log2(PREFIX)), LADDER_POWERS + 1):
        n = 2**k
        m0, m1 = float(zs.modulus(n)), float(zs.modulus(n + P))
        r0, r1 = circles.radius_at(m0), circles.radius_at(m1)
        gap = m1 - m0
        if circles.condition == "II":
            if gap <= circles.d * m0 / circles.proximate.scale(m0):
                raise ConditionViolated(f"gap condition fails near index {n}", (n, n + P))
            continue
        if gap <= r0 + r1:
            raise ConditionViolated(f"circles on one ray intersect near index {n}", (n, n + P))
        if P > 1:
            diffs = _wrap(np.subtract.outer(zs.angles, zs.angles))
            sep = np.min(np.abs(diffs[~np.eye(P, dtype=bool)]))
            if 2.0 * r1 >= m0 * math.sin(min(sep, math.pi / 2)):
                raise ConditionViolated(f"circles on neighbouring rays meet near index {n}", (n, n + 1))


def exceptional_circles(zeros: ZeroSequence, rho, d: float, condition: str = "I") -> ExceptionalCircles:
    """Build the exceptional circles and verify the chosen condition."""
    if d <= 0:
        raise ValueError("d must be positive")
    if condition not in ("I", "II"):
        raise ValueError("condition must be 'I' or 'II'")
    prox = as_proximate(rho)
    count = len(zeros) if zeros.is_finite else PREFIX
    circ = ExceptionalCircles(condition, float(d), zeros, prox, count)
    centers, radii = circ.circles(count)
    if condition == "I":
        _check_disjoint(centers, radii)
    else:
        _check_gaps(centers, circ)
    if not zeros.is_finite:
        _ladder_check(circ)
    return circ


def clearance_prefix(circles: ExceptionalCircles, theta: float) -> int | None:
    """Index of the last circle met by the ray arg z = theta.

    Returns 0 when no circle is met and ``None`` when infinitely many are
    (zeros on the ray itself).
    """
    zs = circles.zeros
    if zs.is_finite:
        c, r = circles.circles(len(zs))
        hits = np.flatnonzero(_ray_distance(c, theta) <= r)
        return int(hits[-1]) + 1 if hits.size else 0
    last = 0
    P = len(zs.angles)
    prox = circles.proximate
    for j, ang in enumerate(zs.angles):
        delta = abs(float(_wrap(ang - theta)))
        if delta < 1e-12:
            return None
        s = math.sin(min(delta, math.pi / 2))
        # hit iff d / scale(m)^(1/2 or 1) >= s; scale grows, so solve for m*
        power = 2.0 if circles.condition == "I" else 1.0
        m_star = ((circles.d / s) ** power / math.exp(prox.log_coefficient)) ** (1.0 / prox.order)
        total = zs._count(m_star, strict=False)
        if total > j:
            last = max(last, j + 1 + P * ((total - 1 - j) // P))
    return last


def _ray_distance(centers, theta):
    delta = np.abs(_wrap(np.angle(centers) - theta))
    mods = np.abs(centers)
    return np.where(delta < math.pi / 2, mods * np.sin(delta), mods)


def ray_clearance(circles: ExceptionalCircles, theta: float) -> bool:
    """True iff the ray arg z = theta meets only finitely many circles.

    For explicit (finite) zero lists nothing beyond the list is known, so the
    ray must miss every circle.
    """
    prefix = clearance_prefix(circles, theta)
    if circles.zeros.is_finite:
        return prefix == 0
    return prefix is not None


@dataclass(frozen=True)
class LowerBoundReport:
    theta0: float
    indicator: float
    epsilon: float
    log_C: float
    radii: np.ndarray
    log_values: np.ndarray
    margins: np.ndarray
    args: np.ndarray
    sector_hypothesis: bool
    bound_on: str
    exponent: float
    clearance_prefix: int


def lower_bound_on_ray(
    spec: EntireFunctionSpec,
    theta0: float,
    zeta: float,
    radii=None,
    eps: float = 0.05,
    d: float = 0.1,
    condition: str = "II",
    proximate=None,
) -> LowerBoundReport:
    """Check Re f(r e^{i theta0}) >= C exp((H(theta0) - eps) r^rho(r)) on a ladder.

    C is fitted on the lower half of the ladder and the inequality verified on
    the upper half.  When the image of the ray leaves the sector
    |arg w| <= zeta the real-part bound is not available; the report then
    falls back to the modulus bound and says so in ``bound_on``.
    """
    zs = spec.zeros
    rho = as_proximate(proximate if proximate is not None else zs.closed_form_exponent())
    if not 0 < rho.order <= 0.5:
        raise PreconditionError("the lower bound needs an order in (0, 1/2]")
    if not 0 < zeta < math.pi / 2:
        raise ValueError("sector half-angle must lie in (0, pi/2)")
    if radii is None:
        radii = 1e5 * 2.0 ** np.arange(11)
    radii = np.asarray(sorted(radii), dtype=float)
    if radii.size < 4:
        raise ValueError("need at least four radii")
    circ = exceptional_circles(zs, rho, d, condition)
    if not ray_clearance(circ, theta0):
        raise PreconditionError(f"ray arg z = {theta0:g} meets infinitely many exceptional circles")
    prefix = clearance_prefix(circ, theta0)
    z = radii * np.exp(1j * theta0)
    near = circ.circles(zs.counting(2 * radii[-1]) + 1 if not zs.is_finite else len(zs))
    inside = np.abs(z[:, None] - near[0][None, :]) <= near[1][None, :]
    if np.any(inside):
        raise PreconditionError(f"ladder radius {radii[np.any(inside, axis=1)][0]:g} lies in an exceptional circle")
    H = float(indicator_H(rho.order, AngularDensity.from_zeros(zs), theta0))
    logf = spec.log_eval(z)
    args = _wrap(np.imag(logf))
    sector_ok = bool(np.all(np.abs(args) <= zeta))
    if sector_ok:
        q, bound_on = np.real(logf) + np.log(np.cos(args)), "real_part"
    else:
        q, bound_on = np.real(logf), "modulus"
    g = q - (H - eps) * rho.scale(radii)
    half = radii.size // 2
    log_C = float(np.min(g[:half]))
    bad = np.flatnonzero(g[half:] < log_C)
    if bad.size:
        r = float(radii[half + bad[0]])
        raise BoundViolated(f"lower bound fails at r = {r:g}", r)
    pos = q > 0
    exponent = float(np.polyfit(np.log(radii[pos]), np.log(q[pos]), 1)[0]) if pos.sum() >= 2 else math.nan
    return LowerBoundReport(
        theta0, H, eps, log_C, radii, q, g - log_C, args, sector_ok, bound_on, exponent, int(prefix or 0)
    )


def growth_constants(spec: EntireFunctionSpec) -> tuple[float, float | None]:
    """Closed-form (order, type) where available.

    The type of a power-family product of non-integer order is max H; it is
    ``None`` when no closed form applies.
    """
    zs = spec.zeros
    deg = len(spec.exp_poly)
    rho_z = zs.closed_form_exponent() if not zs.is_finite else 0.0
    if rho_z is None:
        rho_z = 0.0
    if deg > rho_z:
        return float(deg), abs(spec.exp_poly[-1])
    if zs.kind == "power" and abs(rho_z - round(rho_z)) > 1e-12 and deg < rho_z:
        return rho_z, IndicatorFunction(rho_z, AngularDensity.from_zeros(zs)).maximum()
    return rho_z, None
