"""Angular densities and the indicator H(psi) of regularly distributed zero sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import OrderIntegral, PreconditionError
from .growth import ProximateOrder, as_proximate
from .zeros import TWO_PI, ZeroSequence

DEFAULT_PANELS = 10_000


@dataclass(frozen=True)
class AngularDensity:
    """Nondecreasing Delta(psi) on [0, 2*pi] as (angle, cumulative mass) knots.

    Between knots Delta is linear; a jump is two knots sharing an angle.
    """

    knots: tuple
    proximate: ProximateOrder | None = None

    def __post_init__(self) -> None:
        k = tuple((float(a), float(m)) for a, m in self.knots)
        if not k:
            raise ValueError("need at least one knot")
        ang = np.array([a for a, _ in k])
        mass = np.array([m for _, m in k])
        if np.any(ang < 0) or np.any(ang > TWO_PI):
            raise ValueError("knot angles must lie in [0, 2*pi]")
        if np.any(np.diff(ang) < 0) or np.any(np.diff(mass) < 0):
            raise ValueError("knots must be nondecreasing in angle and mass")
        if not np.all(np.isfinite(mass)):
            raise ValueError("total mass must be finite")
        object.__setattr__(self, "knots", k)

    @classmethod
    def atoms(cls, masses: dict, proximate=None) -> "AngularDensity":
        """Point masses {angle: mass}; angles are reduced modulo 2*pi."""
        merged: dict[float, float] = {}
        for a, m in masses.items():
            if m < 0:
                raise ValueError("masses must be nonnegative")
            key = float(np.mod(a, TWO_PI))
            merged[key] = merged.get(key, 0.0) + float(m)
        knots, total = [(0.0, 0.0)], 0.0
        for a in sorted(merged):
            knots.append((a, total))
            total += merged[a]
            knots.append((a, total))
        knots.append((TWO_PI, total))
        return cls(tuple(knots), None if proximate is None else as_proximate(proximate))

    @classmethod
    def from_zeros(cls, zeros: ZeroSequence) -> "AngularDensity":
        """Closed-form density of a power family (atoms on its rays)."""
        masses = zeros.closed_form_density()
        if masses is None:
            raise ValueError("closed-form angular density is only available for power families")
        return cls.atoms(masses, proximate=1.0 / zeros.exponent)

    @classmethod
    def random(cls, rng: np.random.Generator, atoms: int = 3, ramps: int = 2) -> "AngularDensity":
        """A seeded random nondecreasing Delta mixing jumps and linear ramps."""
        cuts = np.sort(rng.uniform(0.0, TWO_PI, size=atoms + 2 * ramps))
        kinds = rng.permutation(np.array([0] * atoms + [1] * (2 * ramps)))
        knots, total = [(0.0, 0.0)], 0.0
        for a, kind in zip(cuts, kinds):
            if kind == 0:
                knots.append((float(a), total))
            total += float(rng.uniform(0.05, 1.0))
            knots.append((float(a), total))
        knots.append((TWO_PI, total))
        return cls(tuple(knots))

    @property
    def total_mass(self) -> float:
        return self.knots[-1][1] - self.knots[0][1]

    def jumps(self) -> list[tuple[float, float]]:
        out = []
        for (a0, m0), (a1, m1) in zip(self.knots, self.knots[1:]):
            if a0 == a1 and m1 > m0:
                out.append((a0, m1 - m0))
        return out

    def ramps(self) -> list[tuple[float, float, float]]:
        """Continuous pieces (lo, hi, rate)."""
        out = []
        for (a0, m0), (a1, m1) in zip(self.knots, self.knots[1:]):
            if a1 > a0 and m1 > m0:
                out.append((a0, a1, (m1 - m0) / (a1 - a0)))
        return out

    def stieltjes(self, kernel, panels: int = DEFAULT_PANELS):
        """Integral of kernel(phi) dDelta(phi); ``kernel`` maps angle arrays elementwise."""
        total = 0.0
        for a, m in self.jumps():
            total = total + m * kernel(np.asarray(a))
        for lo, hi, rate in self.ramps():
            mid = lo + (hi - lo) * (np.arange(panels) + 0.5) / panels
            vals = kernel(mid)
            total = total + rate * (hi - lo) / panels * np.sum(vals, axis=-1)
        return total


def _check_order(rho: float) -> None:
    if not rho > 0:
        raise ValueError("order must be positive")
    if abs(rho - round(rho)) < 1e-12:
        raise OrderIntegral(f"indicator formula needs a non-integer order (got {rho})")


def indicator_H(rho: float, density: AngularDensity, psi, panels: int = DEFAULT_PANELS):
    """H(psi) = pi / sin(pi rho) * int cos rho(|psi - phi| - pi) dDelta(phi).

    The angular difference is taken modulo 2*pi into [0, 2*pi), which makes the
    formula valid for every psi.
    """
    _check_order(rho)
    psi = np.asarray(psi, dtype=float)

    def kernel(phi):
        phi = np.asarray(phi)
        x = np.mod(psi.reshape(psi.shape + (1,) * phi.ndim) - phi, TWO_PI)
        return np.cos(rho * (x - math.pi))

    val = density.stieltjes(kernel, panels)
    out = math.pi / math.sin(math.pi * rho) * np.asarray(val, dtype=float)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class IndicatorFunction:
    order: float
    density: AngularDensity

    def __call__(self, psi):
        return indicator_H(self.order, self.density, psi)

    def maximum(self, grid: int = 3601) -> float:
        """max H over the circle (grid search plus bounded refinement)."""
        psi = np.linspace(-math.pi, math.pi, grid)
        h = self(psi)
        i = int(np.argmax(h))
        lo, hi = psi[max(i - 1, 0)], psi[min(i + 1, grid - 1)]
        if hi > lo:
            res = minimize_scalar(lambda s: -float(self(s)), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12})
            return float(max(h[i], -res.fun))
        return float(h[i])


@dataclass(frozen=True)
class IndicatorReport:
    grid: np.ndarray
    values: np.ndarray
    nonnegative: bool
    zero_angles: np.ndarray
    minimum: float


def check_indicator_positivity(rho: float, density: AngularDensity, grid=181, zero_tol: float = 1e-12) -> IndicatorReport:
    """Evaluate H on a grid of (-pi, pi] and report sign and exact zeros.

    Values within ``zero_tol`` (relative to the total mass) of zero are
    flagged as zeros instead of counted as sign violations.
    """
    if not 0 < rho <= 0.5:
        raise PreconditionError("positivity of H holds for orders in (0, 1/2]")
    if np.ndim(grid) == 0:
        grid = np.linspace(-math.pi, math.pi, int(grid))
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(indicator_H(rho, density, grid))
    scale = zero_tol * max(density.total_mass, 1.0) * math.pi / math.sin(math.pi * rho)
    zeros = np.abs(vals) <= scale
    nonneg = bool(np.all(vals >= -scale))
    return IndicatorReport(grid, vals, nonneg, grid[zeros], float(vals.min()))
