"""Contour integrals of e^{-phi^alpha(lambda) t} against the resolvent, and phi(W).

The contour consists of the arc |lambda| = r between the sector angles and
the two rays leaving it, truncated at R_max where the integrand has decayed
below the requested tolerance.  Rays are parameterized by log-radius
(lambda = e^{s + i theta}) and the arc by angle, so in the w = log(lambda)
plane every piece is a straight segment; panels are split until each is no
longer than its distance to the nearest pole w_q = log(lambda_q).

Nothing in the contour depends on a declared traversal direction: the sign
is fixed once by integrating -1/(lambda - lambda*) around the closed,
truncated contour for a point lambda* inside it and requiring +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .entire_fn.product import EntireFunctionSpec, taylor_coeffs_at_zero
from .entire_fn.regularity import growth_constants
from .errors import BranchCrossing, NearPole, NoConvergence, NoDecay, NodeOnPole, ToleranceNotMet
from .jets import JET_CAP
from .operator_model import SpectralOperator, resolvent_solve
from .quadrature import DEFAULT_ORDER, pairwise_sum, panel_rule, split_panels

MAX_PANEL = 0.25
SCAN_FACTOR = 2.0**0.25
EPS = np.finfo(float).eps

__all__ = [
    "Contour",
    "QuadratureResult",
    "beta_k",
    "build_contour",
    "closed_truncation_check",
    "commutation_check",
    "phi_alpha",
    "phi_of_W_series",
    "semigroup_integral",
    "taylor_coeffs_at_zero",
]


def _wrap(x):
    return np.mod(np.asarray(x, dtype=float) + math.pi, 2 * math.pi) - math.pi


def phi_alpha(phi: EntireFunctionSpec, lam, alpha: float, path: bool = False):
    """Principal power phi(lambda)^alpha and Arg phi(lambda).

    With ``path=True`` the points are taken as consecutive nodes of a path and
    a jump of Arg phi by more than pi between neighbours raises
    BranchCrossing.
    """
    logf = np.asarray(phi.log_eval(lam))
    arg = _wrap(np.imag(logf))
    if path and arg.size > 1 and np.any(np.abs(np.diff(arg.ravel())) > math.pi):
        raise BranchCrossing("phi crosses the branch cut of the principal power along the contour")
    log_pow = alpha * (np.real(logf) + 1j * arg)
    return np.exp(log_pow), arg


def _log_decay_exponent(phi, lam, alpha, t):
    """ln(t Re phi^alpha) (nan where Re phi^alpha <= 0) and alpha*|Arg phi|."""
    logf = np.asarray(phi.log_eval(lam))
    arg = _wrap(np.imag(logf))
    c = np.cos(alpha * arg)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(c > 0, math.log(t) + alpha * np.real(logf) + np.log(np.where(c > 0, c, 1.0)), np.nan)
    return out, alpha * np.abs(arg)


@dataclass(frozen=True)
class Contour:
    """Truncated contour: inner arc r, sector (theta0, theta1), rays up to R_max."""

    r: float
    theta0: float
    theta1: float
    R_max: float
    orientation: int
    order: int
    arc_edges: np.ndarray
    ray_edges: tuple  # (edges for theta0 ray, edges for theta1 ray) in log-radius
    scan_radii: np.ndarray
    scan_log_exponent: np.ndarray
    decay_slope: float

    def pieces(self, level: int = 0):
        """[(lambda nodes, dlambda weights)] for arc, ray theta1 out, ray theta0 in."""
        out = []
        th, wt = panel_rule(split_panels(self.arc_edges, level), self.order)
        lam = self.r * np.exp(1j * th)
        out.append((lam, 1j * lam * wt))
        for theta, sign in ((self.theta1, 1.0), (self.theta0, -1.0)):
            edges = self.ray_edges[1] if sign > 0 else self.ray_edges[0]
            s, ws = panel_rule(split_panels(edges, level), self.order)
            lam = np.exp(s + 1j * theta)
            out.append((lam, sign * lam * ws))
        return [(lam, self.orientation * w) for lam, w in out]

    def nodes(self, level: int = 0):
        p = self.pieces(level)
        return np.concatenate([a for a, _ in p]), np.concatenate([b for _, b in p])

    def far_arc(self, radius: float, level: int = 0, panels: int | None = None):
        """Nodes of the closing arc |lambda| = radius from theta1 back to theta0."""
        n = panels or max(2, int(math.ceil((self.theta1 - self.theta0) / MAX_PANEL)))
        edges = np.linspace(self.theta1, self.theta0, n + 1)
        th, wt = panel_rule(split_panels(edges, level), self.order)
        lam = radius * np.exp(1j * th)
        return lam, self.orientation * 1j * lam * wt


def _refine(edges, poles_w, segment_w):
    """Split panels until each is no longer than its distance to every pole.

    ``segment_w(a, b)`` maps parameter endpoints to the w-plane segment.
    """
    out = [edges[0]]
    stack = [(edges[i], edges[i + 1]) for i in range(len(edges) - 2, -1, -1)]
    while stack:
        a, b = stack.pop()
        wa, wb = segment_w(a, b)
        length = abs(wb - wa)
        if poles_w.size:
            d = wb - wa
            tproj = np.clip(np.real((poles_w - wa) * np.conj(d)) / max(abs(d) ** 2, 1e-300), 0, 1)
            dist = float(np.min(np.abs(poles_w - (wa + tproj * d))))
        else:
            dist = math.inf
        if length > dist and length > 1e-6:
            m = 0.5 * (a + b)
            stack.append((m, b))
            stack.append((a, m))
        else:
            out.append(b)
    return np.array(out)


def _uniform(a, b, width):
    n = max(1, int(math.ceil(abs(b - a) / width)))
    return np.linspace(a, b, n + 1)


def build_contour(
    op: SpectralOperator,
    phi: EntireFunctionSpec,
    alpha: float,
    t_min: float,
    tol: float = 1e-10,
    order: int = DEFAULT_ORDER,
    sector=None,
    r_limit_factor: float = 1e8,
    power: int = 0,
    inner_fraction: float = 0.5,
) -> Contour:
    """Choose r, R_max and the panel layout for ``op`` and ``phi``.

    r = inner_fraction * min |lambda_q|.  Moving r closer to the spectrum
    reduces cancellation for large t, where the inner arc dominates.

    R_max is the first scanned radius (factor 2^(1/4) steps) beyond
    1.5 max|lambda_q| where t_min Re phi^alpha exceeds ln(1/tol) + 10 on both
    rays.  ``power`` = k adds k ln|lambda| to that threshold, for integrands
    carrying an extra factor lambda^k.  NoDecay is raised when the exponent never gets there, or when
    alpha |Arg phi| reaches pi/2 on a ray beyond the spectrum first.
    """
    if t_min <= 0:
        raise ValueError("t_min must be positive")
    lq = op.characteristic_numbers
    theta0, theta1 = op.sector if sector is None else sector
    if not 0 < inner_fraction < 1:
        raise ValueError("inner_fraction must lie in (0, 1)")
    r = inner_fraction * float(np.min(np.abs(lq)))
    big = float(np.max(np.abs(lq)))
    radii = r * 1.1 * SCAN_FACTOR ** np.arange(int(math.log(r_limit_factor * big / r) / math.log(SCAN_FACTOR)) + 1)
    target = np.log(math.log(1.0 / tol) + 10.0 + power * np.maximum(np.log(radii), 0.0))
    R_max = 0.0
    scan = []
    for theta in (theta0, theta1):
        lam = radii * np.exp(1j * theta)
        logE, argpow = _log_decay_exponent(phi, lam, alpha, t_min)
        scan.append(logE)
        beyond = radii >= 1.5 * big
        ok = beyond & np.isfinite(logE) & (logE >= target)
        if not np.any(ok):
            raise NoDecay(f"t Re phi^alpha does not grow along the ray arg = {theta:.4g}")
        first = int(np.argmax(ok))
        bad = beyond[:first] & (argpow[:first] >= math.pi / 2)
        if np.any(bad):
            where = radii[:first][bad][0]
            raise NoDecay(f"alpha |Arg phi| reaches pi/2 at |lambda| = {where:.4g} on the ray arg = {theta:.4g}")
        R_max = max(R_max, float(radii[first]))
    keep = radii <= R_max * SCAN_FACTOR**4
    scan_log = np.vstack(scan)[:, keep]
    good = np.all(np.isfinite(scan_log), axis=0) & (radii[keep] >= 1.5 * big)
    if good.sum() >= 2:
        slope = float(np.polyfit(np.log(radii[keep][good]), np.min(scan_log[:, good], axis=0), 1)[0])
    else:
        slope = math.nan
    poles_w = np.log(lq)

    def arc_seg(a, b):
        return complex(math.log(r), a), complex(math.log(r), b)

    arc_edges = _refine(_uniform(theta0, theta1, MAX_PANEL), poles_w, arc_seg)
    rays = []
    for theta in (theta0, theta1):
        # poles enter through their unwrapped angle relative to the ray
        pw = np.real(poles_w) + 1j * (theta + _wrap(np.imag(poles_w) - theta))

        def ray_seg(a, b, theta=theta):
            return complex(a, theta), complex(b, theta)

        rays.append(_refine(_uniform(math.log(r), math.log(R_max), MAX_PANEL), pw, ray_seg))
    c = Contour(r, float(theta0), float(theta1), R_max, 1, order, arc_edges, tuple(rays),
                radii[keep], scan_log, slope)
    # orientation anchor: -1/(lambda - lambda*) must integrate to 2 pi i
    star = math.sqrt(r * R_max) * np.exp(0.5j * (theta0 + theta1))
    lam, w = c.nodes(2)
    lam_f, w_f = c.far_arc(R_max, 2)
    anchor = (np.sum(-w / (lam - star)) + np.sum(-w_f / (lam_f - star))) / (2j * math.pi)
    sign = int(round(anchor.real))
    if sign not in (1, -1) or abs(anchor - sign) > 1e-6:
        raise ToleranceNotMet(f"orientation anchor integral is {anchor:.6g}, not +-1", abs(anchor - sign))
    return Contour(r, float(theta0), float(theta1), R_max, sign, order, arc_edges, tuple(rays),
                   radii[keep], scan_log, slope)


@dataclass(frozen=True)
class QuadratureResult:
    value: np.ndarray
    truncation_error: float
    discretization_error: float
    roundoff_error: float
    level: int
    nodes: int

    @property
    def error(self) -> float:
        return self.truncation_error + self.discretization_error + self.roundoff_error


def _node_values(op, phi, alpha, t, f, lam, log_weight=None):
    """Integrand samples, shape (len(t),) + lam.shape + (N,)."""
    ph, _ = phi_alpha(phi, lam, alpha, path=True)
    expo = -np.multiply.outer(t, ph)
    if log_weight is not None:
        expo = expo + log_weight(lam)
    expo = np.exp(expo)
    try:
        x = resolvent_solve(op, lam, op.B @ f)
    except NearPole as e:
        raise NodeOnPole(str(e), e.distance) from None
    return expo[..., None] * x, x


def _integrate(contour, sample, level, scale=1.0):
    """Apply the rule at ``level``; ``sample`` returns arrays with nodes on axis 1."""
    total, absum, count = 0.0, 0.0, 0
    for lam, w in contour.pieces(level):
        vals = sample(lam)
        contrib = vals * w.reshape((1, w.size) + (1,) * (vals.ndim - 2))
        total = total + pairwise_sum(contrib, axis=1)
        absum = absum + np.sum(np.abs(contrib), axis=1)
        count += w.size
    return total * scale, absum * abs(scale), count


def _ray_tail(contour, magnitude, extent=2.0, step=0.02):
    """Integral of an integrand-magnitude bound beyond R_max on both rays.

    The probe follows each ray outward only while the magnitude keeps
    falling; once it turns up (products whose Arg phi grows eventually push
    Re phi^alpha negative far out) the remaining stretch is not part of the
    estimate.  That region is excluded by construction of R_max.
    """
    s = math.log(contour.R_max) + np.arange(0.0, extent + step / 2, step)
    total = 0.0
    for theta in (contour.theta0, contour.theta1):
        lam = np.exp(s + 1j * theta)
        m = magnitude(lam) * np.abs(lam)
        rising = np.flatnonzero(np.diff(m) > 0)
        stop = int(rising[0]) + 1 if rising.size else m.size
        if stop >= 2:
            total += float(np.trapezoid(m[:stop], s[:stop]))
    return total


def _per_row(x):
    x = np.abs(np.asarray(x))
    return x.reshape(x.shape[0], -1).max(axis=1) if x.ndim > 1 else x


def _adaptive(contour, sample, magnitude, tol, max_rounds, scale, relative=False):
    """Double the nodes until successive levels agree.

    The test is made row by row (one row per time point); with ``relative``
    each row's tolerance is ``tol`` times the size of that row's value.
    """
    prev, _, _ = _integrate(contour, sample, 0, scale)
    for level in range(1, max_rounds + 1):
        cur, absum, count = _integrate(contour, sample, level, scale)
        disc_rows = _per_row(cur - prev)
        rnd_rows = 64 * EPS * _per_row(absum)
        need = tol * _per_row(cur) if relative else np.full_like(disc_rows, tol)
        disc, rnd = float(disc_rows.max()), float(rnd_rows.max())
        trunc = abs(scale) * _ray_tail(contour, magnitude)
        if np.all(disc_rows <= np.maximum(need, 4 * rnd_rows)):
            return QuadratureResult(cur, trunc, disc, rnd, level, count)
        prev = cur
    raise ToleranceNotMet(f"node doubling did not reach tolerance {tol:g} (last difference {disc:.3g})", disc)


def semigroup_integral(
    op: SpectralOperator,
    phi: EntireFunctionSpec,
    alpha: float,
    t,
    f,
    contour: Contour | None = None,
    tol: float = 1e-10,
    max_rounds: int = 6,
    log_weight=None,
    relative: bool = False,
) -> QuadratureResult:
    """(1/2 pi i) int e^{-phi^alpha(lambda) t} B (I - lambda B)^{-1} f dlambda.

    ``t`` may be an array; the value then has shape (len(t), N).
    ``log_weight`` optionally adds log w(lambda) to the exponent, i.e. a
    scalar factor w(lambda) kept in log form so it cannot overflow.
    By default ``tol`` is relative to ||f||; with ``relative`` it is relative
    to ||u(t)|| for every t separately, as long as roundoff permits.
    """
    scalar_t = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    f = np.asarray(f, dtype=complex)
    if contour is None:
        contour = build_contour(op, phi, alpha, float(t.min()), tol)
    scale = 1.0 / (2j * math.pi)

    def sample(lam):
        return _node_values(op, phi, alpha, t, f, lam, log_weight)[0]

    Bf = op.B @ f

    def magnitude(lam):
        ph, _ = phi_alpha(phi, lam, alpha)
        logm = -t.min() * np.real(ph)
        if log_weight is not None:
            logm = logm + np.real(log_weight(lam))
        x = resolvent_solve(op, lam, Bf)
        return np.exp(np.minimum(logm, 700.0)) * np.linalg.norm(x, axis=-1)

    if relative:
        res = _adaptive(contour, sample, magnitude, tol, max_rounds, scale, relative=True)
    else:
        res = _adaptive(contour, sample, magnitude, tol * max(np.linalg.norm(f), 1e-300), max_rounds, scale)
    if scalar_t:
        res = QuadratureResult(res.value[0], res.truncation_error, res.discretization_error, res.roundoff_error,
                               res.level, res.nodes)
    return res


def beta_k(
    phi: EntireFunctionSpec,
    alpha: float,
    t: float,
    contour: Contour,
    k: int,
    tol: float = 1e-12,
    max_rounds: int = 6,
) -> QuadratureResult:
    """beta_k(t) = int over the contour of e^{-phi^alpha(lambda) t} lambda^k dlambda."""
    if not 0 <= k <= 8:
        raise ValueError("k must lie in 0..8")
    if t <= 0:
        raise ValueError("t must be positive")
    tt = np.array([float(t)])

    def sample(lam):
        ph, _ = phi_alpha(phi, lam, alpha, path=True)
        return np.exp(-np.multiply.outer(tt, ph)) * lam**k

    def magnitude(lam):
        ph, _ = phi_alpha(phi, lam, alpha)
        return np.exp(np.minimum(-t * np.real(ph), 700.0)) * np.abs(lam) ** k

    res = _adaptive(contour, sample, magnitude, tol, max_rounds, 1.0)
    return QuadratureResult(complex(res.value[0]), res.truncation_error, res.discretization_error,
                            res.roundoff_error, res.level, res.nodes)


@dataclass(frozen=True)
class ClosedTruncation:
    radius: float
    open_part: complex
    arc_part: complex
    mismatch: float


def closed_truncation_check(phi, alpha, t, contour: Contour, k: int, radius: float | None = None,
                            level: int = 2) -> ClosedTruncation:
    """Cauchy check on the contour cut at |lambda| = radius and closed by an arc.

    The truncated rays plus inner arc must cancel the closing arc.
    """
    R = math.sqrt(contour.r * contour.R_max) if radius is None else float(radius)
    cut = Contour(contour.r, contour.theta0, contour.theta1, R, contour.orientation, contour.order,
                  contour.arc_edges,
                  tuple(np.append(e[e < math.log(R)], math.log(R)) for e in contour.ray_edges),
                  contour.scan_radii, contour.scan_log_exponent, contour.decay_slope)

    def g(lam):
        ph, _ = phi_alpha(phi, lam, alpha)
        return np.exp(-t * ph) * lam**k

    lam, w = cut.nodes(level)
    open_part = complex(pairwise_sum(g(lam) * w))
    lam_f, w_f = cut.far_arc(R, level, panels=max(8, int(R)))
    arc_part = complex(pairwise_sum(g(lam_f) * w_f))
    scale = max(abs(open_part), abs(arc_part), 1e-300)
    return ClosedTruncation(R, open_part, arc_part, abs(open_part + arc_part) / scale)


# -- phi(W) by its Taylor series ----------------------------------------------


@lru_cache(maxsize=64)
def _coefficients(phi: EntireFunctionSpec) -> np.ndarray:
    return taylor_coeffs_at_zero(phi, JET_CAP + 1)


@dataclass(frozen=True)
class SeriesResult:
    value: np.ndarray
    terms: int
    tail_bound: float
    trajectory: np.ndarray


def coefficient_bound(sigma: float, rho: float, n):
    """|c_n| < (e sigma rho)^{n/rho} n^{-n/rho} (asymptotic bound for order rho, type sigma)."""
    n = np.asarray(n, dtype=float)
    return np.exp(n / rho * (math.log(math.e * sigma * rho) - np.log(n)))


def _beyond_cap_bound(phi, coeffs, w_norm, last_norm, cap) -> float:
    """Bound on sum_{n > cap} |c_n| ||W^n f|| using ||W^n f|| <= ||W^cap f|| ||W||^{n-cap}."""
    if phi.is_polynomial:
        return 0.0
    rho, sigma = growth_constants(phi)
    n = np.arange(cap + 1, cap + 4001)
    if sigma is not None and rho > 0:
        logs = n / rho * (math.log(math.e * sigma * rho) - np.log(n)) + (n - cap) * math.log(max(w_norm, 1e-300))
        if logs[-1] > logs[-2]:
            return math.inf
        return float(np.sum(np.exp(logs))) * last_norm
    # no closed-form growth data: geometric extrapolation of the last ratios
    tail = np.abs(coeffs[-9:])
    if np.any(tail == 0):
        return 0.0
    q = float(np.max(tail[1:] / tail[:-1])) * w_norm
    if q >= 1:
        return math.inf
    return float(tail[-1] * q / (1 - q)) * last_norm


def phi_of_W_series(op: SpectralOperator, phi: EntireFunctionSpec, f, tol: float = 1e-12) -> SeriesResult:
    """sum_{n <= N*} c_n W^n f with the smallest N* whose tail bound is <= tol ||f||."""
    f = np.asarray(f, dtype=complex)
    coeffs = _coefficients(phi)
    cap = coeffs.size - 1
    vecs = [f]
    for _ in range(cap):
        vecs.append(op.W @ vecs[-1])
    V = np.array(vecs)
    norms = np.linalg.norm(V.reshape(V.shape[0], -1), axis=1)
    terms_abs = np.abs(coeffs) * norms
    beyond = _beyond_cap_bound(phi, coeffs, float(np.linalg.norm(op.W, 2)), norms[-1], cap)
    # tails[N] = sum_{n > N} |c_n| ||W^n f|| + beyond
    tails = np.append(np.cumsum(terms_abs[::-1])[::-1][1:], 0.0) + beyond
    target = tol * max(float(np.linalg.norm(f)), 1e-300)
    ok = np.flatnonzero(tails <= target)
    if not ok.size:
        raise NoConvergence(f"series tail bound stays above {target:.3g} up to {cap} terms", tails)
    N = int(ok[0])
    value = np.tensordot(coeffs[: N + 1], V[: N + 1], axes=(0, 0))
    return SeriesResult(value, N, float(tails[N]), tails)


@dataclass(frozen=True)
class CommutationReport:
    left: np.ndarray
    right: np.ndarray
    relative_difference: float
    quadrature_error: float


def commutation_check(op, phi, alpha, t, f, contour: Contour | None = None, tol: float = 1e-11) -> CommutationReport:
    """Compare int phi(lambda) e^{..} B(I - lambda B)^{-1} f with phi(W) applied to the plain integral."""
    if contour is None:
        contour = build_contour(op, phi, alpha, float(np.min(t)), tol)
    left = semigroup_integral(op, phi, alpha, t, f, contour, tol, log_weight=phi.log_eval)
    plain = semigroup_integral(op, phi, alpha, t, f, contour, tol)
    right = phi_of_W_series(op, phi, plain.value, tol=1e-14).value
    scale = max(float(np.linalg.norm(right)), 1e-300)
    return CommutationReport(left.value, right, float(np.linalg.norm(left.value - right)) / scale,
                             left.error + plain.error)
