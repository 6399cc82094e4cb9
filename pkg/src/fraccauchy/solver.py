"""Root-vector series solution u(t) = sum_nu A_nu(phi^alpha, t) f.

On a Jordan chain e_0 .. e_k of B for the eigenvalue mu (lambda = 1/mu) the
solution operator acts as F(B) with F(zeta) = exp(-phi^alpha(1/zeta) t), so

    u = sum_chains sum_i c_i(t) e_i,   c_i(t) = sum_{m=0}^{k-i} j_m a_{i+m},

where j_m is the m-th Taylor coefficient of F at mu (j_m = e^{-phi^alpha(lambda) t} H_m)
and a_i = (f, g_i) are the biorthogonal coefficients.  Chains are summed
annulus by annulus, R_nu < |lambda_q| <= R_{nu+1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entire_fn.growth import order_type_estimate
from .entire_fn.product import EntireFunctionSpec
from .entire_fn.regularity import growth_constants
from .errors import AuditFailed, BranchCrossing, NoDecay, PreconditionError
from .functional_calculus import build_contour, phi_of_W_series
from .jets import Jet
from .operator_model import (
    BiorthogonalSystem,
    SpectralOperator,
    biorthogonal,
    numerical_range_sector,
    schatten_norm,
)

__all__ = [
    "AuditReport",
    "CauchyProblem",
    "Jet",
    "SolutionSeries",
    "coefficients",
    "evaluate_series",
    "group_annuli",
    "h_coefficients",
    "hypothesis_audit",
    "jet_of_exp_neg_phi_alpha",
    "log_rate_jet",
    "mode_rates",
    "solve",
    "uniqueness_indicator",
]

NUDGE = 1e-9
BRANCH_MARGIN = 1e-8


def _wrap(x):
    return np.mod(np.asarray(x, dtype=float) + math.pi, 2 * math.pi) - math.pi


def log_rate_jet(phi: EntireFunctionSpec, alpha: float, mu: complex, order: int, rate_scale: float = 1.0) -> Jet:
    """Jet at zeta = mu of log w(zeta), w = rate_scale * phi^alpha(1/zeta) on the principal branch."""
    mu = complex(mu)
    if mu == 0:
        raise PreconditionError("eigenvalue 0 has no characteristic number")
    lam = 1.0 / mu
    logphi = phi.log_jet(lam, order)
    c = logphi.coeffs.copy()
    if not np.isfinite(c[0]):
        raise BranchCrossing(f"phi vanishes at lambda = {lam:.6g}; its power has no jet there")
    arg = float(_wrap(c[0].imag))
    if math.pi - abs(arg) < BRANCH_MARGIN or math.pi - alpha * abs(arg) < BRANCH_MARGIN:
        raise BranchCrossing(f"phi({lam:.6g}) lies on the branch cut of the principal power")
    c[0] = c[0].real + 1j * arg
    c = c * alpha
    c[0] += math.log(rate_scale)
    return Jet(lam, c).compose(Jet.reciprocal_variable(mu, order))


def jet_of_exp_neg_phi_alpha(phi: EntireFunctionSpec, alpha: float, t, mu: complex, order: int,
                             rate_scale: float = 1.0) -> Jet:
    """Jet of zeta -> exp(-rate_scale * phi^alpha(1/zeta) t) at zeta = mu.

    ``t`` may be an array; the jet then carries one batch axis over t.
    ``rate_scale`` multiplies phi^alpha and exists only to inject a known
    perturbation for verification tests (1 means the true rate).
    """
    w = log_rate_jet(phi, alpha, mu, order, rate_scale).exp().coeffs
    t = np.asarray(t, dtype=float)
    return Jet(complex(mu), w.reshape(w.shape + (1,) * t.ndim) * (-t)).exp()


def h_coefficients(phi: EntireFunctionSpec, alpha: float, t, mu: complex, order: int) -> np.ndarray:
    """H_0 .. H_order at lambda = 1/mu, so that j_m = e^{-phi^alpha(lambda) t} H_m.

    The exponent jet is shifted to a zero constant term before exponentiating,
    which makes H_0 = 1 exactly.
    """
    w = log_rate_jet(phi, alpha, mu, order).exp().coeffs.copy()
    w[0] = 0.0
    t = np.asarray(t, dtype=float)
    return Jet(complex(mu), w.reshape(w.shape + (1,) * t.ndim) * (-t)).exp().coeffs


@dataclass(frozen=True)
class CauchyProblem:
    """D^{1/alpha} u = phi(W) u, u(0) = f, sampled on ``times``.

    alpha >= 1 is accepted; alpha = 1 is the classical (first-order) case,
    for which the fractional residual check is skipped.
    """

    operator: SpectralOperator
    phi: EntireFunctionSpec
    alpha: float
    f: np.ndarray
    times: np.ndarray
    R: float | None = None
    kappa: float = 0.5
    tol: float = 1e-10

    def __post_init__(self) -> None:
        if not self.alpha >= 1:
            raise ValueError("alpha must be at least 1")
        f = np.array(self.f, dtype=complex).ravel()
        if f.size != self.operator.dimension:
            raise ValueError("initial vector has the wrong dimension")
        t = np.array(self.times, dtype=float).ravel()
        if t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be positive and strictly ascending")
        if not 0 < self.kappa < 1:
            raise ValueError("kappa must lie in (0, 1)")
        if self.R is not None and not 0 < self.R <= float(np.min(np.abs(self.operator.characteristic_numbers))):
            raise ValueError("R must lie in (0, min |lambda_q|]")
        f.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "times", t)


def coefficients(op: SpectralOperator, biorth: BiorthogonalSystem, phi: EntireFunctionSpec, alpha: float, f, t,
                 chain: int, rate_scale: float = 1.0, derivative: bool = False) -> np.ndarray:
    """c_i(t) for i = 0..k of chain number ``chain``; shape (k+1,) + t.shape.

    With ``derivative`` every mode e^{-wt} is replaced by its fractional
    derivative w^{1/alpha} e^{-wt}, i.e. the jet is multiplied by that of
    w^{1/alpha} before the coefficients are formed.
    """
    c = op.chains[chain]
    a = biorth.coefficients(f)[list(c.indices)]
    t = np.asarray(t, dtype=float)
    k = c.length - 1
    if not np.any(a):
        return np.zeros((k + 1,) + t.shape, dtype=complex)
    jet = jet_of_exp_neg_phi_alpha(phi, alpha, t, c.eigenvalue, k, rate_scale)
    if derivative:
        root = (log_rate_jet(phi, alpha, c.eigenvalue, k, rate_scale) / alpha).exp()
        jet = Jet(jet.center, root.coeffs.reshape(root.coeffs.shape + (1,) * t.ndim)) * jet
    j = jet.coeffs
    out = np.zeros((k + 1,) + t.shape, dtype=complex)
    for i in range(k + 1):
        for m in range(k - i + 1):
            out[i] = out[i] + j[m] * a[i + m]
    return out


@dataclass(frozen=True)
class Annuli:
    radii: np.ndarray  # R_0 .. R_{n}
    groups: tuple  # per nu: tuple of eigenvalue group indices q


def group_annuli(op: SpectralOperator, R: float | None = None, kappa: float = 0.5) -> Annuli:
    """Partition lambda_q into rings R_nu < |lambda_q| <= R_{nu+1}, R_nu = R (1 - kappa)^{1 - nu}.

    Ring radii that coincide with some |lambda_q| (within 1e-9 relative) are
    pushed outward by that relative amount, so every lambda_q stays strictly
    inside its ring.
    """
    lq = op.characteristic_numbers
    mods = np.abs(lq)
    if R is None:
        R = 0.9 * float(mods.min())
    if not 0 < kappa < 1:
        raise ValueError("kappa must lie in (0, 1)")
    if R > mods.min():
        raise ValueError("R must not exceed min |lambda_q|")
    radii = [R * (1 - kappa)]
    while radii[-1] < mods.max():
        radii.append(R * (1 - kappa) ** (-len(radii) + 1))
    radii = np.array(radii)
    for n in range(radii.size):
        while np.any(np.abs(radii[n] - mods) <= NUDGE * mods):
            radii[n] *= 1 + NUDGE
    idx = np.searchsorted(radii, mods, side="left") - 1  # R_nu < |l| <= R_{nu+1}
    count = int(idx.max()) + 1
    groups = tuple(tuple(int(q) for q in np.flatnonzero(idx == nu)) for nu in range(count))
    return Annuli(radii[: count + 1], groups)


@dataclass(frozen=True)
class SolutionSeries:
    times: np.ndarray
    blocks: np.ndarray  # (T, n_annuli, N)
    coefficient_tables: tuple  # per chain: (k+1, T)
    annuli: Annuli
    block_norms: np.ndarray  # (T, n_annuli)
    pairings: tuple
    forced: bool
    problem: CauchyProblem
    audit: "AuditReport | None" = None
    rate_scale: float = 1.0

    @property
    def values(self) -> np.ndarray:
        """u(t_j) for every time point, summed in ascending nu."""
        total = np.zeros((self.blocks.shape[0], self.blocks.shape[2]), dtype=complex)
        for nu in range(self.blocks.shape[1]):
            total = total + self.blocks[:, nu]
        return total

    def at(self, t) -> np.ndarray:
        """Re-evaluate the series at arbitrary times; shape t.shape + (N,)."""
        return evaluate_series(self.problem, t, self.rate_scale)

    def tail(self) -> np.ndarray:
        """Norm of the blocks beyond the last one: zero in finite dimension."""
        return np.zeros(self.times.size)


def evaluate_series(problem: CauchyProblem, t, rate_scale: float = 1.0, derivative: bool = False,
                    biorth: BiorthogonalSystem | None = None) -> np.ndarray:
    """u(t) (or its fractional derivative, mode by mode) for any positive t; shape t.shape + (N,)."""
    op = problem.operator
    bio = biorthogonal(op) if biorth is None else biorth
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (op.dimension,), dtype=complex)
    for n, c in enumerate(op.chains):
        coef = coefficients(op, bio, problem.phi, problem.alpha, problem.f, t, n, rate_scale, derivative)
        out += np.tensordot(coef, c.vectors, axes=([0], [1]))
    return out


def mode_rates(problem: CauchyProblem, rate_scale: float = 1.0) -> np.ndarray:
    """w_q = rate_scale * phi^alpha(lambda_q) for every chain carrying a nonzero coefficient."""
    op = problem.operator
    a = biorthogonal(op).coefficients(problem.f)
    rates = [np.exp(log_rate_jet(problem.phi, problem.alpha, c.eigenvalue, 0, rate_scale).coeffs[0])
             for c in op.chains if np.any(a[list(c.indices)])]
    return np.array(rates, dtype=complex)


@dataclass(frozen=True)
class Check:
    passed: bool
    evidence: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AuditReport:
    checks: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, c in self.checks.items() if not c.passed]


def _order_check(phi: EntireFunctionSpec) -> Check:
    zs = phi.zeros
    known = bool(phi.exp_poly) or zs.is_finite or zs.closed_form_exponent() is not None
    rho, sigma = growth_constants(phi)
    evidence = {"closed_form_order": rho if known else None, "closed_form_type": sigma}
    fitted = None
    try:
        est = order_type_estimate(phi, 1e4 * 4.0 ** np.arange(8))
        evidence.update(fitted_order=est.order, fitted_type=est.type, fit_residual=est.residual)
        fitted = est.order
    except Exception as e:  # overflow or no limit: keep the closed form only
        evidence["fit_error"] = str(e)
    ok = rho < 0.5 if known else (fitted is not None and fitted < 0.45)
    return Check(bool(ok), evidence)


def _image_check(problem: CauchyProblem) -> Check:
    op, phi, alpha = problem.operator, problem.phi, problem.alpha
    limit = math.pi / (2 * alpha)
    try:
        contour = build_contour(op, phi, alpha, float(problem.times.min()), problem.tol)
    except NoDecay as e:
        return Check(False, {"error": str(e), "limit": limit})
    theta0, theta1 = op.sector
    radii = contour.r * (contour.R_max / contour.r) ** np.linspace(0, 1, 240)
    angles = np.linspace(theta0, theta1, 33)
    lam = radii[:, None] * np.exp(1j * angles[None, :])
    logf = phi.log_eval(lam)
    args = np.abs(_wrap(np.imag(logf)))
    worst = float(args.max())
    i, j = np.unravel_index(int(np.argmax(args)), args.shape)
    return Check(worst < limit, {"max_arg": worst, "limit": limit, "at": complex(lam[i, j]),
                                 "sampled_up_to": contour.R_max})


def _zeros_check(problem: CauchyProblem) -> Check:
    zs = problem.phi.zeros
    lo, hi = problem.operator.sector
    if zs.is_finite:
        vals = zs.take(len(zs))
        if vals.size == 0:
            return Check(True, {"zeros": 0})
        inside = (np.mod(np.angle(vals) - lo, 2 * math.pi) <= hi - lo)
        return Check(True, {"zeros_in_sector": int(inside.sum()), "note": "finite list: no large zeros"})
    bad = [float(a) for a in zs.angles if np.mod(a - lo, 2 * math.pi) <= hi - lo]
    return Check(not bad, {"ray_angles": list(zs.angles), "rays_in_sector": bad})


def _sector_check(problem: CauchyProblem) -> Check:
    rep = numerical_range_sector(problem.operator)
    return Check(rep.passed, {"arg_range": rep.arg_range, "declared": rep.declared, "verdict": rep.verdict})


def hypothesis_audit(problem: CauchyProblem) -> AuditReport:
    """Check the standing hypothesis piece by piece; report only, never raises.

    The image of the sector under phi is sampled for |lambda| <= R_max of the
    truncated contour only.  Beyond R_max the integrand is below tolerance,
    and for canonical products Arg phi grows without bound there, so the
    condition cannot hold on the whole unbounded sector.
    """
    checks = {
        "order_below_half": _order_check(problem.phi),
        "image_sector": _image_check(problem),
        "zeros_outside_sector": _zeros_check(problem),
        "numerical_range": _sector_check(problem),
        "schatten": Check(True, {"s1": schatten_norm(problem.operator, 1.0), "s2": schatten_norm(problem.operator, 2.0)}),
    }
    return AuditReport(checks)


def solve(problem: CauchyProblem, force: bool = False, audit: AuditReport | None = None,
          rate_scale: float = 1.0) -> SolutionSeries:
    """Assemble u(t) block by block; AuditFailed unless the audit passes or ``force``."""
    if audit is None:
        audit = hypothesis_audit(problem)
    if not audit.passed and not force:
        raise AuditFailed(f"hypothesis audit failed: {', '.join(audit.failures())}", audit)
    op, t = problem.operator, problem.times
    bio = biorthogonal(op)
    ann = group_annuli(op, problem.R, problem.kappa)
    T, N = t.size, op.dimension
    blocks = np.zeros((T, len(ann.groups), N), dtype=complex)
    tables = []
    ring_of = {q: nu for nu, qs in enumerate(ann.groups) for q in qs}
    for n, c in enumerate(op.chains):
        coef = coefficients(op, bio, problem.phi, problem.alpha, problem.f, t, n, rate_scale)
        tables.append(coef)
        blocks[:, ring_of[c.q]] += coef.T @ c.vectors.T
    norms = np.linalg.norm(blocks, axis=2)
    return SolutionSeries(t, blocks, tuple(tables), ann, norms, bio.raw_pairings, bool(force and not audit.passed),
                          problem, audit, rate_scale)


@dataclass(frozen=True)
class UniquenessReport:
    samples: int
    min_real_part: float
    negative_fraction: float
    note: str = ("heuristic: samples Re(phi(W)x, x) on random unit vectors; a necessary-condition probe, "
                 "not the accretivity hypothesis itself")


def uniqueness_indicator(problem: CauchyProblem, samples: int = 2000, seed: int = 0) -> UniquenessReport:
    op, phi = problem.operator, problem.phi
    N = op.dimension
    Phi = np.column_stack([phi_of_W_series(op, phi, e).value for e in np.eye(N, dtype=complex)])
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((N, samples)) + 1j * rng.standard_normal((N, samples))
    X /= np.linalg.norm(X, axis=0)
    vals = np.real(np.einsum("ij,ij->j", X.conj(), Phi @ X))
    return UniquenessReport(samples, float(vals.min()), float(np.mean(vals < 0)))
