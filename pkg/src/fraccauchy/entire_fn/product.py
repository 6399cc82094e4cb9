"""Canonical products f(z) = C z^m e^{P(z)} prod_n G(z / a_n; p).

Evaluation works in logarithmic form so that values far beyond the double
range (for example cos sqrt(z) at |z| = 1e6) stay representable.  For
``power`` and ``geometric`` zero families the factors beyond the truncation
index are not dropped but summed in closed form through Hurwitz zeta / geometric
power sums; the reported tail bound then covers only the neglected terms of
that series.  Other families use the plain truncated product with the
integral-comparison tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from ..errors import JetOverflow, TailNotBounded
from ..jets import JET_CAP, Jet
from .zeros import ZeroSequence, genus as _genus

MAX_TRUNCATION = 10_000_000
_CHUNK = 2_000_000


def weierstrass_factor(z, p: int):
    """Primary factor G(z, p) = (1 - z) exp(z + z^2/2 + ... + z^p/p)."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    z = np.asarray(z, dtype=complex)
    k = np.arange(1, p + 1)
    partial = np.sum(z[..., None] ** k / k, axis=-1) if p else 0.0
    out = (1 - z) * np.exp(partial)
    return out[()] if out.ndim == 0 else out


def _log_factor(u: np.ndarray, p: int) -> np.ndarray:
    with np.errstate(divide="ignore"):  # a point on a zero gives -inf
        out = np.log1p(-u)
    if p:
        term = np.ones_like(u)
        for k in range(1, p + 1):
            term = term * u
            out = out + term / k
    return out


@dataclass(frozen=True)
class EntireFunctionSpec:
    """An entire function given through its zeros as a canonical product.

    ``exp_poly`` holds the coefficients ``(P_1, P_2, ...)`` of an optional
    exponential factor ``exp(P_1 z + P_2 z^2 + ...)``; it is empty for the
    pure canonical products used throughout.
    """

    zeros: ZeroSequence
    genus: int
    constant: complex = 1.0
    multiplicity: int = 0
    truncation: int = 64
    tail_tolerance: float = 1e-14
    exp_poly: tuple = ()

    def __post_init__(self) -> None:
        if self.genus < 0 or self.multiplicity < 0:
            raise ValueError("genus and multiplicity must be nonnegative")
        if self.truncation < 1:
            raise ValueError("truncation length must be positive")
        if self.tail_tolerance <= 0:
            raise ValueError("tail tolerance must be positive")
        if self.constant == 0:
            raise ValueError("constant factor must be nonzero")
        object.__setattr__(self, "exp_poly", tuple(complex(c) for c in self.exp_poly))
        if not self.zeros.is_finite:
            p = _genus(self.zeros)
            if p != self.genus:
                raise ValueError(f"genus {self.genus} inconsistent with zeros (minimal genus {p})")

    # -- common specimens --------------------------------------------------------
    @classmethod
    def identity(cls) -> "EntireFunctionSpec":
        return cls(ZeroSequence.explicit(()), genus=0, multiplicity=1)

    @classmethod
    def constant_one(cls) -> "EntireFunctionSpec":
        return cls(ZeroSequence.explicit(()), genus=0)

    @classmethod
    def polynomial(cls, roots, constant=1.0, multiplicity=0) -> "EntireFunctionSpec":
        """C z^m prod (1 - z / root)."""
        return cls(ZeroSequence.explicit(roots), genus=0, constant=constant, multiplicity=multiplicity)

    @classmethod
    def exponential(cls, rate: complex = 1.0) -> "EntireFunctionSpec":
        return cls(ZeroSequence.explicit(()), genus=0, exp_poly=(rate,))

    @classmethod
    def cos_sqrt(cls) -> "EntireFunctionSpec":
        return cls(ZeroSequence.cos_sqrt(), genus=0)

    @classmethod
    def negative_power_zeros(cls, exponent: float, scale: float = 1.0) -> "EntireFunctionSpec":
        """Genus-p product with zeros -scale * n^exponent."""
        zs = ZeroSequence.power(scale=scale, exponent=exponent, angles=(math.pi,))
        return cls(zs, genus=_genus(zs))

    @property
    def is_polynomial(self) -> bool:
        return self.zeros.is_finite and self.zeros.complete and not self.exp_poly

    # -- truncation choice --------------------------------------------------------
    def _analytic(self) -> bool:
        return self.zeros.has_analytic_tail

    def truncation_for(self, radius: float) -> int:
        """Truncation index M used for |z| <= radius."""
        zs, p = self.zeros, self.genus
        if zs.is_finite:
            return len(zs)
        M = self.truncation
        if self._analytic():
            return max(M, zs.first_index_at_least(2.0 * radius) - 1)
        while True:
            ok_ratio = float(zs.modulus(M + 1)) >= 2.0 * radius
            if ok_ratio and self._remainder(radius, p + 1, M) <= self.tail_tolerance:
                return M
            M *= 2
            if M > MAX_TRUNCATION:
                raise TailNotBounded(f"tail bound not met at |z| = {radius:g} within {MAX_TRUNCATION} factors")

    def _remainder(self, radius, power: int, M: int):
        """(2/power) sum_{n>M} |z/a_n|^power for |z| = radius (valid when |z/a_n| <= 1/2)."""
        w = np.asarray(radius, dtype=float) / float(self.zeros.modulus(M + 1))
        return 2.0 / power * w**power * self.zeros.relative_power_sum_tail(power, M)

    def _tail_terms(self, M: int, radius: float) -> int:
        """Number J of tail-series powers so the neglected remainder <= tolerance."""
        J = self.genus + 1
        while self._remainder(radius, J + 1, M) > self.tail_tolerance and J < 400:
            J += 1
        return J

    # -- evaluation ----------------------------------------------------------------
    def log_eval(self, z, return_bound: bool = False):
        """log f(z) (a branch: sum of principal logs of the factors)."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        radius = float(np.max(np.abs(flat))) if flat.size else 0.0
        zs, p = self.zeros, self.genus
        if zs.is_finite and not zs.complete:
            raise TailNotBounded("explicit zero list is marked incomplete; its product tail cannot be bounded")
        out = np.full(flat.shape, np.log(complex(self.constant)), dtype=complex)
        if self.multiplicity:
            out += self.multiplicity * np.log(flat)
        for k, ck in enumerate(self.exp_poly, start=1):
            out += ck * flat**k
        M = self.truncation_for(radius)
        roots = zs.take(M)
        if roots.size:
            block = max(1, _CHUNK // max(flat.size, 1))
            for s in range(0, roots.size, block):
                u = flat[:, None] / roots[None, s : s + block]
                out += _log_factor(u, p).sum(axis=1)
        bound = np.zeros(flat.shape)
        if not zs.is_finite:
            if self._analytic():
                J = self._tail_terms(M, radius)
                a_next = zs.take(M + 1)[-1]
                j = np.arange(p + 1, J + 1)
                sums = zs.scaled_tail_sums(M, j)
                w = flat / a_next
                # Horner form of sum_j s_j w^j / j
                tail = np.zeros_like(flat)
                for jj, sj in zip(j[::-1], sums[::-1]):
                    tail = (tail + sj / jj) * w
                out -= tail * w**p
                bound = self._remainder(np.abs(flat), J + 1, M)
            else:
                bound = self._remainder(np.abs(flat), p + 1, M)
        out = out.reshape(z.shape)
        if return_bound:
            return out, bound.reshape(z.shape)
        return out

    def __call__(self, z):
        return np.exp(self.log_eval(z))

    def log_abs(self, z):
        return np.real(self.log_eval(z))

    # -- Taylor data -----------------------------------------------------------
    def log_jet(self, center: complex, degree: int, include_monomial: bool = True) -> Jet:
        """Jet of log f at ``center`` (coefficients in powers of z - center).

        With ``include_monomial=False`` the factor z^m is left out, which is
        needed at ``center = 0``.
        """
        if degree > JET_CAP:
            raise JetOverflow(f"jet degree {degree} exceeds cap {JET_CAP}")
        x0 = complex(center)
        zs, p, K = self.zeros, self.genus, degree
        k = np.arange(1, K + 1)
        coeffs = np.zeros(K + 1, dtype=complex)
        c0 = np.log(complex(self.constant))
        if include_monomial and self.multiplicity:
            if x0 == 0:
                raise ValueError("log z^m has no jet at the origin")
            c0 += self.multiplicity * np.log(x0)
            coeffs[1:] += self.multiplicity * (-1.0) ** (k + 1) / (k * x0**k)
        # exponential polynomial, shifted to x0
        for deg, ck in enumerate(self.exp_poly, start=1):
            c0 += ck * x0**deg
            for kk in range(1, min(deg, K) + 1):
                coeffs[kk] += ck * comb(deg, kk) * x0 ** (deg - kk)
        M = self.truncation_for(abs(x0))
        roots = zs.take(M)
        if roots.size:
            c0 += np.sum(_log_factor(x0 / roots, p))
            d = roots - x0
            coeffs[1:] -= np.sum((1.0 / d[None, :]) ** k[:, None] / k[:, None], axis=1)
            for j in range(1, p + 1):
                s = np.sum(roots ** (-float(j)))
                for kk in range(1, min(j, K) + 1):
                    coeffs[kk] += comb(j, kk) * x0 ** (j - kk) * s / j
        if not zs.is_finite and self._analytic():
            J = max(self._tail_terms(M, abs(x0)), K + 1)
            a_next = zs.take(M + 1)[-1]
            j = np.arange(p + 1, J + 1)
            sums = zs.scaled_tail_sums(M, j)
            w0 = x0 / a_next
            c0 -= np.sum(sums * w0**j / j)
            for kk in range(1, K + 1):
                sel = j >= kk
                jj = j[sel]
                coeffs[kk] -= np.sum(comb(jj, kk) * w0 ** (jj - kk) * sums[sel] / jj) * (1.0 / a_next) ** kk
        coeffs[0] = c0
        return Jet(x0, coeffs)

    def jet(self, center: complex, degree: int) -> Jet:
        """Jet of f itself at ``center``."""
        if complex(center) == 0:
            return Jet(0.0, taylor_coeffs_at_zero(self, degree + 1))
        return self.log_jet(center, degree).exp()

    def taylor_at_zero(self, count: int) -> tuple[np.ndarray, float]:
        """Taylor coefficients c_0..c_{count-1} at 0 and the truncation bound.

        The primary factors G(z/a_n; p), n <= M, are multiplied as truncated
        polynomials; only the factors beyond M go through exp of their
        (small) log series.  Going through exp(log f) instead would cancel
        catastrophically: the log coefficients are O(1) while c_n decays
        faster than any geometric sequence.
        """
        if count > JET_CAP + 1:
            raise JetOverflow(f"{count} coefficients exceed the jet cap {JET_CAP}")
        K = count - 1
        zs, p = self.zeros, self.genus
        k = np.arange(K + 1)
        # G(u; p) coefficients: (1 - u) * exp(u + ... + u^p / p)
        e = np.zeros(K + 1, dtype=complex)
        e[0] = 1.0
        if p:
            lg = np.zeros(K + 1, dtype=complex)
            lg[1 : min(p, K) + 1] = 1.0 / np.arange(1, min(p, K) + 1)
            e = Jet(0.0, lg).exp().coeffs
        g = e.copy()
        g[1:] -= e[:-1]
        M = self.truncation_for(0.0)
        poly = np.zeros(K + 1, dtype=complex)
        poly[0] = 1.0
        for a in zs.take(M):
            poly = np.convolve(poly, g * (1.0 / a) ** k)[: K + 1]
        bound = 0.0
        log_rest = np.zeros(K + 1, dtype=complex)
        if not zs.is_finite:
            if zs.has_analytic_tail:
                a_next = zs.take(M + 1)[-1]
                j = np.arange(p + 1, K + 1)
                if j.size:
                    log_rest[j] = -zs.scaled_tail_sums(M, j) * (1.0 / a_next) ** j / j
            else:
                bound = zs.power_sum_tail(p + 1, M)
        for deg, ck in enumerate(self.exp_poly, start=1):
            if deg <= K:
                log_rest[deg] += ck
        log_rest[0] = np.log(complex(self.constant))
        poly = (Jet(0.0, poly) * Jet(0.0, log_rest).exp()).coeffs
        m = self.multiplicity
        out = np.zeros(K + 1, dtype=complex)
        if m <= K:
            out[m:] = poly[: K + 1 - m]
        return out, bound


def log_eval_product(spec: EntireFunctionSpec, z):
    """(log f(z), bound on the neglected log-tail)."""
    return spec.log_eval(z, return_bound=True)


def eval_product(spec: EntireFunctionSpec, z):
    """(f(z), bound on the neglected log-tail).

    The bound applies to log f, so it is also a relative error bound on the
    returned value to first order.
    """
    logv, bound = spec.log_eval(z, return_bound=True)
    return np.exp(logv), bound


def taylor_coeffs_at_zero(spec: EntireFunctionSpec, count: int, return_bound: bool = False):
    """First ``count`` Taylor coefficients c_0 ... c_{count-1} of f at 0."""
    coeffs, bound = spec.taylor_at_zero(count)
    return (coeffs, bound) if return_bound else coeffs
