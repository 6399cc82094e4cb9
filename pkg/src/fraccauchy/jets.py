"""Truncated Taylor series ("jets") with exact arithmetic up to a fixed degree.

A :class:`Jet` stores the coefficients ``j_0 ... j_K`` of a power series in
``h = z - center``.  Coefficient arrays may carry trailing batch dimensions so
one jet can represent many series (for example one per time point) that share
the same expansion point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import JetOverflow

JET_CAP = 64


def _check_degree(degree: int) -> None:
    if degree > JET_CAP:
        raise JetOverflow(f"jet degree {degree} exceeds cap {JET_CAP}")


@dataclass(frozen=True)
class Jet:
    center: complex
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 0:
            c = c[None]
        _check_degree(c.shape[0] - 1)
        object.__setattr__(self, "coeffs", c)

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value, degree: int, center: complex = 0.0) -> "Jet":
        value = np.asarray(value, dtype=complex)
        c = np.zeros((degree + 1,) + value.shape, dtype=complex)
        c[0] = value
        return cls(center, c)

    @classmethod
    def variable(cls, center: complex, degree: int) -> "Jet":
        """The identity function ``z`` expanded at ``center``."""
        c = np.zeros(degree + 1, dtype=complex)
        c[0] = center
        if degree >= 1:
            c[1] = 1.0
        return cls(center, c)

    @classmethod
    def reciprocal_variable(cls, center: complex, degree: int) -> "Jet":
        """Jet of ``1/z`` at ``center`` (closed form)."""
        k = np.arange(degree + 1)
        return cls(center, (-1.0) ** k * complex(center) ** (-k - 1.0))

    # -- basic properties ---------------------------------------------------
    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def value(self):
        return self.coeffs[0]

    def derivative(self, m: int):
        """The m-th derivative at the center (``m! * j_m``)."""
        from math import factorial

        return factorial(m) * self.coeffs[m]

    def _like(self, coeffs) -> "Jet":
        return Jet(self.center, coeffs)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.degree != self.degree:
                raise ValueError("jets of different degree")
            return other
        other = np.asarray(other, dtype=complex)
        c = np.zeros((self.degree + 1,) + np.broadcast_shapes(other.shape, self.coeffs.shape[1:]), dtype=complex)
        c[0] = other
        return Jet(self.center, c)

    # -- arithmetic -------------------------------------------------------------
    def __add__(self, other) -> "Jet":
        o = self._coerce(other)
        return self._like(self.coeffs + o.coeffs)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return self._like(-self.coeffs)

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self._like(self.coeffs * np.asarray(other, dtype=complex))
        a, b = self.coeffs, self._coerce(other).coeffs
        K = self.degree
        shape = (K + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros(shape, dtype=complex)
        for k in range(K + 1):
            out[k] = sum(a[i] * b[k - i] for i in range(k + 1))
        return self._like(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.coeffs
        out = np.zeros_like(a)
        out[0] = 1.0 / a[0]
        for k in range(1, self.degree + 1):
            s = sum(a[i] * out[k - i] for i in range(1, k + 1))
            out[k] = -s * out[0]
        return self._like(out)

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self._like(self.coeffs / np.asarray(other, dtype=complex))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def exp(self) -> "Jet":
        a = self.coeffs
        out = np.zeros_like(a)
        out[0] = np.exp(a[0])
        for k in range(1, self.degree + 1):
            out[k] = sum(i * a[i] * out[k - i] for i in range(1, k + 1)) / k
        return self._like(out)

    def log(self, branch_value=None) -> "Jet":
        """Logarithm; ``branch_value`` overrides the constant term."""
        a = self.coeffs
        out = np.zeros_like(a)
        out[0] = np.log(a[0]) if branch_value is None else branch_value
        for k in range(1, self.degree + 1):
            s = sum(i * out[i] * a[k - i] for i in range(1, k))
            out[k] = (a[k] - s / k) / a[0]
        return self._like(out)

    def power(self, alpha: float) -> "Jet":
        """Principal power ``self**alpha``."""
        return (self.log() * alpha).exp()

    def compose(self, inner: "Jet") -> "Jet":
        """``self(inner)`` where ``self`` is expanded at ``inner.value``.

        ``self`` must be centered at the value of ``inner``; the result is
        centered at ``inner.center``.
        """
        shift = inner - inner.coeffs[0]
        out = Jet.constant(self.coeffs[-1], inner.degree, inner.center)
        for k in range(self.degree - 1, -1, -1):
            out = out * shift + self.coeffs[k]
        return out

    def truncate(self, degree: int) -> "Jet":
        return self._like(self.coeffs[: degree + 1])

    def __call__(self, z):
        """Evaluate the truncated polynomial at ``z``."""
        h = np.asarray(z, dtype=complex) - self.center
        out = np.zeros(np.broadcast_shapes(h.shape, self.coeffs.shape[1:]), dtype=complex)
        for c in self.coeffs[::-1]:
            out = out * h + c
        return out
