"""Zero sequences of entire functions: explicit lists and parametric families.

Parametric families index zeros by ``n = 1, 2, ...``:

``power``      a_n = c (n + shift)^s e^{i theta(n)}
``power_log``  a_n = c m^s (ln m)^k e^{i theta(n)},  m = n + shift
``geometric``  a_n = c b^n e^{i theta(n)}

The angle rule ``theta(n)`` is a tuple of angles used cyclically:
``(theta,)`` puts every zero on one ray, ``(theta_a, theta_b)`` alternates
between two rays, and so on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ..errors import NotDeterminable

TWO_PI = 2.0 * math.pi


def hurwitz_scaled(x: float, a: float) -> float:
    """``a**x * zeta(x, a) = sum_{k>=0} (a / (a + k))**x`` for ``x > 1``.

    Computed without underflow for large ``x``.
    """
    if x <= 1:
        return math.inf
    if x * math.log(max(a, 1.0 + 1e-300)) < 600.0:
        return float(special.zeta(x, a) * a**x)
    # direct summation; terms decay at least like exp(-x k / (a + k))
    total = 0.0
    k = 0
    chunk = 4096
    while True:
        ks = np.arange(k, k + chunk, dtype=float)
        terms = np.exp(-x * np.log1p(ks / a))
        total += float(terms.sum())
        last = terms[-1]
        k += chunk
        # integral bound for the remainder
        rem = (a + k) / (x - 1) * math.exp(-x * math.log1p(k / a))
        if last < 1e-18 * total and rem < 1e-17 * total:
            return total + rem


def in_sector(arg, lo: float, hi: float):
    """Open-sector membership ``lo < arg < hi`` modulo 2*pi."""
    width = hi - lo
    if width >= TWO_PI:
        return np.ones_like(np.asarray(arg, dtype=float), dtype=bool)
    d = np.mod(np.asarray(arg, dtype=float) - lo, TWO_PI)
    return (d > 0) & (d < width)


@dataclass(frozen=True)
class ZeroSequence:
    """Nonzero zeros ``a_1, a_2, ...`` sorted by modulus.

    Build with the classmethods; ``kind`` selects the generator.  Explicit
    lists are finite; ``complete=False`` marks a list that is only a prefix of
    an infinite zero set (product tails then cannot be bounded).
    """

    kind: str
    values: tuple = ()
    complete: bool = True
    scale: float = 1.0
    exponent: float = 1.0
    shift: float = 0.0
    log_power: float = 0.0
    base: float = 2.0
    angles: tuple = (0.0,)
    _sorted: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in ("explicit", "power", "power_log", "geometric"):
            raise ValueError(f"unknown zero family {self.kind!r}")
        if self.kind == "explicit":
            vals = np.asarray(self.values, dtype=complex).ravel()
            if np.any(vals == 0):
                raise ValueError("zeros must be nonzero (use the multiplicity m for z = 0)")
            order = np.lexsort((np.arange(vals.size), np.angle(vals), np.abs(vals)))
            srt = vals[order]
            srt.setflags(write=False)
            object.__setattr__(self, "values", tuple(complex(v) for v in vals))
            object.__setattr__(self, "_sorted", srt)
            return
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if not self.angles:
            raise ValueError("angle rule needs at least one angle")
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if self.kind in ("power", "power_log"):
            if self.exponent <= 0:
                raise ValueError("exponent must be positive")
            m1 = 1.0 + self.shift
            if m1 <= 0 or (self.kind == "power_log" and m1 <= 1.0):
                raise ValueError("shift makes the first zero vanish")
        if self.kind == "geometric" and self.base <= 1:
            raise ValueError("geometric base must exceed 1")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def explicit(cls, values, complete: bool = True) -> "ZeroSequence":
        return cls("explicit", values=tuple(values), complete=complete)

    @classmethod
    def power(cls, scale=1.0, exponent=1.0, shift=0.0, angles=(0.0,)) -> "ZeroSequence":
        return cls("power", scale=scale, exponent=exponent, shift=shift, angles=tuple(angles))

    @classmethod
    def power_log(cls, scale=1.0, exponent=1.0, log_power=2.0, shift=1.0, angles=(0.0,)) -> "ZeroSequence":
        return cls(
            "power_log", scale=scale, exponent=exponent, log_power=log_power, shift=shift, angles=tuple(angles)
        )

    @classmethod
    def geometric(cls, scale=1.0, base=2.0, angles=(0.0,)) -> "ZeroSequence":
        return cls("geometric", scale=scale, base=base, angles=tuple(angles))

    @classmethod
    def cos_sqrt(cls) -> "ZeroSequence":
        """Zeros of cos(sqrt z): pi^2 (n - 1/2)^2 on the positive axis."""
        return cls.power(scale=math.pi**2, exponent=2.0, shift=-0.5)

    # -- indexing -------------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.kind == "explicit"

    def __len__(self) -> int:
        if not self.is_finite:
            raise TypeError("infinite zero sequence has no len()")
        return self._sorted.size

    def modulus(self, n):
        """|a_n| for 1-based indices ``n`` (array-like)."""
        n = np.asarray(n, dtype=float)
        if self.kind == "explicit":
            return np.abs(self._sorted[n.astype(int) - 1])
        if self.kind == "power":
            return self.scale * (n + self.shift) ** self.exponent
        if self.kind == "power_log":
            m = n + self.shift
            return self.scale * m**self.exponent * np.log(m) ** self.log_power
        return self.scale * self.base**n

    def angle(self, n):
        n = np.asarray(n, dtype=int)
        if self.kind == "explicit":
            return np.angle(self._sorted[n - 1])
        ang = np.asarray(self.angles)
        return ang[(n - 1) % ang.size]

    def take(self, count: int) -> np.ndarray:
        """The first ``count`` zeros in canonical order."""
        if self.is_finite:
            return self._sorted[:count].copy()
        n = np.arange(1, count + 1)
        return self.modulus(n) * np.exp(1j * self.angle(n))

    # -- counting -------------------------------------------------------------
    def _count(self, r: float, strict: bool) -> int:
        below = (lambda v: v < r) if strict else (lambda v: v <= r)
        if self.is_finite:
            side = "left" if strict else "right"
            return int(np.searchsorted(np.abs(self._sorted), r, side=side))
        if not below(float(self.modulus(1))):
            return 0
        hi = 1
        while below(float(self.modulus(hi * 2))):
            hi *= 2
            if hi > 2**62:
                raise OverflowError("counting radius too large")
        lo, hi = hi, hi * 2  # modulus(lo) below, modulus(hi) not
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if below(float(self.modulus(mid))):
                lo = mid
            else:
                hi = mid
        return lo

    def counting(self, r: float) -> int:
        """n(r) = #{n : |a_n| < r}."""
        return self._count(r, strict=True)

    def sector_count(self, r: float, lo: float, hi: float) -> int:
        """#{n : |a_n| <= r, lo < arg a_n < hi}."""
        if self.is_finite:
            vals = self._sorted
            mask = (np.abs(vals) <= r) & in_sector(np.angle(vals), lo, hi)
            return int(mask.sum())
        total = self._count(r, strict=False)
        P = len(self.angles)
        count = 0
        for j, theta in enumerate(self.angles):
            if in_sector(theta, lo, hi):
                # indices n <= total with (n - 1) % P == j
                count += (total - 1 - j) // P + 1 if total > j else 0
        return count

    def first_index_at_least(self, radius: float) -> int:
        """Smallest n with |a_n| >= radius (infinite families only)."""
        return self._count(radius, strict=True) + 1

    # -- power sums and tails -----------------------------------------------
    def power_sum_tail(self, x: float, M: int) -> float:
        """Upper bound on sum_{n > M} |a_n|^{-x} (exact for power and geometric)."""
        if self.is_finite:
            mods = np.abs(self._sorted[M:])
            return float(np.sum(mods ** (-x)))
        if self.kind == "power":
            sx = self.exponent * x
            q = M + 1 + self.shift
            if sx <= 1:
                return math.inf
            return self.scale ** (-x) * q ** (-sx) * hurwitz_scaled(sx, q)
        if self.kind == "geometric":
            return self.scale ** (-x) * self.base ** (-x * (M + 1)) / (1 - self.base ** (-x))
        # power_log: integral comparison with a monotone summand
        c, s, k = self.scale, self.exponent, self.log_power
        m0 = M + 1 + self.shift
        sx, kx = s * x, k * x
        f0 = m0 ** (-sx) * math.log(m0) ** (-kx)
        if sx > 1:
            lg = math.log(m0) ** (-kx) if kx >= 0 else math.inf
            return c ** (-x) * (f0 + lg * m0 ** (1 - sx) / (sx - 1))
        if sx == 1 and kx > 1:
            return c ** (-x) * (f0 + math.log(m0) ** (1 - kx) / (kx - 1))
        return math.inf

    def relative_power_sum_tail(self, x: float, M: int) -> float:
        """Upper bound on sum_{n > M} (|a_{M+1}| / |a_n|)^x, free of overflow."""
        if self.is_finite:
            mods = np.abs(self._sorted[M:])
            return float(np.sum((mods[0] / mods) ** x)) if mods.size else 0.0
        if self.kind == "power":
            sx = self.exponent * x
            return hurwitz_scaled(sx, M + 1 + self.shift) if sx > 1 else math.inf
        if self.kind == "geometric":
            return 1.0 / (1.0 - self.base ** (-x))
        log_tail = math.log(self.power_sum_tail(x, M)) if self.power_sum_tail(x, M) > 0 else -math.inf
        return math.exp(log_tail + x * math.log(float(self.modulus(M + 1))))

    @property
    def has_analytic_tail(self) -> bool:
        return self.kind in ("power", "geometric")

    def scaled_tail_sums(self, M: int, j: np.ndarray) -> np.ndarray:
        """sum_{n > M} (a_{M+1} / a_n)^j for integer powers ``j``.

        Only for families with ``has_analytic_tail``.
        """
        j = np.asarray(j, dtype=float)
        P = len(self.angles)
        theta_ref = float(self.angle(M + 1))
        out = np.zeros(j.shape, dtype=complex)
        for cls_index in range(P):
            n_r = M + 1 + ((cls_index - M) % P)  # first n > M with (n-1) % P == cls_index
            phase = np.exp(1j * j * (theta_ref - self.angles[cls_index]))
            if self.kind == "power":
                q = M + 1 + self.shift
                a_r = (n_r + self.shift) / P
                ratio = q / (n_r + self.shift)
                mags = np.array(
                    [ratio ** (self.exponent * jj) * hurwitz_scaled(self.exponent * jj, a_r) for jj in j.ravel()]
                ).reshape(j.shape)
            else:
                d_r = n_r - (M + 1)
                mags = self.base ** (-j * d_r) / (1 - self.base ** (-j * P))
            out += phase * mags
        return out

    # -- closed-form growth data ----------------------------------------------
    def closed_form_exponent(self) -> float | None:
        if self.kind in ("power", "power_log"):
            return 1.0 / self.exponent
        if self.kind == "geometric":
            return 0.0
        return None

    def closed_form_density(self) -> dict[float, float] | None:
        """Angular masses lim n(r, sector) / r^rho per ray (power family only)."""
        if self.kind != "power":
            return None
        rho = 1.0 / self.exponent
        per_ray = self.scale ** (-rho) / len(self.angles)
        masses: dict[float, float] = {}
        for theta in self.angles:
            key = float(np.mod(theta, TWO_PI))
            masses[key] = masses.get(key, 0.0) + per_ray
        return masses


def genus(zeros: ZeroSequence, heuristic: bool = False) -> int:
    """Smallest p >= 0 with sum |a_n|^{-p-1} < infinity.

    Decided in closed form for parametric families.  For explicit lists the
    question is not determinable (a finite list converges for every p); with
    ``heuristic=True`` the floor of the regression exponent is returned.
    """
    if zeros.kind == "power":
        return int(math.floor(1.0 / zeros.exponent + 1e-12))
    if zeros.kind == "geometric":
        return 0
    if zeros.kind == "power_log":
        rho = 1.0 / zeros.exponent
        if abs(rho - round(rho)) < 1e-12 and round(rho) >= 1 and zeros.log_power * rho > 1:
            return int(round(rho)) - 1
        return int(math.floor(rho + 1e-12))
    if not heuristic:
        raise NotDeterminable("genus of an explicit zero list is not determinable; supply p")
    return int(math.floor(convergence_exponent(zeros) + 1e-12))


def convergence_exponent(zeros: ZeroSequence) -> float:
    """Infimum of lambda with sum |a_n|^{-lambda} < infinity.

    Closed form for families; for explicit lists, the slope of ``ln n`` against
    ``ln |a_n|`` over the upper half of the list.
    """
    closed = zeros.closed_form_exponent()
    if closed is not None:
        return closed
    mods = np.abs(zeros._sorted)
    if mods.size < 4:
        raise NotDeterminable("need at least 4 zeros to estimate the convergence exponent")
    n = np.arange(1, mods.size + 1)
    half = slice(mods.size // 2, None)
    x, y = np.log(mods[half]), np.log(n[half])
    if np.ptp(x) == 0:
        raise NotDeterminable("zero moduli do not grow")
    slope = np.polyfit(x, y, 1)[0]
    return float(max(slope, 0.0))


def counting_function(zeros: ZeroSequence, r: float) -> int:
    if r <= 0:
        raise ValueError("radius must be positive")
    return zeros.counting(r)
