"""Finite-dimensional model operators B with prescribed Jordan chains.

B is built from spectral data: eigenvalues, chain lengths and a basis of chain
vectors ``e_{q xi + i}`` satisfying

    (B - mu) e_0 = 0,   (B - mu) e_i = e_{i-1}   (i >= 1)

inside every chain.  The inner product is ``(x, y) = sum x_k conj(y_k)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NearPole, SingularBasis, ZeroEigenvalue

CONDITION_LIMIT = 1e14
ILL_CONDITIONED = 1e6
POLE_THRESHOLD = 1e-8


class IllConditioned(UserWarning):
    """The chain basis is poorly conditioned; results carry less accuracy."""


def inner(x, y):
    """(x, y) with conjugation on the second argument."""
    return np.vdot(y, x)


def _wrap(x):
    return np.mod(np.asarray(x, dtype=float) + math.pi, 2 * math.pi) - math.pi


@dataclass(frozen=True)
class OperatorSpec:
    """Spectral data: one entry of ``eigenvalues``/``lengths`` per Jordan chain.

    ``basis`` holds the chain vectors as columns, chain after chain, each
    chain ordered e_0 (eigenvector) ... e_k.  ``sector`` is the closed angle
    (theta0, theta1) in the lambda-plane that must contain every
    characteristic number 1/mu strictly inside; ``None`` picks the symmetric
    sector with half-angle 0.05 beyond the larger of max|arg 1/mu| and the
    sampled angular extent of the numerical range of B.
    """

    eigenvalues: tuple
    lengths: tuple
    basis: np.ndarray | None = None
    sector: tuple | None = None

    def __post_init__(self) -> None:
        mus = tuple(complex(m) for m in self.eigenvalues)
        lens = tuple(int(k) for k in self.lengths)
        if len(mus) != len(lens) or not mus:
            raise ValueError("need one chain length per eigenvalue entry")
        if any(k < 1 for k in lens):
            raise ValueError("chain lengths must be positive")
        object.__setattr__(self, "eigenvalues", mus)
        object.__setattr__(self, "lengths", lens)
        if self.basis is not None:
            E = np.array(self.basis, dtype=complex)
            if E.shape != (sum(lens), sum(lens)):
                raise ValueError(f"basis must be {sum(lens)}x{sum(lens)}")
            E.setflags(write=False)
            object.__setattr__(self, "basis", E)
        if self.sector is not None:
            lo, hi = (float(a) for a in self.sector)
            if not lo < hi or hi - lo >= 2 * math.pi:
                raise ValueError("sector needs theta0 < theta1 < theta0 + 2*pi")
            object.__setattr__(self, "sector", (lo, hi))

    @property
    def dimension(self) -> int:
        return sum(self.lengths)

    @classmethod
    def diagonal(cls, eigenvalues, basis=None, sector=None) -> "OperatorSpec":
        return cls(tuple(eigenvalues), (1,) * len(eigenvalues), basis, sector)

    @classmethod
    def random(
        cls,
        eigenvalues,
        lengths,
        seed: int,
        nilpotent: float = 0.05,
        unitary: bool = True,
        sector=None,
    ) -> "OperatorSpec":
        """Seeded random chain basis.

        With ``unitary=True`` the columns are q_i / c^i for a random unitary Q and
        c = nilpotent * |mu|, so in orthonormal coordinates B is mu plus a
        nilpotent part of size c: the numerical range stays close to the
        eigenvalues.  Otherwise a Gaussian basis is used.
        """
        rng = np.random.default_rng(seed)
        N = sum(int(k) for k in lengths)
        if unitary:
            z = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
            Q, R = np.linalg.qr(z)
            Q = Q * (np.diag(R) / np.abs(np.diag(R)))
            scale = []
            for mu, k in zip(eigenvalues, lengths):
                c = nilpotent * abs(complex(mu))
                scale.extend(c ** (-float(i)) for i in range(int(k)))
            E = Q * np.array(scale)
        else:
            E = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        return cls(tuple(eigenvalues), tuple(lengths), E, sector)


@dataclass(frozen=True)
class JordanChainSpec:
    """One chain: eigenvalue group q, chain index xi within the group, vectors e_0..e_k (columns)."""

    q: int
    xi: int
    eigenvalue: complex
    start: int
    vectors: np.ndarray

    @property
    def length(self) -> int:
        return self.vectors.shape[1]

    @property
    def characteristic(self) -> complex:
        return 1.0 / self.eigenvalue

    @property
    def indices(self) -> range:
        return range(self.start, self.start + self.length)


def _jordan_matrix(mus, lens) -> np.ndarray:
    N = sum(lens)
    J = np.zeros((N, N), dtype=complex)
    pos = 0
    for mu, k in zip(mus, lens):
        for i in range(k):
            J[pos + i, pos + i] = mu
            if i:
                J[pos + i - 1, pos + i] = 1.0
        pos += k
    return J


def _jordan_inverse(mus, lens) -> np.ndarray:
    """Exact inverse of the Jordan matrix: (mu + N)^{-1} = sum (-N)^j / mu^{j+1}."""
    N = sum(lens)
    Ji = np.zeros((N, N), dtype=complex)
    pos = 0
    for mu, k in zip(mus, lens):
        for i in range(k):
            for j in range(i, k):
                Ji[pos + i, pos + j] = (-1.0) ** (j - i) / mu ** (j - i + 1)
        pos += k
    return Ji


@dataclass(frozen=True)
class SpectralOperator:
    spec: OperatorSpec
    B: np.ndarray
    W: np.ndarray
    basis: np.ndarray
    chains: tuple
    condition: float
    sector: tuple
    _dual: np.ndarray = field(repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return self.B.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([c.eigenvalue for c in self.chains])

    @property
    def characteristic_numbers(self) -> np.ndarray:
        """Distinct lambda_q = 1/mu_q in group order."""
        seen: dict[int, complex] = {}
        for c in self.chains:
            seen.setdefault(c.q, c.characteristic)
        return np.array([seen[q] for q in sorted(seen)])

    def geometric_multiplicity(self, q: int) -> int:
        return sum(1 for c in self.chains if c.q == q)

    def apply(self, x):
        return self.B @ x

    def apply_inverse(self, x):
        return self.W @ x

    def chain_residuals(self) -> float:
        """max ||(B - mu) e_i - e_{i-1}|| / ||e_i|| over all chain vectors."""
        worst = 0.0
        for c in self.chains:
            V = c.vectors
            R = self.B @ V - c.eigenvalue * V
            R[:, 1:] -= V[:, :-1]
            worst = max(worst, float(np.max(np.linalg.norm(R, axis=0) / np.linalg.norm(V, axis=0))))
        return worst


def _boundary_points(B: np.ndarray, directions: int = 720) -> np.ndarray:
    """Points of Theta(B) maximising Re(e^{-iw} z) for evenly spaced w."""
    pts = []
    for w in 2 * math.pi * np.arange(directions) / directions:
        Hw = 0.5 * (np.exp(-1j * w) * B + np.exp(1j * w) * B.conj().T)
        v = np.linalg.eigh(Hw)[1][:, -1]
        pts.append(np.vdot(v, B @ v))
    return np.array(pts)


def _range_half_angle(B: np.ndarray) -> float:
    """max |arg| over the sampled boundary of Theta(B); pi when 0 is enclosed."""
    pts = _boundary_points(B, 360)
    if np.min(np.abs(pts)) == 0:
        return math.pi
    return float(np.max(np.abs(np.angle(pts))))


def assemble(spec: OperatorSpec) -> SpectralOperator:
    """Dense B = E J E^{-1} and W = E J^{-1} E^{-1} from spectral data."""
    mus, lens = spec.eigenvalues, spec.lengths
    if any(m == 0 for m in mus):
        raise ZeroEigenvalue("eigenvalue 0 makes B non-invertible")
    N = spec.dimension
    E = np.eye(N, dtype=complex) if spec.basis is None else np.array(spec.basis)
    cond = float(np.linalg.cond(E))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularBasis(f"chain vectors do not form a basis (condition number {cond:.3g})")
    Einv = np.linalg.inv(E)
    B = E @ _jordan_matrix(mus, lens) @ Einv
    W = E @ _jordan_inverse(mus, lens) @ Einv
    # group chains by eigenvalue (exact equality) in first-appearance order
    groups: dict[complex, int] = {}
    counters: dict[int, int] = {}
    chains = []
    pos = 0
    for mu, k in zip(mus, lens):
        q = groups.setdefault(mu, len(groups))
        xi = counters.get(q, 0)
        counters[q] = xi + 1
        V = E[:, pos : pos + k].copy()
        V.setflags(write=False)
        chains.append(JordanChainSpec(q, xi, mu, pos, V))
        pos += k
    lam_args = np.angle(1.0 / np.array(mus))
    if spec.sector is None:
        half = max(float(np.max(np.abs(lam_args))), _range_half_angle(B)) + 0.05
        if half >= math.pi:
            half = float(np.max(np.abs(lam_args))) + 0.05
        sector = (-half, half)
    else:
        sector = spec.sector
        lo, hi = sector
        d = np.mod(lam_args - lo, 2 * math.pi)
        if np.any(d <= 0) or np.any(d >= hi - lo):
            raise ValueError("every characteristic number must lie strictly inside the sector")
    G = Einv.conj().T  # columns g_j with (e_i, g_j) = delta_ij
    for M in (B, W, G):
        M.setflags(write=False)
    return SpectralOperator(spec, B, W, E, tuple(chains), cond, sector, G)


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Dual vectors g_j (columns) with (e_i, g_j) = delta_ij.

    Within a chain of length k+1 the adjoint chain is h_j = g_{k-j}: a Jordan
    chain of B* for conj(mu).  ``pairings[c][i]`` is (e_{c,i}, h_{c,k-i}),
    which is 1 by construction; ``raw_pairings[c][i]`` is the same pairing
    when the adjoint chain is rescaled so its eigenvector h_0 has unit norm.
    """

    vectors: np.ndarray
    pairings: tuple
    raw_pairings: tuple
    condition: float
    max_defect: float

    def coefficients(self, f) -> np.ndarray:
        """a_i = (f, g_i) for every basis index."""
        return self.vectors.conj().T @ np.asarray(f, dtype=complex)


def biorthogonal(op: SpectralOperator) -> BiorthogonalSystem:
    G = op._dual
    if op.condition > ILL_CONDITIONED:
        warnings.warn(f"basis condition number {op.condition:.3g} exceeds {ILL_CONDITIONED:g}", IllConditioned,
                      stacklevel=2)
    defect = float(np.max(np.abs(G.conj().T @ op.basis - np.eye(op.dimension))))
    pairings, raw = [], []
    for c in op.chains:
        k = c.length - 1
        idx = list(c.indices)
        h = [G[:, idx[k - j]] for j in range(k + 1)]
        pairings.append(tuple(complex(inner(c.vectors[:, i], h[k - i])) for i in range(k + 1)))
        scale = np.linalg.norm(h[0])
        raw.append(tuple(complex(inner(c.vectors[:, i], h[k - i] / scale)) for i in range(k + 1)))
    return BiorthogonalSystem(G, tuple(pairings), tuple(raw), op.condition, defect)


def pole_distance(op: SpectralOperator, lam) -> np.ndarray:
    """Relative distance min_q |lambda - lambda_q| / (1 + |lambda_q|)."""
    lq = op.characteristic_numbers
    lam = np.asarray(lam, dtype=complex)
    return np.min(np.abs(lam[..., None] - lq) / (1 + np.abs(lq)), axis=-1)


def resolvent_solve(op: SpectralOperator, lam, f, return_residual: bool = False):
    """Solve (I - lam B) x = f by dense LU; ``lam`` may be an array of nodes.

    For array ``lam`` of shape S the result has shape S + f.shape.
    """
    lam = np.asarray(lam, dtype=complex)
    f = np.asarray(f, dtype=complex)
    dist = pole_distance(op, lam)
    if np.any(dist < POLE_THRESHOLD):
        k = int(np.argmin(dist))
        raise NearPole(f"lambda = {lam.ravel()[k]:.6g} is a characteristic number (distance {dist.min():.3g})",
                       float(dist.min()))
    N = op.dimension
    A = np.eye(N) - lam[..., None, None] * op.B
    rhs = np.broadcast_to(f, lam.shape + f.shape)
    rhs2 = rhs[..., None] if f.ndim == 1 else rhs
    x = np.linalg.solve(A, rhs2)
    r = rhs2 - A @ x
    x = x + np.linalg.solve(A, r)  # one step of iterative refinement
    r = rhs2 - A @ x
    if f.ndim == 1:
        x, r = x[..., 0], r[..., 0]
    if return_residual:
        return x, float(np.max(np.linalg.norm(r, axis=-1 if f.ndim == 1 else -2)) / max(np.linalg.norm(f), 1e-300))
    return x


@dataclass(frozen=True)
class SectorReport:
    hull: np.ndarray
    samples: np.ndarray
    arg_range: tuple
    half_angle: float
    declared: tuple
    passed: bool

    @property
    def verdict(self) -> str:
        return "no counterexample found" if self.passed else "counterexample found"


def numerical_range_sector(op: SpectralOperator, samples: int = 1000, seed: int = 0, sector=None,
                           directions: int = 720) -> SectorReport:
    """Sample Theta(B) and test it against a lambda-plane sector.

    Rayleigh quotients come from seeded random unit vectors plus boundary
    points from the top eigenvectors of Re(e^{-i w} B).  Because
    lambda = 1/mu reverses arguments, the test checks the reflected range
    {conj(z) : z in Theta(B)} against ``sector`` (default: the operator's).
    Sampling can only falsify containment.
    """
    if samples < 1000:
        raise ValueError("use at least 1000 random samples")
    lo, hi = op.sector if sector is None else sector
    rng = np.random.default_rng(seed)
    N = op.dimension
    X = rng.standard_normal((N, samples)) + 1j * rng.standard_normal((N, samples))
    X /= np.linalg.norm(X, axis=0)
    rq = np.einsum("ij,ij->j", X.conj(), op.B @ X)
    hull = _boundary_points(op.B, directions)
    pts = np.conj(np.concatenate([rq, hull]))
    args = np.angle(pts)
    center = 0.5 * (lo + hi)
    rel = _wrap(args - center)
    inside = (np.abs(pts) > 0) & (np.abs(rel) < 0.5 * (hi - lo))
    arg_range = (float(center + rel.min()), float(center + rel.max()))
    half = float(np.max(np.abs(_wrap(args))))
    return SectorReport(hull, rq, arg_range, half, (lo, hi), bool(np.all(inside)))


def schatten_norm(op, s: float) -> float:
    """(sum of singular values^s)^(1/s)."""
    if not s > 0:
        raise ValueError("s must be positive")
    B = op.B if isinstance(op, SpectralOperator) else np.asarray(op)
    sv = np.linalg.svd(B, compute_uv=False)
    return float(np.sum(sv**s) ** (1.0 / s))
