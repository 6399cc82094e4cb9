from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraccauchy.errors import NearPole, SingularBasis, ZeroEigenvalue
from fraccauchy.operator_model import (
    IllConditioned,
    OperatorSpec,
    assemble,
    biorthogonal,
    inner,
    numerical_range_sector,
    resolvent_solve,
    schatten_norm,
)

DIAG = assemble(OperatorSpec.diagonal([1.0, 0.5]))
JORDAN = assemble(OperatorSpec((1.0,), (2,)))


def random_op(seed, lengths=(2, 1, 3), unitary=True):
    rng = np.random.default_rng(seed)
    mus = [complex(m) for m in 0.3 + rng.uniform(0, 1, len(lengths)) * np.exp(1j * rng.uniform(-0.4, 0.4, len(lengths)))]
    return assemble(OperatorSpec.random(mus, lengths, seed, unitary=unitary))


# -- assembly ------------------------------------------------------------------------


def test_assemble_examples():
    assert np.allclose(DIAG.B, np.diag([1.0, 0.5]))
    assert np.allclose(JORDAN.B, [[1, 1], [0, 1]])
    op = assemble(OperatorSpec.random([1.0, 0.5], [2, 1], seed=3, unitary=False))
    assert op.chain_residuals() <= 1e-12


def test_assemble_errors():
    with pytest.raises(ZeroEigenvalue):
        assemble(OperatorSpec.diagonal([1.0, 0.0]))
    with pytest.raises(SingularBasis):
        assemble(OperatorSpec.diagonal([1.0, 0.5], basis=[[1, 1], [1, 1]]))


def test_multiplicity_and_grouping():
    op = assemble(OperatorSpec((0.5, 0.5, 1.0), (2, 1, 1)))
    assert op.geometric_multiplicity(0) == 2
    assert np.allclose(op.characteristic_numbers, [2.0, 1.0])
    assert [c.xi for c in op.chains] == [0, 1, 0]


def test_default_sector_contains_characteristic_numbers():
    op = random_op(5)
    lo, hi = op.sector
    args = np.angle(op.characteristic_numbers)
    assert np.all((args > lo) & (args < hi))


def test_explicit_sector_must_contain_spectrum():
    with pytest.raises(ValueError):
        assemble(OperatorSpec.diagonal([np.exp(1j * math.pi / 3), 1.0], sector=(-math.pi / 4, math.pi / 4)))


@given(st.integers(0, 10_000))
def test_B_times_W_is_identity(seed):
    op = random_op(seed)
    E = op.basis
    assert np.linalg.norm(op.B @ op.W @ E - E) <= 1e-10 * np.linalg.norm(E)
    assert np.linalg.norm(op.W @ op.B @ E - E) <= 1e-10 * np.linalg.norm(E)


@given(st.integers(0, 10_000), st.booleans())
def test_chain_relations(seed, unitary):
    assert random_op(seed, unitary=unitary).chain_residuals() <= 1e-10


# -- biorthogonal system ---------------------------------------------------------------


def test_biorthogonal_examples():
    assert np.allclose(biorthogonal(DIAG).vectors, np.eye(2))
    op = assemble(OperatorSpec.random([1.0, 0.5, 0.7], [1, 2, 1], seed=4, unitary=False))
    bi = biorthogonal(op)
    assert np.max(np.abs(bi.vectors.conj().T @ op.basis - np.eye(4))) <= 1e-10
    assert biorthogonal(JORDAN).pairings[0] == pytest.approx((1.0, 1.0))


@given(st.integers(0, 10_000))
def test_biorthogonality_property(seed):
    op = random_op(seed, unitary=False)
    if op.condition > 1e6:
        return
    bi = biorthogonal(op)
    gram = np.array([[inner(op.basis[:, i], bi.vectors[:, j]) for j in range(op.dimension)] for i in range(op.dimension)])
    assert np.max(np.abs(gram - np.eye(op.dimension))) <= 1e-10
    assert all(np.allclose(p, 1.0, atol=1e-10) for p in bi.pairings)


def test_ill_conditioned_warns():
    op = assemble(OperatorSpec.diagonal([1.0, 0.5], basis=[[1, 1], [0, 1e-8]]))
    with pytest.warns(IllConditioned):
        biorthogonal(op)


def test_coefficients_recover_expansion():
    op = random_op(8)
    bi = biorthogonal(op)
    c = np.arange(op.dimension) + 1j
    assert np.allclose(bi.coefficients(op.basis @ c), c, atol=1e-10)


# -- resolvent ---------------------------------------------------------------------------


def test_resolvent_examples():
    f = np.array([1.0, 2.0 - 1j])
    assert np.allclose(resolvent_solve(DIAG, 0, f), f)
    with pytest.raises(NearPole):
        resolvent_solve(DIAG, 2.0, f)
    x = resolvent_solve(DIAG, 1j, [1, 1])
    assert np.allclose(x, [1 / (1 - 1j), 1 / (1 - 0.5j)], rtol=1e-14)


def test_resolvent_residual_and_batch():
    op = random_op(2)
    f = np.ones(op.dimension)
    lams = np.array([0.3j, -1.0, 2 + 2j])
    x, res = resolvent_solve(op, lams, f, return_residual=True)
    assert x.shape == (3, op.dimension) and res <= 1e-10
    for lam, xi in zip(lams, x):
        assert np.allclose((np.eye(op.dimension) - lam * op.B) @ xi, f, atol=1e-10)


@given(st.integers(0, 10_000), st.integers(1, 4), st.complex_numbers(max_magnitude=0.9, allow_nan=False))
def test_power_resolvent_identity(seed, k, lam):
    op = random_op(seed)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(op.dimension) + 1j * rng.standard_normal(op.dimension)
    R = resolvent_solve(op, lam, f)
    lhs = lam**k * np.linalg.matrix_power(op.B, k) @ R
    rhs = R - sum(lam**j * np.linalg.matrix_power(op.B, j) @ f for j in range(k))
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1.0, np.linalg.norm(R))


# -- numerical range and Schatten norms ---------------------------------------------


def test_numerical_range_examples():
    assert numerical_range_sector(DIAG, sector=(-0.01, 0.01)).passed
    rep = numerical_range_sector(JORDAN)
    assert np.max(np.abs(rep.hull - 1.0)) == pytest.approx(0.5, abs=1e-6)
    assert rep.half_angle == pytest.approx(math.pi / 6, abs=1e-3)
    op = assemble(OperatorSpec.diagonal([np.exp(1j * math.pi / 3), 1.0]))
    assert not numerical_range_sector(op, sector=(-math.pi / 4, math.pi / 4)).passed


def test_numerical_range_contains_rayleigh_samples():
    rep = numerical_range_sector(random_op(6), samples=2000, seed=1)
    lo, hi = rep.arg_range
    assert np.all(np.angle(np.conj(rep.samples)) >= lo - 1e-12)
    assert np.all(np.angle(np.conj(rep.samples)) <= hi + 1e-12)


def test_numerical_range_requires_samples():
    with pytest.raises(ValueError):
        numerical_range_sector(DIAG, samples=10)


def test_schatten_examples():
    assert schatten_norm(DIAG, 1) == pytest.approx(1.5)
    assert schatten_norm(DIAG, 2) == pytest.approx(math.sqrt(1.25), abs=1e-5)
    assert schatten_norm(JORDAN, 2) == pytest.approx(math.sqrt(3), abs=1e-5)
    with pytest.raises(ValueError):
        schatten_norm(DIAG, 0)


def test_operator_is_immutable():
    with pytest.raises(ValueError):
        DIAG.B[0, 0] = 3.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        biorthogonal(DIAG)
