from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import gamma

from fraccauchy.errors import EnvelopeViolated, NonDecaying, PreconditionError
from fraccauchy.fractional import (
    Envelope,
    TrajectorySampler,
    equation_residual,
    interchange_check,
    rl_derivative_numeric,
    rl_mode_identity,
    sampler_from_solution,
)
from fraccauchy.operator_model import OperatorSpec, assemble
from fraccauchy.solver import solve

from problems import IDENTITY, NEG_CUBE, diag_problem, jordan_problem, random_problem


def exponential(w, v=(1.0,)):
    v = np.asarray(v, dtype=complex)
    w = complex(w)
    return TrajectorySampler(lambda t: np.exp(-w * np.asarray(t))[..., None] * v,
                             Envelope(float(np.linalg.norm(v)), w.real, 0, abs(w)))


def brute_force_t_exp(t, alpha):
    """D^{1/alpha}(t e^{-t}) from the definition, differentiating under the integral."""
    xi = 1 / alpha
    g = lambda x: (1 - t - x) * math.exp(-(t + x))
    near = quad(g, 0, 1, weight="alg", wvar=(-xi, 0), epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    far = quad(lambda x: g(x) * x**-xi, 1, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return -(near + far) / gamma(1 - xi)


# -- mode identity ---------------------------------------------------------------------


def test_mode_identity_examples():
    assert rl_mode_identity(1, 2, 1) == pytest.approx(math.exp(-1))
    assert rl_mode_identity(4, 2, 0.5) == pytest.approx(2 * math.exp(-2))
    with pytest.raises(PreconditionError):
        rl_mode_identity(1, 1, 1)
    with pytest.raises(NonDecaying):
        rl_mode_identity(-1 + 1j, 2, 1)


# -- numeric derivative ----------------------------------------------------------------------


def test_numeric_examples():
    res = rl_derivative_numeric(exponential(1.0), 2.0, 1.0)
    assert res.value[0] == pytest.approx(math.exp(-1), abs=1e-8)
    v = np.array([1.0, -2.0 + 1j])
    res = rl_derivative_numeric(exponential(4.0, v), 2.0, 0.5)
    assert np.allclose(res.value, 2 * math.exp(-2) * v, atol=1e-8)
    u = TrajectorySampler(lambda t: ((1 + np.asarray(t)) * np.exp(-np.asarray(t)))[..., None], Envelope(1.0, 1.0, 1))
    got = rl_derivative_numeric(u, 2.0, 1.0).value[0]
    expect = rl_mode_identity(1, 2, 1.0) + brute_force_t_exp(1.0, 2.0)
    assert got == pytest.approx(expect, abs=1e-8)


def test_brute_force_matches_differentiated_mode_identity():
    # t e^{-wt} = -d/dw e^{-wt}, so its derivative is (t w^{1/a} - w^{1/a - 1} / a) e^{-wt} at w = 1
    for alpha in (1.5, 2.0, 3.0):
        assert brute_force_t_exp(0.7, alpha) == pytest.approx((0.7 - 1 / alpha) * math.exp(-0.7), rel=1e-10)


@pytest.mark.parametrize("w", [1.0, 4.0, 2 + 1j])
@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("t", [0.1, 1.0])
def test_numeric_matches_mode_identity(w, alpha, t):
    tol = 1e-8
    u = exponential(w)
    res = rl_derivative_numeric(u, alpha, t, tol)
    exact = rl_mode_identity(w, alpha, t)
    assert abs(res.value[0] - exact) <= tol * max(abs(exact), float(u.envelope(t)))
    assert res.error >= 0


@settings(max_examples=10)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False), st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_numeric_is_linear(a, b):
    u1, u2 = exponential(1.0), exponential(2 + 1j)
    comb = TrajectorySampler(lambda t: a * u1.func(t) + b * u2.func(t),
                             Envelope(abs(a) + abs(b) + 1e-12, 1.0, 0, abs(2 + 1j)))
    d = lambda u: rl_derivative_numeric(u, 2.0, 0.5, 1e-9).value[0]
    lhs, rhs = d(comb), a * d(u1) + b * d(u2)
    assert abs(lhs - rhs) <= 1e-8 * (1 + abs(a) + abs(b))


def test_envelope_violation_detected():
    u = TrajectorySampler(lambda t: 2 * np.exp(-np.asarray(t))[..., None], Envelope(1.0, 1.0))
    with pytest.raises(EnvelopeViolated):
        rl_derivative_numeric(u, 2.0, 1.0)


def test_numeric_preconditions():
    with pytest.raises(PreconditionError):
        rl_derivative_numeric(exponential(1.0), 1.0, 1.0)
    with pytest.raises(PreconditionError):
        rl_derivative_numeric(exponential(1.0), 2.0, 0.0)
    with pytest.raises(NonDecaying):
        Envelope(1.0, 0.0)


# -- equation residual -----------------------------------------------------------------------


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_residual_diagonal_demo(t):
    prob = diag_problem()
    res = equation_residual(prob, solve(prob), t)
    assert res.mode_analytic <= 1e-6 and res.numeric <= 1e-6


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_residual_jordan_block(t):
    prob = jordan_problem(alpha=2.0)
    res = equation_residual(prob, solve(prob), t)
    assert res.mode_analytic <= 1e-8 and res.numeric <= 1e-4


def test_corrupted_solution_is_detected():
    prob = diag_problem()
    res = equation_residual(prob, solve(prob, rate_scale=1.01), 1.0)
    assert res.mode_analytic >= 1e-3 and res.numeric >= 1e-3


@settings(max_examples=8)
@given(st.integers(0, 10_000))
def test_mode_analytic_exact_for_diagonalizable(seed):
    prob = random_problem(seed, NEG_CUBE, 2.0, (1, 1, 1, 1), 0.1)
    sol = solve(prob)
    for t in (0.1, 1.0):
        assert equation_residual(prob, sol, t, numeric=False).mode_analytic <= 1e-10


def test_residual_requires_fractional_order():
    prob = jordan_problem(alpha=1.0)
    with pytest.raises(PreconditionError):
        equation_residual(prob, solve(prob), 1.0)


def test_sampler_reproduces_solution():
    prob = diag_problem()
    sol = solve(prob)
    u = sampler_from_solution(sol)
    assert np.allclose(u(prob.times), sol.values, rtol=1e-14)
    assert np.all(np.linalg.norm(u(prob.times), axis=-1) <= u.envelope(prob.times))


# -- interchange of integrations --------------------------------------------------------


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_interchange_scalar(alpha):
    op = assemble(OperatorSpec.diagonal([0.8]))
    rep = interchange_check(op, IDENTITY, alpha, 0.5, [1.0])
    assert rep.relative_difference <= 1e-6
