from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraccauchy.errors import JetOverflow
from fraccauchy.jets import JET_CAP, Jet
from fraccauchy.quadrature import gauss_legendre, geometric_edges, pairwise_sum, panel_rule, split_panels


@pytest.mark.parametrize("order", [4, 8, 16])
def test_gauss_legendre_exact_for_polynomials(order):
    x, w = gauss_legendre(order)
    for deg in range(2 * order):
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        assert abs(np.sum(w * x**deg) - exact) < 1e-13


def test_panel_rule_reversed_edges_flip_sign():
    fwd = panel_rule(np.array([0.0, 0.5, 2.0]))
    rev = panel_rule(np.array([2.0, 0.5, 0.0]))
    f = np.cos
    assert np.sum(fwd[1] * f(fwd[0])) == pytest.approx(math.sin(2.0), rel=1e-14)
    assert np.sum(rev[1] * f(rev[0])) == pytest.approx(-math.sin(2.0), rel=1e-14)


def test_split_panels_and_geometric_edges():
    e = split_panels(np.array([0.0, 1.0, 3.0]), 2)
    assert e.size == 9 and e[0] == 0 and e[-1] == 3
    g = geometric_edges(0.0, 1.0)
    assert g[0] == 0.0 and g[-1] == 1.0 and np.all(np.diff(g) > 0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200))
def test_pairwise_sum_matches_fsum(values):
    v = np.array(values)
    assert pairwise_sum(v) == pytest.approx(math.fsum(values), abs=1e-6 * (1 + np.sum(np.abs(v))))


small = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@given(st.lists(small, min_size=4, max_size=4))
def test_jet_log_inverts_exp(c):
    j = Jet(0.3, np.array(c))
    back = j.exp().log(branch_value=j.coeffs[0])
    assert np.allclose(back.coeffs, j.coeffs, atol=1e-10)


@given(st.lists(small, min_size=5, max_size=5), st.lists(small, min_size=5, max_size=5))
def test_jet_product_is_truncated_polynomial_product(a, b):
    prod = (Jet(0, np.array(a)) * Jet(0, np.array(b))).coeffs
    assert np.allclose(prod, np.convolve(a, b)[:5], atol=1e-12)


def test_reciprocal_variable_coefficients():
    mu = 0.5 + 0.25j
    j = Jet.reciprocal_variable(mu, 5)
    expect = [(-1) ** k / mu ** (k + 1) for k in range(6)]
    assert np.allclose(j.coeffs, expect, rtol=1e-14)


def test_compose_chain_rule():
    inner = Jet.reciprocal_variable(2.0, 3)
    outer = Jet.variable(0.5, 3).exp()  # exp(z) at z = 1/2
    got = outer.compose(inner)  # exp(1/zeta) at zeta = 2
    h = 1e-3
    f = lambda z: np.exp(1 / z)
    d1 = (f(2 + h) - f(2 - h)) / (2 * h)
    assert got.coeffs[0] == pytest.approx(np.exp(0.5))
    assert got.coeffs[1] == pytest.approx(d1, rel=1e-6)


def test_jet_cap():
    Jet(0, np.zeros(JET_CAP + 1))
    with pytest.raises(JetOverflow):
        Jet(0, np.zeros(JET_CAP + 2))
