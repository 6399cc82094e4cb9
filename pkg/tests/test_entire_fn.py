from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import zeta

from fraccauchy.entire_fn import (
    EntireFunctionSpec,
    ZeroSequence,
    convergence_exponent,
    counting_function,
    eval_product,
    genus,
    taylor_coeffs_at_zero,
    weierstrass_factor,
)
from fraccauchy.entire_fn.growth import angular_density, order_type_estimate, upper_density
from fraccauchy.entire_fn.indicator import (
    AngularDensity,
    check_indicator_positivity,
    indicator_H,
)
from fraccauchy.entire_fn.regularity import exceptional_circles, lower_bound_on_ray, ray_clearance
from fraccauchy.errors import ConditionViolated, NotDeterminable, OrderIntegral, PreconditionError

NEG_CUBE = EntireFunctionSpec.negative_power_zeros(3.0)
COS_SQRT = EntireFunctionSpec.cos_sqrt()


# -- primary factors and products ----------------------------------------------


def test_weierstrass_factor_examples():
    assert weierstrass_factor(0, 3) == 1
    assert weierstrass_factor(1, 2) == 0
    assert weierstrass_factor(0.5, 1) == pytest.approx(0.5 * math.exp(0.5), rel=1e-15)


@given(
    st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
    st.integers(0, 8),
)
def test_weierstrass_factor_matches_definition(z, p):
    direct = (1 - z) * np.exp(sum(z**j / j for j in range(1, p + 1)))
    got = weierstrass_factor(z, p)
    assert abs(got - direct) <= 1e-11 * abs(direct) + 1e-14


def test_eval_product_examples():
    assert eval_product(NEG_CUBE, 0)[0] == pytest.approx(1.0)
    a1 = COS_SQRT.zeros.take(1)[0]
    assert abs(eval_product(COS_SQRT, a1)[0]) < 1e-12
    val, bound = eval_product(COS_SQRT, -100.0)
    assert val.real == pytest.approx(math.cosh(10.0), rel=1e-10)
    assert bound >= 0


@pytest.mark.parametrize("z", [0.3, -2.5, 7 + 3j, -40 - 10j, 150.0])
def test_cos_sqrt_product_matches_closed_form(z):
    assert eval_product(COS_SQRT, z)[0] == pytest.approx(np.cos(np.sqrt(complex(z))), rel=1e-10)


def test_genus_examples():
    assert genus(ZeroSequence.power(exponent=1.0)) == 1
    assert genus(ZeroSequence.power_log(exponent=1.0, log_power=2.0)) == 0
    assert genus(ZeroSequence.power(exponent=2.0)) == 0
    with pytest.raises(NotDeterminable):
        genus(ZeroSequence.explicit([1, 2, 3]))


def test_convergence_exponent_examples():
    assert convergence_exponent(ZeroSequence.power(exponent=1.0)) == pytest.approx(1.0)
    assert convergence_exponent(ZeroSequence.power(exponent=2.0)) == pytest.approx(0.5)
    assert convergence_exponent(ZeroSequence.geometric(base=2.0)) == 0.0


@given(st.floats(0.2, 5.0))
def test_genus_below_exponent_below_genus_plus_one(exponent):
    zs = ZeroSequence.power(exponent=exponent)
    p, rho = genus(zs), convergence_exponent(zs)
    assert p <= rho + 1e-12 <= p + 1 + 2e-12


def test_counting_examples():
    zs = ZeroSequence.power(exponent=2.0)
    assert counting_function(zs, 10) == 3
    assert counting_function(zs, 1) == 0
    assert counting_function(zs, 100.5) == 10


@given(st.floats(0.01, 1e6), st.floats(0.01, 1e6))
def test_counting_monotone(r1, r2):
    zs = ZeroSequence.power(exponent=1.5, angles=(0.0, 2.0))
    lo, hi = sorted((r1, r2))
    assert counting_function(zs, lo) <= counting_function(zs, hi)


def test_counting_is_strict_at_moduli():
    zs = ZeroSequence.power(exponent=2.0)
    assert counting_function(zs, 4.0) == 1
    assert counting_function(zs, 4.0 + 1e-9) == 2


def test_angular_density_examples():
    zs = ZeroSequence.power(exponent=2.0)
    assert angular_density(zs, 0.5, -0.1, 0.1).value == pytest.approx(1.0, abs=0.01)
    assert angular_density(zs, 0.5, math.pi / 4, math.pi / 2).value == 0.0
    assert upper_density(ZeroSequence.cos_sqrt(), 0.5).value == pytest.approx(1 / math.pi, abs=0.01)


# -- indicator ---------------------------------------------------------------------


def test_indicator_examples():
    cos_density = AngularDensity.atoms({0.0: 1 / math.pi})
    assert indicator_H(0.5, cos_density, math.pi) == pytest.approx(1.0, abs=1e-14)
    assert abs(indicator_H(0.5, cos_density, 0.0)) < 1e-14
    neg = AngularDensity.atoms({math.pi: 1.0})
    assert indicator_H(1 / 3, neg, 0.0) == pytest.approx(2 * math.pi / math.sqrt(3), rel=1e-14)
    with pytest.raises(OrderIntegral):
        indicator_H(1.0, neg, 0.0)


@given(st.floats(0.05, 0.95).filter(lambda r: abs(r - 0.5) > 1e-3), st.floats(-math.pi, math.pi),
       st.floats(-math.pi, math.pi), st.floats(0.1, 3.0))
def test_single_jump_closed_form(rho, phi0, psi, mass):
    gap = abs(psi - phi0)
    if gap > math.pi:
        return
    H = indicator_H(rho, AngularDensity.atoms({phi0 % (2 * math.pi): mass}), psi)
    expect = math.pi * mass / math.sin(math.pi * rho) * math.cos(rho * (gap - math.pi))
    assert H == pytest.approx(expect, rel=1e-10, abs=1e-12)


def test_indicator_matches_sin_half_angle():
    psi = np.linspace(-math.pi, math.pi, 101)
    H = indicator_H(0.5, AngularDensity.from_zeros(ZeroSequence.cos_sqrt()), psi)
    assert np.allclose(H, np.sin(np.abs(psi) / 2), atol=1e-12)


def test_positivity_examples():
    rep = check_indicator_positivity(0.5, AngularDensity.atoms({0.0: 1 / math.pi}))
    assert rep.nonnegative and np.any(np.isclose(rep.zero_angles, 0.0))
    rep = check_indicator_positivity(1 / 3, AngularDensity.atoms({math.pi: 1.0}))
    assert rep.nonnegative and rep.minimum > 0 and rep.zero_angles.size == 0
    rep = check_indicator_positivity(0.25, AngularDensity.random(np.random.default_rng(11)))
    assert rep.nonnegative
    with pytest.raises(PreconditionError):
        check_indicator_positivity(0.75, AngularDensity.atoms({0.0: 1.0}))


@given(st.integers(0, 10_000), st.sampled_from([0.1, 0.25, 0.5]))
def test_positivity_property(seed, rho):
    rep = check_indicator_positivity(rho, AngularDensity.random(np.random.default_rng(seed)))
    assert rep.nonnegative


# -- cos sqrt asymptotics ------------------------------------------------------------


@pytest.mark.parametrize("r", [1e4, 1e5, 1e6])
@pytest.mark.parametrize("psi", [math.pi / 6, -math.pi / 6, math.pi / 2, -math.pi / 2, 5 * math.pi / 6, -5 * math.pi / 6])
def test_cos_sqrt_log_modulus_asymptotics(r, psi):
    val = COS_SQRT.log_abs(r * np.exp(1j * psi)) / math.sqrt(r)
    assert abs(val - math.sin(abs(psi) / 2)) <= 0.05


# -- circles, clearance, lower bound ---------------------------------------------------


def test_circles_and_clearance_examples():
    neg = ZeroSequence.power(exponent=3.0, angles=(math.pi,))
    circ = exceptional_circles(neg, 1 / 3, 0.1, "II")
    assert ray_clearance(circ, 0.0)
    with pytest.raises(ConditionViolated):
        exceptional_circles(ZeroSequence.power(exponent=1.0), 1.0, 2.0, "II")
    exceptional_circles(ZeroSequence.power(exponent=2.0), 0.5, 1.0, "II")


def test_condition_one_fails_for_cubes():
    neg = ZeroSequence.power(exponent=3.0, angles=(math.pi,))
    with pytest.raises(ConditionViolated) as info:
        exceptional_circles(neg, 1 / 3, 0.1, "I")
    assert info.value.pair == (225, 226)


def test_lower_bound_on_positive_axis():
    rep = lower_bound_on_ray(NEG_CUBE, 0.0, 0.5)
    assert rep.bound_on == "real_part" and rep.sector_hypothesis
    assert rep.indicator == pytest.approx(2 * math.pi / math.sqrt(3), rel=1e-12)
    assert abs(rep.exponent - 1 / 3) <= 0.05
    assert np.all(rep.margins >= 0)


def test_lower_bound_off_axis_falls_back_to_modulus():
    rep = lower_bound_on_ray(NEG_CUBE, math.pi / 4, 0.5)
    H = indicator_H(1 / 3, AngularDensity.from_zeros(NEG_CUBE.zeros), math.pi / 4)
    assert rep.indicator == pytest.approx(H)
    assert rep.bound_on == "modulus"


def test_lower_bound_rejects_zero_ray():
    pos = EntireFunctionSpec(ZeroSequence.power(exponent=3.0), 0)
    with pytest.raises(PreconditionError):
        lower_bound_on_ray(pos, 0.0, 0.5)


# -- growth estimation ---------------------------------------------------------------


def test_order_type_examples():
    est = order_type_estimate(COS_SQRT, 1e4 * 4.0 ** np.arange(8))
    assert abs(est.order - 0.5) <= 0.05 and abs(est.type - 1.0) <= 0.05
    cube = order_type_estimate(lambda z: z**3, 1e6 * 4.0 ** np.arange(8))
    assert abs(cube.order) <= 0.1
    ex = order_type_estimate(EntireFunctionSpec.exponential(1.0), 2.0 ** np.arange(2, 10))
    assert abs(ex.order - 1) <= 0.05 and abs(ex.type - 1) <= 0.05


@pytest.mark.parametrize("power,rho", [(4.0, 0.25), (3.0, 1 / 3)])
def test_order_recovered_for_products(power, rho):
    est = order_type_estimate(EntireFunctionSpec.negative_power_zeros(power), 1e4 * 4.0 ** np.arange(8))
    assert abs(est.order - rho) <= 0.05


# -- Taylor coefficients -------------------------------------------------------------


def test_taylor_coefficients_neg_cube():
    c = taylor_coeffs_at_zero(NEG_CUBE, 12)
    assert c[0] == pytest.approx(1.0, abs=1e-15)
    assert c[1] == pytest.approx(zeta(3), rel=1e-12)
    assert np.sum(c * 2.0 ** np.arange(12)).real == pytest.approx(eval_product(NEG_CUBE, 2.0)[0].real, rel=1e-8)


def test_taylor_coefficients_cos_sqrt_exact():
    c = taylor_coeffs_at_zero(COS_SQRT, 20)
    exact = [(-1) ** n / math.factorial(2 * n) for n in range(20)]
    assert np.allclose(c, exact, rtol=1e-12, atol=1e-300)


def test_taylor_coefficient_bound_holds():
    rho, sigma = 1 / 3, 2 * math.pi / math.sqrt(3)
    c = np.abs(taylor_coeffs_at_zero(NEG_CUBE, 40))
    n = np.arange(10, 40)
    bound = (math.e * sigma * rho / n) ** (n / rho)
    assert np.all(c[10:] <= bound)
