"""Entire functions of finite order: zeros, canonical products, growth and indicators."""

from .product import (
    EntireFunctionSpec,
    eval_product,
    log_eval_product,
    taylor_coeffs_at_zero,
    weierstrass_factor,
)
from .zeros import ZeroSequence, convergence_exponent, counting_function, genus

__all__ = [
    "EntireFunctionSpec",
    "ZeroSequence",
    "convergence_exponent",
    "counting_function",
    "eval_product",
    "genus",
    "log_eval_product",
    "taylor_coeffs_at_zero",
    "weierstrass_factor",
]
