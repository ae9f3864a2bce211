"""Shared model fixtures.

The benchmark model used throughout: Exp(1) radial, uniform angle on
[-1, 1], u(t) = 1 - t^2, so phi(x) = x^(-1/2) and every tail quantity
has a closed or high-precision reference value.
"""

import pytest

from polartail import build_builtin_model

F1_CONFIG = {
    "radial.family": "exponential",
    "angular.halfwidth": 1.0,
    "shape_u.kappa": 2.0,
}

ASYM_CONFIG = {
    "radial.family": "exponential",
    "angular.halfwidth": 1.0,
    "shape_u.kappa_minus": 1.0,
    "shape_u.kappa_plus": 2.0,
}


@pytest.fixture(scope="session")
def f1_model():
    return build_builtin_model(F1_CONFIG)


@pytest.fixture(scope="session")
def asym_model():
    return build_builtin_model(ASYM_CONFIG)


@pytest.fixture(scope="session")
def seifert_model():
    return build_builtin_model(
        dict(F1_CONFIG, **{"shape_v.family": "seifert_linear", "shape_v.rho": 0.3})
    )


@pytest.fixture(scope="session")
def sine_model():
    return build_builtin_model(dict(F1_CONFIG, **{"shape_v.family": "sine"}))
