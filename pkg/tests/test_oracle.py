"""Gamma evaluation, adaptive quadrature, and the tail integrals.

Reference values were computed with mpmath at 40 digits and are quoted
to full double precision.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polartail import (
    Condition,
    ParameterError,
    PlanarSupport,
    adaptive_quadrature,
    build_builtin_model,
    density_normalization,
    gamma_eval,
    scaled_tail_quadrature,
    small_t_mass_check,
    tail_probability_quadrature,
)

# (1/2) * integral_0^1 exp(-x / (1 - t^2)) dt
F1_TAIL = {
    5.0: 1.1844109244600762683e-3,
    10.0: 5.9549152101336907609e-6,
    25.0: 1.1963522594665681909e-12,
    100.0: 1.6306425277340852744e-45,
}


def test_gamma_integer_and_half_integer_values():
    assert gamma_eval(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma_eval(5.0) == pytest.approx(24.0, rel=1e-13)
    assert gamma_eval(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_eval(1.5) == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-13)


def test_gamma_recurrence_on_spot_values():
    for a in (0.1, 0.5, 1.5, 3.7, 9.2):
        assert gamma_eval(a + 1.0) == pytest.approx(a * gamma_eval(a), rel=1e-11)


def test_gamma_rejects_nonpositive_argument():
    with pytest.raises(ParameterError):
        gamma_eval(0.0)
    with pytest.raises(ParameterError):
        gamma_eval(-1.3)


@given(st.floats(min_value=0.05, max_value=25.0))
@settings(max_examples=200, deadline=None)
def test_gamma_recurrence_property(a):
    assert gamma_eval(a + 1.0) == pytest.approx(a * gamma_eval(a), rel=1e-9)


def test_quadrature_polynomial_exact():
    res = adaptive_quadrature(lambda t: 3.0 * t**2, 0.0, 1.0)
    assert res.converged
    assert res.value == pytest.approx(1.0, rel=1e-12)


def test_quadrature_endpoint_singularity():
    # integrand is unbounded at 0 but integrable; nodes stay interior
    res = adaptive_quadrature(lambda t: 1.0 / np.sqrt(t), 0.0, 1.0, rel_tol=1e-10)
    assert res.converged
    assert res.value == pytest.approx(2.0, rel=1e-8)


def test_quadrature_exponential_long_interval():
    res = adaptive_quadrature(np.exp, -50.0, 0.0, rel_tol=1e-12)
    assert res.value == pytest.approx(1.0 - math.exp(-50.0), rel=1e-11)


def test_quadrature_breakpoints_split_kink():
    f = lambda t: np.abs(t)
    plain = adaptive_quadrature(f, -1.0, 2.0, rel_tol=1e-12)
    split = adaptive_quadrature(f, -1.0, 2.0, rel_tol=1e-12, breakpoints=(0.0,))
    assert split.value == pytest.approx(2.5, rel=1e-12)
    assert plain.value == pytest.approx(2.5, rel=1e-9)
    assert split.evaluations <= plain.evaluations


def test_tail_quadrature_matches_reference(f1_model):
    for x, ref in F1_TAIL.items():
        res = tail_probability_quadrature(f1_model, x, Condition.RIGHT_SIDED)
        assert res.converged
        assert res.value == pytest.approx(ref, rel=1e-9)


def test_tail_quadrature_unrestricted_doubles_symmetric_model(f1_model):
    right = tail_probability_quadrature(f1_model, 10.0, Condition.RIGHT_SIDED)
    both = tail_probability_quadrature(f1_model, 10.0, Condition.UNRESTRICTED)
    assert both.value == pytest.approx(2.0 * right.value, rel=1e-10)


def test_tail_quadrature_at_zero_is_halfline_mass(f1_model):
    # X > 0 holds almost surely, so conditioning on T > t0 leaves 1/2
    res = tail_probability_quadrature(f1_model, 0.0, Condition.RIGHT_SIDED)
    assert res.value == pytest.approx(0.5, rel=1e-10)


def test_tail_quadrature_strictly_decreasing_in_x(f1_model):
    vals = [
        tail_probability_quadrature(f1_model, x, Condition.RIGHT_SIDED).value
        for x in (1.0, 2.0, 5.0, 10.0, 20.0)
    ]
    assert all(a > b > 0.0 for a, b in zip(vals, vals[1:]))


def test_tail_quadrature_ignores_negative_u_region():
    # u = cos(t) on [-pi, pi] is negative for |t| > pi/2; that region can
    # never produce X > x > 0 and must contribute nothing.
    # mpmath: integral over |t| < pi/2 of exp(-10/cos t)/(2 pi) dt
    from polartail import AngularLaw, PolarModel, ShapeU
    from polartail.model import _radial_exponential

    half = math.pi
    ang = AngularLaw(
        density=lambda t: np.where(np.abs(t) <= half, 1.0 / (2.0 * half), 0.0),
        t0=0.0,
        tau_minus=0.0,
        tau_plus=0.0,
        support=(-half, half),
        sample=lambda rng, n: rng.uniform(-half, half, n),
    )
    su = ShapeU(
        u=lambda t: np.cos(np.asarray(t, dtype=float)),
        t0=0.0,
        kappa_minus=2.0,
        kappa_plus=2.0,
        family_tag="custom",
    )
    mdl = PolarModel(radial=_radial_exponential(1.0), angular=ang, shape_u=su)
    res = tail_probability_quadrature(mdl, 10.0, Condition.UNRESTRICTED)
    assert res.value == pytest.approx(5.4160996647088292e-6, rel=1e-9)


def test_scaled_tail_quadrature_reference_values(f1_model):
    assert scaled_tail_quadrature(
        f1_model, 5.0, Condition.RIGHT_SIDED
    ).value == pytest.approx(0.17578216697472313804, rel=1e-9)
    assert scaled_tail_quadrature(
        f1_model, 50.0, Condition.RIGHT_SIDED
    ).value == pytest.approx(0.061759062081107046527, rel=1e-9)


def test_scaled_tail_quadrature_is_tail_over_survival(f1_model):
    x = 10.0
    scaled = scaled_tail_quadrature(f1_model, x, Condition.RIGHT_SIDED).value
    plain = tail_probability_quadrature(f1_model, x, Condition.RIGHT_SIDED).value
    hbar = float(f1_model.radial.survival(np.array([x]))[0])
    assert scaled == pytest.approx(plain / hbar, rel=1e-9)


def test_density_normalization_zero_function_integrates_to_zero():
    support = PlanarSupport(t_lo=-1.0, t_hi=1.0, r_lower=lambda t: np.abs(t) ** 2)
    res = density_normalization(
        lambda r, t: np.zeros_like(r), support, rel_tol=1e-6
    )
    assert res.value == 0.0


def test_density_normalization_separable_product():
    # f(r, t) = e^(-r) / 2 on r > 0, |t| < 1 integrates to 1
    support = PlanarSupport(t_lo=-1.0, t_hi=1.0, r_lower=lambda t: np.zeros_like(t))
    res = density_normalization(lambda r, t: 0.5 * np.exp(-r), support)
    assert res.converged
    assert res.value == pytest.approx(1.0, abs=1e-7)


def test_small_t_mass_check_exact_for_uniform_angle(f1_model):
    for theta, x in ((1.0, 100.0), (0.5, 50.0)):
        lhs, rhs, ratio = small_t_mass_check(f1_model, theta, x)
        assert lhs > 0.0 and rhs > 0.0
        assert ratio == pytest.approx(1.0, rel=1e-10)


def test_small_t_mass_check_exact_for_power_angle():
    mdl = build_builtin_model(
        {
            "radial.family": "exponential",
            "angular.family": "symmetric_power",
            "angular.halfwidth": 1.0,
            "angular.tau": 1.0,
            "shape_u.kappa": 2.0,
        }
    )
    lhs, rhs, ratio = small_t_mass_check(mdl, 1.0, 100.0)
    assert ratio == pytest.approx(1.0, rel=1e-10)


def test_small_t_mass_check_rejects_nonpositive_theta(f1_model):
    with pytest.raises(ParameterError):
        small_t_mass_check(f1_model, 0.0, 100.0)
