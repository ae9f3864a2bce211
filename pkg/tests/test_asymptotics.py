"""Normalizer roots, mixture weights, and the tail asymptotic."""

import math

import numpy as np
import pytest

from polartail import (
    AngularLaw,
    BracketError,
    Condition,
    MonotonicityError,
    NonConvergence,
    ParameterError,
    PolarModel,
    ShapeU,
    build_builtin_model,
    compute_normalizers,
    compute_phi,
    mixture_limits,
    mixture_p,
    ratio_q,
    tail_asymptotic,
    tail_probability_quadrature,
)
from polartail.model import _radial_exponential

from conftest import F1_CONFIG


def _uniform_angular(half):
    return AngularLaw(
        density=lambda t: np.where(np.abs(t) <= half, 1.0 / (2.0 * half), 0.0),
        t0=0.0,
        tau_minus=0.0,
        tau_plus=0.0,
        support=(-half, half),
        sample=lambda rng, n: rng.uniform(-half, half, n),
    )


def _cosine_u_model(half):
    su = ShapeU(
        u=lambda t: np.cos(np.asarray(t, dtype=float)),
        t0=0.0,
        kappa_minus=2.0,
        kappa_plus=2.0,
        family_tag="custom",
    )
    return PolarModel(
        radial=_radial_exponential(1.0), angular=_uniform_angular(half), shape_u=su
    )


def test_phi_closed_form_square_root(f1_model):
    # u_tilde(s) = s^2 and psi = 1 give phi(x) = x^(-1/2) exactly
    root = compute_phi(f1_model, 100.0)
    assert root.phi == pytest.approx(0.1, rel=1e-10)
    assert abs(root.residual) <= 1e-10
    minus = compute_phi(f1_model, 100.0, side="-")
    assert minus.phi == pytest.approx(root.phi, rel=1e-12)


def test_phi_closed_form_linear():
    mdl = build_builtin_model(
        {
            "radial.family": "exponential",
            "angular.halfwidth": 1.0,
            "shape_u.kappa": 1.0,
        }
    )
    root = compute_phi(mdl, 50.0)
    assert root.phi == pytest.approx(0.02, rel=1e-8)


def test_phi_closed_form_weibull_radial():
    # psi(x) = 1/(2x) for the beta=2 radial, so phi(x) = 1/(x sqrt(2))
    mdl = build_builtin_model(
        {
            "radial.family": "weibull",
            "radial.beta": 2.0,
            "angular.halfwidth": 1.0,
            "shape_u.kappa": 2.0,
        }
    )
    root = compute_phi(mdl, 10.0)
    assert root.phi == pytest.approx(0.07071067811865475, rel=1e-8)


def test_phi_cosine_u_inverts_exactly():
    # u_tilde(s) = 1 - cos(s), so phi(x) = acos(1 - 1/x)
    mdl = _cosine_u_model(math.pi)
    root = compute_phi(mdl, 200.0)
    assert root.phi == pytest.approx(0.10004171361154002933, rel=1e-10)


def test_phi_strictly_decreasing_in_x(f1_model):
    phis = [compute_phi(f1_model, x).phi for x in (10.0, 20.0, 40.0, 80.0)]
    assert all(a > b for a, b in zip(phis, phis[1:]))


def test_phi_infeasible_threshold_raises_bracket_error(f1_model):
    # target u_tilde level 1/x exceeds u_tilde(s_max) = 1/4 below x = 4
    with pytest.raises(BracketError):
        compute_phi(f1_model, 2.0)
    root = compute_phi(f1_model, 4.5)
    assert root.phi > 0.0


def test_phi_nonmonotone_profile_raises():
    # on [-4 pi, 4 pi] the probe interval covers a full cosine period
    with pytest.raises(MonotonicityError):
        compute_phi(_cosine_u_model(4.0 * math.pi), 100.0)


def test_phi_minus_side_of_one_sided_model_rejected():
    mdl = build_builtin_model(
        {
            "radial.family": "exponential",
            "angular.halfwidth": 1.0,
            "angular.halfwidth_minus": 0.0,
            "shape_u.kappa": 2.0,
        }
    )
    with pytest.raises(ParameterError):
        compute_phi(mdl, 50.0, side="-")


def test_mixture_limits_symmetric_model(f1_model):
    p_m, p_p, q_m, q_p, is_estimate = mixture_limits(f1_model)
    assert (p_m, p_p) == (0.5, 0.5)
    assert (q_m, q_p) == (0.5, 0.5)
    assert not is_estimate


def test_mixture_limits_faster_side_takes_all(asym_model):
    # kappa_- = 1 has exponent e_- = 1, kappa_+ = 2 has e_+ = 1/2; the
    # smaller exponent side dominates the mixture entirely, and the
    # larger kappa side absorbs the angular normalization
    p_m, p_p, q_m, q_p, is_estimate = mixture_limits(asym_model)
    assert (p_m, p_p) == (0.0, 1.0)
    assert (q_m, q_p) == (0.0, 1.0)
    assert not is_estimate


def test_mixture_limits_one_sided_model():
    mdl = build_builtin_model(
        {
            "radial.family": "exponential",
            "angular.halfwidth": 1.0,
            "angular.halfwidth_minus": 0.0,
            "shape_u.kappa": 2.0,
        }
    )
    assert mixture_limits(mdl) == (0.0, 1.0, 0.0, 1.0, False)


def test_mixture_limits_tied_exponent_splits_by_weight():
    mdl = build_builtin_model(
        {
            "radial.family": "exponential",
            "angular.family": "asymmetric_power",
            "angular.halfwidth": 1.0,
            "angular.weight_plus": 0.75,
            "angular.tau_minus": 0.0,
            "angular.tau_plus": 0.0,
            "shape_u.kappa": 2.0,
        }
    )
    p_m, p_p, q_m, q_p, is_estimate = mixture_limits(mdl)
    assert p_p == pytest.approx(0.75, rel=1e-12)
    assert p_m == pytest.approx(0.25, rel=1e-12)
    assert q_p == pytest.approx(0.5, rel=1e-12)
    assert not is_estimate


def test_mixture_p_numeric_matches_closed_form():
    # same density as the tied-weight builtin, fed in as raw callables so
    # the closed form is unavailable and the grid estimate must be used
    def density(t):
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) <= 1.0, np.where(t >= 0.0, 0.75, 0.25), 0.0)

    ang = AngularLaw(
        density=density,
        t0=0.0,
        tau_minus=0.0,
        tau_plus=0.0,
        support=(-1.0, 1.0),
        sample=lambda rng, n: rng.uniform(-1.0, 1.0, n),
    )
    su = ShapeU(
        u=lambda t: 1.0 - np.asarray(t, dtype=float) ** 2,
        t0=0.0,
        kappa_minus=2.0,
        kappa_plus=2.0,
        family_tag="custom",
    )
    mdl = PolarModel(radial=_radial_exponential(1.0), angular=ang, shape_u=su)
    est = mixture_p(mdl, "+")
    assert est.value == pytest.approx(0.75, abs=1e-3)
    est_q = ratio_q(mdl, "+")
    assert est_q.value == pytest.approx(0.5, abs=1e-3)
    _, p_p, _, _, is_estimate = mixture_limits(mdl)
    assert is_estimate
    assert p_p == pytest.approx(0.75, abs=1e-3)


def test_mixture_p_oscillating_shape_never_settles():
    def osc(t):
        t = np.asarray(t, dtype=float)
        s = np.abs(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(
                (s > 0.0) & (t > 0.0),
                1.0 + 0.8 * np.sin(np.log(np.maximum(s, 1e-300))),
                1.0,
            )
        return 1.0 - np.minimum(s * s * w, 2.0)

    su = ShapeU(
        u=osc, t0=0.0, kappa_minus=2.0, kappa_plus=2.0, family_tag="custom"
    )
    mdl = PolarModel(
        radial=_radial_exponential(1.0), angular=_uniform_angular(1.0), shape_u=su
    )
    with pytest.raises(NonConvergence):
        mixture_p(mdl, "+", x_grid=np.geomspace(10.0, 1e6, 7))


def test_mixture_p_one_sided_model_rejected():
    mdl = build_builtin_model(
        {
            "radial.family": "exponential",
            "angular.halfwidth": 1.0,
            "angular.halfwidth_minus": 0.0,
            "shape_u.kappa": 2.0,
        }
    )
    with pytest.raises(ParameterError):
        mixture_p(mdl, "+")


def test_compute_normalizers_benchmark(f1_model):
    norms = compute_normalizers(f1_model, 100.0)
    assert norms.x == 100.0
    assert norms.psi_x == pytest.approx(1.0, rel=1e-14)
    assert norms.phi_plus == pytest.approx(0.1, rel=1e-10)
    assert norms.phi_minus == pytest.approx(0.1, rel=1e-10)
    assert abs(norms.residual_plus) <= 1e-10
    assert norms.p_plus == 0.5
    assert not norms.p_is_estimate


def test_tail_asymptotic_closed_form(f1_model):
    # H(x) phi(x) g(phi) Gamma(1/2) / kappa = e^(-x) sqrt(pi) / (4 sqrt(x))
    got = tail_asymptotic(f1_model, 10.0)
    assert got == pytest.approx(6.3616551885952623547e-6, rel=1e-12)
    for x in (10.0, 30.0):
        manual = math.exp(-x) * math.sqrt(math.pi) / (4.0 * math.sqrt(x))
        assert tail_asymptotic(f1_model, x) == pytest.approx(manual, rel=1e-9)


def test_tail_asymptotic_unrestricted_doubles_symmetric(f1_model):
    one = tail_asymptotic(f1_model, 20.0, Condition.RIGHT_SIDED)
    both = tail_asymptotic(f1_model, 20.0, Condition.UNRESTRICTED)
    assert both == pytest.approx(2.0 * one, rel=1e-12)


def test_tail_asymptotic_scaled_drops_survival_factor(f1_model):
    x = 25.0
    scaled = tail_asymptotic(f1_model, x, scaled=True)
    plain = tail_asymptotic(f1_model, x)
    hbar = float(f1_model.radial.survival(np.array([x]))[0])
    assert plain == pytest.approx(scaled * hbar, rel=1e-12)


def test_tail_asymptotic_tracks_quadrature(f1_model):
    # ratio drifts toward 1 as the threshold grows
    errs = [
        abs(
            tail_probability_quadrature(f1_model, x, Condition.RIGHT_SIDED).value
            / tail_asymptotic(f1_model, x)
            - 1.0
        )
        for x in (10.0, 25.0, 50.0)
    ]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.02
