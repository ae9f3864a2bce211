"""Normalizing sequences for the conditional limit of a polar model.

Everything here is driven by one scalar equation per side of the center:
the angular window phi = phi_sigma(x) is the root of

    u_tilde(sigma * phi) * x / psi(x) = 1,

where psi is the auxiliary scale of the radial tail. phi measures how far
T may stray from t0 before the deficit of u eats one psi-unit of radial
tail; it is the natural scale of T - t0 given X > x.

The window is found by bisection on a bracket strictly inside the angular
support, after a grid check that u_tilde is increasing there; shapes whose
deficit is not monotone near the peak (for example a cosine over several
periods) are rejected rather than silently giving one of several roots.

Two limits describe how the sides combine:

    p_sigma = lim phi_sigma g_tilde(sigma phi_sigma) / sum over sides
    q_sigma = lim phi_sigma / (phi_minus + phi_plus)

For builtin families both are available in closed form from the leading
power exponents: with u_tilde(sigma s) ~ a_sigma s^kappa_sigma and
g_tilde(sigma s) ~ c_sigma s^tau_sigma, the side with the smaller
(1 + tau_sigma) / kappa_sigma carries all of p, and the side with the
larger kappa_sigma carries all of q; ties split by the coefficients.
For custom models ``mixture_p`` and ``ratio_q`` estimate the limits on a
finite grid of x values and report how settled the ratio looks, raising
NonConvergence when it still drifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import model as _model
from . import oracle as _oracle
from .errors import BracketError, MonotonicityError, NonConvergence, ParameterError

__all__ = [
    "PhiRoot",
    "Normalizers",
    "LimitEstimate",
    "compute_phi",
    "compute_normalizers",
    "mixture_limits",
    "mixture_p",
    "ratio_q",
    "tail_asymptotic",
]

_BRACKET_FLOOR = 1e-14
_RESIDUAL_TOL = 1e-10
_MONOTONE_GRID = 512


@dataclass(frozen=True)
class PhiRoot:
    """Root of the window equation on one side.

    ``residual`` is |u_tilde(sigma phi) x / psi(x) - 1| at the returned
    root and is guaranteed <= 1e-10; ``s_max`` is the bracket ceiling that
    was searched.
    """

    phi: float
    residual: float
    s_max: float
    side: str


@dataclass(frozen=True)
class Normalizers:
    """All normalizing quantities of a model at one threshold x.

    ``phi_minus``/``residual_minus`` are None for one-sided models.
    ``phi_star`` is the sum of the available windows. The mixture weights
    p and window ratios q are exact limits for builtin families and grid
    estimates for custom ones (see ``p_is_estimate``).
    """

    x: float
    psi_x: float
    phi_plus: float
    phi_minus: float | None
    phi_star: float
    residual_plus: float
    residual_minus: float | None
    p_minus: float
    p_plus: float
    q_minus: float
    q_plus: float
    p_is_estimate: bool = False


@dataclass(frozen=True)
class LimitEstimate:
    """A ratio limit read off a finite grid of thresholds.

    ``value`` is the ratio at the largest grid x; ``max_change`` the
    largest successive change along the grid, a crude settledness
    diagnostic.
    """

    value: float
    max_change: float
    values: tuple[float, ...]
    x_grid: tuple[float, ...]


def _side_sign(side: str) -> int:
    if side == "+":
        return 1
    if side == "-":
        return -1
    raise ParameterError(f"side must be '+' or '-', got {side!r}")


def _side_reach(mdl: _model.PolarModel, side: str) -> float:
    lo, hi = mdl.angular.support
    dist = (hi - mdl.t0) if side == "+" else (mdl.t0 - lo)
    return dist / 2.0


def compute_phi(mdl: _model.PolarModel, x: float, side: str = "+") -> PhiRoot:
    """Solve u_tilde(sigma phi) x / psi(x) = 1 by bisection.

    The bracket is (1e-14, s_max] with s_max half the distance from t0 to
    the support edge on the requested side, keeping the search away from
    boundary effects. Raises MonotonicityError if u_tilde is not
    increasing on the bracket, BracketError if the target lies outside the
    reachable range (x too small for this model), ParameterError for the
    minus side of a one-sided model, and NonConvergence if the residual at
    the root exceeds 1e-10.
    """
    sgn = _side_sign(side)
    if sgn < 0 and mdl.sidedness == _model.Sidedness.ONE_SIDED_RIGHT:
        raise ParameterError("side '-' is not available on a one_sided_right model")
    if not (np.isfinite(x) and x > 0):
        raise ParameterError(f"x must be a positive finite number, got {x}")

    psi = float(mdl.radial.aux_psi(x))
    if not (np.isfinite(psi) and psi > 0):
        raise ParameterError(f"aux_psi({x}) = {psi} is not a positive number")
    target = psi / x

    s_max = _side_reach(mdl, side)
    if s_max <= _BRACKET_FLOOR:
        raise BracketError(
            f"no room on side {side!r}: bracket ceiling {s_max:g} at or below the floor"
        )

    def ut(s):
        return np.asarray(mdl.shape_u.u_tilde(sgn * np.asarray(s, dtype=float)), dtype=float)

    s_grid = np.geomspace(max(_BRACKET_FLOOR, s_max * 1e-9), s_max, _MONOTONE_GRID)
    vals = ut(s_grid)
    if not np.all(np.isfinite(vals)):
        raise MonotonicityError(f"u_tilde is not finite on the side {side!r} bracket")
    tol = 1e-12 * max(1.0, float(np.max(np.abs(vals))))
    drops = np.diff(vals) < -tol
    if np.any(drops):
        where = float(s_grid[1:][drops][0])
        raise MonotonicityError(
            f"u_tilde decreases near s = {where:.6g} on side {side!r}; "
            "the window equation needs an increasing deficit"
        )

    ut_hi = float(ut(s_max))
    ut_lo = float(ut(_BRACKET_FLOOR))
    if target > ut_hi:
        raise BracketError(
            f"x = {x:g} is too small on side {side!r}: needs deficit {target:.3g} "
            f"but u_tilde reaches only {ut_hi:.3g} within the bracket"
        )
    if target < ut_lo:
        raise BracketError(
            f"x = {x:g} puts the root below the bracket floor on side {side!r}"
        )

    lo_s, hi_s = _BRACKET_FLOOR, s_max
    for _ in range(200):
        mid = 0.5 * (lo_s + hi_s)
        if mid <= lo_s or mid >= hi_s:
            break
        if float(ut(mid)) < target:
            lo_s = mid
        else:
            hi_s = mid
    phi = 0.5 * (lo_s + hi_s)
    residual = abs(float(ut(phi)) * x / psi - 1.0)
    if residual > _RESIDUAL_TOL:
        raise NonConvergence(
            f"window root residual {residual:.3g} exceeds {_RESIDUAL_TOL:g} "
            f"on side {side!r} at x = {x:g}"
        )
    return PhiRoot(phi=phi, residual=residual, s_max=s_max, side=side)


def _closed_form_pq(mdl: _model.PolarModel) -> tuple[float, float, float, float] | None:
    """Exact (p_minus, p_plus, q_minus, q_plus) from leading coefficients."""
    ang, su = mdl.angular, mdl.shape_u
    coeffs = (ang.g_coeff_minus, ang.g_coeff_plus, su.u_coeff_minus, su.u_coeff_plus)
    if any(c is None for c in coeffs):
        return None
    c_m, c_p, a_m, a_p = coeffs
    e_m = (1.0 + ang.tau_minus) / su.kappa_minus
    e_p = (1.0 + ang.tau_plus) / su.kappa_plus
    if e_p < e_m:
        p_m, p_p = 0.0, 1.0
    elif e_p > e_m:
        p_m, p_p = 1.0, 0.0
    else:
        w_m = c_m * a_m ** (-e_m)
        w_p = c_p * a_p ** (-e_p)
        p_m, p_p = w_m / (w_m + w_p), w_p / (w_m + w_p)
    if su.kappa_plus > su.kappa_minus:
        q_m, q_p = 0.0, 1.0
    elif su.kappa_plus < su.kappa_minus:
        q_m, q_p = 1.0, 0.0
    else:
        k = su.kappa_plus
        r_m = a_m ** (-1.0 / k)
        r_p = a_p ** (-1.0 / k)
        q_m, q_p = r_m / (r_m + r_p), r_p / (r_m + r_p)
    return p_m, p_p, q_m, q_p


def mixture_limits(mdl: _model.PolarModel, x_grid=None) -> tuple[float, float, float, float, bool]:
    """(p_minus, p_plus, q_minus, q_plus, is_estimate) for a model.

    One-sided models carry everything on the plus side. Two-sided models
    with full builtin coefficient data get the exact limits; otherwise the
    limits are read off a grid of thresholds (see ``mixture_p``) and the
    last flag is True.
    """
    if mdl.sidedness == _model.Sidedness.ONE_SIDED_RIGHT:
        return 0.0, 1.0, 0.0, 1.0, False
    closed = _closed_form_pq(mdl)
    if closed is not None:
        p_m, p_p, q_m, q_p = closed
        return p_m, p_p, q_m, q_p, False
    p_p = mixture_p(mdl, "+", x_grid).value
    q_p = ratio_q(mdl, "+", x_grid).value
    return 1.0 - p_p, p_p, 1.0 - q_p, q_p, True


def compute_normalizers(mdl: _model.PolarModel, x: float) -> Normalizers:
    """Windows, mixture weights, and window ratios at threshold x.

    Uses the closed-form limits when every builtin leading coefficient is
    available; otherwise falls back to grid estimates anchored at x (see
    ``mixture_p``), flagged by ``p_is_estimate``.
    """
    root_p = compute_phi(mdl, x, "+")
    psi = float(mdl.radial.aux_psi(x))
    if mdl.sidedness == _model.Sidedness.ONE_SIDED_RIGHT:
        return Normalizers(
            x=x, psi_x=psi,
            phi_plus=root_p.phi, phi_minus=None,
            phi_star=root_p.phi,
            residual_plus=root_p.residual, residual_minus=None,
            p_minus=0.0, p_plus=1.0, q_minus=0.0, q_plus=1.0,
        )
    root_m = compute_phi(mdl, x, "-")
    anchored = tuple(float(v) for v in np.geomspace(x, 100.0 * x, 9))
    p_m, p_p, q_m, q_p, estimate = mixture_limits(mdl, anchored if _closed_form_pq(mdl) is None else None)
    return Normalizers(
        x=x, psi_x=psi,
        phi_plus=root_p.phi, phi_minus=root_m.phi,
        phi_star=root_p.phi + root_m.phi,
        residual_plus=root_p.residual, residual_minus=root_m.residual,
        p_minus=p_m, p_plus=p_p, q_minus=q_m, q_plus=q_p,
        p_is_estimate=estimate,
    )


def _grid_limit(mdl, side, x_grid, ratio_fn, change_tol, what) -> LimitEstimate:
    sgn = _side_sign(side)
    if mdl.sidedness == _model.Sidedness.ONE_SIDED_RIGHT:
        raise ParameterError(f"{what} needs a two-sided model")
    if x_grid is None:
        x_grid = tuple(float(v) for v in np.geomspace(10.0, 1e4, 13))
    xs = tuple(float(v) for v in x_grid)
    if len(xs) < 2 or any(b <= a for a, b in zip(xs, xs[1:])):
        raise ParameterError(f"{what} needs a strictly increasing x grid of length >= 2")
    values = []
    for x in xs:
        phi_m = compute_phi(mdl, x, "-").phi
        phi_p = compute_phi(mdl, x, "+").phi
        values.append(ratio_fn(phi_m, phi_p, sgn))
    arr = np.asarray(values)
    max_change = float(np.max(np.abs(np.diff(arr)))) if len(arr) > 1 else 0.0
    if max_change > change_tol:
        raise NonConvergence(
            f"{what} still moves by {max_change:.3g} per grid step "
            f"(tolerance {change_tol:g}); extend the x grid"
        )
    return LimitEstimate(
        value=float(arr[-1]), max_change=max_change,
        values=tuple(float(v) for v in arr), x_grid=xs,
    )


def mixture_p(mdl: _model.PolarModel, side: str = "+",
              x_grid=None, *, change_tol: float = 0.1) -> LimitEstimate:
    """Estimate p_sigma = lim phi_sigma g_tilde(sigma phi_sigma) / sum.

    Evaluates the ratio along an increasing grid of thresholds and returns
    the value at the largest one together with the worst successive
    change; raises NonConvergence when that change exceeds ``change_tol``.
    This is a numerical read of an asymptotic limit, not a proof.
    """
    def ratio(phi_m, phi_p, sgn):
        v_m = phi_m * float(mdl.angular.g_tilde(-phi_m))
        v_p = phi_p * float(mdl.angular.g_tilde(phi_p))
        total = v_m + v_p
        if total <= 0:
            raise NonConvergence("mixture ratio undefined: g_tilde vanishes at both windows")
        return (v_p if sgn > 0 else v_m) / total

    return _grid_limit(mdl, side, x_grid, ratio, change_tol, "mixture_p")


def ratio_q(mdl: _model.PolarModel, side: str = "+",
            x_grid=None, *, change_tol: float = 0.1) -> LimitEstimate:
    """Estimate q_sigma = lim phi_sigma / (phi_minus + phi_plus).

    Same grid protocol and caveats as ``mixture_p``.
    """
    def ratio(phi_m, phi_p, sgn):
        return (phi_p if sgn > 0 else phi_m) / (phi_m + phi_p)

    return _grid_limit(mdl, side, x_grid, ratio, change_tol, "ratio_q")


def _side_term(mdl: _model.PolarModel, x: float, side: str) -> float:
    """phi_sigma g_tilde(sigma phi_sigma) Gamma(e_sigma) / kappa_sigma."""
    sgn = _side_sign(side)
    root = compute_phi(mdl, x, side)
    kappa = mdl.shape_u.kappa_plus if sgn > 0 else mdl.shape_u.kappa_minus
    tau = mdl.angular.tau_plus if sgn > 0 else mdl.angular.tau_minus
    g_at = float(mdl.angular.g_tilde(sgn * root.phi))
    return root.phi * g_at * _oracle.gamma_eval((1.0 + tau) / kappa) / kappa


def tail_asymptotic(mdl: _model.PolarModel, x: float,
                    condition: _model.Condition = _model.Condition.RIGHT_SIDED,
                    *, scaled: bool = False) -> float:
    """First order tail approximation of P{X > x} (and T > t0 if right sided).

    Returns survival(x) times the window-weighted angular mass

        sum_sigma phi_sigma g_tilde(sigma phi_sigma) Gamma(e_sigma) / kappa_sigma

    over the conditioning sides, with e_sigma = (1 + tau_sigma) / kappa_sigma.
    With ``scaled=True`` the survival factor is dropped, which gives the
    asymptotic conditional probability P{X > x | R > x}; this form stays
    representable when the tail itself underflows.
    """
    total = _side_term(mdl, x, "+")
    if (condition == _model.Condition.UNRESTRICTED
            and mdl.sidedness == _model.Sidedness.TWO_SIDED):
        total += _side_term(mdl, x, "-")
    if scaled:
        return total
    return total * float(np.asarray(mdl.radial.survival(np.array([x])))[0])
