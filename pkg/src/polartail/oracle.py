"""Independent numerical ground truth.

This module deliberately avoids the closed forms implemented elsewhere in
the package. It provides

* ``gamma_eval``       -- Gamma function from a rational (Lanczos)
  approximation, validated by the recurrence Gamma(a+1) = a Gamma(a)
  rather than trusted;
* ``adaptive_quadrature`` -- globally adaptive Gauss-Kronrod 15 integration
  with an error-ordered panel heap;
* ``tail_probability_quadrature`` -- P{X > x (and T > t0)} for a polar
  model X = R u(T), computed as the one dimensional integral

      integral over {u(t) > 0} of  Hbar(x / u(t)) g(t) dt,

  which is exact because R and T are independent and R >= 0;
* ``scaled_tail_quadrature`` -- the same integral divided through by
  Hbar(x), evaluated in log space so it survives thresholds where Hbar(x)
  underflows (Weibull-type tails at large x);
* ``density_normalization`` -- 2-D integrals of limit densities, with the
  unbounded r direction mapped to (0, 1) by r = r0 - log(1 - w);
* ``small_t_mass_check``   -- the near-center angular mass
  P{0 < T - t0 <= theta * phi(x)} against its first order approximation
  phi(x) g(t0 + phi(x)) theta^(1+tau) / (1+tau).

All integrands handed to the quadrature routines must accept numpy arrays.
Endpoint singularities of the form t^tau with tau in (-1, 0) are integrable
and are handled by subdivision; the Kronrod nodes are strictly interior so
the integrand is never evaluated at a singular endpoint.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonConvergence, ParameterError
from . import model as _model

__all__ = [
    "QuadratureResult",
    "PlanarSupport",
    "gamma_eval",
    "adaptive_quadrature",
    "tail_probability_quadrature",
    "scaled_tail_quadrature",
    "density_normalization",
    "small_t_mass_check",
]


# ---------------------------------------------------------------------------
# Gamma function
# ---------------------------------------------------------------------------

# Lanczos coefficients for g = 7, n = 9 (double precision workhorse set).
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_eval(a: float) -> float:
    """Gamma(a) for a > 0 with relative error around 1e-14.

    Uses the Lanczos rational approximation

        Gamma(a) = sqrt(2 pi) (a + g - 1/2)^(a - 1/2)
                   exp(-(a + g - 1/2)) A_g(a)

    where A_g is a fixed 9-term rational series. Large arguments are
    evaluated in log space to postpone overflow until Gamma itself
    overflows (a > 171.6).

    Raises ParameterError for a <= 0 or non-finite a.
    """
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise ParameterError(f"gamma_eval: argument a must be positive and finite, got {a!r}")
    z = a - 1.0
    series = _LANCZOS_C[0]
    for i in range(1, len(_LANCZOS_C)):
        series += _LANCZOS_C[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    log_gamma = 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(series)
    if log_gamma > 709.0:
        raise ParameterError(f"gamma_eval: Gamma({a}) overflows double precision")
    return math.exp(log_gamma)


# ---------------------------------------------------------------------------
# Gauss-Kronrod 15 panel rule
# ---------------------------------------------------------------------------

# 15-point Kronrod abscissae on [-1, 1] (nonnegative half) with weights,
# and the embedded 7-point Gauss weights.
_XGK_HALF = (
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
)
_WGK_HALF = (
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
)
_WG_HALF = (
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
)


def _build_gk15():
    nodes = np.empty(15)
    wk = np.empty(15)
    wg = np.zeros(15)
    for i in range(7):
        nodes[i] = -_XGK_HALF[i]
        nodes[14 - i] = _XGK_HALF[i]
        wk[i] = wk[14 - i] = _WGK_HALF[i]
    nodes[7] = 0.0
    wk[7] = _WGK_HALF[7]
    # Gauss points sit at the odd Kronrod indices 1, 3, 5, 7, 9, 11, 13.
    for j in range(3):
        wg[1 + 2 * j] = wg[13 - 2 * j] = _WG_HALF[j]
    wg[7] = _WG_HALF[3]
    return nodes, wk, wg


_GK_NODES, _GK_WK, _GK_WG = _build_gk15()


def _gk15_panel(f, a: float, b: float):
    """One Kronrod panel: returns (kronrod_value, error_estimate)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c + h * _GK_NODES
    y = np.asarray(f(x), dtype=float)
    kron = h * float(_GK_WK @ y)
    gauss = h * float(_GK_WG @ y)
    err = abs(kron - gauss)
    if not np.isfinite(kron):
        err = math.inf
    return kron, err


@dataclass(frozen=True)
class QuadratureResult:
    """Outcome of an adaptive integration.

    ``converged`` is True iff the accumulated error estimate met the
    requested tolerance before the panel budget ran out.
    """

    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool


def adaptive_quadrature(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    rel_tol: float = 1e-9,
    abs_tol: float = 0.0,
    max_panels: int = 4000,
    breakpoints: Sequence[float] = (),
    vectorized: bool = True,
) -> QuadratureResult:
    """Integrate f over [a, b], splitting the worst panel first.

    ``breakpoints`` seeds initial panel boundaries (interior points only);
    use them to mark kinks, support edges, or the scale of a sharp peak so
    that the first error estimates already see the structure.

    Stops when the summed panel error is below max(abs_tol, rel_tol*|I|)
    or when ``max_panels`` panels exist; the latter yields converged=False
    and it is the caller's decision whether that is fatal.
    """
    if not (b > a):
        raise ParameterError(f"adaptive_quadrature: empty interval [{a}, {b}]")
    if not vectorized:
        scalar_f = f
        f = lambda xs: np.array([scalar_f(float(v)) for v in np.atleast_1d(xs)])

    cuts = [a]
    for p in sorted(set(float(q) for q in breakpoints)):
        if a < p < b:
            cuts.append(p)
    cuts.append(b)

    heap = []
    total_val = 0.0
    total_err = 0.0
    evals = 0
    counter = 0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, err = _gk15_panel(f, lo, hi)
        evals += 15
        heapq.heappush(heap, (-err, counter, lo, hi, val, err))
        counter += 1
        total_val += val
        total_err += err

    while len(heap) < max_panels:
        if total_err <= max(abs_tol, rel_tol * abs(total_val)):
            break
        neg_err, _, lo, hi, val, err = heapq.heappop(heap)
        if err == 0.0:
            heapq.heappush(heap, (neg_err, counter, lo, hi, val, err))
            counter += 1
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # interval is at machine resolution; keep its estimate as is
            heapq.heappush(heap, (0.0, counter, lo, hi, val, 0.0))
            counter += 1
            total_err -= err
            continue
        v1, e1 = _gk15_panel(f, lo, mid)
        v2, e2 = _gk15_panel(f, mid, hi)
        evals += 30
        total_val += (v1 + v2) - val
        total_err += (e1 + e2) - err
        heapq.heappush(heap, (-e1, counter, lo, mid, v1, e1))
        counter += 1
        heapq.heappush(heap, (-e2, counter, mid, hi, v2, e2))
        counter += 1

    converged = bool(total_err <= max(abs_tol, rel_tol * abs(total_val))) and math.isfinite(total_val)
    return QuadratureResult(total_val, total_err, evals, converged)


# ---------------------------------------------------------------------------
# Tail probabilities of the polar model
# ---------------------------------------------------------------------------


def _tail_domain(mdl, condition) -> tuple[float, float]:
    lo, hi = mdl.angular.support
    if condition == _model.Condition.RIGHT_SIDED:
        lo = mdl.angular.t0
    if not hi > lo:
        raise ParameterError("tail quadrature: conditioning leaves an empty angular domain")
    return lo, hi


def _peak_breakpoints(mdl, x: float, condition) -> list[float]:
    """Panel seeds at multiples of phi(x) around t0, where the mass sits."""
    from . import asymptotics

    t0 = mdl.angular.t0
    lo, hi = _tail_domain(mdl, condition)
    pts = [t0] if lo < t0 < hi else []
    for side in (+1, -1):
        if side == -1 and condition == _model.Condition.RIGHT_SIDED:
            continue
        if side == -1 and mdl.sidedness == _model.Sidedness.ONE_SIDED_RIGHT:
            continue
        try:
            phi = asymptotics.compute_phi(mdl, side, x)
        except Exception:
            continue
        for mult in (1.0, 4.0, 16.0, 64.0):
            p = t0 + side * mult * phi
            if lo < p < hi:
                pts.append(p)
    return pts


def tail_probability_quadrature(mdl, x: float, condition) -> QuadratureResult:
    """P{X > x} (optionally joint with T > t0) by direct quadrature.

    The integrand H̄(x / u(t)) g(t) is set to zero wherever u(t) <= 0,
    since R >= 0 makes X > x > 0 impossible there. Relative tolerance
    1e-9; raises NonConvergence if the panel budget runs out first.

    The returned value underflows to 0.0 when Hbar(x) itself is below the
    smallest double; use scaled_tail_quadrature for ratio work at such
    thresholds.
    """
    if x < 0:
        raise ParameterError(f"tail_probability_quadrature: x must be >= 0, got {x}")
    lo, hi = _tail_domain(mdl, condition)
    survival = mdl.radial.survival
    u = mdl.shape_u.u
    g = mdl.angular.density

    def integrand(t):
        t = np.asarray(t, dtype=float)
        w = np.asarray(u(t), dtype=float)
        out = np.zeros_like(t)
        pos = w > 0
        if np.any(pos):
            with np.errstate(over="ignore", divide="ignore"):
                ratio = np.where(pos, x / np.where(pos, w, 1.0), np.inf)
                vals = np.asarray(survival(ratio), dtype=float) * np.asarray(g(t), dtype=float)
            out = np.where(pos, vals, 0.0)
        return out

    res = adaptive_quadrature(
        integrand, lo, hi, rel_tol=1e-9, abs_tol=0.0,
        breakpoints=_peak_breakpoints(mdl, x, condition),
    )
    if not res.converged:
        raise NonConvergence(
            f"tail_probability_quadrature: error estimate {res.abs_error_estimate:.3e} "
            f"stalled above tolerance at x={x}"
        )
    return res


def scaled_tail_quadrature(mdl, x: float, condition) -> QuadratureResult:
    """P{X > x (and T > t0)} / Hbar(x), computed without forming Hbar(x).

    Integrates exp(log Hbar(x / u(t)) - log Hbar(x)) g(t) dt, which stays
    representable even when both survival values underflow. This is also
    the exact acceptance probability of the rejection sampler that
    proposes from the radial tail law given R > x.
    """
    if x < 0:
        raise ParameterError(f"scaled_tail_quadrature: x must be >= 0, got {x}")
    lo, hi = _tail_domain(mdl, condition)
    log_survival = mdl.radial.log_survival
    u = mdl.shape_u.u
    g = mdl.angular.density
    ls_x = float(log_survival(x))

    def integrand(t):
        t = np.asarray(t, dtype=float)
        w = np.asarray(u(t), dtype=float)
        out = np.zeros_like(t)
        pos = w > 0
        if np.any(pos):
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                ratio = np.where(pos, x / np.where(pos, w, 1.0), np.inf)
                ls = np.asarray(log_survival(ratio), dtype=float)
                vals = np.exp(ls - ls_x) * np.asarray(g(t), dtype=float)
            out = np.where(pos, vals, 0.0)
        return out

    res = adaptive_quadrature(
        integrand, lo, hi, rel_tol=1e-9, abs_tol=0.0,
        breakpoints=_peak_breakpoints(mdl, x, condition),
    )
    if not res.converged:
        raise NonConvergence(
            f"scaled_tail_quadrature: error estimate {res.abs_error_estimate:.3e} "
            f"stalled above tolerance at x={x}"
        )
    return res


# ---------------------------------------------------------------------------
# 2-D normalization integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanarSupport:
    """Integration region {(r, t): t in [t_lo, t_hi], r > r_lower(t)}.

    ``r_lower`` must accept an ndarray of t values. ``t_breakpoints``
    marks kinks of the t cross-section (typically t = 0 where a power
    t^tau is singular or the per-sign exponent switches).
    """

    t_lo: float
    t_hi: float
    r_lower: Callable[[np.ndarray], np.ndarray]
    t_breakpoints: tuple[float, ...] = ()


def density_normalization(
    density: Callable[[np.ndarray, np.ndarray], np.ndarray],
    support: PlanarSupport,
    *,
    rel_tol: float = 1e-8,
) -> QuadratureResult:
    """Integrate density(r, t) over the region described by ``support``.

    The inner r integral runs over (r_lower(t), infinity) through the
    substitution r = r_lower(t) - log(1 - w), w in (0, 1), which turns any
    e^{-r} factor into a constant in w and makes a single Kronrod panel
    nearly exact. The outer t integral is adaptive with the declared
    breakpoints.

    ``density`` must be vectorized in both arguments.
    """
    if not (support.t_hi > support.t_lo):
        raise ParameterError("density_normalization: empty t interval")

    inner_rel = min(rel_tol, 1e-9)
    inner_evals = 0
    worst_inner_rel = 0.0

    def outer_integrand(ts):
        nonlocal inner_evals, worst_inner_rel
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.empty_like(ts)
        for i, t in enumerate(ts):
            r0 = float(np.asarray(support.r_lower(np.array([t])))[0])

            def inner(w, t=t, r0=r0):
                w = np.asarray(w, dtype=float)
                r = r0 - np.log1p(-w)
                return np.asarray(density(r, np.full_like(r, t)), dtype=float) / (1.0 - w)

            res = adaptive_quadrature(inner, 0.0, 1.0, rel_tol=inner_rel, abs_tol=1e-300, max_panels=200)
            inner_evals += res.evaluations
            if res.value != 0.0:
                worst_inner_rel = max(worst_inner_rel, res.abs_error_estimate / abs(res.value))
            out[i] = res.value
        return out

    res = adaptive_quadrature(
        outer_integrand,
        support.t_lo,
        support.t_hi,
        rel_tol=rel_tol,
        abs_tol=0.0,
        max_panels=2000,
        breakpoints=support.t_breakpoints,
    )
    # The outer pass integrates inner values carrying relative error at
    # most worst_inner_rel each, so their contribution scales with the
    # integral itself, not with the width of the t interval.
    total_err = res.abs_error_estimate + worst_inner_rel * abs(res.value)
    converged = res.converged and total_err <= max(rel_tol * abs(res.value), 1e-10)
    if not converged:
        raise NonConvergence(
            f"density_normalization: error estimate {total_err:.3e} stalled above tolerance"
        )
    return QuadratureResult(res.value, total_err, inner_evals, converged)


# ---------------------------------------------------------------------------
# Small-t mass estimate
# ---------------------------------------------------------------------------


def small_t_mass_check(mdl, theta: float, x: float) -> tuple[float, float, float]:
    """Compare P{0 < T - t0 <= theta phi(x)} with its first order form.

    Returns (lhs, rhs, ratio) where

        lhs = integral of g over (t0, t0 + theta phi(x)],
        rhs = phi(x) g(t0 + phi(x)) theta^(1+tau) / (1+tau),

    tau being the right-side angular index. The ratio tends to 1 as x
    grows by regular variation of g near t0; for exact power densities it
    equals 1 at every feasible x.
    """
    from . import asymptotics

    if not theta > 0:
        raise ParameterError(f"small_t_mass_check: theta must be > 0, got {theta}")
    tau = mdl.angular.tau_plus
    if not tau > -1:
        raise ParameterError(f"small_t_mass_check: tau_plus must exceed -1, got {tau}")
    phi = asymptotics.compute_phi(mdl, x, "+").phi
    t0 = mdl.angular.t0
    upper = min(t0 + theta * phi, mdl.angular.support[1])
    res = adaptive_quadrature(
        lambda t: np.asarray(mdl.angular.density(np.asarray(t)), dtype=float),
        t0,
        upper,
        rel_tol=1e-10,
        abs_tol=1e-300,
    )
    lhs = res.value
    g_at_phi = float(np.asarray(mdl.angular.g_tilde(np.array([phi])))[0])
    rhs = phi * g_at_phi * theta ** (1.0 + tau) / (1.0 + tau)
    ratio = lhs / rhs if rhs != 0 else math.inf
    return lhs, rhs, ratio
