"""Limit laws of the normalized conditional pair, with exact samplers.

Under the conditioning {X > x} the normalized pair ((R - x)/psi(x),
(T - t0)/phi(x)) settles into a two-parameter family: the one-sided limit
has joint density

    f(r, t) = kappa / Gamma((1 + tau)/kappa) * t^tau * e^{-r}
              on  0 < t < r^{1/kappa},

where kappa is the index of the shape deficit u_tilde and tau the index of
the angular density near the center. Writing e = (1 + tau)/kappa, the t
marginal satisfies T^kappa ~ Gamma(e) and, given T, the first coordinate
is T^kappa plus an independent unit exponential. That decomposition is
used here as the exact sampler, which makes it the reference every Monte
Carlo comparison is measured against: no rejection step, no approximation.

The two-sided law mixes a positive and a negative side. A sign S is drawn
with Gamma-weighted probabilities built from the per-side (p, kappa, tau),
then the pair follows the one-sided law of that side, with the t
coordinate negated on the minus side. Two scalings of the t coordinate
are supported: PER_SIGN divides by the window of the realized side,
STAR divides by the combined window and so multiplies t by the window
ratio q of the realized side.

Bivariate limits for (X, Y) = (R u(T), R v(T)) are pushforwards of the
one-sided pair (r, t); ``CorollaryCase`` names the map and carries its
parameters, ``pushforward_corollary`` applies it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle as _oracle
from ._seeding import make_generator
from .errors import ParameterError

__all__ = [
    "Scaling",
    "LimitLawOneSided",
    "LimitLawTwoSided",
    "SignLaw",
    "CorollaryKind",
    "CorollaryCase",
    "density_one_sided",
    "density_two_sided",
    "sign_probability",
    "sample_one_sided",
    "sample_two_sided",
    "pushforward_corollary",
    "normalization_support",
]


class Scaling(str, enum.Enum):
    """How the two-sided t coordinate is normalized.

    PER_SIGN divides T - t0 by the window of the realized side; STAR
    divides by the combined window phi_minus + phi_plus, which scales the
    realized side by its window ratio q.
    """

    PER_SIGN = "per_sign"
    STAR = "star"


def _check_side(name: str, kappa: float, tau: float):
    if not (np.isfinite(kappa) and kappa > 0):
        raise ParameterError(f"{name}: kappa must be > 0, got {kappa}")
    if not (np.isfinite(tau) and tau > -1):
        raise ParameterError(f"{name}: tau must exceed -1, got {tau}")


@dataclass(frozen=True)
class SignLaw:
    """Limit distribution of sign(T - t0) given the exceedance."""

    prob_plus: float
    prob_minus: float

    def __post_init__(self):
        for name, p in (("prob_plus", self.prob_plus), ("prob_minus", self.prob_minus)):
            if not (0.0 <= p <= 1.0):
                raise ParameterError(f"SignLaw.{name} must lie in [0, 1], got {p}")
        if abs(self.prob_plus + self.prob_minus - 1.0) > 1e-12:
            raise ParameterError(
                f"sign probabilities must sum to 1, got {self.prob_plus + self.prob_minus}"
            )


@dataclass(frozen=True)
class LimitLawOneSided:
    """One-sided limit pair; ``norm_const`` is kappa / Gamma((1+tau)/kappa)."""

    kappa: float
    tau: float
    norm_const: float = field(init=False)

    def __post_init__(self):
        _check_side("LimitLawOneSided", self.kappa, self.tau)
        object.__setattr__(
            self, "norm_const", self.kappa / _oracle.gamma_eval(self.gamma_shape)
        )

    @property
    def gamma_shape(self) -> float:
        """(1 + tau) / kappa, the Gamma shape of T^kappa."""
        return (1.0 + self.tau) / self.kappa


@dataclass(frozen=True)
class LimitLawTwoSided:
    """Signed mixture of two one-sided laws.

    ``p_minus``/``p_plus`` are the mixture weights of the window-mass
    limits; the realized sign law reweights them by Gamma factors and is
    computed at construction. ``q_minus``/``q_plus`` (window ratios) are
    only needed for STAR scaling. ``norm_const`` is the density
    denominator sum over sides of (p/kappa) Gamma((1+tau)/kappa).
    """

    kappa_minus: float
    kappa_plus: float
    tau_minus: float
    tau_plus: float
    p_minus: float
    p_plus: float
    q_minus: float | None = None
    q_plus: float | None = None
    scaling: Scaling = Scaling.PER_SIGN
    sign_law: SignLaw = field(init=False)
    norm_const: float = field(init=False)

    def __post_init__(self):
        _check_side("LimitLawTwoSided minus side", self.kappa_minus, self.tau_minus)
        _check_side("LimitLawTwoSided plus side", self.kappa_plus, self.tau_plus)
        for name, p in (("p_minus", self.p_minus), ("p_plus", self.p_plus)):
            if not (0.0 <= p <= 1.0):
                raise ParameterError(f"LimitLawTwoSided.{name} must lie in [0, 1], got {p}")
        if abs(self.p_minus + self.p_plus - 1.0) > 1e-12:
            raise ParameterError(
                f"mixture weights must sum to 1, got {self.p_minus + self.p_plus}"
            )
        if self.scaling == Scaling.STAR:
            if self.q_minus is None or self.q_plus is None:
                raise ParameterError("STAR scaling needs q_minus and q_plus")
            if abs(self.q_minus + self.q_plus - 1.0) > 1e-12:
                raise ParameterError(
                    f"window ratios must sum to 1, got {self.q_minus + self.q_plus}"
                )
        object.__setattr__(self, "sign_law", sign_probability(
            (self.kappa_minus, self.kappa_plus),
            (self.tau_minus, self.tau_plus),
            (self.p_minus, self.p_plus),
        ))
        d = 0.0
        for p, kappa, tau in (
            (self.p_minus, self.kappa_minus, self.tau_minus),
            (self.p_plus, self.kappa_plus, self.tau_plus),
        ):
            if p > 0:
                d += (p / kappa) * _oracle.gamma_eval((1.0 + tau) / kappa)
        object.__setattr__(self, "norm_const", d)

    def side(self, sign: int) -> LimitLawOneSided:
        """The one-sided law of the requested side (+1 or -1)."""
        if sign > 0:
            return LimitLawOneSided(self.kappa_plus, self.tau_plus)
        return LimitLawOneSided(self.kappa_minus, self.tau_minus)


def sign_probability(kappa_sigma, tau_sigma, p_sigma) -> SignLaw:
    """Gamma-weighted sign law from per-side (kappa, tau, p), minus first.

    P{S = sigma} is proportional to (p_sigma / kappa_sigma)
    Gamma((1 + tau_sigma) / kappa_sigma).
    """
    (k_m, k_p), (t_m, t_p), (p_m, p_p) = kappa_sigma, tau_sigma, p_sigma
    _check_side("sign_probability minus side", k_m, t_m)
    _check_side("sign_probability plus side", k_p, t_p)
    if not (0.0 <= p_m <= 1.0 and 0.0 <= p_p <= 1.0 and abs(p_m + p_p - 1.0) <= 1e-12):
        raise ParameterError(f"mixture weights must be probabilities summing to 1, got {(p_m, p_p)}")
    w_m = (p_m / k_m) * _oracle.gamma_eval((1.0 + t_m) / k_m) if p_m > 0 else 0.0
    w_p = (p_p / k_p) * _oracle.gamma_eval((1.0 + t_p) / k_p) if p_p > 0 else 0.0
    total = w_m + w_p
    if total <= 0:
        raise ParameterError("sign law undefined: both Gamma weights vanish")
    return SignLaw(prob_plus=w_p / total, prob_minus=w_m / total)


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------


def density_one_sided(law: LimitLawOneSided, r, t):
    """Joint density of the one-sided pair at (r, t); zero off-support.

    The support is {0 < t < r^{1/kappa}}, open at t = 0, so t = 0 returns
    0 even when tau < 0 would make the power infinite.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    r, t = np.broadcast_arrays(r, t)
    safe_t = np.where(t > 0, t, 1.0)
    inside = (t > 0) & (safe_t ** law.kappa < r)
    out = np.zeros(np.shape(t), dtype=float)
    if np.any(inside):
        vals = law.norm_const * safe_t ** law.tau * np.exp(-r)
        out = np.where(inside, vals, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def density_two_sided(law: LimitLawTwoSided, r, t):
    """Joint density of the signed pair under PER_SIGN scaling.

    Each sign contributes p_sigma |t|^{tau_sigma} e^{-r} on
    {|t|^{kappa_sigma} < r, sigma t > 0}, all divided by the shared
    constant ``law.norm_const``. The STAR-scaled pair is a different
    density (change of variable t -> t / q_sigma per side) and is refused
    here rather than silently mislabeled.
    """
    if law.scaling != Scaling.PER_SIGN:
        raise ParameterError("density_two_sided applies to PER_SIGN scaling only")
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    r, t = np.broadcast_arrays(r, t)
    out = np.zeros(np.shape(t), dtype=float)
    for sign, p, kappa, tau in (
        (-1.0, law.p_minus, law.kappa_minus, law.tau_minus),
        (1.0, law.p_plus, law.kappa_plus, law.tau_plus),
    ):
        if p == 0.0:
            continue
        mag = np.abs(t)
        safe = np.where(mag > 0, mag, 1.0)
        inside = (sign * t > 0) & (safe ** kappa < r)
        if np.any(inside):
            vals = p * safe ** tau * np.exp(-r) / law.norm_const
            out = np.where(inside, vals, out)
    if out.ndim == 0:
        return float(out)
    return out


def normalization_support(law) -> _oracle.PlanarSupport:
    """Integration region for checking that a limit density has mass 1.

    The r direction is handled by the quadrature's own substitution; this
    picks the t interval wide enough that the truncated tail mass is below
    1e-15 (the t marginal decays like e^{-t^kappa}).
    """
    reach = -math.log(1e-16)
    if isinstance(law, LimitLawOneSided):
        t_hi = reach ** (1.0 / law.kappa)
        return _oracle.PlanarSupport(
            t_lo=0.0, t_hi=t_hi,
            r_lower=lambda t: np.abs(t) ** law.kappa,
        )
    if isinstance(law, LimitLawTwoSided):
        t_hi = reach ** (1.0 / law.kappa_plus)
        t_lo = -(reach ** (1.0 / law.kappa_minus))
        kappa_m, kappa_p = law.kappa_minus, law.kappa_plus

        def r_lower(t):
            t = np.asarray(t, dtype=float)
            k = np.where(t >= 0, kappa_p, kappa_m)
            return np.abs(t) ** k

        return _oracle.PlanarSupport(
            t_lo=t_lo, t_hi=t_hi, r_lower=r_lower, t_breakpoints=(0.0,),
        )
    raise ParameterError(f"unsupported law type {type(law).__name__}")


# ---------------------------------------------------------------------------
# Exact samplers
# ---------------------------------------------------------------------------


def sample_one_sided(law: LimitLawOneSided, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Exact draws of the one-sided pair: n arrays (r, t).

    T^kappa is Gamma((1+tau)/kappa) distributed and r is t^kappa plus an
    independent unit exponential; both facts follow from factorizing the
    joint density, so the draws are exact, not approximate.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    rng = make_generator(seed)
    g = rng.gamma(law.gamma_shape, 1.0, n)
    t = g ** (1.0 / law.kappa)
    r = g + rng.exponential(1.0, n)
    return r, t


def sample_two_sided(law: LimitLawTwoSided, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Exact draws of the signed pair: n arrays (r, t_signed).

    Draws the sign from the law's Gamma-weighted sign distribution, then
    the one-sided pair of that side; STAR scaling multiplies each t by the
    window ratio of its realized side.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    rng = make_generator(seed)
    plus = rng.random(n) < law.sign_law.prob_plus
    shape = np.where(plus, (1.0 + law.tau_plus) / law.kappa_plus,
                     (1.0 + law.tau_minus) / law.kappa_minus)
    g = rng.gamma(shape, 1.0)
    t_mag = g ** np.where(plus, 1.0 / law.kappa_plus, 1.0 / law.kappa_minus)
    r = g + rng.exponential(1.0, n)
    t = np.where(plus, t_mag, -t_mag)
    if law.scaling == Scaling.STAR:
        t = t * np.where(plus, law.q_plus, law.q_minus)
    return r, t


# ---------------------------------------------------------------------------
# Bivariate pushforward maps
# ---------------------------------------------------------------------------


class CorollaryKind(str, enum.Enum):
    """Which bivariate regime the second coordinate of (X, Y) falls in.

    FS: the deficit of v dominates; the limit is (r - t^kappa, -t^delta).
    DELTA_GT_KAPPA: the radial overshoot dominates; limit (r - t^kappa, rho r).
    RATIO_C: both contribute through the finite deficit ratio C;
        limit (r - t^kappa, C rho r - t^delta).
    SEIFERT: v factors as (t - t0 + rho) u, making Y/X linear in T;
        limit (r - t^kappa, t).
    THETA_N: v = theta u with theta flat to order n at the center;
        limit (r - t^kappa, t^n theta_deriv / n!).
    """

    FS = "fs"
    DELTA_GT_KAPPA = "delta_gt_kappa"
    RATIO_C = "ratio_c"
    SEIFERT = "seifert"
    THETA_N = "theta_n"


@dataclass(frozen=True)
class CorollaryCase:
    """A pushforward map selection plus the parameters it needs.

    Missing or out-of-range parameters raise ParameterError naming the
    field; which fields are required depends on the kind (see
    ``CorollaryKind``).
    """

    kind: CorollaryKind
    kappa: float
    rho: float | None = None
    delta: float | None = None
    ratio_c: float | None = None
    n: int | None = None
    theta_deriv: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise ParameterError(f"CorollaryCase.kappa must be > 0, got {self.kappa}")
        need = {
            CorollaryKind.FS: ("rho", "delta"),
            CorollaryKind.DELTA_GT_KAPPA: ("rho",),
            CorollaryKind.RATIO_C: ("rho", "delta", "ratio_c"),
            CorollaryKind.SEIFERT: ("rho",),
            CorollaryKind.THETA_N: ("rho", "n", "theta_deriv"),
        }[self.kind]
        for name in need:
            if getattr(self, name) is None:
                raise ParameterError(f"CorollaryCase kind {self.kind.value!r} needs {name}")
        if self.delta is not None and not (np.isfinite(self.delta) and self.delta > 0):
            raise ParameterError(f"CorollaryCase.delta must be > 0, got {self.delta}")
        if self.ratio_c is not None and not np.isfinite(self.ratio_c):
            raise ParameterError(f"CorollaryCase.ratio_c must be finite, got {self.ratio_c}")
        if self.n is not None and self.n < 1:
            raise ParameterError(f"CorollaryCase.n must be an integer >= 1, got {self.n}")
        if self.theta_deriv is not None and (
            not np.isfinite(self.theta_deriv) or self.theta_deriv == 0.0
        ):
            raise ParameterError(
                f"CorollaryCase.theta_deriv must be finite and nonzero, got {self.theta_deriv}"
            )


def pushforward_corollary(case: CorollaryCase, r, t) -> tuple[np.ndarray, np.ndarray]:
    """Map one-sided limit pairs (r, t) to the bivariate limit of the case.

    The first coordinate is always r - t^kappa, strictly positive on the
    support of the one-sided law.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    r, t = np.broadcast_arrays(r, t)
    first = r - t ** case.kappa
    kind = case.kind
    if kind == CorollaryKind.FS:
        second = -(t ** case.delta)
    elif kind == CorollaryKind.DELTA_GT_KAPPA:
        second = case.rho * r
    elif kind == CorollaryKind.RATIO_C:
        second = case.ratio_c * case.rho * r - t ** case.delta
    elif kind == CorollaryKind.SEIFERT:
        second = t.copy()
    else:  # THETA_N
        second = t ** case.n * (case.theta_deriv / math.factorial(case.n))
    return first, second
