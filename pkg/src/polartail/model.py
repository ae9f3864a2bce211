"""Model layer: the polar pair (R, T) with shape functions u and v.

A model is X = R u(T), Y = R v(T) where R is a nonnegative radial variable
with a rapidly decaying tail, T an angular variable with density g centered
at t0, u a shape function with u(t0) = 1 and |u| <= 1, and v an optional
second shape. The derived local quantities are always computed pointwise
from the primitives, never stored separately:

    u_tilde(s) = u(t0) - u(t0 + s)      (index kappa per side)
    v_tilde(s) = v(t0) - v(t0 + s)      (index delta)
    g_tilde(s) = g(t0 + s)              (index tau per side)

``build_builtin_model`` assembles a model from a flat key=value mapping
(the same format the CLI reads from disk); ``validate_model`` runs the
numerical assumption checks and returns a report instead of raising, so a
failing model can still be inspected.

All callables stored on the model must be vectorized over numpy arrays.
Models are immutable after construction and safe to share across threads;
sampling takes an explicit numpy Generator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import special as sp_special

from .errors import ConfigError, ParameterError, UnknownFamilyError

__all__ = [
    "Sidedness",
    "Condition",
    "RadialLaw",
    "AngularLaw",
    "ShapeU",
    "ShapeV",
    "PolarModel",
    "ValidationGrid",
    "CheckEntry",
    "ValidationReport",
    "build_builtin_model",
    "validate_model",
    "parse_config_text",
    "load_config",
]


class Sidedness(str, enum.Enum):
    ONE_SIDED_RIGHT = "one_sided_right"
    TWO_SIDED = "two_sided"


class Condition(str, enum.Enum):
    """Conditioning event for tail computations and samplers."""

    RIGHT_SIDED = "right"          # X > x and T > t0
    UNRESTRICTED = "unrestricted"  # X > x


# ---------------------------------------------------------------------------
# Component types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialLaw:
    """Nonnegative radial variable with survival function and tail tools.

    ``aux_psi`` is the auxiliary scale of the tail: survival(x + psi(x) * lam)
    / survival(x) tends to e^{-lam}. ``tail_quantile(p, x_floor)`` inverts
    the conditional law of R given R > x_floor. ``log_survival`` must stay
    finite-precision accurate far beyond the point where ``survival``
    underflows; ratio computations rely on it.
    """

    family_tag: str
    survival: Callable[[np.ndarray], np.ndarray]
    log_survival: Callable[[np.ndarray], np.ndarray]
    aux_psi: Callable[[float], float]
    tail_quantile: Callable[[np.ndarray, float], np.ndarray]
    sample: Callable[[np.random.Generator, int], np.ndarray]
    support_lower: float = 0.0

    def __post_init__(self):
        if self.support_lower < 0:
            raise ParameterError(
                f"radial support_lower must be >= 0, got {self.support_lower}"
            )


@dataclass(frozen=True)
class AngularLaw:
    """Angular density g on a bounded support containing the center t0.

    ``tau_minus``/``tau_plus`` are the declared regular variation indices
    of g(t0 + s) as s -> 0 on each side; both must exceed -1. The
    ``g_coeff_*`` fields carry exact leading coefficients for builtin
    families (g(t0 + sigma s) ~ coeff * s^tau) and are None for custom laws.
    """

    density: Callable[[np.ndarray], np.ndarray]
    t0: float
    tau_minus: float
    tau_plus: float
    support: tuple[float, float]
    sample: Callable[[np.random.Generator, int], np.ndarray]
    family_tag: str = "custom"
    g_coeff_minus: float | None = None
    g_coeff_plus: float | None = None

    def __post_init__(self):
        lo, hi = self.support
        if not (lo <= self.t0 < hi):
            raise ParameterError(
                f"angular support {self.support} must contain t0={self.t0} "
                "with room on the right"
            )
        for name, tau in (("tau_minus", self.tau_minus), ("tau_plus", self.tau_plus)):
            if not tau > -1:
                raise ParameterError(f"angular {name} must exceed -1, got {tau}")

    def g_tilde(self, s):
        """g(t0 + s), derived pointwise from the density."""
        return self.density(self.t0 + np.asarray(s, dtype=float))


@dataclass(frozen=True)
class ShapeU:
    """Shape function u with u(t0) = 1, |u| <= 1, a strict peak at t0.

    ``kappa_minus``/``kappa_plus`` are the regular variation indices of
    u_tilde(sigma s) = 1 - u(t0 + sigma s) as s -> 0+. ``u_coeff_*`` carry
    exact or asymptotic leading coefficients for builtins.
    """

    u: Callable[[np.ndarray], np.ndarray]
    t0: float
    kappa_minus: float
    kappa_plus: float
    family_tag: str = "custom"
    u_coeff_minus: float | None = None
    u_coeff_plus: float | None = None

    def __post_init__(self):
        for name, k in (("kappa_minus", self.kappa_minus), ("kappa_plus", self.kappa_plus)):
            if not k > 0:
                raise ParameterError(f"shape_u {name} must be > 0, got {k}")

    def u_tilde(self, s):
        """u(t0) - u(t0 + s), derived pointwise from u."""
        s = np.asarray(s, dtype=float)
        u0 = float(np.asarray(self.u(np.array([self.t0])))[0])
        return u0 - self.u(self.t0 + s)


@dataclass(frozen=True)
class ShapeV:
    """Second shape function v with center value rho = v(t0).

    ``delta`` is the regular variation index of |v_tilde| at 0+ and
    ``v_sign`` the eventual sign of v_tilde(s) for small s > 0 ("+" or
    "-"); regular variation is applied to the absolute value since v may
    increase or decrease through t0. ``ratio_c`` stores the limit of
    u_tilde/v_tilde at 0+ when it is finite and known in closed form.
    ``theta``/``theta_n``/``theta_n_deriv_at_t0`` describe the v = theta*u
    factorization when available.
    """

    v: Callable[[np.ndarray], np.ndarray]
    t0: float
    rho: float
    delta: float
    v_sign: str
    family_tag: str = "custom"
    theta: Callable[[np.ndarray], np.ndarray] | None = None
    theta_n: int | None = None
    theta_n_deriv_at_t0: float | None = None
    ratio_c: float | None = None

    def __post_init__(self):
        if self.v_sign not in ("+", "-"):
            raise ParameterError(f"shape_v v_sign must be '+' or '-', got {self.v_sign!r}")
        if self.delta < 0:
            raise ParameterError(f"shape_v delta must be >= 0, got {self.delta}")
        if self.theta_n is not None and self.theta_n < 1:
            raise ParameterError(f"shape_v theta_n must be >= 1, got {self.theta_n}")

    def v_tilde(self, s):
        """v(t0) - v(t0 + s), derived pointwise from v."""
        s = np.asarray(s, dtype=float)
        v0 = float(np.asarray(self.v(np.array([self.t0])))[0])
        return v0 - self.v(self.t0 + s)


@dataclass(frozen=True)
class PolarModel:
    """Immutable bundle of the polar components.

    ``sidedness`` declares whether the analysis may use both sides of t0;
    TWO_SIDED requires angular support strictly below t0 as well.
    """

    radial: RadialLaw
    angular: AngularLaw
    shape_u: ShapeU
    shape_v: ShapeV | None = None
    sidedness: Sidedness = Sidedness.TWO_SIDED

    def __post_init__(self):
        if self.angular.t0 != self.shape_u.t0:
            raise ParameterError(
                f"t0 mismatch: angular.t0={self.angular.t0} shape_u.t0={self.shape_u.t0}"
            )
        if self.shape_v is not None and self.shape_v.t0 != self.angular.t0:
            raise ParameterError(
                f"t0 mismatch: angular.t0={self.angular.t0} shape_v.t0={self.shape_v.t0}"
            )
        lo, hi = self.angular.support
        if self.sidedness == Sidedness.TWO_SIDED and not lo < self.angular.t0:
            raise ParameterError(
                "sidedness=two_sided needs angular support below t0 "
                f"(support={self.angular.support}, t0={self.angular.t0})"
            )

    @property
    def t0(self) -> float:
        return self.angular.t0


# ---------------------------------------------------------------------------
# Builtin radial families
# ---------------------------------------------------------------------------


def _radial_exponential(rate: float) -> RadialLaw:
    if not rate > 0:
        raise ParameterError(f"radial.rate must be > 0, got {rate}")

    def survival(x):
        return np.exp(-rate * np.clip(np.asarray(x, dtype=float), 0.0, None))

    def log_survival(x):
        return -rate * np.clip(np.asarray(x, dtype=float), 0.0, None)

    def tail_quantile(p, x_floor):
        return x_floor - np.log1p(-np.asarray(p, dtype=float)) / rate

    return RadialLaw(
        family_tag="exponential",
        survival=survival,
        log_survival=log_survival,
        aux_psi=lambda x: 1.0 / rate,
        tail_quantile=tail_quantile,
        sample=lambda rng, n: rng.exponential(1.0 / rate, n),
    )


def _radial_weibull(beta: float) -> RadialLaw:
    if not beta > 0:
        raise ParameterError(f"radial.beta must be > 0, got {beta}")

    def survival(x):
        return np.exp(-np.clip(np.asarray(x, dtype=float), 0.0, None) ** beta)

    def log_survival(x):
        return -(np.clip(np.asarray(x, dtype=float), 0.0, None) ** beta)

    def aux_psi(x):
        if x <= 0:
            raise ParameterError(f"weibull aux_psi needs x > 0, got {x}")
        return x ** (1.0 - beta) / beta

    def tail_quantile(p, x_floor):
        p = np.asarray(p, dtype=float)
        return (max(x_floor, 0.0) ** beta - np.log1p(-p)) ** (1.0 / beta)

    return RadialLaw(
        family_tag="weibull",
        survival=survival,
        log_survival=log_survival,
        aux_psi=aux_psi,
        tail_quantile=tail_quantile,
        sample=lambda rng, n: rng.weibull(beta, n),
    )


def _radial_half_normal() -> RadialLaw:
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    log2 = math.log(2.0)
    mills_scale = math.sqrt(math.pi / 2.0)

    def survival(x):
        return sp_special.erfc(np.clip(np.asarray(x, dtype=float), 0.0, None) * inv_sqrt2)

    def log_survival(x):
        return log2 + sp_special.log_ndtr(-np.clip(np.asarray(x, dtype=float), 0.0, None))

    def aux_psi(x):
        return mills_scale * float(sp_special.erfcx(max(x, 0.0) * inv_sqrt2))

    def tail_quantile(p, x_floor):
        p = np.asarray(p, dtype=float)
        log_phi = sp_special.log_ndtr(-max(x_floor, 0.0))
        return -sp_special.ndtri_exp(np.log1p(-p) + log_phi)

    return RadialLaw(
        family_tag="half_normal",
        survival=survival,
        log_survival=log_survival,
        aux_psi=aux_psi,
        tail_quantile=tail_quantile,
        sample=lambda rng, n: np.abs(rng.normal(0.0, 1.0, n)),
    )


# ---------------------------------------------------------------------------
# Builtin angular families
# ---------------------------------------------------------------------------


def _power_density_one_side(s, coeff, tau, width):
    """coeff * s^tau on (0, width], 0 outside; 0 at s=0 when tau < 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s <= width) & ((s > 0) if tau < 0 else (s >= 0))
    if np.any(inside):
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = coeff * np.where(inside, s, 1.0) ** tau
        out = np.where(inside, vals, 0.0)
    return out


def _angular_uniform(t0: float, w_minus: float, w_plus: float) -> AngularLaw:
    if w_plus <= 0:
        raise ParameterError(f"angular.halfwidth_plus must be > 0, got {w_plus}")
    if w_minus < 0:
        raise ParameterError(f"angular.halfwidth_minus must be >= 0, got {w_minus}")
    lo, hi = t0 - w_minus, t0 + w_plus
    g0 = 1.0 / (hi - lo)

    def density(t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= lo) & (t <= hi), g0, 0.0)

    return AngularLaw(
        density=density,
        t0=t0,
        tau_minus=0.0,
        tau_plus=0.0,
        support=(lo, hi),
        sample=lambda rng, n: rng.uniform(lo, hi, n),
        family_tag="uniform",
        g_coeff_minus=g0 if w_minus > 0 else None,
        g_coeff_plus=g0,
    )


def _angular_symmetric_power(t0: float, tau: float, width: float) -> AngularLaw:
    if not tau > -1:
        raise ParameterError(f"angular.tau must exceed -1, got {tau}")
    if width <= 0:
        raise ParameterError(f"angular.halfwidth must be > 0, got {width}")
    coeff = (1.0 + tau) / (2.0 * width ** (1.0 + tau))

    def density(t):
        s = np.abs(np.asarray(t, dtype=float) - t0)
        return _power_density_one_side(s, coeff, tau, width)

    def sample(rng, n):
        mags = width * rng.random(n) ** (1.0 / (1.0 + tau))
        signs = rng.integers(0, 2, n) * 2 - 1
        return t0 + signs * mags

    return AngularLaw(
        density=density,
        t0=t0,
        tau_minus=tau,
        tau_plus=tau,
        support=(t0 - width, t0 + width),
        sample=sample,
        family_tag="symmetric_power",
        g_coeff_minus=coeff,
        g_coeff_plus=coeff,
    )


def _angular_asymmetric_power(
    t0: float, tau_minus: float, tau_plus: float,
    weight_plus: float, w_minus: float, w_plus: float,
) -> AngularLaw:
    for name, tau in (("angular.tau_minus", tau_minus), ("angular.tau_plus", tau_plus)):
        if not tau > -1:
            raise ParameterError(f"{name} must exceed -1, got {tau}")
    if not 0.0 < weight_plus < 1.0:
        raise ParameterError(f"angular.weight_plus must be in (0, 1), got {weight_plus}")
    if w_minus <= 0 or w_plus <= 0:
        raise ParameterError(
            f"angular halfwidths must be > 0, got minus={w_minus} plus={w_plus}"
        )
    c_plus = weight_plus * (1.0 + tau_plus) / w_plus ** (1.0 + tau_plus)
    c_minus = (1.0 - weight_plus) * (1.0 + tau_minus) / w_minus ** (1.0 + tau_minus)

    def density(t):
        s = np.asarray(t, dtype=float) - t0
        plus = _power_density_one_side(np.where(s >= 0, s, np.inf), c_plus, tau_plus, w_plus)
        minus = _power_density_one_side(np.where(s < 0, -s, np.inf), c_minus, tau_minus, w_minus)
        return plus + minus

    def sample(rng, n):
        side_plus = rng.random(n) < weight_plus
        mags_u = rng.random(n)
        mag_plus = w_plus * mags_u ** (1.0 / (1.0 + tau_plus))
        mag_minus = w_minus * mags_u ** (1.0 / (1.0 + tau_minus))
        return t0 + np.where(side_plus, mag_plus, -mag_minus)

    return AngularLaw(
        density=density,
        t0=t0,
        tau_minus=tau_minus,
        tau_plus=tau_plus,
        support=(t0 - w_minus, t0 + w_plus),
        sample=sample,
        family_tag="asymmetric_power",
        g_coeff_minus=c_minus,
        g_coeff_plus=c_plus,
    )


# ---------------------------------------------------------------------------
# Builtin shapes
# ---------------------------------------------------------------------------


def _shape_u_power(t0: float, kappa_minus: float, kappa_plus: float, scale: float) -> ShapeU:
    if scale <= 0:
        raise ParameterError(f"shape_u.scale must be > 0, got {scale}")
    for name, k in (("shape_u.kappa_minus", kappa_minus), ("shape_u.kappa_plus", kappa_plus)):
        if not k > 0:
            raise ParameterError(f"{name} must be > 0, got {k}")

    def u(t):
        s = np.asarray(t, dtype=float) - t0
        k = np.where(s >= 0, kappa_plus, kappa_minus)
        return 1.0 - scale * np.abs(s) ** k

    return ShapeU(
        u=u,
        t0=t0,
        kappa_minus=kappa_minus,
        kappa_plus=kappa_plus,
        family_tag="power",
        u_coeff_minus=scale,
        u_coeff_plus=scale,
    )


def _shape_u_cosine(t0: float) -> ShapeU:
    def u(t):
        return np.cos(np.asarray(t, dtype=float) - t0)

    # 1 - cos(s) = s^2/2 (1 + O(s^2)): index 2 with asymptotic coefficient 1/2
    return ShapeU(
        u=u,
        t0=t0,
        kappa_minus=2.0,
        kappa_plus=2.0,
        family_tag="cosine",
        u_coeff_minus=0.5,
        u_coeff_plus=0.5,
    )


def _shape_v_sine(t0: float, shape_u: ShapeU) -> ShapeV:
    def v(t):
        return np.sin(np.asarray(t, dtype=float) - t0)

    kp = shape_u.kappa_plus
    a = shape_u.u_coeff_plus
    if kp > 1:
        ratio_c = 0.0
    elif kp == 1 and a is not None:
        ratio_c = -a
    else:
        ratio_c = None
    return ShapeV(
        v=v, t0=t0, rho=0.0, delta=1.0, v_sign="-",
        family_tag="sine", ratio_c=ratio_c,
    )


def _shape_v_seifert(t0: float, rho: float, shape_u: ShapeU) -> ShapeV:
    u = shape_u.u

    def v(t):
        t = np.asarray(t, dtype=float)
        return (t - t0 + rho) * u(t)

    kp = shape_u.kappa_plus
    a = shape_u.u_coeff_plus
    # v_tilde(s) = (rho + s) u_tilde(s) - s; leading term decides delta and sign
    if rho == 0.0:
        # v_tilde(s) = s (u_tilde(s) - 1) ~ -s
        delta, sign = 1.0, "-"
        if kp > 1:
            ratio_c = 0.0
        elif kp == 1 and a is not None:
            ratio_c = -a
        else:
            ratio_c = None
    elif kp < 1:
        delta = kp
        sign = "+" if rho > 0 else "-"
        ratio_c = 1.0 / rho
    elif kp > 1:
        delta, sign, ratio_c = 1.0, "-", 0.0
    else:  # kp == 1
        if a is None:
            raise ParameterError("shape_v seifert_linear with kappa=1 needs a power shape_u")
        coeff = rho * a - 1.0
        if coeff == 0.0:
            raise ParameterError(
                "shape_v.rho: rho * scale = 1 makes the linear term of v vanish; "
                "this degenerate combination is not supported"
            )
        delta = 1.0
        sign = "+" if coeff > 0 else "-"
        ratio_c = a / coeff
    return ShapeV(
        v=v, t0=t0, rho=rho, delta=delta, v_sign=sign,
        family_tag="seifert_linear", ratio_c=ratio_c,
    )


def _shape_v_power(t0: float, rho: float, delta: float, coeff: float, shape_u: ShapeU) -> ShapeV:
    if not delta > 0:
        raise ParameterError(
            f"shape_v.delta must be > 0 for the power family, got {delta}"
        )
    if coeff == 0:
        raise ParameterError("shape_v.coeff must be nonzero")

    def v(t):
        s = np.abs(np.asarray(t, dtype=float) - t0)
        return rho - coeff * s ** delta

    kp = shape_u.kappa_plus
    a = shape_u.u_coeff_plus
    if kp > delta:
        ratio_c = 0.0
    elif kp == delta and a is not None:
        ratio_c = a / coeff
    else:
        ratio_c = None
    return ShapeV(
        v=v, t0=t0, rho=rho, delta=delta,
        v_sign="+" if coeff > 0 else "-",
        family_tag="power_v", ratio_c=ratio_c,
    )


def _shape_v_theta_polynomial(
    t0: float, rho: float, n: int, deriv: float, shape_u: ShapeU,
) -> ShapeV:
    if n < 1:
        raise ParameterError(f"shape_v.n must be an integer >= 1, got {n}")
    if deriv == 0:
        raise ParameterError("shape_v.deriv must be nonzero")
    c = deriv / math.factorial(n)
    u = shape_u.u

    def theta(t):
        return rho + c * (np.asarray(t, dtype=float) - t0) ** n

    def v(t):
        return theta(t) * u(t)

    kp = shape_u.kappa_plus
    a = shape_u.u_coeff_plus if shape_u.u_coeff_plus is not None else 1.0
    # v_tilde(s) = rho u_tilde(s) - c s^n + c s^n u_tilde(s) for s > 0
    if rho != 0.0 and kp < n:
        delta, lead = kp, rho * a
    elif rho == 0.0 or kp > n:
        delta, lead = float(n), -c
    else:  # kp == n with rho nonzero
        lead = rho * a - c
        if lead == 0.0:
            raise ParameterError(
                "shape_v.deriv: rho * scale * n! = deriv cancels the leading term; "
                "this degenerate combination is not supported"
            )
        delta = float(n)
    if kp > delta:
        ratio_c = 0.0
    elif kp == delta:
        ratio_c = a / lead
    else:
        ratio_c = None
    return ShapeV(
        v=v, t0=t0, rho=rho, delta=delta,
        v_sign="+" if lead > 0 else "-",
        family_tag="theta_polynomial",
        theta=theta, theta_n=n, theta_n_deriv_at_t0=deriv,
        ratio_c=ratio_c,
    )


# ---------------------------------------------------------------------------
# Flat configuration handling
# ---------------------------------------------------------------------------


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key=value`` lines; '#' starts a comment line."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


class _ConfigReader:
    """Tracks which keys a builder consumed so leftovers can be rejected."""

    def __init__(self, config: Mapping[str, object]):
        self._cfg = dict(config)
        self._used: set[str] = set()

    def raw(self, key: str, default=None, required: bool = False):
        if key in self._cfg:
            self._used.add(key)
            return self._cfg[key]
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default

    def text(self, key: str, default: str | None = None, required: bool = False) -> str | None:
        val = self.raw(key, default, required)
        return None if val is None else str(val).strip()

    def number(self, key: str, default: float | None = None, required: bool = False) -> float | None:
        val = self.raw(key, default, required)
        if val is None:
            return None
        try:
            return float(val)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r}: expected a number, got {val!r}") from None

    def integer(self, key: str, default: int | None = None, required: bool = False) -> int | None:
        val = self.raw(key, default, required)
        if val is None:
            return None
        try:
            fval = float(val)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r}: expected an integer, got {val!r}") from None
        if fval != int(fval):
            raise ConfigError(f"key {key!r}: expected an integer, got {val!r}")
        return int(fval)

    def finish(self):
        leftover = sorted(set(self._cfg) - self._used)
        if leftover:
            raise ConfigError(f"unknown configuration keys: {', '.join(leftover)}")


def build_builtin_model(config: Mapping[str, object]) -> PolarModel:
    """Assemble a PolarModel from a flat key=value mapping.

    Families and their keys (defaults in parentheses):

    radial.family    exponential | weibull | half_normal
        exponential: radial.rate (1.0)
        weibull:     radial.beta (required)
    angular.family   uniform | symmetric_power | asymmetric_power
        shared:      angular.t0 (0.0)
        uniform:     angular.halfwidth (1.0) or angular.halfwidth_minus /
                     angular.halfwidth_plus (one-sided support via
                     halfwidth_minus=0)
        symmetric_power: angular.tau (required), angular.halfwidth (1.0)
        asymmetric_power: angular.tau_minus, angular.tau_plus,
                     angular.weight_plus (required), halfwidths as uniform
    shape_u.family   power | cosine
        power:       shape_u.kappa (2.0) or per-side kappa_minus/kappa_plus,
                     shape_u.scale (1.0)
    shape_v.family   sine | seifert_linear | power_v | theta_polynomial
        (section optional; omit for models without a second shape)
        seifert_linear: shape_v.rho (0.0)
        power_v:     shape_v.rho (0.0), shape_v.delta (required),
                     shape_v.coeff (1.0)
        theta_polynomial: shape_v.rho (0.0), shape_v.n (required),
                     shape_v.deriv (required)
    model.sidedness  one_sided_right | two_sided (inferred from support)

    Range violations raise ParameterError naming the key; unknown family
    tags raise UnknownFamilyError; unknown keys raise ConfigError.
    """
    cfg = _ConfigReader(config)

    rfam = cfg.text("radial.family", required=True)
    if rfam == "exponential":
        radial = _radial_exponential(cfg.number("radial.rate", 1.0))
    elif rfam == "weibull":
        radial = _radial_weibull(cfg.number("radial.beta", required=True))
    elif rfam == "half_normal":
        radial = _radial_half_normal()
    else:
        raise UnknownFamilyError(f"radial.family: unknown family {rfam!r}")

    t0 = cfg.number("angular.t0", 0.0)
    afam = cfg.text("angular.family", "uniform")
    if afam == "uniform":
        w = cfg.number("angular.halfwidth", 1.0)
        w_minus = cfg.number("angular.halfwidth_minus", w)
        w_plus = cfg.number("angular.halfwidth_plus", w)
        angular = _angular_uniform(t0, w_minus, w_plus)
    elif afam == "symmetric_power":
        angular = _angular_symmetric_power(
            t0, cfg.number("angular.tau", required=True),
            cfg.number("angular.halfwidth", 1.0),
        )
    elif afam == "asymmetric_power":
        w = cfg.number("angular.halfwidth", 1.0)
        angular = _angular_asymmetric_power(
            t0,
            cfg.number("angular.tau_minus", required=True),
            cfg.number("angular.tau_plus", required=True),
            cfg.number("angular.weight_plus", required=True),
            cfg.number("angular.halfwidth_minus", w),
            cfg.number("angular.halfwidth_plus", w),
        )
    else:
        raise UnknownFamilyError(f"angular.family: unknown family {afam!r}")

    ufam = cfg.text("shape_u.family", "power")
    if ufam == "power":
        kappa = cfg.number("shape_u.kappa", 2.0)
        shape_u = _shape_u_power(
            t0,
            cfg.number("shape_u.kappa_minus", kappa),
            cfg.number("shape_u.kappa_plus", kappa),
            cfg.number("shape_u.scale", 1.0),
        )
    elif ufam == "cosine":
        shape_u = _shape_u_cosine(t0)
    else:
        raise UnknownFamilyError(f"shape_u.family: unknown family {ufam!r}")

    vfam = cfg.text("shape_v.family")
    if vfam is None:
        shape_v = None
    elif vfam == "sine":
        shape_v = _shape_v_sine(t0, shape_u)
    elif vfam == "seifert_linear":
        shape_v = _shape_v_seifert(t0, cfg.number("shape_v.rho", 0.0), shape_u)
    elif vfam == "power_v":
        shape_v = _shape_v_power(
            t0,
            cfg.number("shape_v.rho", 0.0),
            cfg.number("shape_v.delta", required=True),
            cfg.number("shape_v.coeff", 1.0),
            shape_u,
        )
    elif vfam == "theta_polynomial":
        shape_v = _shape_v_theta_polynomial(
            t0,
            cfg.number("shape_v.rho", 0.0),
            cfg.integer("shape_v.n", required=True),
            cfg.number("shape_v.deriv", required=True),
            shape_u,
        )
    else:
        raise UnknownFamilyError(f"shape_v.family: unknown family {vfam!r}")

    sided_text = cfg.text("model.sidedness")
    if sided_text is None:
        lo, _ = angular.support
        sidedness = Sidedness.TWO_SIDED if lo < t0 else Sidedness.ONE_SIDED_RIGHT
    else:
        try:
            sidedness = Sidedness(sided_text)
        except ValueError:
            raise ConfigError(
                f"model.sidedness: expected one of "
                f"{[s.value for s in Sidedness]}, got {sided_text!r}"
            ) from None

    cfg.finish()
    return PolarModel(
        radial=radial, angular=angular, shape_u=shape_u,
        shape_v=shape_v, sidedness=sidedness,
    )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationGrid:
    """Resolution and thresholds for the assumption checks.

    The checks certify "not falsified at this resolution"; the underlying
    assumptions are asymptotic statements no finite grid can prove.
    """

    points_per_decade: int = 64
    s_lo: float = 1e-4
    s_hi: float = 1e-2
    gamma_x: tuple[float, ...] = (20.0, 50.0, 100.0)
    gamma_lambdas: tuple[float, ...] = (-1.0, 0.0, 1.0, 2.0)
    eps_values: tuple[float, ...] = (0.05, 0.1, 0.5)
    support_points: int = 2001
    density_tol: float = 1e-8
    slope_tol: float = 0.05
    gamma_tol: float = 0.05
    exact_tol: float = 1e-12

    def __post_init__(self):
        if self.points_per_decade < 64:
            raise ParameterError(
                f"validation grid needs >= 64 points per decade, got {self.points_per_decade}"
            )


@dataclass(frozen=True)
class CheckEntry:
    name: str
    passed: bool
    measured: float
    expected: str
    margin: float | None = None
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    entries: tuple[CheckEntry, ...]
    grid: ValidationGrid

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> tuple[CheckEntry, ...]:
        return tuple(e for e in self.entries if not e.passed)

    def entry(self, name: str) -> CheckEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)


def _slope_fit(s: np.ndarray, y: np.ndarray) -> float:
    """Least squares slope of log y against log s; y must be positive."""
    return float(np.polyfit(np.log(s), np.log(y), 1)[0])


def _s_grid(grid: ValidationGrid, s_max_allowed: float) -> np.ndarray | None:
    hi = min(grid.s_hi, s_max_allowed)
    if hi <= grid.s_lo:
        return None
    decades = math.log10(hi / grid.s_lo)
    n = max(int(round(grid.points_per_decade * decades)), 8)
    return np.geomspace(grid.s_lo, hi, n)


def validate_model(mdl: PolarModel, grid: ValidationGrid | None = None) -> ValidationReport:
    """Run every numerical assumption check and collect a report.

    Failures are report entries, never exceptions; exceptions and
    non-finite values raised by user callables are themselves recorded as
    failed entries. The report is a deterministic function of (model,
    grid).
    """
    from . import oracle

    grid = grid or ValidationGrid()
    entries: list[CheckEntry] = []

    def run(name: str, expected: str, fn):
        try:
            passed, measured, margin, detail = fn()
            if not np.isfinite(measured) and passed:
                passed, detail = False, detail + " [non-finite measurement]"
            entries.append(CheckEntry(name, bool(passed), float(measured), expected, margin, detail))
        except Exception as exc:  # noqa: BLE001 - report, never raise
            entries.append(CheckEntry(name, False, math.nan, expected, None, f"evaluation error: {exc}"))

    lo, hi = mdl.angular.support
    t0 = mdl.angular.t0
    two_sided = mdl.sidedness == Sidedness.TWO_SIDED

    # --- radial ---
    def survival_monotone():
        xs = np.concatenate(([0.0], np.geomspace(1e-3, 200.0, 400)))
        vals = np.asarray(mdl.radial.survival(xs), dtype=float)
        worst = float(np.max(np.diff(vals)))
        return worst <= 1e-15, worst, None, "max increase of survival along the grid"

    run("radial.survival_monotone", "nonincreasing on [0, 200]", survival_monotone)

    if mdl.radial.family_tag != "custom":
        def survival_at_zero():
            v = float(np.asarray(mdl.radial.survival(np.array([0.0])))[0])
            return abs(v - 1.0) <= 1e-12, v, None, ""

        run("radial.survival_at_zero", "survival(0) = 1", survival_at_zero)

    def gamma_psi():
        per_x = []
        for x in grid.gamma_x:
            psi = float(mdl.radial.aux_psi(x))
            errs = []
            for lam in grid.gamma_lambdas:
                ls1 = float(np.asarray(mdl.radial.log_survival(np.array([x + psi * lam])))[0])
                ls0 = float(np.asarray(mdl.radial.log_survival(np.array([x])))[0])
                errs.append(abs(math.exp(ls1 - ls0) - math.exp(-lam)))
            per_x.append(max(errs))
        worst_last = per_x[-1]
        detail = "max ratio errors per x: " + ", ".join(f"{e:.3g}" for e in per_x)
        return worst_last <= grid.gamma_tol, worst_last, grid.gamma_tol - worst_last, detail

    run("radial.gamma_psi_ratio", f"ratio error <= {grid.gamma_tol} at x={grid.gamma_x[-1]:g}", gamma_psi)

    def psi_sublinear():
        xs = np.geomspace(1.0, 200.0, 200)
        ratios = np.array([mdl.radial.aux_psi(float(x)) / x for x in xs])
        worst = float(np.max(np.diff(ratios)))
        ok = worst <= 1e-15 and ratios[-1] < ratios[0]
        return ok, float(ratios[-1]), None, f"psi(x)/x falls from {ratios[0]:.3g} to {ratios[-1]:.3g}"

    run("radial.psi_sublinear", "psi(x)/x decreasing toward 0", psi_sublinear)

    # --- angular ---
    def normalization():
        res = oracle.adaptive_quadrature(
            lambda t: np.asarray(mdl.angular.density(np.asarray(t)), dtype=float),
            lo, hi, rel_tol=1e-12, abs_tol=1e-14, breakpoints=(t0,),
        )
        err = abs(res.value - 1.0)
        return err <= grid.density_tol, res.value, grid.density_tol - err, ""

    run("angular.normalization", f"|integral - 1| <= {grid.density_tol}", normalization)

    def tau_slope(side: int, declared: float):
        def check():
            s = _s_grid(grid, (hi - t0) if side > 0 else (t0 - lo))
            if s is None:
                return False, math.nan, None, "support too narrow for the slope grid"
            y = np.asarray(mdl.angular.g_tilde(side * s), dtype=float)
            if np.any(y <= 0) or not np.all(np.isfinite(y)):
                return False, math.nan, None, "g_tilde not positive on the slope grid"
            slope = _slope_fit(s, y)
            err = abs(slope - declared)
            return err <= grid.slope_tol, slope, grid.slope_tol - err, f"declared {declared}"
        return check

    run("angular.tau_slope_plus", "log-log slope matches tau_plus", tau_slope(+1, mdl.angular.tau_plus))
    if two_sided:
        run("angular.tau_slope_minus", "log-log slope matches tau_minus", tau_slope(-1, mdl.angular.tau_minus))

    # --- shape u ---
    support_ts = np.linspace(lo, hi, grid.support_points)

    def center_value():
        v = float(np.asarray(mdl.shape_u.u(np.array([t0])))[0])
        err = abs(v - 1.0)
        return err <= grid.exact_tol, v, grid.exact_tol - err, ""

    run("shape_u.center_value", "u(t0) = 1 within 1e-12", center_value)

    def bounded():
        vals = np.abs(np.asarray(mdl.shape_u.u(support_ts), dtype=float))
        worst = float(np.max(vals))
        return worst <= 1.0 + 1e-12, worst, 1.0 - worst, "max |u| on the support grid"

    run("shape_u.bounded_by_one", "|u| <= 1 on the support", bounded)

    u_vals = np.asarray(mdl.shape_u.u(support_ts), dtype=float)
    for eps in grid.eps_values:
        def sup_outside(eps=eps):
            outside = np.abs(support_ts - t0) > eps
            if not np.any(outside):
                return True, -math.inf, None, f"no support points with |t - t0| > {eps}"
            sup = float(np.max(u_vals[outside]))
            return sup < 1.0, sup, 1.0 - sup, f"sup of u outside eps={eps}"

        run(f"shape_u.sup_outside_eps_{eps:g}", "sup u < 1 strictly", sup_outside)

    def u_tilde_checks(side: int, declared: float):
        def check():
            s = _s_grid(grid, (hi - t0) if side > 0 else (t0 - lo))
            if s is None:
                return False, math.nan, None, "support too narrow for the slope grid"
            y = np.asarray(mdl.shape_u.u_tilde(side * s), dtype=float)
            if np.any(y <= 0) or not np.all(np.isfinite(y)):
                return False, math.nan, None, "u_tilde not positive on the slope grid"
            slope = _slope_fit(s, y)
            err = abs(slope - declared)
            return err <= grid.slope_tol, slope, grid.slope_tol - err, f"declared {declared}"
        return check

    run("shape_u.kappa_slope_plus", "u_tilde > 0 and slope matches kappa_plus",
        u_tilde_checks(+1, mdl.shape_u.kappa_plus))
    if two_sided:
        run("shape_u.kappa_slope_minus", "u_tilde > 0 and slope matches kappa_minus",
            u_tilde_checks(-1, mdl.shape_u.kappa_minus))

    # --- shape v ---
    if mdl.shape_v is not None:
        sv = mdl.shape_v

        def rho_value():
            v = float(np.asarray(sv.v(np.array([t0])))[0])
            err = abs(v - sv.rho)
            return err <= grid.exact_tol, v, grid.exact_tol - err, f"declared rho {sv.rho}"

        run("shape_v.center_value", "v(t0) = rho within 1e-12", rho_value)

        def v_sign_check():
            s = _s_grid(grid, hi - t0)
            if s is None:
                return False, math.nan, None, "support too narrow for the sign grid"
            y = np.asarray(sv.v_tilde(s), dtype=float)
            want = 1.0 if sv.v_sign == "+" else -1.0
            ok = bool(np.all(np.sign(y) == want))
            frac = float(np.mean(np.sign(y) == want))
            return ok, frac, None, f"fraction of grid with sign {sv.v_sign}"

        run("shape_v.sign", "sign of v_tilde equals v_sign on (0, 1e-2]", v_sign_check)

        def delta_slope():
            s = _s_grid(grid, hi - t0)
            if s is None:
                return False, math.nan, None, "support too narrow for the slope grid"
            y = np.abs(np.asarray(sv.v_tilde(s), dtype=float))
            if np.any(y == 0) or not np.all(np.isfinite(y)):
                return False, math.nan, None, "v_tilde vanishes on the slope grid"
            slope = _slope_fit(s, y)
            err = abs(slope - sv.delta)
            return err <= grid.slope_tol, slope, grid.slope_tol - err, f"declared {sv.delta}"

        run("shape_v.delta_slope", "log-log slope of |v_tilde| matches delta", delta_slope)

    # --- joint finiteness of the callables ---
    def finite_callables():
        vals = [np.asarray(mdl.angular.density(support_ts), dtype=float),
                np.asarray(mdl.shape_u.u(support_ts), dtype=float)]
        if mdl.shape_v is not None:
            vals.append(np.asarray(mdl.shape_v.v(support_ts), dtype=float))
        bad = sum(int(np.sum(~np.isfinite(v))) for v in vals)
        return bad == 0, float(bad), None, "count of non-finite evaluations on the support grid"

    run("callables.finite", "g, u, v finite on the support", finite_callables)

    return ValidationReport(entries=tuple(entries), grid=grid)
