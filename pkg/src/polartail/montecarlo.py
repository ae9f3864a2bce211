"""Exact sampling of the conditional law of (R, T) given an exceedance.

The event {X > x} with X = R u(T) is rare but sits inside {R > x}: since
|u| <= 1 and R >= 0, an exceedance of X forces one of R. Proposals are
therefore drawn from the exact radial tail law given R > x (by quantile
inversion, no approximation) times the unconditional angular law, and a
proposal is kept iff R u(T) > x (and T > t0 under right-sided
conditioning). Accepted pairs follow the exact conditional law, and the
acceptance rate against these proposals is P{X > x | R > x}, which decays
only like the angular window phi(x) rather than like the radial tail, so
desk-scale runs stay feasible at large x.

Determinism contract: draws are generated in batches, and batch i of a
run with seed s uses the stream SeedSequence(key(s) + (i,)). The output
is a pure function of (model, x, n_target, condition, seed, batch_size):
batches are consumed in index order until enough pairs accumulate, so
worker count and scheduling cannot change the result, only the wall time.
The batch size takes part in the stream assignment, so changing it
changes the draws (but not their law).
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import asymptotics as _asymptotics
from . import model as _model
from ._seeding import batch_generator, seed_key
from .errors import BudgetExceeded, CaseMismatch, ParameterError
from .limitlaw import CorollaryCase, CorollaryKind

__all__ = [
    "AcceptanceStats",
    "ConditionalSample",
    "sample_conditional",
    "estimate_tail_probability",
    "empirical_sign_freq",
    "bivariate_normalized",
]

_DEFAULT_BATCH = 65536
_DEFAULT_BUDGET = 10 ** 9


@dataclass(frozen=True)
class AcceptanceStats:
    """Bookkeeping of the proposal loop.

    ``radial_tail_prob`` is P{R > x}, the factor that converts the
    acceptance rate into the tail probability estimate.
    """

    proposals: int
    accepted: int
    acceptance_rate: float
    radial_tail_prob: float

    def __post_init__(self):
        if self.accepted > self.proposals:
            raise ParameterError(
                f"accepted ({self.accepted}) cannot exceed proposals ({self.proposals})"
            )


@dataclass(frozen=True, eq=False)
class ConditionalSample:
    """Accepted pairs plus their normalized coordinates.

    ``r``/``t`` hold exactly n raw pairs, each satisfying the conditioning
    predicate; ``r_norm`` = (r - x)/psi(x) is strictly positive because
    R > x on the event. ``t_norm`` = (t - t0)/scale with the scale choice
    recorded in ``scale_kind`` ("phi_plus", "phi_sign", or "phi_star") and
    its value(s) in ``scale_value``. ``acceptance`` counts whole consumed
    batches, including the tail of the last batch beyond n.
    """

    x: float
    condition: _model.Condition
    scale_kind: str
    scale_value: float | tuple[float, float]
    r: np.ndarray
    t: np.ndarray
    r_norm: np.ndarray
    t_norm: np.ndarray
    normalizers: _asymptotics.Normalizers
    acceptance: AcceptanceStats
    seed: tuple[int, ...]
    batch_size: int

    @property
    def n(self) -> int:
        return self.r.size


def _run_batch(mdl, x, condition, key, batch_index, m):
    """One proposal batch; returns the accepted (r, t) pairs."""
    rng = batch_generator(key, batch_index)
    u1 = rng.random(m)
    r = np.asarray(mdl.radial.tail_quantile(u1, x), dtype=float)
    t = np.asarray(mdl.angular.sample(rng, m), dtype=float)
    keep = r * np.asarray(mdl.shape_u.u(t), dtype=float) > x
    if condition == _model.Condition.RIGHT_SIDED:
        keep &= t > mdl.t0
    return r[keep], t[keep]


def _consume_batches(mdl, x, condition, key, batch_sizes, workers, stop_at=None, budget=None):
    """Run batches in index order; returns (r_parts, t_parts, proposals, accepted).

    ``batch_sizes`` is an iterable of per-batch proposal counts (possibly
    unbounded). Consumption stops after the batch that reaches ``stop_at``
    accepted pairs, or when ``batch_sizes`` is exhausted. Results are
    consumed strictly in batch order, so worker count cannot affect them.
    """
    sizes = iter(enumerate(batch_sizes))
    r_parts, t_parts = [], []
    proposals = 0
    accepted = 0

    def check_budget(m):
        if budget is not None and proposals + m > budget:
            raise BudgetExceeded(
                f"proposal budget {budget} would be exceeded at x = {x:g}: "
                f"{accepted} accepted of target {stop_at} after {proposals} proposals"
            )

    def absorb(m, rb, tb):
        nonlocal proposals, accepted
        proposals += m
        accepted += rb.size
        r_parts.append(rb)
        t_parts.append(tb)

    if workers <= 1:
        for i, m in sizes:
            check_budget(m)
            absorb(m, *_run_batch(mdl, x, condition, key, i, m))
            if stop_at is not None and accepted >= stop_at:
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pending = deque()
            exhausted = False
            while True:
                while not exhausted and len(pending) < workers:
                    nxt = next(sizes, None)
                    if nxt is None:
                        exhausted = True
                        break
                    i, m = nxt
                    pending.append((m, pool.submit(_run_batch, mdl, x, condition, key, i, m)))
                if not pending:
                    break
                m, fut = pending.popleft()
                try:
                    check_budget(m)
                except BudgetExceeded:
                    for _, f in pending:
                        f.cancel()
                    raise
                absorb(m, *fut.result())
                if stop_at is not None and accepted >= stop_at:
                    for _, f in pending:
                        f.cancel()
                    break
    return r_parts, t_parts, proposals, accepted


def _endless_batches(batch_size):
    while True:
        yield batch_size


def sample_conditional(
    mdl: _model.PolarModel,
    x: float,
    n_target: int,
    condition: _model.Condition = _model.Condition.RIGHT_SIDED,
    seed=None,
    *,
    scale: str = "phi_plus",
    batch_size: int = _DEFAULT_BATCH,
    max_proposals: int = _DEFAULT_BUDGET,
    workers: int = 1,
) -> ConditionalSample:
    """Draw exactly n_target pairs from (R, T) given the conditioning event.

    Raises BudgetExceeded when ``max_proposals`` proposals would not be
    enough, which signals a misconfigured (too small or infeasible) x
    rather than a tight budget: the default cap is 1e9. Window errors
    from ``compute_normalizers`` propagate before any sampling happens.
    """
    if n_target < 1:
        raise ParameterError(f"n_target must be >= 1, got {n_target}")
    if batch_size < 1:
        raise ParameterError(f"batch_size must be >= 1, got {batch_size}")
    if scale not in ("phi_plus", "phi_sign", "phi_star"):
        raise ParameterError(
            f"scale must be one of phi_plus, phi_sign, phi_star; got {scale!r}"
        )
    key = seed_key(seed)
    norm = _asymptotics.compute_normalizers(mdl, x)

    r_parts, t_parts, proposals, accepted = _consume_batches(
        mdl, x, condition, key, _endless_batches(batch_size), workers,
        stop_at=n_target, budget=max_proposals,
    )
    r = np.concatenate(r_parts)[:n_target]
    t = np.concatenate(t_parts)[:n_target]

    t0 = mdl.t0
    if scale == "phi_plus":
        scale_value: float | tuple[float, float] = norm.phi_plus
        t_norm = (t - t0) / norm.phi_plus
    elif scale == "phi_star":
        scale_value = norm.phi_star
        t_norm = (t - t0) / norm.phi_star
    else:
        phi_minus = norm.phi_minus if norm.phi_minus is not None else norm.phi_plus
        scale_value = (phi_minus, norm.phi_plus)
        t_norm = (t - t0) / np.where(t >= t0, norm.phi_plus, phi_minus)

    stats = AcceptanceStats(
        proposals=proposals,
        accepted=accepted,
        acceptance_rate=accepted / proposals,
        radial_tail_prob=float(np.asarray(mdl.radial.survival(np.array([x])))[0]),
    )
    return ConditionalSample(
        x=x, condition=condition, scale_kind=scale, scale_value=scale_value,
        r=r, t=t, r_norm=(r - x) / norm.psi_x, t_norm=t_norm,
        normalizers=norm, acceptance=stats, seed=key, batch_size=batch_size,
    )


def estimate_tail_probability(
    mdl: _model.PolarModel,
    x: float,
    n_proposals: int,
    condition: _model.Condition = _model.Condition.RIGHT_SIDED,
    seed=None,
    *,
    batch_size: int = _DEFAULT_BATCH,
    workers: int = 1,
) -> tuple[float, float]:
    """Unbiased estimate of P{X > x (and T > t0)} with a standard error.

    Runs exactly n_proposals proposals and returns
    (survival(x) * acceptance_rate, survival(x) * binomial standard
    error). Unbiasedness rests on {X > x} being a subset of {R > x}.
    """
    if n_proposals < 1:
        raise ParameterError(f"n_proposals must be >= 1, got {n_proposals}")
    if batch_size < 1:
        raise ParameterError(f"batch_size must be >= 1, got {batch_size}")
    key = seed_key(seed)
    full, rem = divmod(n_proposals, batch_size)
    sizes = [batch_size] * full + ([rem] if rem else [])
    _, _, proposals, accepted = _consume_batches(
        mdl, x, condition, key, sizes, workers,
    )
    rate = accepted / proposals
    hbar = float(np.asarray(mdl.radial.survival(np.array([x])))[0])
    se = hbar * float(np.sqrt(rate * (1.0 - rate) / proposals))
    return hbar * rate, se


def empirical_sign_freq(
    mdl: _model.PolarModel,
    x: float,
    n: int,
    seed=None,
    *,
    batch_size: int = _DEFAULT_BATCH,
    max_proposals: int = _DEFAULT_BUDGET,
    workers: int = 1,
) -> tuple[float, float]:
    """Sign frequencies (freq_minus, freq_plus) of T - t0 given {X > x}.

    Draws n accepted pairs under unrestricted conditioning; pairs with
    T exactly at t0 count as plus. Needs a two-sided model.
    """
    if mdl.sidedness != _model.Sidedness.TWO_SIDED:
        raise ParameterError("empirical_sign_freq needs a two-sided model")
    sample = sample_conditional(
        mdl, x, n, _model.Condition.UNRESTRICTED, seed,
        scale="phi_sign", batch_size=batch_size,
        max_proposals=max_proposals, workers=workers,
    )
    freq_plus = float(np.mean(sample.t >= mdl.t0))
    return 1.0 - freq_plus, freq_plus


# ---------------------------------------------------------------------------
# Bivariate (X, Y) normalization
# ---------------------------------------------------------------------------

_CASE_GRID = (1e-4, 1e-2, 128)


def _case_grid() -> np.ndarray:
    lo, hi, n = _CASE_GRID
    return np.geomspace(lo, hi, n)


def _match_exact(name: str, case_value, model_value):
    if model_value is None:
        return
    if case_value is None or abs(case_value - model_value) > 1e-12:
        raise CaseMismatch(
            f"case {name} = {case_value} disagrees with the model's {name} = {model_value}"
        )


def _check_case_condition(mdl: _model.PolarModel, case: CorollaryCase):
    """Numerically test that the model sits in the case's regime."""
    sv = mdl.shape_v
    su = mdl.shape_u
    _match_exact("kappa", case.kappa, su.kappa_plus)
    _match_exact("rho", case.rho, sv.rho)

    s = _case_grid()
    ut = np.asarray(su.u_tilde(s), dtype=float)
    vt = np.asarray(sv.v_tilde(s), dtype=float)
    if np.any(vt == 0):
        raise CaseMismatch("v_tilde vanishes on the case-check grid")
    kind = case.kind

    if kind == CorollaryKind.FS:
        _match_exact("delta", case.delta, sv.delta)
        if case.rho != 0.0:
            vals = np.abs(case.rho * ut / vt)
            if vals[0] > 0.05 or vals[0] > vals[-1] + 1e-12:
                raise CaseMismatch(
                    f"rho*u_tilde/v_tilde is {vals[0]:.3g} at s=1e-4 and not vanishing; "
                    "the v-deficit regime needs it to tend to 0"
                )
    elif kind == CorollaryKind.DELTA_GT_KAPPA:
        vals = np.abs(ut / vt)
        if vals[0] < 20.0 or vals[0] + 1e-12 < vals[-1]:
            raise CaseMismatch(
                f"|u_tilde/v_tilde| is {vals[0]:.3g} at s=1e-4 and not diverging; "
                "the radial-dominant regime needs it to blow up"
            )
    elif kind == CorollaryKind.RATIO_C:
        _match_exact("delta", case.delta, sv.delta)
        vals = ut / vt
        c = case.ratio_c
        if c == 0.0:
            if abs(vals[0]) > 0.05:
                raise CaseMismatch(
                    f"u_tilde/v_tilde is {vals[0]:.3g} at s=1e-4, not near C = 0"
                )
        elif abs(vals[0] - c) > 0.10 * abs(c):
            raise CaseMismatch(
                f"u_tilde/v_tilde is {vals[0]:.3g} at s=1e-4, "
                f"more than 10% away from C = {c:g}"
            )
    elif kind == CorollaryKind.SEIFERT:
        lo, hi = mdl.angular.support
        ts = np.linspace(lo, hi, 512)
        lhs = np.asarray(sv.v(ts), dtype=float)
        rhs = (ts - mdl.t0 + case.rho) * np.asarray(su.u(ts), dtype=float)
        worst = float(np.max(np.abs(lhs - rhs)))
        if worst > 1e-10:
            raise CaseMismatch(
                f"v differs from (t - t0 + rho) u by up to {worst:.3g}; "
                "the linear-ratio case needs the exact factorization"
            )
    else:  # THETA_N
        if sv.theta_n is not None and case.n != sv.theta_n:
            raise CaseMismatch(
                f"case n = {case.n} disagrees with the model's theta_n = {sv.theta_n}"
            )
        theta_est = np.asarray(sv.v(mdl.t0 + s), dtype=float) / np.asarray(
            su.u(mdl.t0 + s), dtype=float
        )
        deriv_est = (theta_est[0] - case.rho) / s[0] ** case.n * math.factorial(case.n)
        if abs(deriv_est - case.theta_deriv) > 0.10 * abs(case.theta_deriv):
            raise CaseMismatch(
                f"estimated order-{case.n} coefficient {deriv_est:.6g} is more than "
                f"10% away from theta_deriv = {case.theta_deriv:g}"
            )


def bivariate_normalized(
    mdl: _model.PolarModel,
    case: CorollaryCase,
    sample: ConditionalSample,
) -> tuple[np.ndarray, np.ndarray]:
    """Case-normalized ((X - x)/psi, second coordinate) from raw pairs.

    The second coordinate and its scale depend on the case: the v-deficit
    and balanced regimes use (Y - rho x)/(x v_tilde(phi)), the
    radial-dominant regime (Y - rho x)/psi(x), and the ratio regimes
    ((Y/X) - rho)/phi^n. The sample must be right-sided; the model's
    membership in the case regime is checked numerically first and a
    contradiction raises CaseMismatch.
    """
    if mdl.shape_v is None:
        raise ParameterError("bivariate_normalized needs a model with shape_v")
    if sample.condition != _model.Condition.RIGHT_SIDED:
        raise ParameterError("bivariate normalization applies to right-sided samples")
    _check_case_condition(mdl, case)

    x = sample.x
    psi = sample.normalizers.psi_x
    phi = sample.normalizers.phi_plus
    u_vals = np.asarray(mdl.shape_u.u(sample.t), dtype=float)
    v_vals = np.asarray(mdl.shape_v.v(sample.t), dtype=float)
    big_x = sample.r * u_vals
    big_y = sample.r * v_vals
    first = (big_x - x) / psi

    kind = case.kind
    if kind in (CorollaryKind.FS, CorollaryKind.RATIO_C):
        vt_phi = float(np.asarray(mdl.shape_v.v_tilde(np.array([phi])))[0])
        if vt_phi == 0.0:
            raise CaseMismatch("v_tilde(phi) = 0; the v-deficit scale is degenerate")
        second = (big_y - case.rho * x) / (x * vt_phi)
    elif kind == CorollaryKind.DELTA_GT_KAPPA:
        second = (big_y - case.rho * x) / psi
    elif kind == CorollaryKind.SEIFERT:
        second = (big_y / big_x - case.rho) / phi
    else:  # THETA_N
        second = (big_y / big_x - case.rho) / phi ** case.n
    return first, second
