"""Command line front end.

Commands read a flat key=value model config, run one computation, and
emit CSV with a '#'-prefixed metadata block (command, config hash, seed,
version, plus the effective config). Numbers are printed with 17
significant digits so doubles round-trip. Exit codes: 0 success (verify:
all thresholds pass), 1 threshold failure, 2 usage or config error,
3 numeric failure (bracket, monotonicity, convergence, budget).

Seeds are mandatory for every stochastic command; there is no ambient
entropy anywhere, so rerunning a command line reproduces its output byte
for byte, regardless of --workers.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys

import numpy as np

from . import __version__
from . import asymptotics as _asymptotics
from . import limitlaw as _limitlaw
from . import model as _model
from . import montecarlo as _montecarlo
from . import oracle as _oracle
from . import stats as _stats
from .errors import (
    BracketError,
    BudgetExceeded,
    CaseMismatch,
    ConfigError,
    MonotonicityError,
    NonConvergence,
    ParameterError,
)

_NUMERIC_ERRORS = (BracketError, MonotonicityError, NonConvergence, BudgetExceeded)
_USAGE_ERRORS = (ConfigError, ParameterError, CaseMismatch)


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _config_hash(config: dict) -> str:
    lines = "\n".join(sorted(f"{k}={v}" for k, v in config.items()))
    return hashlib.sha256(lines.encode("utf-8")).hexdigest()[:16]


def _emit(args, command: str, config: dict, meta: dict, columns, rows):
    buf = io.StringIO()
    buf.write(f"# command = {command}\n")
    buf.write(f"# version = {__version__}\n")
    buf.write(f"# config_hash = {_config_hash(config)}\n")
    for key, value in meta.items():
        buf.write(f"# {key} = {value}\n")
    for key in sorted(config):
        buf.write(f"# config.{key} = {config[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_config(args) -> dict:
    if not args.config:
        raise ConfigError("--config is required for this command")
    return _model.load_config(args.config)


def _build_model(config) -> _model.PolarModel:
    return _model.build_builtin_model(config)


def _require_seed(args) -> int:
    if args.seed is None:
        raise ConfigError("--seed is required for stochastic commands")
    return args.seed


def _x_values(args) -> list[float]:
    if args.x is not None and args.x_grid:
        raise ConfigError("give either --x or --x-grid, not both")
    if args.x is not None:
        return [args.x]
    if args.x_grid:
        try:
            return [float(v) for v in args.x_grid.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--x-grid: expected comma-separated numbers, got {args.x_grid!r}") from None
    raise ConfigError("--x or --x-grid is required")


def _condition(args) -> _model.Condition:
    return _model.Condition.RIGHT_SIDED if args.condition == "right" else _model.Condition.UNRESTRICTED


def _case_from_model(mdl: _model.PolarModel, kind_name: str) -> _limitlaw.CorollaryCase:
    try:
        kind = _limitlaw.CorollaryKind(kind_name)
    except ValueError:
        raise ConfigError(
            f"--case: unknown case {kind_name!r}; expected one of "
            f"{[k.value for k in _limitlaw.CorollaryKind]}"
        ) from None
    sv = mdl.shape_v
    if sv is None:
        raise ParameterError("--case needs a model with a shape_v section")
    kw = {}
    if kind in (_limitlaw.CorollaryKind.FS, _limitlaw.CorollaryKind.RATIO_C):
        kw["delta"] = sv.delta
    if kind == _limitlaw.CorollaryKind.RATIO_C:
        if sv.ratio_c is None:
            raise ParameterError("--case ratio_c: the model has no finite deficit ratio")
        kw["ratio_c"] = sv.ratio_c
    if kind == _limitlaw.CorollaryKind.THETA_N:
        if sv.theta_n is None or sv.theta_n_deriv_at_t0 is None:
            raise ParameterError("--case theta_n: the model has no theta factorization data")
        kw["n"] = sv.theta_n
        kw["theta_deriv"] = sv.theta_n_deriv_at_t0
    return _limitlaw.CorollaryCase(kind=kind, kappa=mdl.shape_u.kappa_plus, rho=sv.rho, **kw)


def _two_sided_law(mdl: _model.PolarModel, scaling=_limitlaw.Scaling.PER_SIGN):
    p_m, p_p, q_m, q_p, _ = _asymptotics.mixture_limits(mdl)
    return _limitlaw.LimitLawTwoSided(
        kappa_minus=mdl.shape_u.kappa_minus, kappa_plus=mdl.shape_u.kappa_plus,
        tau_minus=mdl.angular.tau_minus, tau_plus=mdl.angular.tau_plus,
        p_minus=p_m, p_plus=p_p, q_minus=q_m, q_plus=q_p, scaling=scaling,
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    config = _load_config(args)
    mdl = _build_model(config)
    report = _model.validate_model(mdl)
    rows = [
        (e.name, "pass" if e.passed else "fail", e.measured, e.expected,
         "" if e.margin is None else _fmt(e.margin), e.detail)
        for e in report.entries
    ]
    _emit(args, "validate", config, {}, ("check", "status", "measured", "expected", "margin", "detail"), rows)
    for e in report.entries:
        print(f"{'PASS' if e.passed else 'FAIL'} {e.name} measured={_fmt(e.measured)}", file=sys.stderr)
    return 0 if report.passed else 1


def _cmd_phi(args) -> int:
    config = _load_config(args)
    mdl = _build_model(config)
    rows = []
    for x in _x_values(args):
        psi = float(mdl.radial.aux_psi(x))
        sides = ["+"] if mdl.sidedness == _model.Sidedness.ONE_SIDED_RIGHT else ["-", "+"]
        for side in sides:
            root = _asymptotics.compute_phi(mdl, x, side)
            rows.append((x, side, root.phi, root.residual, psi, psi / x))
    _emit(args, "phi", config, {}, ("x", "side", "phi", "residual", "psi", "psi_over_x"), rows)
    return 0


def _cmd_tailprob(args) -> int:
    config = _load_config(args)
    mdl = _build_model(config)
    cond = _condition(args)
    xs = _x_values(args)
    meta = {"condition": args.condition, "method": args.method}
    if args.method == "quad":
        rows = [(x, _oracle.tail_probability_quadrature(mdl, x, cond).value) for x in xs]
        _emit(args, "tailprob", config, meta, ("x", "value"), rows)
    elif args.method == "asym":
        rows = [(x, _asymptotics.tail_asymptotic(mdl, x, cond)) for x in xs]
        _emit(args, "tailprob", config, meta, ("x", "value"), rows)
    else:
        seed = _require_seed(args)
        n = args.n or 10 ** 6
        meta["seed"] = seed
        meta["n_proposals"] = n
        rows = []
        for i, x in enumerate(xs):
            est, se = _montecarlo.estimate_tail_probability(
                mdl, x, n, cond, (seed, i), workers=args.workers,
            )
            rows.append((x, est, se))
        _emit(args, "tailprob", config, meta, ("x", "value", "std_error"), rows)
    return 0


def _cmd_simulate(args) -> int:
    config = _load_config(args)
    mdl = _build_model(config)
    cond = _condition(args)
    seed = _require_seed(args)
    if args.x is None:
        raise ConfigError("--x is required for simulate")
    n = args.n or 10 ** 4
    scale = "phi_plus" if cond == _model.Condition.RIGHT_SIDED else "phi_sign"
    sample = _montecarlo.sample_conditional(
        mdl, args.x, n, cond, seed, scale=scale, workers=args.workers,
    )
    phi_used = sample.scale_value
    phi_text = (",".join(_fmt(v) for v in phi_used)
                if isinstance(phi_used, tuple) else _fmt(phi_used))
    meta = {
        "x": _fmt(sample.x),
        "psi": _fmt(sample.normalizers.psi_x),
        "phi_used": phi_text,
        "scale_kind": sample.scale_kind,
        "condition": args.condition,
        "seed": seed,
        "acceptance_rate": _fmt(sample.acceptance.acceptance_rate),
    }
    rows = zip(sample.r, sample.t, sample.r_norm, sample.t_norm)
    _emit(args, "simulate", config, meta, ("R", "T", "r_norm", "t_norm"), rows)
    return 0


def _cmd_limit_sample(args) -> int:
    config = _load_config(args)
    mdl = _build_model(config)
    cond = _condition(args)
    seed = _require_seed(args)
    n = args.n or 10 ** 4
    meta = {"condition": args.condition, "seed": seed}
    if args.case:
        case = _case_from_model(mdl, args.case)
        law = _limitlaw.LimitLawOneSided(mdl.shape_u.kappa_plus, mdl.angular.tau_plus)
        r, t = _limitlaw.sample_one_sided(law, n, seed)
        x1, x2 = _limitlaw.pushforward_corollary(case, r, t)
        meta["case"] = case.kind.value
        _emit(args, "limit-sample", config, meta, ("x1", "x2"), zip(x1, x2))
        return 0
    if cond == _model.Condition.UNRESTRICTED and mdl.sidedness == _model.Sidedness.TWO_SIDED:
        law = _two_sided_law(mdl)
        r, t = _limitlaw.sample_two_sided(law, n, seed)
    else:
        law = _limitlaw.LimitLawOneSided(mdl.shape_u.kappa_plus, mdl.angular.tau_plus)
        r, t = _limitlaw.sample_one_sided(law, n, seed)
    _emit(args, "limit-sample", config, meta, ("r", "t"), zip(r, t))
    return 0


def _cmd_density(args) -> int:
    config = _load_config(args)
    mdl = _build_model(config)
    cond = _condition(args)
    points = args.n or 64
    if points < 2:
        raise ConfigError(f"--n must be >= 2 grid points, got {points}")
    r_hi = -float(np.log(1e-6))
    rs = np.linspace(0.0, r_hi, points)
    meta = {"condition": args.condition}
    if cond == _model.Condition.UNRESTRICTED and mdl.sidedness == _model.Sidedness.TWO_SIDED:
        law = _two_sided_law(mdl)
        t_lo = -(r_hi ** (1.0 / law.kappa_minus))
        t_hi = r_hi ** (1.0 / law.kappa_plus)
        ts = np.linspace(t_lo, t_hi, points)
        dens = lambda r, t: _limitlaw.density_two_sided(law, r, t)
    else:
        law = _limitlaw.LimitLawOneSided(mdl.shape_u.kappa_plus, mdl.angular.tau_plus)
        ts = np.linspace(0.0, r_hi ** (1.0 / law.kappa), points)
        dens = lambda r, t: _limitlaw.density_one_sided(law, r, t)
    rows = []
    for r in rs:
        vals = np.asarray(dens(np.full_like(ts, r), ts), dtype=float)
        rows.extend((float(r), float(t), float(v)) for t, v in zip(ts, vals))
    _emit(args, "density", config, meta, ("r", "t", "density"), rows)
    return 0


def _cmd_verify(args) -> int:
    config = _load_config(args)
    mdl = _build_model(config)
    cond = _condition(args)
    seed = _require_seed(args)
    n = args.n or 5 * 10 ** 4
    xs = _x_values(args) if (args.x is not None or args.x_grid) else [10.0, 25.0, 50.0, 100.0]

    validation = _model.validate_model(mdl)
    report = _stats.convergence_report(mdl, xs, n, seed, cond, workers=args.workers)
    rows = [
        (row.x, row.n, row.ks_r, row.ks_t, row.chi2_p, row.acceptance_rate, row.tail_ratio)
        for row in report.rows
    ]
    meta = {"condition": args.condition, "seed": seed, "n": n}
    _emit(args, "verify", config, meta,
          ("x", "n", "ks_r", "ks_t", "chi2_p", "acceptance_rate", "tail_ratio"), rows)

    last = report.rows[-1]
    checks = [
        ("model validation", validation.passed),
        (f"final ks_r {last.ks_r:.4f} <= {args.ks_tol}", last.ks_r <= args.ks_tol),
        (f"final ks_t {last.ks_t:.4f} <= {args.ks_tol}", last.ks_t <= args.ks_tol),
        (f"final |tail_ratio - 1| {abs(last.tail_ratio - 1):.4f} <= {args.ratio_tol}",
         abs(last.tail_ratio - 1.0) <= args.ratio_tol),
        ("ks_r trend decreasing", report.ks_r_decreasing),
        ("ks_t trend decreasing", report.ks_t_decreasing),
        ("tail ratio approaches 1", report.ratio_approaches_one),
    ]
    all_pass = True
    for label, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {label}", file=sys.stderr)
        all_pass &= ok
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polartail",
        description="Conditional extremes of polar random vectors: "
                    "windows, limit laws, simulation, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seed=False, x=False, n=False, workers=False,
               condition=False, method=False, case=False):
        p.add_argument("--config", help="flat key=value model configuration file")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        if seed:
            p.add_argument("--seed", type=int, help="integer seed (mandatory when sampling)")
        if x:
            p.add_argument("--x", type=float, help="single threshold")
            p.add_argument("--x-grid", help="comma-separated thresholds")
        if n:
            p.add_argument("--n", type=int, help="sample size / proposal count / grid points")
        if workers:
            p.add_argument("--workers", type=int, default=1, help="worker threads (results identical)")
        if condition:
            p.add_argument("--condition", choices=("right", "unrestricted"), default="right")
        if method:
            p.add_argument("--method", choices=("quad", "asym", "mc"), default="quad")
        if case:
            p.add_argument("--case", help="bivariate pushforward case name")
        return p

    common(sub.add_parser("validate", help="run the model assumption checks"))
    common(sub.add_parser("phi", help="angular windows and residuals"), x=True)
    common(sub.add_parser("tailprob", help="tail probability by quad, asym, or mc"),
           seed=True, x=True, n=True, workers=True, condition=True, method=True)
    common(sub.add_parser("simulate", help="conditional sample given the exceedance"),
           seed=True, x=True, n=True, workers=True, condition=True)
    common(sub.add_parser("limit-sample", help="exact draws from the limit law"),
           seed=True, n=True, condition=True, case=True)
    common(sub.add_parser("density", help="limit density on a grid"),
           n=True, condition=True)
    p_verify = common(sub.add_parser("verify", help="convergence report with pass/fail"),
                      seed=True, x=True, n=True, workers=True, condition=True)
    p_verify.add_argument("--ks-tol", type=float, default=0.03)
    p_verify.add_argument("--ratio-tol", type=float, default=0.05)
    return parser


_COMMANDS = {
    "validate": _cmd_validate,
    "phi": _cmd_phi,
    "tailprob": _cmd_tailprob,
    "simulate": _cmd_simulate,
    "limit-sample": _cmd_limit_sample,
    "density": _cmd_density,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except _NUMERIC_ERRORS as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
