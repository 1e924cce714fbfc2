"""Batch command-line front end.

Subcommands
-----------
estimate   simulate replicated estimates of the stationary mean (CSV)
plan       size a median-of-sequential-runs experiment (key=value lines)
bounds     evaluate every applicable error bound for a model (CSV)
coverage   meta-replicated coverage experiment for the planner (CSV)
compare    planned-cost comparison across minorization levels (CSV)
verify     run the named invariant-check suite (report lines)

Conventions shared by all subcommands:

* Output starts with '#'-prefixed header lines carrying the package
  version, the resolved configuration, and the master seed -- everything
  needed to reproduce the bytes exactly.  No timestamps.
* A plain-text config file of ``key = value`` lines (``#`` comments) can
  supply any long option; explicit flags override the file.
* The master seed comes from ``--seed``, else the config file, else the
  ``REGEN_SEED`` environment variable, else the subcommand default.
* ``--jobs`` parallelizes over replicates only; output is ordered by
  replicate index, so bytes are identical for every jobs setting.
* Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, oracle
from .bounds import (
    clt_sample_size,
    doeblin_moments,
    doeblin_variance_bound,
    evaluate_bounds,
    klm_sample_size,
)
from .errors import RegenError
from .estimators import (
    estimate_fixed,
    estimate_reg,
    estimate_reg_seq,
    estimate_unbiased,
)
from .median_trick import A_STAR, make_plan, run_median
from .perfect import estimate_perfect, perfect_plan, perfect_samples_with_cost
from .rng import ROLE_PERFECT, ROLE_TOURS, ROLE_TRAJECTORY, stream
from .simulate import (
    DEFAULT_TOUR_CAP,
    simulate_tours,
    simulate_trajectory,
    simulate_until,
    state_values,
)
from .verify import FAULTS, TIERS, all_passed, format_report, run_checks
from .zoo import ZOO_NAMES, ZooModel, by_name

SEED_ENV = "REGEN_SEED"

ESTIMATORS = ("fixed", "reg", "unbiased", "reg-seq", "perfect")

_MODEL_OPTION_CASTS = {
    "beta": float,
    "size": int,
    "up": float,
    "v": float,
}


class ConfigError(Exception):
    """A problem with flags, the config file, or their combination."""


# ----------------------------------------------------------------------
# Config-file loading and option resolution
# ----------------------------------------------------------------------


def load_config(path: str) -> dict[str, str]:
    """Parse a ``key = value`` config file; '#' starts a comment."""
    settings: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"{path}:{lineno}: expected 'key = value', got {line!r}"
                    )
                key, value = line.split("=", 1)
                settings[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return settings


class _Resolver:
    """Option lookup with precedence: explicit flag > config file > default."""

    def __init__(self, args: argparse.Namespace, config: dict[str, str]):
        self.args = args
        self.config = config
        self.resolved: dict[str, object] = {}

    def get(self, name: str, default=None, cast=str):
        value = getattr(self.args, name, None)
        if value is None and name in self.config:
            try:
                value = cast(self.config[name])
            except (TypeError, ValueError) as exc:
                raise ConfigError(
                    f"config key {name!r}: cannot parse {self.config[name]!r} "
                    f"as {cast.__name__}"
                ) from exc
        if value is None:
            value = default
        if value is not None:
            self.resolved[name] = value
        return value

    def require(self, name: str, cast=str, hint: str = ""):
        value = self.get(name, None, cast)
        if value is None:
            extra = f" ({hint})" if hint else ""
            raise ConfigError(f"missing required option --{name.replace('_', '-')}{extra}")
        return value

    def seed(self, default: int) -> int:
        value = self.get("seed", None, int)
        if value is None:
            env = os.environ.get(SEED_ENV)
            if env is not None:
                try:
                    value = int(env)
                except ValueError as exc:
                    raise ConfigError(
                        f"environment variable {SEED_ENV}={env!r} is not an integer"
                    ) from exc
            else:
                value = default
        self.resolved["seed"] = value
        return value


def _build_model(resolver: _Resolver) -> ZooModel:
    """Construct the requested model; any failure here is a config error."""
    name = resolver.require("model", hint="one of " + ", ".join(ZOO_NAMES) + ", file:<path>")
    kwargs = {}
    for key, cast in _MODEL_OPTION_CASTS.items():
        value = resolver.get(key, None, cast)
        if value is not None:
            kwargs[key] = value
    try:
        return by_name(name, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"model {name!r} does not accept these options: {exc}") from exc
    except (RegenError, OSError) as exc:
        raise ConfigError(f"cannot build model {name!r}: {exc}") from exc


# ----------------------------------------------------------------------
# Output plumbing
# ----------------------------------------------------------------------


def _header_lines(command: str, settings: dict[str, object]) -> list[str]:
    lines = [f"# regenmc {__version__}", f"# command = {command}"]
    lines += [f"# {key} = {settings[key]}" for key in sorted(settings)]
    return lines


def _emit(out_path: str | None, text: str) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(command: str, settings: dict[str, object], columns, rows) -> str:
    buf = io.StringIO()
    for line in _header_lines(command, settings):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(value) -> object:
    """Canonical cell rendering: shortest round-trip repr for floats."""
    if isinstance(value, float):
        return repr(value)
    return value


# ----------------------------------------------------------------------
# estimate
# ----------------------------------------------------------------------


def _estimate_replicate(task):
    (
        model, fvals, estimator, n, r, m, mode, master_seed, replicate,
        backend, tour_cap,
    ) = task
    if estimator == "fixed":
        trajectory = simulate_trajectory(
            model, n, rng=stream(master_seed, replicate, ROLE_TRAJECTORY),
            backend=backend,
        )
        report = estimate_fixed(trajectory, fvals)
        return replicate, report.value, report.tours_used, n
    if estimator == "perfect":
        samples, steps = perfect_samples_with_cost(
            model, r, stream(master_seed, replicate, ROLE_PERFECT), mode=mode,
            backend=backend, tour_cap=tour_cap,
        )
        report = estimate_perfect(samples, fvals)
        return replicate, report.value, report.tours_used, steps
    rng = stream(master_seed, replicate, ROLE_TOURS)
    if estimator == "reg-seq":
        tours, _, total = simulate_until(
            model, fvals, n, mode=mode, rng=rng, backend=backend, tour_cap=tour_cap
        )
        report = estimate_reg_seq(tours, n)
        return replicate, report.value, report.tours_used, total
    tours = simulate_tours(
        model, fvals, r, mode=mode, rng=rng, backend=backend, tour_cap=tour_cap
    )
    report = estimate_reg(tours) if estimator == "reg" else estimate_unbiased(tours, m)
    return replicate, report.value, report.tours_used, tours.total_steps


def cmd_estimate(resolver: _Resolver) -> int:
    zoo_model = _build_model(resolver)
    estimator = resolver.require("estimator")
    if estimator not in ESTIMATORS:
        raise ConfigError(
            f"unknown estimator {estimator!r}; choose from {', '.join(ESTIMATORS)}"
        )
    seed = resolver.seed(0)
    mode = resolver.get("mode", "explicit")
    reps = resolver.get("reps", 1, int)
    theta = resolver.get("theta", None, float)
    jobs = resolver.get("jobs", 1, int)
    backend = resolver.get("backend", None)
    tour_cap = resolver.get("tour_cap", DEFAULT_TOUR_CAP, int)
    out_path = resolver.get("out", None)

    n = resolver.get("n", None, int)
    r = resolver.get("r", None, int)
    m = resolver.get("m", None, float)
    if estimator in ("fixed", "reg-seq") and n is None:
        raise ConfigError(f"estimator {estimator!r} needs --n (chain-step budget)")
    if estimator in ("reg", "unbiased", "perfect") and r is None:
        raise ConfigError(f"estimator {estimator!r} needs --r (tour/draw count)")
    if estimator == "unbiased" and m is None:
        if zoo_model.model.is_doeblin:
            m = 1.0 / zoo_model.model.beta
        else:
            raise ConfigError(
                "estimator 'unbiased' needs --m: it divides block sums by the "
                "exact mean tour length, which is only known a priori when the "
                "small set covers the whole state space (where m = 1/beta); "
                "pass --m or use 'reg'/'reg-seq'"
            )
    if estimator == "perfect" and not zoo_model.model.is_doeblin:
        raise ConfigError(
            "estimator 'perfect' needs a full-space small set; "
            f"model {zoo_model.name!r} regenerates only on part of the space"
        )
    if reps < 1:
        raise ConfigError(f"--reps must be >= 1, got {reps}")

    fvals = state_values(zoo_model.model, zoo_model.f)
    tasks = [
        (zoo_model.model, fvals, estimator, n, r, m, mode, seed, i, backend, tour_cap)
        for i in range(reps)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_estimate_replicate, tasks))
    else:
        results = [_estimate_replicate(t) for t in tasks]

    rows = [
        [rep, estimator, _fmt(float(value)), tours, steps, seed]
        for rep, value, tours, steps in results
    ]
    values = np.array([value for _, value, _, _ in results], dtype=float)
    total_tours = sum(tours for _, _, tours, _ in results)
    total_steps = sum(steps for _, _, _, steps in results)
    rows.append(["mean", estimator, _fmt(float(values.mean())), total_tours, total_steps, seed])
    if theta is not None:
        mse = float(np.mean((values - theta) ** 2))
        rows.append(["mse", estimator, _fmt(mse), total_tours, total_steps, seed])

    settings = dict(resolver.resolved)
    for execution_only in ("jobs", "backend", "out", "config"):
        settings.pop(execution_only, None)
    _emit(
        out_path,
        _csv_text(
            "estimate", settings,
            ["replicate", "estimator", "value", "tours", "steps", "seed"], rows,
        ),
    )
    return 0


# ----------------------------------------------------------------------
# plan
# ----------------------------------------------------------------------


def _plan_inputs(resolver: _Resolver):
    """Bound inputs from a model (oracle-exact) or from explicit flags."""
    eps = resolver.require("eps", float)
    alpha = resolver.require("alpha", float)
    a_star = resolver.get("a_star", A_STAR, float)
    model_name = resolver.get("model", None)
    if model_name is not None:
        zoo_model = _build_model(resolver)
        moments = oracle.tour_moments_exact(zoo_model.model, zoo_model.f)
        fvals = state_values(zoo_model.model, zoo_model.f)
        extras = {
            "beta": zoo_model.model.beta,
            "f_sup": float(np.abs(fvals).max()),
            "sigma_sq": (
                oracle.stationary_variance(zoo_model.model.kernel, zoo_model.f)
                if zoo_model.model.is_doeblin
                else None
            ),
        }
        return moments.sigma_as_sq, moments.C0, eps, alpha, a_star, extras
    sigma_as_sq = resolver.require(
        "sigma_as_sq", float, hint="or give --model for oracle-exact inputs"
    )
    c0 = resolver.require("c0", float, hint="or give --model for oracle-exact inputs")
    extras = {
        "beta": resolver.get("beta", None, float),
        "f_sup": resolver.get("f_sup", None, float),
        "sigma_sq": resolver.get("sigma_sq", None, float),
    }
    return sigma_as_sq, c0, eps, alpha, a_star, extras


def cmd_plan(resolver: _Resolver) -> int:
    sigma_as_sq, c0, eps, alpha, a_star, extras = _plan_inputs(resolver)
    resolver.seed(0)
    out_path = resolver.get("out", None)
    plan = make_plan(sigma_as_sq, c0, eps, alpha, a_star=a_star)

    pairs: list[tuple[str, object]] = [
        ("n", plan.n),
        ("l", plan.l),
        ("a_star", _fmt(plan.a_star)),
        ("c1", _fmt(plan.c1)),
        ("c2", _fmt(plan.c2)),
        ("sigma_as_bound", _fmt(plan.sigma_as_bound)),
        ("c0_bound", _fmt(plan.c0_bound)),
        ("expected_cost", _fmt(plan.expected_cost)),
        ("l_asymptotic", _fmt(plan.l_asymptotic)),
        ("asymptotic_cost", _fmt(plan.asymptotic_cost)),
        ("clt_n", _fmt(clt_sample_size(sigma_as_sq, eps, alpha))),
    ]
    beta, f_sup, sigma_sq = extras["beta"], extras["f_sup"], extras["sigma_sq"]
    if beta is not None and f_sup is not None:
        pairs.append(("klm_n", klm_sample_size(f_sup, beta, eps, alpha)))
    if beta is not None and sigma_sq is not None:
        pairs.append(
            ("perfect_cost", _fmt(perfect_plan(sigma_sq, beta, eps, alpha).expected_cost))
        )

    settings = dict(resolver.resolved)
    for execution_only in ("out", "config"):
        settings.pop(execution_only, None)
    lines = _header_lines("plan", settings)
    lines += [f"{key} = {value}" for key, value in pairs]
    _emit(out_path, "\n".join(lines) + "\n")
    return 0


# ----------------------------------------------------------------------
# bounds
# ----------------------------------------------------------------------


def cmd_bounds(resolver: _Resolver) -> int:
    zoo_model = _build_model(resolver)
    eps = resolver.require("eps", float)
    r = resolver.get("r", None, int)
    n = resolver.get("n", None, int)
    delta = resolver.get("delta", None, float)
    resolver.seed(0)
    out_path = resolver.get("out", None)
    if r is None and n is None:
        raise ConfigError("bounds needs --r (tour count) and/or --n (step budget)")

    moments = oracle.tour_moments_exact(zoo_model.model, zoo_model.f)
    reports = evaluate_bounds(moments, eps, r=r, n=n, delta=delta)
    rows = []
    for report in reports:
        inputs = ";".join(
            f"{key}={_fmt(value)}" for key, value in sorted(report.inputs.items())
        )
        rows.append(
            [report.name, report.kind, _fmt(report.value), _fmt(report.value_capped), inputs]
        )

    settings = dict(resolver.resolved)
    for execution_only in ("out", "config"):
        settings.pop(execution_only, None)
    settings.update(
        {
            "oracle_m": _fmt(moments.m),
            "oracle_sigma_as_sq": _fmt(moments.sigma_as_sq),
            "oracle_sigma_tau_sq": _fmt(moments.sigma_tau_sq),
            "oracle_sigma_unb_sq": _fmt(moments.sigma_unb_sq),
            "oracle_c0": _fmt(moments.C0),
        }
    )
    _emit(
        out_path,
        _csv_text(
            "bounds", settings,
            ["name", "kind", "value", "value_capped", "inputs"], rows,
        ),
    )
    return 0


# ----------------------------------------------------------------------
# coverage
# ----------------------------------------------------------------------


def _coverage_task(task):
    model, f, plan, master_seed, meta_index, mode, backend, tour_cap = task
    result = run_median(
        plan, model, f, master_seed,
        mode=mode, jobs=1, replicate_offset=meta_index * plan.l,
        backend=backend, tour_cap=tour_cap,
    )
    tours = sum(run.tours_used for run in result.runs)
    return meta_index, result.median, tours, result.total_steps


def cmd_coverage(resolver: _Resolver) -> int:
    zoo_model = _build_model(resolver)
    eps = resolver.require("eps", float)
    alpha = resolver.require("alpha", float)
    meta = resolver.get("meta", 200, int)
    a_star = resolver.get("a_star", A_STAR, float)
    seed = resolver.seed(0)
    mode = resolver.get("mode", "explicit")
    jobs = resolver.get("jobs", 1, int)
    backend = resolver.get("backend", None)
    tour_cap = resolver.get("tour_cap", DEFAULT_TOUR_CAP, int)
    out_path = resolver.get("out", None)
    if meta < 1:
        raise ConfigError(f"--meta must be >= 1, got {meta}")

    model, f = zoo_model.model, zoo_model.f
    moments = oracle.tour_moments_exact(model, f)
    pi = oracle.stationary(model.kernel)
    theta = float(pi @ state_values(model, f))
    plan = make_plan(moments.sigma_as_sq, moments.C0, eps, alpha, a_star=a_star)

    tasks = [
        (model, f, plan, seed, i, mode, backend, tour_cap) for i in range(meta)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_coverage_task, tasks))
    else:
        results = [_coverage_task(t) for t in tasks]

    rows = []
    hits = 0
    steps_list = []
    for meta_index, median, tours, steps in results:
        error = abs(median - theta)
        hit = int(error <= eps)
        hits += hit
        steps_list.append(steps)
        rows.append([meta_index, _fmt(float(median)), _fmt(float(error)), hit, tours, steps])
    coverage = hits / meta
    mean_steps = float(np.mean(steps_list))
    rows.append(["coverage", _fmt(coverage), "", "", "", ""])
    rows.append(["guaranteed_coverage", _fmt(1.0 - alpha), "", "", "", ""])
    rows.append(["mean_steps", _fmt(mean_steps), "", "", "", ""])
    rows.append(["planned_steps", _fmt(plan.expected_cost), "", "", "", ""])

    settings = dict(resolver.resolved)
    for execution_only in ("jobs", "backend", "out", "config"):
        settings.pop(execution_only, None)
    settings.update(
        {"plan_n": plan.n, "plan_l": plan.l, "theta_exact": _fmt(theta)}
    )
    _emit(
        out_path,
        _csv_text(
            "coverage", settings,
            ["meta", "median", "abs_error", "within_eps", "tours", "steps"], rows,
        ),
    )
    return 0


# ----------------------------------------------------------------------
# compare
# ----------------------------------------------------------------------


def cmd_compare(resolver: _Resolver) -> int:
    betas_raw = resolver.get("betas", "0.05,0.1,0.2,0.3")
    try:
        betas = [float(b) for b in str(betas_raw).split(",") if b.strip()]
    except ValueError as exc:
        raise ConfigError(f"--betas must be a comma-separated float list: {exc}") from exc
    if not betas or not all(0.0 < b <= 1.0 for b in betas):
        raise ConfigError("--betas values must lie in (0, 1]")
    eps = resolver.get("eps", 0.01, float)
    alpha = resolver.get("alpha", 0.01, float)
    sigma_sq = resolver.get("sigma_sq", 0.25, float)
    f_sup = resolver.get("f_sup", 1.0, float)
    a_star = resolver.get("a_star", A_STAR, float)
    resolver.seed(0)
    out_path = resolver.get("out", None)

    rows = []
    for beta in betas:
        dm = doeblin_moments(beta)
        general = make_plan(
            doeblin_variance_bound(sigma_sq, beta, reversible=False),
            dm.C0, eps, alpha, a_star=a_star,
        ).expected_cost
        reversible = make_plan(
            doeblin_variance_bound(sigma_sq, beta, reversible=True),
            dm.C0, eps, alpha, a_star=a_star,
        ).expected_cost
        klm_n = klm_sample_size(f_sup, beta, eps, alpha)
        clt_n = clt_sample_size(
            doeblin_variance_bound(sigma_sq, beta, reversible=True), eps, alpha
        )
        perfect_cost = perfect_plan(sigma_sq, beta, eps, alpha).expected_cost
        rows.append(
            [
                _fmt(beta),
                _fmt(general),
                _fmt(reversible),
                klm_n,
                _fmt(clt_n),
                _fmt(perfect_cost),
                _fmt(general / (40.0 * beta * klm_n)),
                _fmt(reversible / (20.0 * beta * klm_n)),
            ]
        )

    settings = dict(resolver.resolved)
    for execution_only in ("out", "config"):
        settings.pop(execution_only, None)
    _emit(
        out_path,
        _csv_text(
            "compare", settings,
            [
                "beta", "median_cost", "median_cost_reversible", "klm_n", "clt_n",
                "perfect_cost", "ratio_vs_40beta_klm", "ratio_vs_20beta_klm",
            ],
            rows,
        ),
    )
    return 0


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------


def cmd_verify(resolver: _Resolver) -> int:
    tier = resolver.get("tier", "quick")
    if tier not in TIERS:
        raise ConfigError(f"--tier must be one of {', '.join(TIERS)}, got {tier!r}")
    fault = resolver.get("inject_fault", None)
    if fault is not None and fault not in FAULTS:
        raise ConfigError(f"--inject-fault must be one of {', '.join(FAULTS)}")
    seed = resolver.seed(1)
    backend = resolver.get("backend", None)
    out_path = resolver.get("out", None)

    results = run_checks(tier, master_seed=seed, backend=backend, inject_fault=fault)

    settings = dict(resolver.resolved)
    for execution_only in ("backend", "out", "config"):
        settings.pop(execution_only, None)
    text = "\n".join(_header_lines("verify", settings)) + "\n"
    text += format_report(results) + "\n"
    _emit(out_path, text)
    return 0 if all_passed(results) else 1


# ----------------------------------------------------------------------
# Parser assembly and entry point
# ----------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value config file; flags override it")
    sub.add_argument("--seed", type=int, help=f"master seed (fallback: ${SEED_ENV})")
    sub.add_argument("--out", help="write output to this file instead of stdout")


def _add_model_options(sub: argparse.ArgumentParser, required: bool = True) -> None:
    sub.add_argument(
        "--model",
        help="zoo model name: " + ", ".join(ZOO_NAMES) + ", or file:<path>"
        + ("" if required else " (optional)"),
    )
    sub.add_argument("--beta", type=float, help="minorization level (two-state, drift-bd)")
    sub.add_argument("--size", type=int, help="state count (drift-bd)")
    sub.add_argument("--up", type=float, help="up-move probability (drift-bd)")
    sub.add_argument("--v", type=float, help="drift-function growth rate (drift-bd)")


def _add_execution_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--mode", choices=("explicit", "mykland"),
                     help="split-chain stepping rule (default explicit)")
    sub.add_argument("--backend", choices=("python", "compiled"),
                     help="simulation backend (default: compiled when available)")
    sub.add_argument("--jobs", type=int, help="replicate-level parallelism (default 1)")
    sub.add_argument("--tour-cap", type=int, dest="tour_cap",
                     help="abort if a single tour exceeds this many steps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regenmc",
        description="Regenerative Markov chain simulation, estimation, and "
        "nonasymptotic error certification.",
    )
    parser.add_argument("--version", action="version", version=f"regenmc {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_estimate = subparsers.add_parser(
        "estimate",
        help="replicated estimates of the stationary mean",
        description="CSV columns: replicate, estimator, value, tours, steps, seed. "
        "A 'mean' summary row follows the replicates; with --theta an 'mse' row "
        "(empirical mean squared error against theta) is appended.",
    )
    _add_common(p_estimate)
    _add_model_options(p_estimate)
    _add_execution_options(p_estimate)
    p_estimate.add_argument("--estimator", choices=ESTIMATORS, help="estimator kind")
    p_estimate.add_argument("--n", type=int, help="step budget (reg-seq) or window (fixed)")
    p_estimate.add_argument("--r", type=int, help="tour count (reg, unbiased) or draws (perfect)")
    p_estimate.add_argument("--m", type=float, help="known mean tour length (unbiased)")
    p_estimate.add_argument("--reps", type=int, help="independent replicates (default 1)")
    p_estimate.add_argument("--theta", type=float, help="true value for the mse summary row")
    p_estimate.set_defaults(handler=cmd_estimate)

    p_plan = subparsers.add_parser(
        "plan",
        help="size a median-of-sequential-runs experiment",
        description="Prints key=value lines: n, l, a_star, c1, c2, sigma_as_bound, "
        "c0_bound, expected_cost, l_asymptotic, asymptotic_cost, clt_n, and (when "
        "the inputs allow) klm_n and perfect_cost.  Inputs come from --model "
        "(oracle-exact) or from --sigma-as-sq/--c0.",
    )
    _add_common(p_plan)
    _add_model_options(p_plan, required=False)
    p_plan.add_argument("--eps", type=float, help="target absolute precision")
    p_plan.add_argument("--alpha", type=float, help="target failure probability")
    p_plan.add_argument("--a-star", type=float, dest="a_star",
                        help="per-run failure level (default 0.11969)")
    p_plan.add_argument("--sigma-as-sq", type=float, dest="sigma_as_sq",
                        help="asymptotic-variance bound (instead of --model)")
    p_plan.add_argument("--c0", type=float, help="tour-constant bound (instead of --model)")
    p_plan.add_argument("--sigma-sq", type=float, dest="sigma_sq",
                        help="stationary variance (enables perfect_cost)")
    p_plan.add_argument("--f-sup", type=float, dest="f_sup",
                        help="sup-norm of f (enables klm_n)")
    p_plan.set_defaults(handler=cmd_plan)

    p_bounds = subparsers.add_parser(
        "bounds",
        help="evaluate every applicable error bound for a model",
        description="CSV columns: name, kind, value, value_capped, inputs.  "
        "Probability-kind bounds are reported uncapped and capped at 1; the "
        "header echoes the oracle-exact tour moments used as inputs.",
    )
    _add_common(p_bounds)
    _add_model_options(p_bounds)
    p_bounds.add_argument("--eps", type=float, help="deviation level")
    p_bounds.add_argument("--r", type=int, help="tour count for fixed-tour bounds")
    p_bounds.add_argument("--n", type=int, help="step budget for sequential bounds")
    p_bounds.add_argument("--delta", type=float,
                          help="denominator-shortfall split (default: optimal)")
    p_bounds.set_defaults(handler=cmd_bounds)

    p_coverage = subparsers.add_parser(
        "coverage",
        help="meta-replicated coverage of the planned median estimator",
        description="CSV columns: meta, median, abs_error, within_eps, tours, steps; "
        "summary rows report empirical coverage, the guaranteed coverage 1-alpha, "
        "mean realized cost, and the planned cost.",
    )
    _add_common(p_coverage)
    _add_model_options(p_coverage)
    _add_execution_options(p_coverage)
    p_coverage.add_argument("--eps", type=float, help="target absolute precision")
    p_coverage.add_argument("--alpha", type=float, help="target failure probability")
    p_coverage.add_argument("--meta", type=int, help="meta-replicates (default 200)")
    p_coverage.add_argument("--a-star", type=float, dest="a_star",
                            help="per-run failure level (default 0.11969)")
    p_coverage.set_defaults(handler=cmd_coverage)

    p_compare = subparsers.add_parser(
        "compare",
        help="planned-cost comparison across minorization levels",
        description="CSV columns: beta, median_cost, median_cost_reversible, klm_n, "
        "clt_n, perfect_cost, ratio_vs_40beta_klm, ratio_vs_20beta_klm.  Costs are "
        "planned chain steps at the given precision for a full-space small set "
        "with the given stationary variance and sup-norm.",
    )
    _add_common(p_compare)
    p_compare.add_argument("--betas", help="comma-separated minorization levels "
                           "(default 0.05,0.1,0.2,0.3)")
    p_compare.add_argument("--eps", type=float, help="target precision (default 0.01)")
    p_compare.add_argument("--alpha", type=float, help="failure probability (default 0.01)")
    p_compare.add_argument("--sigma-sq", type=float, dest="sigma_sq",
                           help="stationary variance of f (default 0.25)")
    p_compare.add_argument("--f-sup", type=float, dest="f_sup",
                           help="sup-norm of f (default 1.0)")
    p_compare.add_argument("--a-star", type=float, dest="a_star",
                           help="per-run failure level (default 0.11969)")
    p_compare.set_defaults(handler=cmd_compare)

    p_verify = subparsers.add_parser(
        "verify",
        help="run the named invariant-check suite",
        description="Prints one [PASS]/[FAIL] line per named check plus a summary; "
        "exits 1 if any check fails.  The quick tier finishes in seconds; the full "
        "tier adds the 10^4-replicate bound-validity and coverage suites.  "
        "Statistical checks run at 1e-3 significance, so an arbitrary seed has a "
        "small false-failure chance; the default seed is verified green.",
    )
    _add_common(p_verify)
    p_verify.add_argument("--tier", choices=TIERS, help="scale tier (default quick)")
    p_verify.add_argument("--inject-fault", choices=FAULTS, dest="inject_fault",
                          help="deliberately corrupt a model to prove the suite "
                          "detects it (exit becomes nonzero)")
    p_verify.add_argument("--backend", choices=("python", "compiled"),
                          help="simulation backend (default: compiled when available)")
    p_verify.set_defaults(handler=cmd_verify)

    return parser


def entry(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config) if args.config else {}
        resolver = _Resolver(args, config)
        return args.handler(resolver)
    except ConfigError as exc:
        print(f"regenmc {args.command}: configuration error: {exc}", file=sys.stderr)
        return 2
    except RegenError as exc:
        print(f"regenmc {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(entry(argv))


if __name__ == "__main__":
    main()
