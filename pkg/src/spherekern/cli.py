"""Command-line front end.

Every subcommand reads parameters from an optional JSON ``--config``
document and/or flags (flags win), resolves them against defaults, and
echoes the fully resolved configuration plus the library version into
JSON reports.  Tabular payloads are written as RFC-4180 CSV with
17-significant-digit floats when ``--format csv`` is selected, and
``--emit-plot-data PATH`` writes that CSV alongside whichever format
goes to ``--out``/stdout.

Exit codes: 0 success, 2 configuration error (bad parameters, domains,
unsupported values), 3 numerical failure (factorization, spectral
accuracy, fit, or experiment errors).
"""

import argparse
import json
import os
import sys

import numpy as np

from .errors import ConfigurationError, NumericalError
from .experiments import (
    SALT_GREEDY_GRID,
    error_rate_experiment,
    mig_growth_experiment,
)
from .kernels import make_kernel
from .regression import (
    InfoGainReport,
    effective_dimension,
    greedy_max_variance,
    information_gain,
    sample_sphere,
    variance_sum_check,
)
from .serialize import csv_document, json_document
from .spectral import (
    MaternSpec,
    default_fit_range,
    eigendecay_fit,
    matern_spectrum,
    mercer_spectrum,
    rkhs_equivalence_ratio,
)

_REQUIRED = object()

# Per-subcommand parameter schemas: (name, type, default, help).
# A _REQUIRED default means the parameter must come from a flag or config file.
_SCHEMAS = {
    "kernel-eval": [
        ("family", str, _REQUIRED, "kernel family: nt or rf"),
        ("s", int, _REQUIRED, "activation power (1, 2 or 3)"),
        ("l", int, 2, "network depth (>= 2)"),
        ("u", None, None, "inner product(s) to evaluate (repeatable flag)"),
        ("pair_file", str, None, "file of point pairs, one 2d-vector row per pair"),
    ],
    "spectrum": [
        ("family", str, _REQUIRED, "kernel family: nt or rf"),
        ("s", int, _REQUIRED, "activation power"),
        ("l", int, 2, "network depth"),
        ("d", int, 3, "sphere ambient dimension (>= 3)"),
        ("max_degree", int, 60, "largest harmonic degree"),
    ],
    "eigendecay": [
        ("family", str, _REQUIRED, "kernel family: nt or rf"),
        ("s", int, _REQUIRED, "activation power"),
        ("l", int, 2, "network depth"),
        ("d", int, 3, "sphere ambient dimension"),
        ("max_degree", int, 60, "largest harmonic degree"),
        ("parity", str, "all", "degree parity filter: even, odd or all"),
        ("degree_min", int, None, "lower fit degree (default max(9, 2s+3))"),
        ("degree_max", int, None, "upper fit degree (default 59)"),
    ],
    "matern-compare": [
        ("family", str, "nt", "kernel family: nt or rf"),
        ("s", int, _REQUIRED, "activation power"),
        ("d", int, 3, "sphere ambient dimension"),
        ("nu", float, _REQUIRED, "Matern smoothness"),
        ("lengthscale", float, 1.0, "Matern lengthscale"),
        ("max_degree", int, 60, "largest harmonic degree"),
        ("parity", str, "all", "degree parity filter"),
        ("degree_min", int, None, "lower comparison degree"),
        ("degree_max", int, None, "upper comparison degree"),
    ],
    "infogain": [
        ("family", str, _REQUIRED, "kernel family: nt or rf"),
        ("s", int, _REQUIRED, "activation power"),
        ("d", int, 3, "sphere ambient dimension"),
        ("n", int, 64, "number of uniform sample points"),
        ("lam", float, 1.0, "regularization scale lambda"),
    ],
    "sample-greedy": [
        ("family", str, _REQUIRED, "kernel family: nt or rf"),
        ("s", int, _REQUIRED, "activation power"),
        ("d", int, 3, "sphere ambient dimension"),
        ("n", int, 64, "number of greedy selections"),
        ("lam", float, 1.0, "regularization scale lambda"),
        ("grid_size", int, 4096, "candidate grid size"),
    ],
    "error-rate": [
        ("family", str, _REQUIRED, "kernel family: nt or rf"),
        ("s", int, _REQUIRED, "activation power"),
        ("d", int, _REQUIRED, "sphere ambient dimension (>= 2)"),
        ("reps", int, 5, "number of repetitions"),
        ("max_exp", int, 11, "train sizes n = 2^1 .. 2^max_exp"),
        ("eval_sample", int, 10_000, "sup-error evaluation sample size"),
        ("lam2", float, 0.01, "training regularization lambda^2"),
        ("noise_scale", float, 0.0, "observation noise standard deviation"),
        ("independent", bool, False, "resample training sets per n (default nested)"),
        ("n0", int, 100, "ground-truth anchor count"),
        ("ridge", float, 0.01, "ground-truth construction ridge"),
    ],
    "mig-growth": [
        ("family", str, _REQUIRED, "kernel family: nt or rf"),
        ("s", int, _REQUIRED, "activation power"),
        ("d", int, 3, "sphere ambient dimension"),
        ("lam", float, 1.0, "regularization scale lambda"),
        ("grid_size", int, 4096, "candidate grid size"),
        ("max_exp", int, 10, "sample sizes n = 2^1 .. 2^max_exp"),
    ],
}

# Parameters bumped by --full-scale (the paper-scale configuration) unless
# explicitly set by flag or config file.
_FULL_SCALE = {
    "error-rate": {"reps": 20, "max_exp": 13},
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spherekern",
        description="Neural-kernel spectra, regression and experiments on the sphere.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in _SCHEMAS.items():
        sp = sub.add_parser(name, help=f"{name} subcommand")
        for pname, ptype, default, phelp in schema:
            flag = "--" + pname.replace("_", "-")
            if pname == "u":
                sp.add_argument(flag, action="append", type=float, default=None,
                                help=phelp)
            elif ptype is bool:
                sp.add_argument(flag, action="store_const", const=True,
                                default=None, help=phelp)
            else:
                sp.add_argument(flag, type=ptype, default=None, help=phelp)
        sp.add_argument("--config", type=str, default=None,
                        help="JSON file of parameter values (flags override)")
        sp.add_argument("--seed", type=int, default=None, help="master seed")
        sp.add_argument("--out", type=str, default=None,
                        help="output path (default stdout)")
        sp.add_argument("--format", type=str, choices=["csv", "json"], default=None,
                        help="output format (default json)")
        sp.add_argument("--workers", type=int, default=None,
                        help="worker processes (results are worker-count independent)")
        sp.add_argument("--full-scale", action="store_const", const=True,
                        default=None, help="use the paper-scale configuration")
        sp.add_argument("--emit-plot-data", type=str, default=None,
                        help="also write the tidy CSV payload to this path")
    return parser


_COMMON_DEFAULTS = {
    "seed": 0,
    "format": "json",
    "workers": None,
    "full_scale": False,
}


def resolve_config(command, args):
    """Merge defaults, config-file values, and flags (flags win).

    Returns the fully resolved parameter dict, which is echoed into JSON
    reports and can be fed back through --config to reproduce the run.
    """
    file_cfg = {}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}")
        if not isinstance(file_cfg, dict):
            raise ConfigurationError("config document must be a JSON object")
        embedded = file_cfg.pop("subcommand", command)
        if embedded != command:
            raise ConfigurationError(
                f"config is for subcommand {embedded!r}, not {command!r}"
            )
        # Output destinations are per-invocation, never part of the
        # reproducible configuration.
        file_cfg.pop("out", None)
        file_cfg.pop("emit_plot_data", None)

    schema = _SCHEMAS[command]
    known = {pname for pname, *_ in schema} | set(_COMMON_DEFAULTS)
    unknown = set(file_cfg) - known
    if unknown:
        raise ConfigurationError(
            f"unknown config keys for {command}: {sorted(unknown)}"
        )

    resolved = {"subcommand": command}
    explicit = set()
    for pname, _, default, _ in schema:
        flag_val = getattr(args, pname)
        if flag_val is not None:
            resolved[pname] = flag_val
            explicit.add(pname)
        elif pname in file_cfg:
            resolved[pname] = file_cfg[pname]
            explicit.add(pname)
        elif default is _REQUIRED:
            raise ConfigurationError(
                f"{command} requires --{pname.replace('_', '-')} "
                "(flag or config value)"
            )
        else:
            resolved[pname] = default
    for cname, default in _COMMON_DEFAULTS.items():
        flag_val = getattr(args, cname)
        if flag_val is not None:
            resolved[cname] = flag_val
            explicit.add(cname)
        elif cname in file_cfg:
            resolved[cname] = file_cfg[cname]
            explicit.add(cname)
        else:
            resolved[cname] = default
    if resolved["format"] not in ("csv", "json"):
        raise ConfigurationError(
            f"format must be csv or json, got {resolved['format']!r}"
        )
    if resolved["full_scale"]:
        for pname, value in _FULL_SCALE.get(command, {}).items():
            if pname not in explicit:
                resolved[pname] = value
    return resolved


def _u_values(cfg):
    if cfg["u"] is not None:
        return np.asarray(cfg["u"], dtype=float)
    if cfg["pair_file"] is None:
        raise ConfigurationError("kernel-eval needs --u values or --pair-file")
    try:
        with open(cfg["pair_file"], "r", encoding="utf-8") as fh:
            first = fh.readline()
            fh.seek(0)
            delim = "," if "," in first else None
            rows = np.loadtxt(fh, delimiter=delim, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read pair file: {exc}")
    if rows.shape[1] % 2 != 0:
        raise ConfigurationError(
            f"pair rows must hold two d-vectors; got {rows.shape[1]} columns"
        )
    d = rows.shape[1] // 2
    x, y = rows[:, :d], rows[:, d:]
    for name, pts in (("first", x), ("second", y)):
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-8):
            raise ConfigurationError(f"{name} points in pair file are not unit-norm")
    return np.sum(x * y, axis=1)


def cmd_kernel_eval(cfg):
    kernel = make_kernel(cfg["family"], cfg["s"], l=cfg["l"])
    u = _u_values(cfg)
    values = np.atleast_1d(kernel(u))
    csv_text = csv_document(["u", "value"], zip(u, values))
    payload = {"u": u.tolist(), "value": values.tolist()}
    return csv_text, lambda: json_document(payload, config=cfg)


def cmd_spectrum(cfg):
    kernel = make_kernel(cfg["family"], cfg["s"], l=cfg["l"], d=cfg["d"])
    table = mercer_spectrum(kernel, cfg["d"], cfg["max_degree"])
    return table.to_csv(), lambda: table.to_json(config=cfg)


def _degree_range(cfg):
    lo_default, hi_default = default_fit_range(cfg["s"])
    lo = cfg["degree_min"] if cfg["degree_min"] is not None else lo_default
    hi = cfg["degree_max"] if cfg["degree_max"] is not None else hi_default
    return lo, hi


def cmd_eigendecay(cfg):
    kernel = make_kernel(cfg["family"], cfg["s"], l=cfg["l"], d=cfg["d"])
    table = mercer_spectrum(kernel, cfg["d"], cfg["max_degree"])
    lo, hi = _degree_range(cfg)
    slope, r2 = eigendecay_fit(table, parity=cfg["parity"], degree_range=(lo, hi))
    csv_text = csv_document(
        ["slope", "r_squared", "parity", "degree_min", "degree_max"],
        [[slope, r2, cfg["parity"], lo, hi]],
    )
    payload = {
        "family": cfg["family"], "s": cfg["s"], "d": cfg["d"],
        "parity": cfg["parity"], "degree_min": lo, "degree_max": hi,
        "slope": slope, "r_squared": r2,
    }
    return csv_text, lambda: json_document(payload, config=cfg)


def cmd_matern_compare(cfg):
    kernel = make_kernel(cfg["family"], cfg["s"], d=cfg["d"])
    table = mercer_spectrum(kernel, cfg["d"], cfg["max_degree"])
    matern = matern_spectrum(
        MaternSpec(nu=cfg["nu"], d=cfg["d"], lengthscale=cfg["lengthscale"]),
        cfg["max_degree"],
    )
    lo, hi = _degree_range(cfg)
    min_ratio, max_ratio = rkhs_equivalence_ratio(
        table, matern, (lo, hi), parity=cfg["parity"]
    )
    spread = max_ratio / min_ratio if min_ratio > 0 else float("inf")
    csv_text = csv_document(
        ["min_ratio", "max_ratio", "ratio_spread"],
        [[min_ratio, max_ratio, spread]],
    )
    payload = {
        "family": cfg["family"], "s": cfg["s"], "d": cfg["d"], "nu": cfg["nu"],
        "lengthscale": cfg["lengthscale"], "parity": cfg["parity"],
        "degree_min": lo, "degree_max": hi,
        "min_ratio": min_ratio, "max_ratio": max_ratio, "ratio_spread": spread,
    }
    return csv_text, lambda: json_document(payload, config=cfg)


def cmd_infogain(cfg):
    kernel = make_kernel(cfg["family"], cfg["s"], d=cfg["d"])
    points = sample_sphere(cfg["d"], cfg["n"], cfg["seed"])
    lam = cfg["lam"]
    lhs, rhs = variance_sum_check(kernel, points, lam)
    report = InfoGainReport(
        n=cfg["n"],
        info_gain=information_gain(kernel, points, lam),
        effective_dim=effective_dimension(kernel, points, lam),
        lam=lam,
        sum_variance=lhs,
        bound_rhs=rhs,
    )
    return report.to_csv(), lambda: report.to_json(config=cfg)


def cmd_sample_greedy(cfg):
    kernel = make_kernel(cfg["family"], cfg["s"], d=cfg["d"])
    grid = sample_sphere(cfg["d"], cfg["grid_size"], [cfg["seed"], SALT_GREEDY_GRID])
    trace = greedy_max_variance(kernel, grid, cfg["n"], cfg["lam"])
    return trace.to_csv(), lambda: trace.to_json(config=cfg)


def cmd_error_rate(cfg):
    report = error_rate_experiment(
        cfg["family"], cfg["s"], cfg["d"],
        n_grid=2 ** np.arange(1, cfg["max_exp"] + 1),
        repetitions=cfg["reps"],
        master_seed=cfg["seed"],
        eval_sample=cfg["eval_sample"],
        train_lam2=cfg["lam2"],
        noise_scale=cfg["noise_scale"],
        n0=cfg["n0"],
        ridge=cfg["ridge"],
        nested=not cfg["independent"],
        workers=cfg["workers"] if cfg["workers"] is not None else os.cpu_count(),
    )
    return report.to_csv(), lambda: report.to_json(config=cfg)


def cmd_mig_growth(cfg):
    report = mig_growth_experiment(
        cfg["family"], cfg["s"], cfg["d"],
        n_grid=2 ** np.arange(1, cfg["max_exp"] + 1),
        lam=cfg["lam"],
        candidate_grid_size=cfg["grid_size"],
        seed=cfg["seed"],
    )
    return report.to_csv(), lambda: report.to_json(config=cfg)


_HANDLERS = {
    "kernel-eval": cmd_kernel_eval,
    "spectrum": cmd_spectrum,
    "eigendecay": cmd_eigendecay,
    "matern-compare": cmd_matern_compare,
    "infogain": cmd_infogain,
    "sample-greedy": cmd_sample_greedy,
    "error-rate": cmd_error_rate,
    "mig-growth": cmd_mig_growth,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        csv_text, json_factory = _HANDLERS[args.command](cfg)
        text = csv_text if cfg["format"] == "csv" else json_factory()
    except ConfigurationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if args.emit_plot_data is not None:
        with open(args.emit_plot_data, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
