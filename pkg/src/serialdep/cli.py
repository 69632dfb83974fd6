"""Command-line interface.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import distance
from .io import DataError, read_series
from .kernels import KERNELS, resolve_bandwidth
from .plotdata import adcf_plot_data
from .portmanteau import STATISTICS, UNIVARIATE_STATISTICS, statistic_info
from .resampling import bootstrap_tests, permutation_pvalue
from .simulation import MODELS, REPORT_FIELDS, ExperimentConfig, run_experiment
from .var import var_aic, var_fit, var_order_select

SCHEMA_VERSION = 1
_STAT_NAMES = {s.lower(): s for s in STATISTICS}


class UsageError(Exception):
    pass


def _clean(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) else obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _json_text(payload: dict) -> str:
    body = dict(payload)
    body["schema_version"] = SCHEMA_VERSION
    return json.dumps(_clean(body), sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_csv(rows: list[dict], fields) -> str:
    lines = [",".join(fields)]
    for r in rows:
        vals = []
        for k in fields:
            v = r.get(k)
            vals.append("" if v is None else repr(v) if isinstance(v, float) else str(v))
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--boot", type=int, default=None, metavar="B", help="resampling replicates")
    p.add_argument("--kernel", choices=KERNELS, default="bartlett")
    bw = p.add_mutually_exclusive_group()
    bw.add_argument("--lambda", dest="lam", type=float, action="append", help="bandwidth exponent, p = ceil(c n^lambda)")
    bw.add_argument("--bandwidth", type=int, help="bandwidth p directly")
    p.add_argument("--c", type=float, default=3.0, help="bandwidth constant (default 3)")
    p.add_argument("--lags", type=int, default=None, metavar="J")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", choices=("perm", "boot", "wild", "subsample"), default=None)
    p.add_argument("--block", type=int, default=None, metavar="b")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json")


def _input(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("file", nargs=None if required else "?", help="CSV file, one column per component")
    p.add_argument("--log", action="store_true", help="take natural logs first")
    p.add_argument("--diff", action="store_true", help="then take first differences")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="serialdep", description="Distance-based dependence measures and tests.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("dcov", "squared distance covariance"), ("dcor", "distance correlation")):
        p = sub.add_parser(name, help=f"{text} between column groups")
        _input(p)
        _common(p)
        p.add_argument("--split", type=int, default=1, help="first SPLIT columns form x, the rest y")
        p.add_argument("--estimator", choices=("v", "u", "affine"), default="v")
        p.add_argument("--metric", choices=("euclidean", "alpha-power", "gaussian-induced"), default="euclidean")
        p.add_argument("--exponent", type=float, default=1.0, help="alpha for alpha-power")
        p.add_argument("--sigma", type=float, default=1.0, help="sigma for gaussian-induced")

    p = sub.add_parser("test", help="portmanteau test of serial independence")
    _input(p, required=False)
    _common(p)
    p.add_argument("--stat", action="append", required=True, help=f"statistic(s): {', '.join(STATISTICS)}")

    p = sub.add_parser("adcf", help="ADCF plot data with critical bands")
    _input(p)
    _common(p)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--multiplier", choices=("normal", "rademacher"), default="normal")

    p = sub.add_parser("var", help="fit a VAR and optionally test its residuals")
    _input(p)
    _common(p)
    p.add_argument("--order", default="auto", help="VAR order or 'auto' (AIC)")
    p.add_argument("--max-order", type=int, default=10)

    p = sub.add_parser("simulate", help="Monte-Carlo size/power study")
    _common(p)
    p.add_argument("--model", action="append", choices=MODELS, required=True)
    p.add_argument("--n", type=int, action="append", required=True)
    p.add_argument("--experiments", type=int, default=500)
    p.add_argument("--stats", default=",".join(UNIVARIATE_STATISTICS), help="comma-separated statistics")
    p.add_argument("--full-scale", action="store_true", help="1000 experiments, B=499")
    return parser


# ---------------------------------------------------------------------------
# commands


def _load(args):
    if not args.file:
        raise UsageError("an input file is required")
    return read_series(args.file, log=args.log, diff=args.diff)


def _bandwidths(args, n: int) -> list[tuple[float | None, int]]:
    if args.bandwidth is not None:
        if not 1 <= args.bandwidth < n:
            raise UsageError(f"--bandwidth must lie in 1..{n - 1}")
        return [(None, args.bandwidth)]
    lams = args.lam or [0.1]
    return [(lam, resolve_bandwidth(args.c, lam, n)) for lam in lams]


def _check_method(args, allowed: tuple[str, ...], default: str) -> str:
    method = args.method or default
    if method not in allowed:
        raise UsageError(f"--method {method} is not valid here (choose from {', '.join(allowed)})")
    if args.block is not None and method != "subsample":
        raise UsageError("--block requires --method subsample")
    return method


def _cmd_dcov(args, which: str) -> str:
    method = _check_method(args, ("perm",), "perm") if args.method or args.boot else None
    data = _load(args)
    vals = data.values
    if not 1 <= args.split < vals.shape[1]:
        raise UsageError("--split must leave at least one column on each side")
    x, y = vals[:, : args.split], vals[:, args.split :]
    metric = distance.MetricSpec(
        args.metric if not (args.metric == "euclidean" and args.exponent != 1.0) else "alpha-power",
        alpha=args.exponent,
        sigma=args.sigma,
    )
    if args.estimator == "u":
        value = distance.dcov_u(x, y, metric) if which == "dcov" else None
        if value is None:
            raise UsageError("the U estimator is only available for dcov")
    elif args.estimator == "affine":
        value = distance.dcov_affine(x, y) if which == "dcov" else distance.dcor_affine(x, y)
    else:
        value = distance.dcov_v(x, y, metric) if which == "dcov" else distance.dcor(x, y, metric)
    payload = {
        "command": which,
        "estimator": args.estimator,
        "metric": metric.kind,
        "n": int(x.shape[0]),
        "value": float(value),
    }
    if method == "perm":
        res = permutation_pvalue(x, y, args.boot or 499, args.seed, metric=metric, alpha=args.alpha)
        payload["test"] = res.to_dict()
    if args.format == "csv":
        flat = {k: v for k, v in payload.items() if k != "test"}
        flat.update({f"test_{k}": v for k, v in payload.get("test", {}).items()})
        return _rows_csv([flat], sorted(flat))
    return _json_text(payload)


def _stat_names(raw: list[str]) -> list[str]:
    names = []
    for item in raw:
        for s in item.split(","):
            key = s.strip().lower()
            if key not in _STAT_NAMES:
                raise UsageError(f"unknown statistic {s!r}; choose from {', '.join(STATISTICS)}")
            names.append(_STAT_NAMES[key])
    return names


def _run_tests(values: np.ndarray, args, names: list[str]) -> list[dict]:
    _check_method(args, ("boot",), "boot")
    multi = {statistic_info(nm).multivariate for nm in names}
    if len(multi) > 1:
        raise UsageError("mix of univariate and multivariate statistics")
    is_multi = multi.pop()
    if not is_multi and values.shape[1] != 1:
        raise DataError(f"{', '.join(names)} need a univariate series; got {values.shape[1]} columns")
    data = values if is_multi else values[:, 0]
    n = values.shape[0]
    rows = []
    for lam, p in _bandwidths(args, n):
        results = bootstrap_tests(data, names, p, args.kernel, args.boot or 499, args.seed, alpha=args.alpha)
        for nm in names:
            row = results[nm].to_dict()
            row["lambda"] = lam
            row["n"] = n
            row["reject"] = results[nm].reject()
            rows.append(row)
    return rows


_TEST_FIELDS = ("name", "value", "p", "kernel", "lambda", "n", "p_value", "critical_value", "B", "alpha", "seed", "reject", "method")


def _render_tests(rows: list[dict], args, extra: dict | None = None) -> str:
    if args.format == "csv":
        return _rows_csv(rows, _TEST_FIELDS)
    payload = {"command": "test", "results": rows}
    payload.update(extra or {})
    return _json_text(payload)


def _cmd_test(args) -> str:
    names = _stat_names(args.stat)
    data = _load(args)
    return _render_tests(_run_tests(data.values, args, names), args)


def _cmd_adcf(args) -> str:
    method = _check_method(args, ("wild", "subsample"), "subsample")
    data = _load(args)
    plot = adcf_plot_data(
        data.values,
        max_lag=args.lags,
        B=args.boot or 499,
        seed=args.seed,
        level=args.level,
        block=args.block,
        multiplier=args.multiplier,
        labels=data.labels,
    )
    plot.meta["method"] = method
    if args.format == "csv":
        return plot.to_csv_string()
    return plot.to_json_string()


def _cmd_var(args, then: list[str] | None) -> str:
    if args.method is not None or args.block is not None:
        raise UsageError("--method/--block do not apply to var")
    data = _load(args)
    if args.order == "auto":
        order = var_order_select(data.values, args.max_order)
    else:
        try:
            order = int(args.order)
        except ValueError:
            raise UsageError("--order must be an integer or 'auto'") from None
    model = var_fit(data.values, order)
    payload = {
        "command": "var",
        "order": order,
        "aic": var_aic(model),
        "n_residuals": int(model.residuals.shape[0]),
        "dim": model.dim,
        "intercept": model.intercept.tolist(),
        "coefs": model.coefs.tolist(),
        "labels": data.labels,
    }
    if then:
        if then[0] != "test":
            raise UsageError("only 'test' can follow --then")
        targs = build_parser().parse_args(then)
        if targs.file:
            raise UsageError("a chained test reads the residuals, not a file")
        rows = _run_tests(model.residuals, targs, _stat_names(targs.stat))
        if targs.format == "csv" or args.format == "csv":
            return _render_tests(rows, targs)
        payload["tests"] = rows
    if args.format == "csv":
        return _rows_csv([{"order": order, "aic": payload["aic"], "n_residuals": payload["n_residuals"]}], ["order", "aic", "n_residuals"])
    return _json_text(payload)


def _cmd_simulate(args) -> str:
    if args.method not in (None, "boot") or args.block is not None:
        raise UsageError("simulate calibrates by the bootstrap only")
    stats = _stat_names([args.stats])
    experiments, B = (1000, 499) if args.full_scale else (args.experiments, args.boot or 299)
    lams = args.lam or [0.1, 0.2, 0.3]
    if args.bandwidth is not None:
        raise UsageError("simulate takes --lambda, not --bandwidth")
    try:
        cfg = ExperimentConfig(
            models=tuple(args.model),
            sizes=tuple(args.n),
            lambdas=tuple(lams),
            statistics=tuple(stats),
            B=B,
            experiments=experiments,
            alpha=args.alpha,
            seed=args.seed,
            c=args.c,
            kernel=args.kernel,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_experiment(cfg)
    if args.format == "csv":
        return _rows_csv(report.rows, REPORT_FIELDS)
    return report.to_json_string()


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    then = None
    if "--then" in argv:
        k = argv.index("--then")
        argv, then = argv[:k], argv[k + 1 :]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if then is not None and args.command != "var":
            raise UsageError("--then is only supported after var")
        if args.command in ("dcov", "dcor"):
            text = _cmd_dcov(args, args.command)
        elif args.command == "test":
            text = _cmd_test(args)
        elif args.command == "adcf":
            text = _cmd_adcf(args)
        elif args.command == "var":
            text = _cmd_var(args, then)
        else:
            text = _cmd_simulate(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"serialdep: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # from the chained test parser
        return int(exc.code or 0)
    except (DataError, ValueError, np.linalg.LinAlgError, OSError) as exc:
        print(f"serialdep: data error: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
