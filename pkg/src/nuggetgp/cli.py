"""Command-line front end.

Exit codes: 0 success, 2 input/format error, 3 data-validity error,
4 numerical failure (no feasible psi).
"""
import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .kernels import DuplicatePoints, Family, KernelSpec
from .likelihood import (
    AllInfeasible,
    Dataset,
    DegenerateData,
    FitOptions,
    beta_hat,
    fit_mle,
    scan_profile,
)
from .exact_exponential import psi_hat_expansion
from .linalg import NotPositiveDefinite
from .models import MODELS, builtin_dataset
from .predictor import build_emulator, predict_interpolating, predict_metamodel
from .simulation import SimConfig, run_study

EXIT_INPUT = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

FIGURE_NS = range(6, 21)
PROFILE_NS = (7, 14, 20)


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(rows, header, out):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    if out is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(out).write_text(buf.getvalue(), newline="")


def manifest(command, args, seed=None):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    m = {"command": command, "parameters": params, "tool_version": __version__}
    if seed is not None:
        m["seed"] = seed
    return m


def write_manifest(m, path):
    Path(path).write_text(json.dumps(m, indent=2, sort_keys=True) + "\n")


def read_dataset(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_INPUT) from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise CliError(f"{path}: empty file", EXIT_INPUT)
    if [c.strip() for c in rows[0]] != ["x", "y"]:
        raise CliError(f"{path}:1: expected header 'x,y'", EXIT_INPUT)
    xs, ys = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise CliError(f"{path}:{lineno}: expected 2 fields, got {len(row)}", EXIT_INPUT)
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            raise CliError(f"{path}:{lineno}: not a number", EXIT_INPUT) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise CliError(f"{path}:{lineno}: non-finite value", EXIT_INPUT)
        xs.append(x)
        ys.append(y)
    if not xs:
        raise CliError(f"{path}: no observations", EXIT_INPUT)
    try:
        return Dataset(np.array(xs), np.array(ys))
    except DuplicatePoints as exc:
        raise CliError(f"{path}: duplicate x values: {exc}", EXIT_DATA) from exc
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_DATA) from exc


def load_data(args):
    if args.input is not None:
        return read_dataset(args.input)
    if args.n < 2:
        raise CliError("--n must be at least 2", EXIT_INPUT)
    return builtin_dataset(args.model, args.n)


def options_from(args):
    if not 0 < args.psi_min < args.psi_max:
        raise CliError("need 0 < --psi-min < --psi-max", EXIT_INPUT)
    if args.grid < 16:
        raise CliError("--grid must be at least 16", EXIT_INPUT)
    return FitOptions(psi_min=args.psi_min, psi_max=args.psi_max, grid_size=args.grid)


def check_nu(nu):
    if not 0 <= nu < 1:
        raise CliError("--nu must lie in [0, 1)", EXIT_INPUT)
    return nu


def run_fit(d, family, nu, options):
    try:
        return fit_mle(d, family, nu, options)
    except DegenerateData as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    except AllInfeasible as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from exc


def cmd_fit(args):
    d = load_data(args)
    fit = run_fit(d, args.family, check_nu(args.nu), options_from(args))
    payload = fit.to_dict()
    payload["manifest"] = manifest("fit", args)
    text = json.dumps(payload, indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def profile_rows(d, family, nu, options, *prefix):
    p = scan_profile(d, family, nu, options.psi_min, options.psi_max, options.grid_size)
    return [(*prefix, g, v, f.value) for g, v, f in zip(p.grid, p.values, p.flags)]


def cmd_profile(args):
    d = load_data(args)
    rows = profile_rows(d, args.family, check_nu(args.nu), options_from(args))
    write_csv(rows, ["psi", "loglik", "flag"], args.out)
    if args.out is not None:
        write_manifest(manifest("profile", args), f"{args.out}.manifest.json")


def _fit_rows(model, family, nu, options, ns=FIGURE_NS):
    rows = []
    for n in ns:
        fit = run_fit(builtin_dataset(model, n), family, nu, options)
        rows.append((n, fit))
    return rows


def figure1(options):
    rows = []
    for model in ("linear", "sin"):
        for n, fit in _fit_rows(model, Family.EXPONENTIAL, 0.0, options):
            expansion = psi_hat_expansion(n) if model == "linear" else ""
            rows.append((model, n, fit.psi_hat, fit.status.value, expansion))
    return {"figure1.csv": (["model", "n", "psi_hat", "status", "expansion"], rows)}


def _left_rows(nus, options):
    rows = []
    for nu in nus:
        for n, fit in _fit_rows("sin", Family.GAUSSIAN, nu, options):
            rows.append((nu, n, fit.psi_hat, fit.status.value, fit.cond_at_psi_hat,
                         fit.cond_beyond_double_precision, len(fit.modes)))
    return rows


LEFT_HEADER = ["nu", "n", "psi_hat", "status", "cond_at_psi_hat", "cond_beyond_double_precision", "n_modes"]
PROFILE_HEADER = ["nu", "n", "psi", "loglik", "flag"]


def _profiles(nus, ns, options):
    rows = []
    for nu in nus:
        for n in ns:
            rows += profile_rows(builtin_dataset("sin", n), Family.GAUSSIAN, nu, options, nu, n)
    return rows


def figure2(options):
    return {
        "figure2_left.csv": (LEFT_HEADER, _left_rows([0.0], options)),
        "figure2_right.csv": (PROFILE_HEADER, _profiles([0.0], PROFILE_NS, options)),
    }


def figure3(options):
    return {
        "figure3_left.csv": (LEFT_HEADER, _left_rows([0.02, 0.05], options)),
        "figure3_right.csv": (PROFILE_HEADER, _profiles([0.02], PROFILE_NS, options)),
    }


def figure4(options):
    nus = (0.0, 0.01, 0.001, 0.0001)
    modes = []
    for nu in nus:
        fit = run_fit(builtin_dataset("sin", 7), Family.GAUSSIAN, nu, options)
        modes += [(nu, i, m.psi, m.loglik) for i, m in enumerate(fit.modes)]
    return {
        "figure4.csv": (PROFILE_HEADER, _profiles(nus, [7], options)),
        "figure4_modes.csv": (["nu", "mode", "psi", "loglik"], modes),
    }


FIGURES = {1: figure1, 2: figure2, 3: figure3, 4: figure4}


def cmd_figure(args):
    if args.id not in FIGURES:
        raise CliError(f"unknown figure {args.id}; choose from {sorted(FIGURES)}", EXIT_INPUT)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in FIGURES[args.id](options_from(args)).items():
        write_csv(rows, header, out / name)
    write_manifest(manifest("figure", args), out / f"figure{args.id}.manifest.json")


ESTIMATORS = (("beta_hat", "beta"), ("sigma_hat", "sigma"), ("psi_hat", "psi"))


def table1_rows(summary):
    cells = summary.cells
    header = ["estimator"]
    for c in cells:
        tag = f"tau={fmt(c.tau)};nu={fmt(c.nu)}"
        header += [f"mean[{tag}]", f"sd[{tag}]"]
    rows = []
    for label, attr in ESTIMATORS:
        row = [label]
        for c in cells:
            est = getattr(c, attr)
            row += [est.mean, est.sd]
        rows.append(row)
    return header, rows


def exclusion_rows(summary):
    reasons = sorted({r for c in summary.cells for r in c.excluded})
    header = ["tau", "nu", "included", "excluded"] + [f"excluded_{r}" for r in reasons]
    rows = [[c.tau, c.nu, c.included, c.excluded_count] + [c.excluded.get(r, 0) for r in reasons]
            for c in summary.cells]
    return header, rows


def cmd_table1(args):
    if args.replicates < 1:
        raise CliError("--replicates must be at least 1", EXIT_INPUT)
    cfg = SimConfig(replicates=args.replicates, seed=args.seed,
                    amplitude_convention=args.amplitude_convention)
    summary = run_study(cfg, workers=args.workers)
    header, rows = table1_rows(summary)
    write_csv(rows, header, args.out)
    ex_header, ex_rows = exclusion_rows(summary)
    if args.out is None:
        sys.stdout.write("\n")
        write_csv(ex_rows, ex_header, None)
    else:
        out = Path(args.out)
        write_csv(ex_rows, ex_header, out.with_name(out.stem + "_exclusions.csv"))
        m = manifest("table1", args, seed=args.seed)
        m["config"] = asdict(cfg)
        write_manifest(m, f"{args.out}.manifest.json")


def parse_queries(args):
    if args.query is not None:
        try:
            q = [float(v) for v in args.query.split(",") if v.strip()]
        except ValueError:
            raise CliError("--query must be a comma-separated list of numbers", EXIT_INPUT) from None
    else:
        try:
            text = Path(args.query_file).read_text().split()
        except OSError as exc:
            raise CliError(f"cannot read {args.query_file}: {exc}", EXIT_INPUT) from exc
        if not text or text[0].strip() != "x":
            raise CliError(f"{args.query_file}:1: expected header 'x'", EXIT_INPUT)
        q = []
        for lineno, v in enumerate(text[1:], start=2):
            try:
                q.append(float(v))
            except ValueError:
                raise CliError(f"{args.query_file}:{lineno}: not a number", EXIT_INPUT) from None
    if not all(math.isfinite(v) for v in q):
        raise CliError("query points must be finite", EXIT_INPUT)
    return q


def cmd_predict(args):
    d = load_data(args)
    nu = check_nu(args.nu)
    queries = parse_queries(args)
    if args.psi == "auto":
        fit = run_fit(d, args.family, nu, options_from(args))
        psi, beta = fit.psi_hat, fit.beta_hat
    else:
        try:
            psi = float(args.psi)
        except ValueError:
            raise CliError("--psi must be a positive number or 'auto'", EXIT_INPUT) from None
        if not psi > 0:
            raise CliError("--psi must be positive", EXIT_INPUT)
        beta = None
    k = KernelSpec(args.family, psi, nu)
    try:
        if beta is None:
            beta = beta_hat(d, k)
        e = build_emulator(d, k, beta)
    except NotPositiveDefinite as exc:
        raise CliError(f"correlation matrix is not positive definite at psi={psi}", EXIT_NUMERIC) from exc
    rows = [(x, predict_metamodel(e, x), predict_interpolating(e, x)) for x in queries]
    write_csv(rows, ["x", "m_nu", "m_interp"], args.out)
    if args.out is not None:
        m = manifest("predict", args)
        m["resolved"] = {"psi": psi, "beta": beta}
        write_manifest(m, f"{args.out}.manifest.json")


def _add_data(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="CSV file with header x,y")
    src.add_argument("--model", choices=sorted(MODELS), default="linear")
    p.add_argument("--n", type=int, default=20, help="points for a builtin model")


def _add_kernel(p):
    p.add_argument("--family", choices=[f.value for f in Family], default="exponential")
    p.add_argument("--nu", type=float, default=0.0)


def _add_grid(p):
    p.add_argument("--psi-min", type=float, default=1e-3)
    p.add_argument("--psi-max", type=float, default=1e4)
    p.add_argument("--grid", type=int, default=400)


def build_parser():
    parser = argparse.ArgumentParser(prog="nuggetgp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="maximum-likelihood fit, JSON output")
    _add_data(p)
    _add_kernel(p)
    _add_grid(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("profile", help="profile log-likelihood on a psi grid, CSV output")
    _add_data(p)
    _add_kernel(p)
    _add_grid(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("figure", help="data behind figures 1-4")
    p.add_argument("id", type=int)
    _add_grid(p)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("table1", help="simulation study of ML estimators")
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=int, default=2010)
    p.add_argument("--amplitude-convention", choices=["std_dev", "variance"], default="std_dev")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("predict", help="meta-model predictions, CSV output")
    _add_data(p)
    _add_kernel(p)
    _add_grid(p)
    p.add_argument("--psi", default="auto", help="correlation length or 'auto' to fit first")
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--query", help="comma-separated query points")
    q.add_argument("--query-file", help="file with header x and one point per line")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"nuggetgp: error: {exc}", file=sys.stderr)
        return exc.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
