"""Command line entry point: ``fracconv <subcommand> ...``."""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from fracconv.coeff import Scheme, scheme_weights, sequences
from fracconv.genfun import HSeriesParams, stability_scan
from fracconv.harness import (
    Example1Spec,
    Example2Spec,
    convergence_table,
    emit_table,
    example1_problem,
    example2_problem,
    grid_couple,
    tol_from_rule,
)
from fracconv.solver import Direct, GridSpec, Gmres, run

log = logging.getLogger("fracconv")


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    return float(parts[0]), float(parts[1])


def _mexp(text: str) -> list[int]:
    """``"9..11"`` -> [512, 1024, 2048]; a single exponent is also accepted."""
    lo, sep, hi = text.partition("..")
    lo_i = int(lo)
    hi_i = int(hi) if sep else lo_i
    if hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"empty exponent range {text!r}")
    return [2**k for k in range(lo_i, hi_i + 1)]


def _methods(text: str) -> list[str]:
    table = {"d": ["direct"], "direct": ["direct"], "g": ["gmres"], "gmres": ["gmres"],
             "dg": ["direct", "gmres"], "both": ["direct", "gmres"]}
    try:
        return table[text.lower()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown method {text!r}") from None


def _write_csv(path: Path, header, rows) -> None:
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc}") from exc


# --------------------------------------------------------------------------
# subcommands


def cmd_coeffs(args) -> int:
    seq = sequences(args.alpha, args.count)
    w = scheme_weights(args.scheme, args.alpha, args.count).weights
    rows = (
        [k, *(repr(float(seq[name][k])) for name in "abcd"), repr(float(w[k]))]
        for k in range(args.count)
    )
    _write_csv(Path(args.out), ["k", "a", "b", "c", "d", "weight"], rows)
    return 0


def cmd_stability_scan(args) -> int:
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.alpha_steps)
    thetas = np.linspace(args.theta_min, args.theta_max, args.theta_steps)
    report = stability_scan(args.scheme, alphas, thetas, HSeriesParams(n_max=args.nmax))
    out = Path(args.out)
    rows = (
        [repr(float(a)), repr(float(t)), repr(float(report.values[i, j]))]
        for j, a in enumerate(report.alpha_grid)
        for i, t in enumerate(report.theta_grid)
    )
    _write_csv(out, ["alpha", "theta", "re_g"], rows)
    summary = Path(args.summary) if args.summary else out.with_suffix(".json")
    summary.write_text(json.dumps(report.summary(), indent=2))
    print(json.dumps({"min": report.min_value, "argmin": list(report.argmin)}))
    return 0


def _solve_problem(args):
    if args.problem == "example1":
        spec = Example1Spec(args.alpha, args.beta, args.m, D=args.bigd, domain=args.domain, T=args.horizon)
        return example1_problem(spec)
    spec = Example2Spec(args.m, alpha=args.alpha, beta=args.beta, D=args.bigd, domain=args.domain, T=args.horizon)
    return example2_problem(spec, (args.domain[1] - args.domain[0]) / (args.n + 1))


def cmd_solve(args) -> int:
    n = args.n if args.n is not None else grid_couple(args.scheme, args.alpha, args.m)
    args.n = n
    problem = _solve_problem(args)
    grid = GridSpec.build(problem, args.m, n)
    if args.method == "direct":
        method = Direct(explicit_inverse=args.explicit_inverse)
    else:
        method = Gmres(tol=tol_from_rule(args.tol_expr, grid.tau))
    report = run(args.scheme, problem, grid, method)
    doc = {"scheme": Scheme.parse(args.scheme).name.lower(), "M": args.m, "N": n,
           "tau": grid.tau, "h": grid.h, **report.to_dict()}
    text = json.dumps(doc, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    if args.profile:
        _write_csv(Path(args.profile), ["x", "u"],
                   ([repr(float(x)), repr(float(u))] for x, u in zip(report.x, report.final_solution)))
    return 0


def _emit_both(table, outdir: Path, stem: str) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    emit_table(table, outdir / f"{stem}.csv", "csv")
    emit_table(table, outdir / f"{stem}.json", "json")
    for row in table.rows:
        print(f"M={row.M:6d} N={row.N:6d} E_direct={row.E_direct} E_gmres={row.E_gmres} "
              f"Rate={row.Rate} Iter={row.Iter} {row.notes}".rstrip())


def cmd_example1(args) -> int:
    scheme = Scheme.parse(args.scheme)
    table = convergence_table("example1", scheme, args.mexp, args.method,
                              tol_rule=args.tol_expr, alpha=args.alpha, beta=args.beta)
    _emit_both(table, Path(args.out), f"example1_{scheme.name.lower()}_a{args.alpha}_b{args.beta}")
    return 0


def cmd_example2(args) -> int:
    scheme = Scheme.parse(args.scheme)
    table = convergence_table("example2", scheme, args.mexp, args.method, tol_rule=args.tol_expr)
    _emit_both(table, Path(args.out), f"example2_{scheme.name.lower()}")
    return 0


CONFIG_KEYS = {"problem", "alpha", "beta", "bigd", "scheme", "method", "m_list",
               "domain", "horizon", "tol_rule", "out"}


def load_config(path) -> dict:
    """Flat key/value run configuration, either JSON or ``key = value`` lines."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"could not read config {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
    else:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        parser.read_string("[run]\n" + text)
        raw = dict(parser["run"])
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    def as_list(v, conv):
        if isinstance(v, str):
            v = [p for p in v.replace(";", ",").split(",") if p.strip()]
        return [conv(p) for p in v]

    def m_value(p) -> int:
        p = str(p).strip()
        return 2 ** int(p[2:]) if p.startswith("2^") else int(p)

    cfg = {"problem": str(raw.get("problem", "example1")).strip()}
    if "alpha" in raw:
        cfg["alpha"] = float(raw["alpha"])
    if "beta" in raw:
        cfg["beta"] = float(raw["beta"])
    if "bigd" in raw:
        cfg["D"] = float(raw["bigd"])
    if "domain" in raw:
        cfg["domain"] = tuple(as_list(raw["domain"], float))
    if "horizon" in raw:
        h = str(raw["horizon"]).strip()
        cfg["T"] = math.sqrt(float(h[5:-1])) if h.startswith("sqrt(") else float(h)
    cfg["scheme"] = Scheme.parse(str(raw.get("scheme", "m1")).strip())
    cfg["methods"] = _methods(str(raw.get("method", "g")).strip())
    if "m_list" not in raw:
        raise ValueError("config needs m_list")
    cfg["m_list"] = as_list(raw["m_list"], m_value)
    cfg["tol_rule"] = raw.get("tol_rule")
    cfg["out"] = raw.get("out")
    return cfg


def cmd_convergence(args) -> int:
    cfg = load_config(args.config)
    spec_kwargs = {k: cfg[k] for k in ("alpha", "beta", "D", "domain", "T") if k in cfg}
    if cfg["problem"] == "example1" and "alpha" not in spec_kwargs:
        raise ValueError("example1 runs need alpha and beta in the config")
    table = convergence_table(cfg["problem"], cfg["scheme"], cfg["m_list"], cfg["methods"],
                              tol_rule=cfg["tol_rule"], **spec_kwargs)
    outdir = Path(args.out or cfg["out"] or ".")
    _emit_both(table, outdir, Path(args.config).stem)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracconv", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeffs", help="coefficient sequences and scheme weights as CSV")
    c.add_argument("--scheme", type=Scheme.parse, default=Scheme.M1)
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--count", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_coeffs)

    s = sub.add_parser("stability-scan", help="Re g_m on a (theta, alpha) grid")
    s.add_argument("--scheme", type=Scheme.parse, required=True)
    s.add_argument("--alpha-min", type=float, default=0.01)
    s.add_argument("--alpha-max", type=float, default=0.99)
    s.add_argument("--alpha-steps", type=int, default=99)
    s.add_argument("--theta-min", type=float, default=0.001)
    s.add_argument("--theta-max", type=float, default=3.141)
    s.add_argument("--theta-steps", type=int, default=3141)
    s.add_argument("--nmax", type=int, default=1000)
    s.add_argument("--out", required=True)
    s.add_argument("--summary", help="JSON summary path (default: --out with .json suffix)")
    s.set_defaults(func=cmd_stability_scan)

    v = sub.add_parser("solve", help="single Crank-Nicolson run")
    v.add_argument("--problem", choices=("example1", "example2"), default="example1")
    v.add_argument("--scheme", type=Scheme.parse, default=Scheme.M1)
    v.add_argument("--alpha", type=float, required=True)
    v.add_argument("--beta", type=float, required=True)
    v.add_argument("--bigd", type=float, default=1.0)
    v.add_argument("--domain", type=_pair, default=(0.0, 2.0))
    v.add_argument("--horizon", type=float, default=1.0)
    v.add_argument("--m", type=int, required=True)
    v.add_argument("--n", type=int, default=None, help="default: coupled to M by scheme")
    v.add_argument("--method", choices=("direct", "gmres"), default="direct")
    v.add_argument("--tol-expr", default="tau3")
    v.add_argument("--explicit-inverse", action="store_true")
    v.add_argument("--out")
    v.add_argument("--profile", help="CSV of the final profile (x, u)")
    v.set_defaults(func=cmd_solve)

    for name, func, doc in (("example1", cmd_example1, "manufactured-solution convergence table"),
                            ("example2", cmd_example2, "Levy-Smirnov convergence table")):
        e = sub.add_parser(name, help=doc)
        if name == "example1":
            e.add_argument("--alpha", type=float, required=True)
            e.add_argument("--beta", type=float, required=True)
        e.add_argument("--scheme", type=Scheme.parse, default=Scheme.M1)
        e.add_argument("--method", type=_methods, default=["direct", "gmres"])
        e.add_argument("--mexp", type=_mexp, default=_mexp("9..11"))
        e.add_argument("--tol-expr", default=None)
        e.add_argument("--out", default=".")
        e.set_defaults(func=func)

    k = sub.add_parser("convergence", help="table from a run configuration file")
    k.add_argument("--config", required=True)
    k.add_argument("--out", default=None)
    k.set_defaults(func=cmd_convergence)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"fracconv: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
