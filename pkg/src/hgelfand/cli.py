"""Command-line front end.

Subcommands: eigentable, spectrum, spherical, transform, invert, multiplier,
extend, quotient, verify.  Exit codes: 0 success, 1 failed numerical check,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from .config import ConfigError, RunConfig

log = logging.getLogger("hgelfand")

THREADS_ENV = "HGELFAND_THREADS"


class CheckFailure(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# output helpers


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.16e}"
    return str(x)


def write_csv(path: str | None, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    _emit(path, buf.getvalue())


def write_json(path: str | None, obj) -> None:
    _emit(path, json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _emit(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    log.info("wrote %s", path)


def _grid_header(k: int) -> list[str]:
    return ["t"] + (["r"] if k == 1 else [f"r_{h + 1}" for h in range(k)]) + ["re", "im"]


def _tr_grid(cfg: RunConfig, f_tmax: float, f_rmax: float):
    """``(t, r_1, ..., r_k)`` grid columns for profile output."""
    act = cfg.action
    k = act.n_reduced
    t = np.linspace(-(cfg.t_max or f_tmax), cfg.t_max or f_tmax, cfg.grid)
    r = np.linspace(0.0, cfg.r_max or f_rmax, cfg.grid)
    mesh = np.meshgrid(t, *([r] * k), indexing="ij")
    return [m.ravel() for m in mesh]


# ----------------------------------------------------------------------------
# subcommands


def cmd_eigentable(cfg: RunConfig) -> int:
    from .invariant import build_generator_system

    gs = build_generator_system(cfg.action, cfg.degree_max)
    write_json(cfg.out, gs.to_json())
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    from .spectrum import enumerate_spectrum, fan_header, fan_rows

    model = cfg.model()
    pts = enumerate_spectrum(model, cfg.lambda_samples, cfg.orbit_samples)
    write_csv(cfg.out, fan_header(model.d), fan_rows(pts, model.d))
    return 0


def cmd_spherical(cfg: RunConfig) -> int:
    from .spherical import SphericalFunction

    act = cfg.action
    if cfg.orbit is not None:
        w = np.zeros(act.n, dtype=complex)
        w[:len(cfg.orbit)] = cfg.orbit
        sph = SphericalFunction.degenerate(act, w)
    else:
        label = cfg.label if cfg.label is not None else (0,) * act.n_reduced
        if len(label) != act.n_reduced:
            raise ConfigError(f"label needs {act.n_reduced} entries for {cfg.group}")
        sph = SphericalFunction.principal(act, cfg.lam, label)
    cols = _tr_grid(cfg, 4.0, 4.0)
    t, radii = cols[0], cols[1:]
    z = np.zeros((len(t), act.n), dtype=complex)
    for h, r in enumerate(radii):
        z[:, h] = r
    vals = sph(t, z)
    header = _grid_header(len(radii))
    write_csv(cfg.out, header, zip(*cols, vals.real, vals.imag))
    return 0


def _table_rows(table):
    for i, lam in enumerate(table.lam):
        xi = table.xi(i)
        for x, v in zip(xi, table.values[i]):
            yield [float(lam), *x, v.real, v.imag]


def _table_header(d: int):
    return ["lambda"] + [f"xi_{j + 1}" for j in range(d)] + ["re", "im"]


def cmd_transform(cfg: RunConfig) -> int:
    from .core import parse_function
    from .transform import gelfand_forward

    f = parse_function(cfg.function, cfg.action)
    model = cfg.model()
    table = gelfand_forward(f, model, cfg.quadrature())
    write_csv(cfg.out, _table_header(model.d), _table_rows(table))
    if cfg.report:
        write_json(cfg.report, {"function": cfg.function, "group": cfg.group,
                                "tail_estimate": table.tail_estimate(),
                                "labels_per_lambda_max": int(max(len(l) for l in table.labels))})
    return 0


def read_table(path: str, cfg: RunConfig):
    """A :class:`GelfandTable` from a ``transform`` CSV written with the same lambda settings."""
    from .transform import lambda_nodes, zero_table

    model = cfg.model()
    gs = model.gensys
    c, B = gs.affine
    table = zero_table(model, cfg.quadrature())
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    lams, _ = lambda_nodes(model.lambda_range, cfg.n_lambda)
    labels, values = [], []
    for lam in lams:
        rows = data[np.isclose(data[:, 0], lam, rtol=1e-13, atol=0.0)]
        if len(rows) == 0:
            raise ConfigError(f"table has no rows at the lambda node {lam!r}; "
                              "use the same --lambda-range and --lambda-grid as for transform")
        u = rows[:, 1:1 + gs.d] / abs(lam) ** np.array(gs.degrees, dtype=float)
        alpha = np.rint(np.linalg.solve(B, (u - c).T).T).astype(int)
        labels.append(alpha)
        values.append(rows[:, -2] + 1j * rows[:, -1])
    table.labels, table.values = labels, values
    return table


def cmd_invert(cfg: RunConfig, table_path: str | None = None) -> int:
    from .core import parse_function
    from .transform import TruncationWarning, gelfand_forward, gelfand_inverse

    act = cfg.action
    f = None
    if table_path:
        table = read_table(table_path, cfg)
        t_max, r_max = cfg.t_max or 12.0, cfg.r_max or 8.0
        table.t_max, table.r_max = t_max, r_max
    else:
        f = parse_function(cfg.function, act)
        table = gelfand_forward(f, cfg.model(), cfg.quadrature())
        t_max, r_max = f.t_max, f.r_max
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        inv = gelfand_inverse(table)
    for w in caught:
        log.warning("%s", w.message)
    cols = _tr_grid(cfg, t_max, r_max)
    vals = inv.profile(*cols)
    header = _grid_header(len(cols) - 1)
    rows = zip(*cols, np.real(vals), np.imag(vals))
    if f is not None:
        ref = f.profile(*cols)
        header += ["error"]
        rows = zip(*cols, np.real(vals), np.imag(vals), np.abs(vals - ref))
        if cfg.report:
            write_json(cfg.report, {"sup_error": float(np.max(np.abs(vals - ref))),
                                    "tail_estimate": table.tail_estimate()})
    write_csv(cfg.out, header, rows)
    return 0


def cmd_multiplier(cfg: RunConfig) -> int:
    from .spectrum import enumerate_spectrum
    from .transform import forward_points, gaussian_symbol, multiplier_kernel

    m = gaussian_symbol()
    model = cfg.model()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        M = multiplier_kernel(m, model, cfg.quadrature())
    cols = _tr_grid(cfg, 8.0, 6.0)
    vals = M.profile(*cols)
    header = _grid_header(len(cols) - 1)
    write_csv(cfg.out, header, zip(*cols, np.real(vals), np.imag(vals)))
    if cfg.report:
        pts = enumerate_spectrum(model, cfg.lambda_samples, cfg.orbit_samples)
        got = forward_points(M, pts, cfg.quadrature())
        want = np.array([m.m(p.lam, np.array(p.xi)) for p in pts])
        write_json(cfg.report, {"symbol": m.name, "points": len(pts),
                                "max_symbol_error": float(np.max(np.abs(got - want)))})
    return 0


def cmd_extend(cfg: RunConfig) -> int:
    from .core import parse_function
    from .extension import assemble_schwartz_extension

    f = parse_function(cfg.function, cfg.action)
    res = assemble_schwartz_extension(f, cfg.order, cfg.model(), cfg.quadrature())
    grid = res.grid
    mesh = np.meshgrid(*grid["axes"], indexing="ij")
    vals = grid["values"].ravel()
    d = len(mesh) - 1
    write_csv(cfg.out, _table_header(d), zip(*[m.ravel() for m in mesh], vals.real, vals.imag))
    if cfg.report:
        write_json(cfg.report, res.summary())
    return 0


def cmd_quotient(cfg: RunConfig) -> int:
    from .core import parse_function
    from .quotient import quotient_spectrum, symmetric_quotient
    from .transform import forward_at

    if cfg.quotient != "sym":
        raise ConfigError("quotient needs --quotient sym")
    gs = cfg.gensys()
    q = symmetric_quotient(gs)
    q.check(min(cfg.degree_max, 6))
    pts = quotient_spectrum(q, cfg.model(), cfg.lambda_samples, cfg.orbit_samples)
    n = q.n
    header = ["lambda"] + [f"w_{k + 1}" for k in range(n)] + ["label_kind", "sources"]
    with_values = cfg.function != "none"
    if with_values:
        f = parse_function(cfg.function, cfg.action)
        header += ["re", "im", "orbit_spread"]
    rows = []
    for p in pts:
        row = [p.lam, *p.coords, p.kind, ";".join(" ".join(_fmt(x) for x in s) for s in p.sources)]
        if with_values:
            if p.kind == "principal":
                v = forward_at(f, p.lam, np.array(p.sources), cfg.quadrature())
            else:
                from .transform import forward_degenerate
                v = np.array([forward_degenerate(f, s, cfg.quadrature()) for s in p.sources])
            row += [v[0].real, v[0].imag, float(np.max(np.abs(v - v[0])))]
        rows.append(row)
    write_csv(cfg.out, header, rows)
    if cfg.report:
        write_json(cfg.report, {"quotient": "sym", "hilbert_map": "elementary symmetric polynomials",
                                "points": len(pts), "group": cfg.group})
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    from .checks import SUITES, SUPPLEMENTARY, run_suites

    names = list(cfg.suites) or list(SUITES)
    unknown = [n for n in names if n not in SUITES and n not in SUPPLEMENTARY]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; choose from {sorted({**SUITES, **SUPPLEMENTARY})}")
    threads = max(1, int(os.environ.get(THREADS_ENV, "1")))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = [r for batch in pool.map(lambda n: run_suites([n]), names) for r in batch]
    else:
        results = run_suites(names)
    for r in results:
        print(r.line(), flush=True)
    failed = [r.name for r in results if not r.passed]
    report = {"seed": cfg.seed, "checks": [r.to_json() for r in results], "all_passed": not failed}
    if cfg.report:
        write_json(cfg.report, report)
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "eigentable": cmd_eigentable, "spectrum": cmd_spectrum, "spherical": cmd_spherical,
    "transform": cmd_transform, "invert": cmd_invert, "multiplier": cmd_multiplier,
    "extend": cmd_extend, "quotient": cmd_quotient, "verify": cmd_verify,
}


# ----------------------------------------------------------------------------
# argument parsing


def _int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _float_tuple(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON RunConfig; explicit flags override it")
    p.add_argument("--group", help="un:n or tn:n (n <= 3)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--report", help="JSON report path")
    p.add_argument("--seed", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def _spectral(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha-max", dest="alpha_cut", type=int)
    p.add_argument("--xi-cut", type=float)
    p.add_argument("--lambda-range", nargs=2, type=float, metavar=("LO", "HI"))
    p.add_argument("--lambda-samples", type=int)
    p.add_argument("--orbit-samples", type=int)


def _quadrature(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda-grid", dest="n_lambda", type=int, help="lambda nodes per half-interval")
    p.add_argument("--nt", type=int)
    p.add_argument("--nr", type=int)
    p.add_argument("--t-max", type=float)
    p.add_argument("--r-max", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hgelfand", description="Gelfand pairs on the Heisenberg group")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("eigentable", help="exact eigenvalue table of the generators (JSON)")
    _common(p)
    p.add_argument("--degree-max", type=int)

    p = sub.add_parser("spectrum", help="enumerated spectrum points (CSV)")
    _common(p)
    _spectral(p)

    p = sub.add_parser("spherical", help="a spherical function on a (t, r) grid (CSV)")
    _common(p)
    p.add_argument("--label", type=_int_tuple, help="alpha, e.g. '2' or '1,0'")
    p.add_argument("--lam", type=float)
    p.add_argument("--orbit", type=_float_tuple, help="degenerate orbit point w (real entries)")
    p.add_argument("--grid", type=int, help="points per axis")
    p.add_argument("--t-max", type=float)
    p.add_argument("--r-max", type=float)

    for name, text in (("transform", "forward transform table (CSV)"),
                       ("invert", "Plancherel inversion on a (t, r) grid (CSV)"),
                       ("multiplier", "kernel of exp(-lambda^2 - |xi|^2) (CSV)"),
                       ("extend", "Schwartz extension on the norm grid (CSV) and norms (JSON)"),
                       ("quotient", "symmetric-quotient spectrum, optionally with transform values")):
        p = sub.add_parser(name, help=text)
        _common(p)
        _spectral(p)
        _quadrature(p)
        p.add_argument("--function", help="gaussian(a,b) | hermite-gaussian(k,a,b) | laguerre-mode(k) | csv:path")
        if name in ("invert", "multiplier"):
            p.add_argument("--grid", type=int, help="points per output axis")
        if name == "invert":
            p.add_argument("--table", help="CSV written by 'transform' (same lambda settings)")
        if name == "extend":
            p.add_argument("--order", type=int)
        if name == "quotient":
            p.add_argument("--quotient", choices=["sym"])

    p = sub.add_parser("verify", help="run acceptance suites and write a pass/fail report")
    _common(p)
    p.add_argument("--suite", dest="suites", action="append", help="suite name (repeatable; default all)")
    return parser


_SKIP = {"command", "config", "verbose", "lambda_range", "table"}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = RunConfig()
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            base = RunConfig.from_json(fh.read())
    changes = {k: v for k, v in vars(args).items() if k not in _SKIP and v is not None}
    if getattr(args, "lambda_range", None) is not None:
        changes["lambda_min"], changes["lambda_max"] = args.lambda_range
    if "suites" in changes:
        changes["suites"] = tuple(changes["suites"])
    if args.command == "quotient":
        changes.setdefault("quotient", base.quotient or "sym")
        if "group" not in changes and base.group == RunConfig.group:
            changes["group"] = "tn:2"
        if "function" not in changes and base.function == RunConfig.function:
            changes["function"] = "none"
    return base.replace(**changes)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        log.info("seed=%d config=%s", cfg.seed, json.dumps(cfg.to_dict(), sort_keys=True))
        if args.command == "invert":
            return cmd_invert(cfg, args.table)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"hgelfand {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"hgelfand {args.command}: check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
