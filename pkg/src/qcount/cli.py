"""qcount: reproduce the counting-statistics figures as curve data.

Each ``fig`` subcommand evaluates one figure's parameter set (caption
values are the defaults, flags override, a JSON config file supplies
defaults below flags) and writes CSV or JSON tables; ``oracle`` runs the
brute-force cross-checks.  Identical configurations produce byte-identical
output files; the only environment influence is the optional output
directory override QCOUNT_OUT_DIR.

Exit codes: 0 success, 1 configuration error, 2 numerical inconsistency
(including failed oracle checks).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .counting import (
    InconsistentCoefficients,
    cumulants,
    default_g_grid,
    distribution,
    g_scan,
    p_at,
)
from .equilibrium import Thermo, excitation_fraction, occupations
from .locality import kernels
from .oracle import CHECK_NAMES, IntegratorError, run_checks
from .spectrum import INTEGER_GRID, MIDPOINT_GRID, ModelParams, build_modes
from .thermalization import QuenchSpec, default_times, quench_g_scan, quench_scan

_CONFIG_KEYS = frozenset(
    {
        "task", "out", "format", "workers", "grid",
        "J", "gamma", "g", "n_sites", "kappa",
        "T", "g_values", "g_min", "g_max", "g_step", "delta_g",
        "m", "times", "gamma0", "bath_T", "max_distance",
        "n", "check",
    }
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # config errors must exit 1, not argparse's default 2
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x != ""]
    except ValueError as err:
        raise _UsageError(f"expected comma-separated numbers, got {text!r}") from err


def _load_config(argv: list[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return {}
    with open(known.config) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise _UsageError("config file must hold a JSON object")
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise _UsageError(f"unknown config keys {sorted(unknown)}")
    return config


def _build_parser(cfg: dict) -> _Parser:
    parser = _Parser(prog="qcount", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"qcount {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, defaults):
        p.add_argument("--config", default=None, help="JSON file with option defaults")
        p.add_argument("--out", default=cfg.get("out", defaults["out"]),
                       help="output path (panel suffixes are inserted before the extension)")
        p.add_argument("--format", choices=("csv", "json"),
                       default=cfg.get("format", "csv"))
        p.add_argument("--workers", type=int, default=int(cfg.get("workers", 1)),
                       help="worker processes for independent grid points")

    def model(p, gamma=1.0, g=0.0, kappa=1.0):
        p.add_argument("--J", type=float, default=float(cfg.get("J", 1.0)))
        p.add_argument("--gamma", type=float, default=float(cfg.get("gamma", gamma)))
        p.add_argument("--g", type=float, default=float(cfg.get("g", g)))
        p.add_argument("--n-sites", dest="n_sites", type=int,
                       default=int(cfg.get("n_sites", 1000)))
        p.add_argument("--kappa", type=float, default=float(cfg.get("kappa", kappa)))
        p.add_argument("--grid", choices=(MIDPOINT_GRID, INTEGER_GRID),
                       default=cfg.get("grid", MIDPOINT_GRID))

    def g_axis(p, step):
        p.add_argument("--g-min", dest="g_min", type=float, default=float(cfg.get("g_min", 0.0)))
        p.add_argument("--g-max", dest="g_max", type=float, default=float(cfg.get("g_max", 2.0)))
        p.add_argument("--delta-g", dest="delta_g", type=float,
                       default=float(cfg.get("delta_g", step)))

    fig = sub.add_parser("fig", help="emit one figure's curves as a data table")
    fig.add_argument("number", type=int, choices=range(1, 8), metavar="1..7")
    common(fig, {"out": None})
    model(fig)
    g_axis(fig, 1e-3)
    fig.add_argument("--T", type=_floats, default=cfg.get("T"),
                     help="comma-separated temperatures k_B T / J")
    fig.add_argument("--g-values", dest="g_values", type=_floats, default=cfg.get("g_values"),
                     help="comma-separated transverse-field values (figs 5-7)")
    fig.add_argument("--m", type=int, default=int(cfg.get("m", 499)),
                     help="odd count probed by fig 2")
    fig.add_argument("--times", type=_floats, default=cfg.get("times"),
                     help="comma-separated J*t sample times (figs 4-5)")
    fig.add_argument("--gamma0", type=float, default=float(cfg.get("gamma0", 1.0)))
    fig.add_argument("--bath-T", dest="bath_T", type=float, default=cfg.get("bath_T"))
    fig.add_argument("--max-distance", dest="max_distance", type=int,
                     default=int(cfg.get("max_distance", 10)))

    orc = sub.add_parser("oracle", help="run brute-force cross-checks")
    common(orc, {"out": None})
    orc.add_argument("--n", type=int, default=int(cfg.get("n", 8)),
                     help="sites for the exact-rational expansion (<= 16)")
    orc.add_argument("--check", default=cfg.get("check", "all"),
                     help=f"comma-separated subset of {('all',) + CHECK_NAMES}")
    return parser


# ---------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def _resolve_out(path_str: str) -> Path:
    path = Path(path_str)
    base = os.environ.get("QCOUNT_OUT_DIR")
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _panel_path(out: Path, suffix: str) -> Path:
    return out if not suffix else out.with_name(f"{out.stem}_{suffix}{out.suffix}")


def _write_table(path: Path, fmt: str, meta: dict, columns: list[str], rows) -> Path:
    text_rows = [[_fmt(cell) for cell in row] for row in rows]
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            for key, value in meta.items():
                fh.write(f"# {key} = {_fmt(value)}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(text_rows)
    else:
        payload = {
            "metadata": {k: _fmt(v) for k, v in meta.items()},
            "columns": columns,
            "rows": text_rows,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _base_meta(args, task: str) -> dict:
    meta = {
        "task": task,
        "qcount_version": __version__,
        "J": args.J,
        "gamma": args.gamma,
        "n_sites": args.n_sites,
        "kappa": args.kappa,
        "momentum_grid": args.grid,
        "format": args.format,
    }
    return meta


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------
# figure tasks (caption parameter sets are the defaults)
# ---------------------------------------------------------------------

def _equilibrium_distribution(params: ModelParams, t_over_j: float, grid: str):
    modeset = build_modes(params, grid=grid)
    return distribution(modeset, occupations(modeset, Thermo(t_over_j)))


def _p_at_worker(job):
    params, t_over_j, grid, m = job
    return p_at(_equilibrium_distribution(params, t_over_j, grid), m)


def _fig1(args) -> list[Path]:
    out = _resolve_out(args.out or "fig1.csv")
    params = ModelParams(J=args.J, gamma=args.gamma, g=args.g,
                         N=args.n_sites, kappa=args.kappa)
    meta = _base_meta(args, "fig1")
    dist = _equilibrium_distribution(params, 0.0, args.grid)
    meta_a = dict(meta, panel="a", g=args.g, t_over_j=0.0)
    path_a = _write_table(
        _panel_path(out, "a"), args.format, meta_a, ["m", "p"],
        [(m, pm) for m, pm in enumerate(dist.probs)],
    )
    grid_g = default_g_grid(args.delta_g, args.g_min, args.g_max)
    scan = g_scan(params, Thermo(0.0), grid_g, grid=args.grid)
    meta_b = dict(meta, panel="b", t_over_j=0.0, g_min=args.g_min,
                  g_max=args.g_max, delta_g=args.delta_g)
    n = params.N
    path_b = _write_table(
        _panel_path(out, "b"), args.format, meta_b,
        ["g", "mean_over_n", "variance_over_n"],
        zip(scan["g"], scan["mean"] / n, scan["variance"] / n),
    )
    return [path_a, path_b]


def _fig2(args) -> list[Path]:
    out = _resolve_out(args.out or "fig2.csv")
    paths = []
    panels = (
        ("a", 0.01, args.T or np.linspace(0.0, 0.02, 41).tolist(), 0.01),
        ("b", 1.0, args.T or np.linspace(0.0, 0.2, 41).tolist(), 0.2),
    )
    for panel, gamma, temps, t_inset in panels:
        params = ModelParams(J=args.J, gamma=gamma, g=args.g,
                             N=args.n_sites, kappa=args.kappa)
        jobs = [(params, t, args.grid, args.m) for t in temps]
        values = _pmap(_p_at_worker, jobs, args.workers)
        meta = dict(_base_meta(args, "fig2"), panel=panel, gamma=gamma,
                    g=args.g, m=args.m)
        paths.append(_write_table(
            _panel_path(out, panel), args.format, meta,
            ["t_over_j", f"p_{args.m}"], zip(temps, values),
        ))
        cold = _equilibrium_distribution(params, 0.0, args.grid)
        warm = _equilibrium_distribution(params, t_inset, args.grid)
        meta_inset = dict(meta, panel=f"{panel}_inset", t_warm=t_inset)
        paths.append(_write_table(
            _panel_path(out, f"{panel}_inset"), args.format, meta_inset,
            ["m", "p_t0", f"p_t{t_inset}"],
            zip(range(cold.probs.size), cold.probs, warm.probs),
        ))
    return paths


def _scan_worker(job):
    params, t_over_j, grid_g, grid = job
    return g_scan(params, Thermo(t_over_j), grid_g, grid=grid)


def _fig3(args) -> list[Path]:
    out = _resolve_out(args.out or "fig3.csv")
    temps = args.T if args.T is not None else [0.0, 0.05, 0.3, 1.0]
    params = ModelParams(J=args.J, gamma=args.gamma, g=args.g,
                         N=args.n_sites, kappa=args.kappa)
    grid_g = default_g_grid(args.delta_g, args.g_min, args.g_max)
    scans = _pmap(_scan_worker, [(params, t, grid_g, args.grid) for t in temps],
                  args.workers)
    meta = dict(_base_meta(args, "fig3"), T=temps, g_min=args.g_min,
                g_max=args.g_max, delta_g=args.delta_g)
    n = params.N
    for t in temps:
        modeset = build_modes(replace(params, g=0.0), grid=args.grid)
        meta[f"n_d_over_n_at_g0_T{_fmt(t)}"] = excitation_fraction(modeset, Thermo(t))
    rows = []
    for t, scan in zip(temps, scans):
        for i in range(scan["g"].size):
            rows.append((t, scan["g"][i], scan["mean"][i] / n, scan["variance"][i] / n,
                         scan["dmean_dg"][i] / n, scan["dvariance_dg"][i] / n))
    return [_write_table(
        out, args.format, meta,
        ["t_over_j", "g", "mean_over_n", "variance_over_n",
         "dmean_dg_over_n", "dvariance_dg_over_n"], rows,
    )]


def _quench_scan_worker(job):
    params, spec, t, grid_g, grid = job
    return quench_g_scan(params, spec, t, grid_g, grid=grid)


def _fig4(args) -> list[Path]:
    out = _resolve_out(args.out or "fig4.csv")
    times = args.times if args.times is not None else [0.0, 1.0, 10.0]
    bath_t = args.bath_T if args.bath_T is not None else 0.1
    params = ModelParams(J=args.J, gamma=args.gamma, g=args.g,
                         N=args.n_sites, kappa=args.kappa)
    spec = QuenchSpec(gamma0=args.gamma0, bath_t_over_j=bath_t, times=np.asarray(times))
    grid_g = default_g_grid(args.delta_g, args.g_min, args.g_max)
    scans = _pmap(_quench_scan_worker,
                  [(params, spec, t, grid_g, args.grid) for t in times], args.workers)
    meta = dict(_base_meta(args, "fig4"), gamma0=args.gamma0, bath_t_over_j=bath_t,
                times=times, g_min=args.g_min, g_max=args.g_max, delta_g=args.delta_g)
    n = params.N
    rows = []
    for t, scan in zip(times, scans):
        for i in range(scan["g"].size):
            rows.append((t, scan["g"][i], scan["mean"][i] / n, scan["variance"][i] / n,
                         scan["dmean_dg"][i] / n, scan["dvariance_dg"][i] / n))
    return [_write_table(
        out, args.format, meta,
        ["jt", "g", "mean_over_n", "variance_over_n",
         "dmean_dg_over_n", "dvariance_dg_over_n"], rows,
    )]


def _fig5(args) -> list[Path]:
    out = _resolve_out(args.out or "fig5.csv")
    g_values = args.g_values if args.g_values is not None else [0.0, 1.0, 2.0]
    bath_t = args.bath_T if args.bath_T is not None else 100.0
    times = np.asarray(args.times) if args.times is not None else default_times()
    spec = QuenchSpec(gamma0=args.gamma0, bath_t_over_j=bath_t, times=times)
    meta = dict(_base_meta(args, "fig5"), gamma0=args.gamma0, bath_t_over_j=bath_t,
                g_values=g_values, times=times)
    n = args.n_sites
    rows = []
    for g in g_values:
        params = ModelParams(J=args.J, gamma=args.gamma, g=g,
                             N=args.n_sites, kappa=args.kappa)
        series = quench_scan(params, spec, grid=args.grid)
        for i in range(series["t"].size):
            rows.append((g, series["t"][i], series["mean"][i] / n,
                         series["variance"][i] / n))
    return [_write_table(
        out, args.format, meta,
        ["g", "jt", "mean_over_n", "variance_over_n"], rows,
    )]


def _fig_kernels(args, number: int) -> list[Path]:
    out = _resolve_out(args.out or f"fig{number}.csv")
    # fig 7 is the weak-pairing companion of fig 6; --gamma still overrides
    gamma = 0.01 if (number == 7 and args.gamma == 1.0) else args.gamma
    g_values = args.g_values if args.g_values is not None else [0.0, 1.0, 10.0]
    meta = dict(_base_meta(args, f"fig{number}"), gamma=gamma, g_values=g_values,
                max_distance=args.max_distance)
    rows = []
    for g in g_values:
        params = ModelParams(J=args.J, gamma=gamma, g=g,
                             N=args.n_sites, kappa=args.kappa)
        table = kernels(params, args.max_distance, args.grid)
        for i, d in enumerate(table.distances):
            rows.append((
                g, d,
                table.f_u[i].real, table.f_u[i].imag,
                table.f_v[i].real, table.f_v[i].imag,
                table.f_uv[i].real, table.f_uv[i].imag,
                abs(table.f_u[i]), abs(table.f_v[i]), abs(table.f_uv[i]),
            ))
    return [_write_table(
        out, args.format, meta,
        ["g", "distance", "f_u_real", "f_u_imag", "f_v_real", "f_v_imag",
         "f_uv_real", "f_uv_imag", "abs_f_u", "abs_f_v", "abs_f_uv"], rows,
    )]


def _run_fig(args) -> int:
    dispatch = {1: _fig1, 2: _fig2, 3: _fig3, 4: _fig4, 5: _fig5,
                6: lambda a: _fig_kernels(a, 6), 7: lambda a: _fig_kernels(a, 7)}
    paths = dispatch[args.number](args)
    for path in paths:
        print(path)
    return 0


def _run_oracle(args) -> int:
    checks = tuple(str(args.check).split(","))
    results = run_checks(n_sites=args.n, checks=checks)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")
    if args.out:
        meta = {"task": "oracle", "qcount_version": __version__,
                "n_sites": args.n, "check": args.check, "format": args.format}
        _write_table(_resolve_out(args.out), args.format, meta,
                     ["check", "passed", "detail"],
                     [(r.name, r.passed, r.detail) for r in results])
    return 0 if all(r.passed for r in results) else 2


def run(argv=None) -> int:
    """Entry point returning the process exit code."""
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        cfg = _load_config(argv)
        parser = _build_parser(cfg)
        args = parser.parse_args(argv)
        if cfg.get("task") not in (None, args.command,
                                   f"{args.command}{getattr(args, 'number', '')}"):
            raise _UsageError(
                f"config task {cfg['task']!r} does not match the {args.command!r} invocation"
            )
        if args.command == "fig":
            return _run_fig(args)
        return _run_oracle(args)
    except _UsageError as err:
        print(f"qcount: error: {err}", file=sys.stderr)
        return 1
    except (InconsistentCoefficients, IntegratorError) as err:
        print(f"qcount: numerical inconsistency: {err}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"qcount: error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
