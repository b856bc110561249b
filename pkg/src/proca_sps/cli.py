"""Command-line driver: ``proca-sps run | sweep | analyze``.

Every subcommand takes ``--config FILE`` plus flags named after the
:class:`RunConfig` fields in kebab-case; flags win over the file. The file is
either JSON or flat ``key = value`` lines (``#`` starts a comment, values are
parsed as JSON when possible, e.g. ``snapshot_times = [0, 19]``).

Exit status: 0 when the run finished or diverged (divergence is a result, not
an error), 1 on solver failure, 2 on an invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import constraint_eigenvalues, convergence_order, mode_table, stability_report
from .diagnostics import DiagnosticsRecord
from .runner import ConfigError, RunConfig, RunResult, simulate

SCHEMA_VERSION = 1
EXIT_OK, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2
DEFAULT_CHECKPOINTS = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0)


# configuration


def read_config_file(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        value = value.strip()
        try:
            data[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            data[key.strip()] = value.strip("'\"")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    mapping = read_config_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        if f.name in vars(args):
            key = "lambda" if f.name == "lambda_" else f.name
            mapping.pop(key, None)
            mapping[f.name] = getattr(args, f.name)
    try:
        return RunConfig.from_mapping(mapping).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# output helpers


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_series(path, records: list[DiagnosticsRecord]) -> None:
    cols = DiagnosticsRecord.columns()
    write_csv(path, cols, ([getattr(r, c) for c in cols] for r in records))


def snapshot_name(t: float) -> str:
    return f"snapshot_t{t:g}.csv"


def write_snapshot(path, state, requested_t: float) -> None:
    """A1 on the interior, row-major (k3 slowest, k1 fastest).

    ``on_diagonal`` is 1 for cells with ``k1 == k2`` (the x = y line) on
    square grids and empty otherwise.
    """
    g = state.grid
    coords = [g.coordinates(ax) for ax in (1, 2, 3)]
    a1 = state.A[0].interior
    square = g.n1 == g.n2
    meta = {"schema_version": SCHEMA_VERSION, "field": "A1", "t": float(state.t),
            "requested_t": requested_t, "step": state.step_index, "n1": g.n1, "n2": g.n2,
            "n3": g.n3, "dx1": g.dx1, "dx2": g.dx2, "dx3": g.dx3, "origin": -0.5}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k1", "k2", "k3", "x", "y", "z", "A1", "on_diagonal"])
        for k3 in range(g.n3):
            for k2 in range(g.n2):
                for k1 in range(g.n1):
                    diag = (1 if k1 == k2 else 0) if square else None
                    w.writerow([k1, k2, k3, _fmt(coords[0][k1]), _fmt(coords[1][k2]),
                                _fmt(coords[2][k3]), _fmt(a1[k3, k2, k1]), _fmt(diag)])


def read_snapshot(path) -> tuple[dict, dict]:
    """Inverse of :func:`write_snapshot`: (metadata, columns as arrays)."""
    with open(path, encoding="utf-8") as fh:
        meta = json.loads(fh.readline()[1:])
        rows = list(csv.DictReader(fh))
    cols = {k: np.array([float(r[k]) if r[k] != "" else np.nan for r in rows])
            for k in rows[0]} if rows else {}
    return meta, cols


def run_summary(result: RunResult) -> dict:
    cfg = result.config
    summary = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": cfg.to_mapping(),
        "termination": result.termination,
        "message": result.message,
        "final_valid_time": result.final_valid_time,
        "final_time": float(result.final_state.t),
        "steps_taken": result.steps_taken,
        "dt": cfg.dt,
        "hc0": result.hc0,
        "timings_s": result.timings,
        "snapshots": [snapshot_name(t) for t in sorted(result.snapshots)],
        "workers": os.environ.get("PROCA_SPS_WORKERS"),
    }
    try:
        rep = stability_report(cfg.scheme, cfg.params, cfg.lambda_, cfg.grid)
        summary["stability"] = rep.summary(cfg.params.cdt)
    except Exception as exc:  # informational only
        summary["stability"] = {"error": str(exc)}
    return summary


# subcommands


def do_run(cfg: RunConfig, checkpoint_times=()) -> tuple[int, RunResult]:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_mapping(), indent=2) + "\n",
                                     encoding="utf-8")
    result = simulate(cfg, checkpoint_times=checkpoint_times)
    write_series(out / "series.csv", result.records)
    for t, state in result.snapshots.items():
        write_snapshot(out / snapshot_name(t), state, t)
    (out / "run.json").write_text(json.dumps(run_summary(result), indent=2) + "\n",
                                  encoding="utf-8")
    code = EXIT_SOLVER if result.termination == "solver_failure" else EXIT_OK
    return code, result


def _sweep_one(cfg: RunConfig, checkpoints) -> dict:
    row = {"n": cfg.n1, "dx": cfg.grid.dx1, "scheme": cfg.scheme}
    try:
        _, result = do_run(cfg, checkpoints)
    except Exception as exc:  # record and keep sweeping
        row.update(termination="error", final_valid_time=None, message=str(exc))
        return row
    by_step = {r.step: r for r in result.records}
    for t in checkpoints:
        rec = by_step.get(cfg.step_of(t))
        row[f"c2_l2_t{t:g}"] = rec.c2_l2 if rec is not None else None
    row.update(termination=result.termination, final_valid_time=result.final_valid_time,
               message=result.message)
    return row


def do_sweep(base: RunConfig, resolutions, schemes, checkpoints=DEFAULT_CHECKPOINTS,
             jobs: int = 1) -> list[dict]:
    checkpoints = tuple(float(t) for t in checkpoints if t <= base.t_end)
    out = Path(base.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    configs = []
    for scheme in schemes:
        for n in resolutions:
            mapping = base.to_mapping()
            mapping.update(scheme=scheme, n1=n, n2=n, out_dir=str(out / f"{scheme}_n{n}"))
            configs.append(RunConfig.from_mapping(mapping).validate())
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, configs, [checkpoints] * len(configs)))
    else:
        rows = [_sweep_one(c, checkpoints) for c in configs]

    # order of ||C2(0)|| between consecutive resolutions of one scheme
    for scheme in schemes:
        mine = sorted((r for r in rows if r["scheme"] == scheme), key=lambda r: r["n"])
        prev = None
        for r in mine:
            r["c2_0_order"] = None
            e = r.get("c2_l2_t0")
            if prev is not None and e and prev.get("c2_l2_t0"):
                r["c2_0_order"] = convergence_order({prev["dx"]: prev["c2_l2_t0"], r["dx"]: e})
            prev = r

    header = (["n", "dx", "scheme", "final_valid_time", "termination"]
              + [f"c2_l2_t{t:g}" for t in checkpoints] + ["c2_0_order", "message"])
    write_csv(out / "sweep.csv", header, ([r.get(h) for h in header] for r in rows))
    (out / "sweep.json").write_text(json.dumps(
        {"schema_version": SCHEMA_VERSION, "base_config": base.to_mapping(),
         "resolutions": list(resolutions), "schemes": list(schemes),
         "checkpoints": list(checkpoints), "runs": rows}, indent=2) + "\n", encoding="utf-8")
    return rows


def do_analyze(cfg: RunConfig) -> dict:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = mode_table(cfg.params, cfg.lambda_, cfg.grid)
    rows = []
    for k, h in enumerate(table["h"]):
        rep = constraint_eigenvalues(h, cfg.p2, cfg.lambda_)
        ep, em = rep.eigenvalues
        rows.append([*h, table["discriminant"][k], ep.real, ep.imag, em.real, em.imag,
                     table["discriminant_modified"][k], table["radius_sps"][k],
                     table["radius_ss"][k]])
    header = ["h1", "h2", "h3", "discriminant", "eig_plus_re", "eig_plus_im", "eig_minus_re",
              "eig_minus_im", "discriminant_modified", "radius_sps", "radius_ss"]
    write_csv(out / "modes.csv", header, rows)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_mapping(),
        "n_modes": len(rows),
        "min_discriminant": float(np.min(table["discriminant"])),
        "min_discriminant_modified": float(np.min(table["discriminant_modified"])),
        "max_radius_sps": float(np.max(table["radius_sps"])),
        "max_radius_ss": float(np.max(table["radius_ss"])),
    }
    (out / "analysis.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return summary


# argument parsing


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON or key = value config file")
    S = argparse.SUPPRESS
    for f in fields(RunConfig):
        flag = "--lambda" if f.name == "lambda_" else "--" + f.name.replace("_", "-")
        kw = {"dest": f.name, "default": S}
        if f.name == "snapshot_times":
            kw.update(type=float, nargs="*")
        elif f.name in ("n1", "n2", "n3", "max_iter", "report_every"):
            kw["type"] = int
        elif f.name in ("scheme", "solver", "out_dir", "precision", "initial_file"):
            kw["type"] = str
        else:
            kw["type"] = float
        p.add_argument(flag, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proca-sps", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="evolve one configuration")
    _add_config_flags(p_run)
    p_sweep = sub.add_parser("sweep", help="run several resolutions and schemes")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--resolutions", type=int, nargs="+", default=[50, 100, 200])
    p_sweep.add_argument("--schemes", nargs="+", default=["sps", "ss"], choices=["sps", "ss"])
    p_sweep.add_argument("--checkpoints", type=float, nargs="+", default=list(DEFAULT_CHECKPOINTS))
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_an = sub.add_parser("analyze", help="write the per-mode analysis table")
    _add_config_flags(p_an)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        parser.error(str(exc))  # exits with EXIT_USAGE
    if args.command == "run":
        code, result = do_run(cfg)
        print(f"{result.termination}: t = {result.final_valid_time:g} "
              f"({result.steps_taken} steps) -> {cfg.out_dir}")
        if result.message:
            print(result.message, file=sys.stderr)
        return code
    if args.command == "sweep":
        rows = do_sweep(cfg, args.resolutions, args.schemes, args.checkpoints, args.jobs)
        for r in rows:
            print(f"{r['scheme']:>3} n={r['n']:<4} {r['termination']:<15} "
                  f"t_valid={_fmt(r['final_valid_time'])}")
        return EXIT_OK
    summary = do_analyze(cfg)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
