"""Command-line experiment runner: parse config, simulate, write artifacts.

Outputs per run: ``log.csv`` (one row per control step, schema versioned in
the header line), ``summary.txt`` (flat key = value), ``excitation.csv``
(t, lambda_min, window_count).  Exit codes: 0 completed, 1 I/O or
configuration failure, 2 barrier violation, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .config import parse_config, parse_diagnostics_config
from .diagnostics import history_from_records, lk_functionals, skew_residual
from .errors import ConfigError, SyncSimError
from .robot import JointState, KinematicParams, true_dynamic_params
from .sim import LogRecord, RunResult, SimConfig, run

CSV_SCHEMA = "sync-sim-log-v1"

# flattened LogRecord fields, lower case; vector components are suffixed _1.._n
CSV_COLUMNS = (
    ["t"]
    + [f"theta_{i}" for i in (1, 2)]
    + [f"theta_dot_{i}" for i in (1, 2)]
    + [f"p_{i}" for i in (1, 2)]
    + [f"p_h_{i}" for i in (1, 2)]
    + [f"p_ht_{i}" for i in (1, 2)]
    + [f"e_p_{i}" for i in (1, 2)]
    + [f"e_pt_{i}" for i in (1, 2)]
    + [f"eta_{i}" for i in (1, 2)]
    + [f"eta_t_{i}" for i in (1, 2)]
    + [f"tau_{i}" for i in (1, 2)]
    + [f"zeta_j_hat_{i}" for i in (1, 2)]
    + [f"zeta_y_hat_{i}" for i in range(1, 8)]
    + ["norm_e_p", "norm_e_pt", "v1", "lambda_min"]
    + [f"constraint_margin_{i}" for i in (1, 2)]
)

DIAG_COLUMNS = ["p1", "p2", "p3", "skew_residual"]

EXIT_OK = 0
EXIT_IO = 1
EXIT_BARRIER = 2
EXIT_NUMERIC = 3

_TERMINATION_CODES = {
    "completed": EXIT_OK,
    "barrier_violation": EXIT_BARRIER,
    "numeric_failure": EXIT_NUMERIC,
}


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _record_row(r: LogRecord) -> list[float]:
    return ([r.t] + list(r.theta) + list(r.theta_dot) + list(r.p) + list(r.p_h)
            + list(r.p_hT) + list(r.e_p) + list(r.e_pT) + list(r.eta)
            + list(r.eta_T) + list(r.tau) + list(r.zeta_j_hat)
            + list(r.zeta_y_hat) + [r.norm_e_p, r.norm_e_pT, r.v1, r.lambda_min]
            + list(r.constraint_margin))


def _diagnostic_rows(result: RunResult, cfg: SimConfig, diag_cfg) -> list[list[float]]:
    zj_true = KinematicParams([cfg.robot.l1, cfg.robot.l2])
    zy_true = true_dynamic_params(cfg.robot)
    rows = []
    for i, r in enumerate(result.records):
        hist = history_from_records(result.records, cfg.bounds, zj_true,
                                    cfg.gains.delay, end_index=i,
                                    source=cfg.trajectory)
        p1, p2, p3 = lk_functionals(hist, diag_cfg)
        js = JointState(theta=r.theta, theta_dot=r.theta_dot, t=r.t)
        rows.append([p1, p2, p3, skew_residual(js, zy_true, r.e_p)])
    return rows


def write_outputs(result: RunResult, cfg: SimConfig, out_dir: str | Path,
                  diag_cfg=None) -> dict[str, Path]:
    """Write log.csv, summary.txt and excitation.csv into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"log": out / "log.csv", "summary": out / "summary.txt",
             "excitation": out / "excitation.csv"}

    columns = list(CSV_COLUMNS)
    diag_rows = None
    if diag_cfg is not None:
        columns += DIAG_COLUMNS
        diag_rows = _diagnostic_rows(result, cfg, diag_cfg)
    with open(paths["log"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + f" # {CSV_SCHEMA}\n")
        for i, r in enumerate(result.records):
            row = _record_row(r)
            if diag_rows is not None:
                row += diag_rows[i]
            fh.write(",".join(_fmt(x) for x in row) + "\n")

    s = result.summary
    summary_items = [
        ("schema", "sync-sim-summary-v1"),
        ("termination", s.termination),
        ("steps", s.steps),
        ("t_end", _fmt(s.t_end)),
        ("final_norm_e_p", _fmt(s.final_norm_e_p)),
        ("final_norm_e_pt", _fmt(s.final_norm_e_pT)),
        ("peak_norm_e_p", _fmt(s.peak_norm_e_p)),
        ("peak_norm_e_pt", _fmt(s.peak_norm_e_pT)),
        ("min_constraint_margin_1", _fmt(s.min_constraint_margin[0])),
        ("min_constraint_margin_2", _fmt(s.min_constraint_margin[1])),
        ("zeta_j_final_1", _fmt(s.zeta_j_final[0])),
        ("zeta_j_final_2", _fmt(s.zeta_j_final[1])),
        ("t_first_excited", "" if s.t_first_excited is None else _fmt(s.t_first_excited)),
        ("damped_inverse_events", s.damped_inverse_events),
        ("wall_clock_s", _fmt(s.wall_clock_s)),
    ]
    with open(paths["summary"], "w", encoding="utf-8", newline="\n") as fh:
        for key, value in summary_items:
            fh.write(f"{key} = {value}\n")

    with open(paths["excitation"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,lambda_min,window_count\n")
        for t, lam, count in result.excitation:
            fh.write(f"{_fmt(t)},{_fmt(lam)},{count}\n")
    return paths


def execute(cfg: SimConfig, out_dir: str | Path, diag_cfg=None,
            quiet: bool = False) -> int:
    """Run one experiment and write its artifacts; returns the exit code."""
    result = run(cfg)
    try:
        paths = write_outputs(result, cfg, out_dir, diag_cfg)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    if not quiet:
        s = result.summary
        print(f"termination: {s.termination} after {s.steps} steps "
              f"(t_end={s.t_end:.2f}s, wall={s.wall_clock_s:.2f}s)")
        print(f"final |e_p|={s.final_norm_e_p:.4g}  |e_pT|={s.final_norm_e_pT:.4g}  "
              f"zeta_j=[{s.zeta_j_final[0]:.4g}, {s.zeta_j_final[1]:.4g}]")
        print(f"log: {paths['log']}")
    return _TERMINATION_CODES[result.summary.termination]


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="sync-sim",
        description="Closed-loop simulation of delayed task-space synchronization "
                    "for a planar two-link arm.")
    ap.add_argument("--config", metavar="PATH", default=None,
                    help="INI configuration file (defaults used when omitted)")
    ap.add_argument("--out", metavar="DIR", default=None,
                    help="output directory (fallback: $SYNC_SIM_OUT, then ./out)")
    ap.add_argument("--set", metavar="KEY=VAL", action="append", default=[],
                    dest="overrides", help="override any config field (repeatable)")
    ap.add_argument("--no-delay", action="store_true",
                    help="run the delay-free variant (sets delay to 0)")
    ap.add_argument("--diagnostics", action="store_true",
                    help="append diagnostic columns (p1, p2, p3, skew_residual)")
    ap.add_argument("--quiet", action="store_true", help="suppress the summary printout")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    args = ap.parse_args(argv)

    out_dir = args.out or os.environ.get("SYNC_SIM_OUT") or "out"
    overrides = list(args.overrides)
    if args.no_delay:
        overrides.append("gains.delay=0")
    try:
        cfg = parse_config(args.config, overrides)
        diag_cfg = parse_diagnostics_config(args.config, overrides) if args.diagnostics else None
        return execute(cfg, out_dir, diag_cfg, quiet=args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SyncSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
