"""Command-line entry points.

Subcommands: simulate, sweep, verify, norms, render. Exit codes are the only
machine contract: 0 = everything passed, 1 = at least one check failed,
2 = usage or configuration error. Stdout is human-oriented.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ConfigError, RunConfig, dump_config, make_recipe, parse_config
from .harness import SweepPlan, cauchy_ratio, run_sweep
from .initial_data import DataError, TruncationParams, build_truncated_data, generate_w0
from .monitors import (
    Verdict,
    check_cordoba,
    check_energy_inequality,
    check_gronwall_envelope,
    check_l2_hhalf_budget,
    check_lp_dissipation,
    check_max_principle,
    check_riesz_uloc,
    check_weak_form_residual,
    write_summary,
    write_verdicts_csv,
)
from .solver import run_simulation
from .spectral import SpectralError, make_grid
from .storage import StorageError, load_run, save_run, update_output_manifest

USAGE_ERROR = 2
CHECK_FAILURE = 1


def _build_windows_if_possible(grid, enabled: bool):
    if not enabled:
        return None
    from .windows import build_windows

    side = round(grid.L)
    if abs(grid.L - side) > 1e-9 or grid.L < 8.0 or grid.n % side != 0:
        print(f"# window monitors disabled: torus L={grid.L} not unit-lattice friendly")
        return None
    return build_windows(grid, "phi0")


def _standard_checks(traj, ledger, cfg: RunConfig | None, windows) -> list[Verdict]:
    tol_max = cfg.tol_max_principle if cfg else 1e-3
    tol_lp = cfg.tol_lp if cfg else 1e-2
    tol_bal = cfg.tol_balance if cfg else 5e-3
    tol_cord = cfg.tol_cordoba if cfg else 1e-6
    tol_cons = cfg.tol_consistency if cfg else 0.02
    verdicts = [check_max_principle(ledger, tol=tol_max)]
    for p in (2, 4, 8):
        verdicts.append(check_lp_dissipation(traj, p, ledger=ledger,
                                             tol=tol_lp, balance_tol=tol_bal))
    last = traj.theta(len(traj.times) - 1)
    for g in ("square", "quartic"):
        verdicts.append(check_cordoba(last, traj.alpha, g, tol=tol_cord))
    if windows is not None:
        energy_verdict, c_emp = check_energy_inequality(
            traj, traj.s, windows, consistency_tol=tol_cons)
        verdicts.append(energy_verdict)
        verdicts.append(check_gronwall_envelope(traj, traj.s, windows, c_emp=c_emp))
        budget_verdict, _ = check_l2_hhalf_budget(traj, traj.s, windows)
        verdicts.append(budget_verdict)
        riesz_verdict, _ = check_riesz_uloc(traj, traj.s, windows)
        verdicts.append(riesz_verdict)
        etas = [windows.window_field(i)
                for i in np.linspace(0, windows.num_windows - 1, 3).astype(int)]
        verdicts.append(check_weak_form_residual(traj, etas))
    return verdicts


def _emit_verdicts(run_dir, verdicts: list[Verdict]) -> int:
    write_verdicts_csv(os.path.join(run_dir, "verdicts.csv"), verdicts)
    write_summary(os.path.join(run_dir, "report.txt"), verdicts)
    for v in verdicts:
        print(v.summary_line())
    return CHECK_FAILURE if any(v.failed for v in verdicts) else 0


def cmd_simulate(args) -> int:
    with open(args.config) as fh:
        cfg = parse_config(fh.read())
    grid = make_grid(cfg.n, cfg.L)
    w0 = generate_w0(make_recipe(cfg), grid)
    params = TruncationParams(R=cfg.R, eps=cfg.eps_value)
    theta0, _, residual_mean = build_truncated_data(w0, cfg.s, params)
    windows = _build_windows_if_possible(grid, cfg.monitor_windows)
    run_id = args.run_id or f"run_seed{cfg.seed}"
    out_root = args.output or cfg.directory
    run_dir = os.path.join(out_root, run_id)
    os.makedirs(run_dir, exist_ok=True)
    if cfg.exploratory:
        print(f"# exploratory run flagged: s={cfg.s}, alpha={cfg.alpha}, kappa={cfg.kappa}")
    traj, ledger = run_simulation(
        theta0, alpha=cfg.alpha, s=cfg.s, T=cfg.T, cadence=cfg.snapshot_cadence,
        kappa=cfg.kappa, c_cfl=cfg.cfl, dt_max=cfg.dt_max, params=params,
        windows=windows, cordoba_check=cfg.monitor_cordoba, dump_dir=run_dir,
    )
    save_run(run_dir, traj, ledger, config_text=dump_config(cfg),
             extra={"seed": cfg.seed, "residual_mean": residual_mean,
                    "exploratory": cfg.exploratory})
    update_output_manifest(out_root, run_id, "simulate")
    print(f"# run written to {run_dir}")
    if not cfg.monitors_enabled:
        return 0
    return _emit_verdicts(run_dir, _standard_checks(traj, ledger, cfg, windows))


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        cfg = parse_config(fh.read())
    if not cfg.sweep_R_list or not cfg.sweep_eps_list:
        raise ConfigError("sweep requires sweep.R_list and sweep.eps_list")
    plan = SweepPlan(config=cfg, R_list=cfg.sweep_R_list,
                     eps_list=cfg.sweep_eps_list, omega_radius=cfg.omega_radius)
    out_root = args.output or cfg.directory
    sweep_id = args.run_id or f"sweep_seed{cfg.seed}"
    out_dir = os.path.join(out_root, sweep_id)
    members, table = run_sweep(plan, out_dir=out_dir)
    verdict = cauchy_ratio(table)
    write_verdicts_csv(os.path.join(out_dir, "verdicts.csv"), [verdict])
    write_summary(os.path.join(out_dir, "report.txt"), [verdict])
    update_output_manifest(out_root, sweep_id, "sweep")
    print(verdict.summary_line())
    print(f"# sweep written to {out_dir}")
    return CHECK_FAILURE if verdict.failed else 0


def cmd_verify(args) -> int:
    traj, ledger, manifest = load_run(args.run)
    windows = _build_windows_if_possible(traj.grid, not args.no_windows)
    return _emit_verdicts(args.run, _standard_checks(traj, ledger, None, windows))


def cmd_norms(args) -> int:
    from .norms import (
        NormReport,
        gagliardo_seminorm,
        hs_norm,
        hs_uloc_norm,
        lp_uloc_norm,
        write_norm_reports_csv,
    )
    from .storage import read_snapshot

    header, field = read_snapshot(args.snapshot)
    s = args.s if args.s is not None else float(header.get("s", 0.6))
    reports: list[NormReport] = []
    try:
        for p in (2, 4):
            reports.append(lp_uloc_norm(field, p))
        reports.append(lp_uloc_norm(field, np.inf))
    except SpectralError as exc:
        print(f"# uloc cell norms unavailable: {exc}")
    print(f"H^{s:g} norm            : {hs_norm(field, s):.9g}")
    if 0.0 < s < 1.0:
        print(f"Gagliardo seminorm^2  : {gagliardo_seminorm(field, s):.9g}")
    windows = _build_windows_if_possible(field.grid, True)
    if windows is not None:
        for variant in ("a", "b"):
            reports.append(hs_uloc_norm(field, s, windows, variant=variant))
    for rep in reports:
        print(f"{rep.norm_id:22s}: sup={rep.sup:.9g} at window {rep.arg_sup}")
    if args.csv:
        write_norm_reports_csv(args.csv, reports)
        print(f"# per-window values written to {args.csv}")
    return 0


def cmd_render(args) -> int:
    from .render import render_cauchy, render_run

    sweep_manifest = os.path.join(args.run, "sweep_manifest.json")
    if os.path.exists(sweep_manifest):
        import csv as _csv

        from .harness import CauchyTable

        with open(os.path.join(args.run, "cauchy_table.csv"), newline="") as fh:
            rows = list(_csv.reader(fh))
        labels = []
        for lab in rows[0][1:]:
            r, e = lab.strip("()").split(",")
            labels.append((float(r), float(e)))
        dist = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
        fig_dir = os.path.join(args.run, "figures")
        os.makedirs(fig_dir, exist_ok=True)
        out = os.path.join(fig_dir, "cauchy_decay.png")
        render_cauchy(out, CauchyTable(labels=labels, distances=dist))
        print(f"# wrote {out}")
        return 0
    traj, ledger, _ = load_run(args.run)
    for path in render_run(args.run, traj, ledger):
        print(f"# wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqglab",
        description="Pseudo-spectral SQG simulation and verification toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configured simulation with checks")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None, help="output root (default from config)")
    p.add_argument("--run-id", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a truncation/regularization sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--run-id", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="re-run monitor checks on a stored run")
    p.add_argument("--run", required=True)
    p.add_argument("--no-windows", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("norms", help="print norm reports for one snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("render", help="write PNG figures for a stored run or sweep")
    p.add_argument("--run", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors already
        return int(exc.code) if exc.code is not None else USAGE_ERROR
    try:
        return args.func(args)
    except (ConfigError, DataError, SpectralError, StorageError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # solver blow-ups and friends: a failed run
        print(f"run failed: {exc}", file=sys.stderr)
        return CHECK_FAILURE


if __name__ == "__main__":
    sys.exit(main())
