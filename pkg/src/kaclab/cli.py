"""Deterministic command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 probe violation.  All numeric output uses shortest round-trip decimals
and fixed orderings, so identical configs and seeds produce byte-identical
files for any ``--threads`` value.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import parallel
from .config import (
    PRESETS,
    RunConfig,
    config_digest,
    load_config,
    preset,
    to_ini,
)
from .errors import ConfigError, KaclabError, UnsupportedRegime
from .evolve import moment_track, simulate
from .gevrey import apriori_tracker, gevrey_fit
from .kernel import build_rule
from .probes import PROBE_IDS, run_probe_by_id
from .radial3d import (
    Kernel3D,
    RadialProfile3D,
    convert_kernel,
    project_to_kac,
    projected_moments,
    rhs_consistency,
)
from .spectral import GridSpec, SpectralState, init_from_profile

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PROBE = 4


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats (bit-stable CSV diffs)."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _resolve_out(args, cfg) -> Path:
    out = args.out or cfg.output_dir or os.environ.get("KACLAB_OUT") or "kaclab-out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_run_config(args) -> RunConfig:
    if getattr(args, "preset", None) and getattr(args, "config", None):
        raise ConfigError(["--preset and --config are mutually exclusive"])
    if getattr(args, "preset", None):
        return preset(args.preset)
    if getattr(args, "config", None):
        return load_config(args.config)
    return RunConfig().validate()


def _write_manifest(out: Path, cfg: RunConfig, files):
    manifest = {
        "tool": "kaclab",
        "config_sha256": config_digest(cfg),
        "config_ini": to_ini(cfg),
        "files": {name: _sha256(out / name) for name in sorted(files)},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def cmd_simulate(args) -> int:
    cfg = _load_run_config(args)
    out = _resolve_out(args, cfg)
    grid = cfg.grid.to_spec()
    spec = cfg.kernel.to_spec()
    rule = build_rule(spec, tol=cfg.kernel.tol,
                      resolve_frequency=max(64.0, 3.2 * grid.xi_max))
    state = init_from_profile(cfg.profile.to_profile(), grid)
    times = np.linspace(0.0, cfg.integrator.T, cfg.integrator.n_outputs)
    traj = simulate(state, spec, rule, cfg.integrator.T, output_times=times,
                    scheme=cfg.integrator.scheme,
                    dt=cfg.integrator.dt if cfg.integrator.scheme == "rk4" else None,
                    reltol=cfg.integrator.reltol, abstol=cfg.integrator.abstol)

    files = []
    for name, series in traj.monitors.items():
        fname = f"monitor_{name}.csv"
        _write_csv(out / fname, ["t", "value"],
                   zip(traj.times, series))
        files.append(fname)

    snap_meta = []
    for i, (t, st) in enumerate(zip(traj.times, traj.states)):
        fname = f"snapshot_{i:04d}.csv"
        _write_csv(out / fname, ["xi", "f_hat"], zip(grid.xi(), st.values))
        files.append(fname)
        snap_meta.append({
            "file": fname, "time": float(t),
            "grid": {"xi_max": grid.xi_max, "n": grid.n, "v_max": grid.v_max},
            "convention": "fhat(xi) = int exp(-i v xi) f(v) dv; even real",
        })
    (out / "snapshots.json").write_text(json.dumps(snap_meta, indent=2))
    files.append("snapshots.json")

    fit = gevrey_fit(traj, s_prime=cfg.diagnostics.s_prime,
                     floor=cfg.diagnostics.floor)
    _write_csv(out / "gevrey_fit.csv",
               ["t", "c_fit", "residual", "window_lo", "window_hi", "saturated"],
               [(p.t, p.c, p.residual, p.window_lo, p.window_hi, int(p.saturated))
                for p in fit.points])
    files.append("gevrey_fit.csv")

    # a-priori tracker with the fitted rate (c0 policy: fitted)
    rates = fit.rates()
    tt = fit.times()
    c0_fit = float(np.polyfit(tt, rates, 1)[0]) if tt.size >= 2 else 0.0
    if c0_fit > 0:
        rep = apriori_tracker(traj, c0=c0_fit, s_prime=cfg.diagnostics.s_prime,
                              delta=cfg.diagnostics.apriori_delta)
        _write_csv(out / "apriori.csv", ["t", "y", "dy_dt", "bound_rhs"],
                   zip(rep.times, rep.y, rep.dy_dt, rep.bound_rhs))
        files.append("apriori.csv")

    try:
        mfit = moment_track(traj)
        summary = {"rate": mfit.rate, "r_squared": mfit.r_squared,
                   "asymptote": mfit.asymptote}
    except KaclabError:
        summary = {"rate": None, "note": "degenerate moment series"}
    if c0_fit > 0:
        summary["c0_fitted"] = c0_fit
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    files.append("summary.json")

    _write_manifest(out, cfg, files)
    print(f"wrote {len(files) + 1} files to {out}")
    return EXIT_OK


def cmd_probe(args) -> int:
    cfg = _load_run_config(args)
    out = _resolve_out(args, cfg)
    spec = cfg.kernel.to_spec()
    rule = build_rule(spec, tol=cfg.kernel.tol)
    grid = GridSpec(xi_max=16.0, n=128, v_max=8.0,
                    interp_order=cfg.grid.interp_order)
    total_violations = 0
    files = []
    constants = {}
    for pid in args.ids:
        report = run_probe_by_id(pid, spec, rule, grid,
                                 s_prime=cfg.diagnostics.s_prime, seed=cfg.seed)
        fname = f"probe_{pid}.json"
        (out / fname).write_text(report.to_json())
        files.append(fname)
        constants[pid] = report.fitted_constants
        total_violations += report.violation_count
        status = "pass" if report.passed else "FAIL"
        print(f"{pid}: {status} ({report.sample_count} samples, "
              f"{report.violation_count} violations)")
    (out / "probe_constants.json").write_text(
        json.dumps(constants, indent=2, sort_keys=True))
    files.append("probe_constants.json")
    _write_manifest(out, cfg, files)
    return EXIT_OK if total_violations == 0 else EXIT_PROBE


def _read_radial_csv(path: Path) -> RadialProfile3D:
    lines = path.read_text().splitlines()
    if not lines or [c.strip() for c in lines[0].split(",")] != ["r", "g"]:
        raise ConfigError([f"{path}:1: expected header 'r,g'"])
    r_vals, g_vals = [], []
    prev = -math.inf
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigError([f"{path}:{ln}: expected two comma-separated values"])
        try:
            r = float(parts[0])
            g = float(parts[1])
        except ValueError:
            raise ConfigError([f"{path}:{ln}: cannot parse {line!r}"])
        if r < prev:
            raise ConfigError([f"{path}:{ln}: radius decreases ({r} after {prev})"])
        prev = r
        r_vals.append(r)
        g_vals.append(g)
    if len(r_vals) < 2:
        raise ConfigError([f"{path}: need at least two rows"])
    return RadialProfile3D(np.array(r_vals), np.array(g_vals))


def cmd_reduce3d(args) -> int:
    cfg = _load_run_config(args)
    out = _resolve_out(args, cfg)
    profile = _read_radial_csv(Path(args.input))
    grid = cfg.grid.to_spec()
    if grid.v_max > profile.radius:
        # shrink the window to the profile support rather than erroring
        grid = GridSpec(xi_max=grid.xi_max, n=grid.n, v_max=profile.radius,
                        interp_order=grid.interp_order)
    v = grid.v_points()
    phys = project_to_kac(profile, v)
    _write_csv(out / "projected.csv", ["u", "f"], zip(v, phys.values))

    b3 = Kernel3D(K=cfg.kernel3d_K, s=cfg.kernel3d_s)
    spec1d = convert_kernel(b3)
    pm, pe = projected_moments(profile)
    report = {
        "mass_3d": profile.mass(),
        "energy_3d": profile.energy3d(),
        "projected_mass": pm,
        "projected_energy": pe,
        "mass_residual": abs(pm - profile.mass()) / max(profile.mass(), 1e-300),
        "energy_ratio_residual": abs(pe - profile.energy3d() / 3.0)
        / max(profile.energy3d() / 3.0, 1e-300),
        "kernel": {
            "declared_s": cfg.kernel3d_s,
            "tail_exponent": spec1d.tail_exp,
            "nonsingular": spec1d.nonsingular,
            "half_angle": spec1d.half_angle,
        },
    }
    if cfg.diagnostics.rhs_check and cfg.kernel3d_K > 0:
        rep = rhs_consistency(profile, b3, grid)
        report["rhs_residual"] = rep.residual
        report["rhs_sup"] = rep.sup_rhs
    (out / "reduce3d_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True))
    _write_manifest(out, cfg, ["projected.csv", "reduce3d_report.json"])
    print(f"wrote projection and report to {out}")
    return EXIT_OK


def _load_trajectory(run_dir: Path):
    from .evolve import Trajectory

    meta = json.loads((run_dir / "snapshots.json").read_text())
    manifest = json.loads((run_dir / "manifest.json").read_text())
    cfg = load_config_text(manifest["config_ini"])
    grid = cfg.grid.to_spec()
    spec = cfg.kernel.to_spec()
    times, states = [], []
    for entry in meta:
        rows = (run_dir / entry["file"]).read_text().splitlines()[1:]
        vals = np.array([float(r.split(",")[1]) for r in rows])
        times.append(entry["time"])
        states.append(SpectralState(grid, vals, entry["time"]))
    monitors = {}
    for f in run_dir.glob("monitor_*.csv"):
        rows = f.read_text().splitlines()[1:]
        monitors[f.stem.removeprefix("monitor_")] = np.array(
            [float(r.split(",")[1]) for r in rows])
    return Trajectory(grid, spec, np.array(times), states, monitors), cfg


def load_config_text(text: str) -> RunConfig:
    from .config import from_ini

    return from_ini(text)


def cmd_diag_gevrey(args) -> int:
    run_dir = Path(args.run)
    if not (run_dir / "snapshots.json").exists():
        raise ConfigError([f"{run_dir}: not a simulate output directory"])
    traj, cfg = _load_trajectory(run_dir)
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    s_prime = args.s_prime if args.s_prime is not None else cfg.diagnostics.s_prime
    floor = args.floor if args.floor is not None else cfg.diagnostics.floor
    fit = gevrey_fit(traj, s_prime=s_prime, floor=floor)
    _write_csv(out / "gevrey_fit.csv",
               ["t", "c_fit", "residual", "window_lo", "window_hi", "saturated"],
               [(p.t, p.c, p.residual, p.window_lo, p.window_hi, int(p.saturated))
                for p in fit.points])
    rates = fit.rates()
    tt = fit.times()
    c0_fit = float(np.polyfit(tt, rates, 1)[0]) if tt.size >= 2 else 0.0
    if c0_fit > 0:
        rep = apriori_tracker(traj, c0=c0_fit, s_prime=s_prime,
                              delta=cfg.diagnostics.apriori_delta)
        _write_csv(out / "apriori.csv", ["t", "y", "dy_dt", "bound_rhs"],
                   zip(rep.times, rep.y, rep.dy_dt, rep.bound_rhs))
        print(f"c0 (fitted) = {c0_fit!r}; T* = {rep.T_star!r}")
    else:
        print("no positive smoothing rate fitted (equilibrium data?)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kaclab",
        description="Fourier-space laboratory for the non-cutoff Kac equation")
    ap.add_argument("--threads", type=int, default=0,
                    help="worker threads (default: all cores; never affects results)")
    sub = ap.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and write artifacts")
    p_sim.add_argument("--config", help="INI or JSON config file")
    p_sim.add_argument("--preset", choices=sorted(PRESETS),
                       help="named scenario preset")
    p_sim.add_argument("--out", help="output directory (or $KACLAB_OUT)")
    p_sim.set_defaults(func=cmd_simulate)

    p_probe = sub.add_parser("probe", help="certify inequalities on seeded samples")
    p_probe.add_argument("ids", nargs="+", choices=list(PROBE_IDS) + ["all"],
                         help="inequality ids (or 'all')")
    p_probe.add_argument("--config", help="INI or JSON config file")
    p_probe.add_argument("--out", help="output directory (or $KACLAB_OUT)")
    p_probe.set_defaults(func=cmd_probe)

    p_red = sub.add_parser("reduce3d", help="project a radial 3D profile to 1D")
    p_red.add_argument("input", help="CSV with header 'r,g' and increasing radii")
    p_red.add_argument("--config", help="INI or JSON config file")
    p_red.add_argument("--out", help="output directory (or $KACLAB_OUT)")
    p_red.set_defaults(func=cmd_reduce3d)

    p_diag = sub.add_parser("diag", help="recompute diagnostics on a finished run")
    diag_sub = p_diag.add_subparsers(dest="diag_command", required=True)
    p_dg = diag_sub.add_parser("gevrey", help="smoothing-rate fit + a-priori series")
    p_dg.add_argument("--run", required=True, help="simulate output directory")
    p_dg.add_argument("--out", help="directory for diagnostic CSVs")
    p_dg.add_argument("--s-prime", type=float, dest="s_prime")
    p_dg.add_argument("--floor", type=float)
    p_dg.set_defaults(func=cmd_diag_gevrey)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    parallel.set_num_threads(args.threads)
    if getattr(args, "ids", None) and "all" in args.ids:
        args.ids = list(PROBE_IDS)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args)
    except (ConfigError, UnsupportedRegime) as exc:
        record = {"error": type(exc).__name__, "detail": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return EXIT_CONFIG
    except KaclabError as exc:
        record = {"error": type(exc).__name__, "detail": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
