"""Command line front end: run, check, braess, optimize, w2."""

import argparse
import hashlib
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import (diagnostics_csv, frame_svg, read_cloud_csv, trajectory_csv,
                        write_manifest)
from .errors import CrowdsweepError
from .scenario_io import load_scenario, serialize_scenario, validate_scenario
from .scenarios import mass_in_region, optimize_obstacle, run_scenario
from .sweeper import (residual_report, speed_report, stability_gap, support_report,
                      w2_lipschitz_report, CheckRow, run)
from .transport import ParticleCloud, w2

ALL_CHECKS = ("support", "speed", "cone", "noflux", "stability")


def _resolve_scenario_path(name):
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("crowdsweep").joinpath("presets", f"{name}.ini")
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"no scenario file or bundled preset named {name!r}")


def _load(args):
    path = _resolve_scenario_path(args.scenario)
    scenario = load_scenario(path, validate=False)
    overrides = {}
    if getattr(args, "tau", None) is not None:
        overrides["tau"] = args.tau
    if getattr(args, "particles", None) is not None:
        overrides["n"] = args.particles
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "substeps", None) is not None:
        overrides["substeps"] = args.substeps
    if getattr(args, "integrator", None) is not None:
        overrides["integrator"] = args.integrator
    scenario = scenario.with_overrides(**overrides)
    validate_scenario(scenario)
    return path, scenario


def _manifest_data(path, scenario, args, checks):
    text = Path(path).read_text(encoding="utf-8")
    return {
        "tool": "crowdsweep",
        "version": __version__,
        "scenario_path": str(path),
        "scenario_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "resolved": {
            "name": scenario.name, "tau": scenario.tau, "horizon": scenario.horizon,
            "n": scenario.n, "seed": scenario.seed, "substeps": scenario.substeps,
            "integrator": scenario.integrator, "strict": scenario.strict,
        },
        "frames_every": getattr(args, "frames_every", 0) or 0,
        "checks": list(checks),
        "status": "running",
        "timings_s": {},
    }


def _perturbed_sibling(scenario):
    """Same scenario with the obstacle nudged; used by the stability check."""
    delta = 0.01
    ob = dict(scenario.obstacle or {})
    if not ob or ob.get("kind") == "none":
        return None
    if ob["kind"] == "ellipse":
        cx, cy = ob["center"]
        ob["center"] = (cx + delta, cy)
    else:
        ob["offset"] = float(ob.get("offset", 0.0)) + delta
    return scenario.with_overrides(obstacle=ob)


def _collect_checks(scenario, traj, checks):
    rows = []
    lip = traj.lipschitz_l + traj.lipschitz_m
    if "support" in checks:
        rows += support_report(traj)
    if "speed" in checks:
        rows += speed_report(traj)
        rows += w2_lipschitz_report(traj, sampled_pairs=64)
    windows = len(traj.velocities) // 2
    stride = max(1, windows // 128)
    if "cone" in checks:
        for row in residual_report(traj, which="cone", window_stride=stride):
            bound = 3.0 * traj.lipschitz_l + 2.0 * traj.lipschitz_m + 1e-9
            rows.append(CheckRow(row.t, row.name, row.value, bound, row.value <= bound))
    if "noflux" in checks:
        for row in residual_report(traj, which="noflux", window_stride=stride):
            bound = 1.0 + 2.0 * lip + 1e-9
            rows.append(CheckRow(row.t, row.name, row.value, bound, row.value <= bound))
    if "stability" in checks:
        sibling = _perturbed_sibling(scenario)
        if sibling is not None:
            other = run_scenario(sibling)
            times, slack = stability_gap(traj, other, samples=1024,
                                         workspace=scenario.build_workspace())
            for t, s in zip(times[:: max(1, len(times) // 128)],
                            slack[:: max(1, len(times) // 128)]):
                rows.append(CheckRow(float(t), "stability_slack", float(s), -1e-6,
                                     bool(s >= -1e-6)))
    return rows


def cmd_run(args, diagnostics_only=False):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    checks = args.check or ([] if not diagnostics_only else ["all"])
    if "all" in checks:
        checks = list(ALL_CHECKS)

    t0 = time.perf_counter()
    path, scenario = _load(args)
    manifest = _manifest_data(path, scenario, args, checks)
    manifest_path = out / "manifest.json"
    write_manifest(manifest_path, manifest)
    manifest["timings_s"]["load"] = round(time.perf_counter() - t0, 6)

    t0 = time.perf_counter()
    traj = run_scenario(scenario)
    manifest["timings_s"]["run"] = round(time.perf_counter() - t0, 6)

    if not diagnostics_only:
        (out / "trajectory.csv").write_text(trajectory_csv(traj), encoding="utf-8")

    failed = None
    if checks:
        t0 = time.perf_counter()
        rows = _collect_checks(scenario, traj, checks)
        (out / "diagnostics.csv").write_text(diagnostics_csv(rows), encoding="utf-8")
        manifest["timings_s"]["diagnostics"] = round(time.perf_counter() - t0, 6)
        for row in rows:
            if not row.ok:
                failed = row
                break

    frames_every = getattr(args, "frames_every", 0) or 0
    if frames_every > 0 and not diagnostics_only:
        t0 = time.perf_counter()
        frame_dir = out / "frames"
        frame_dir.mkdir(exist_ok=True)
        ws = scenario.build_workspace()
        ms = scenario.build_moving_set()
        for i in range(0, len(traj.times), frames_every):
            t = float(traj.times[i])
            svg = frame_svg(ms.at(t), traj.positions[i], ws, time_label=f"t={t:.2f}")
            (frame_dir / f"frame_{i:06d}.svg").write_text(svg, encoding="utf-8")
        manifest["timings_s"]["frames"] = round(time.perf_counter() - t0, 6)

    manifest["status"] = "failed" if failed else "complete"
    write_manifest(manifest_path, manifest)
    if failed:
        print(f"invariant failed: {failed.name} at t={failed.t:.6g} "
              f"(value {failed.value:.6g}, bound {failed.bound:.6g})", file=sys.stderr)
        return 1
    return 0


def cmd_braess(args):
    from .scenarios import braess_suite
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    seeds = range(args.seed, args.seed + args.seeds)
    lines = ["seed,none,stationary,moving"]
    rows = []
    for seed in seeds:
        none, stat, mov = braess_suite(seed, n=args.particles or 300,
                                       tau=args.tau or 0.01)
        rows.append((none, stat, mov))
        lines.append(f"{seed},{none:.6f},{stat:.6f},{mov:.6f}")
        print(f"seed {seed}: none={none:.4f} stationary={stat:.4f} moving={mov:.4f}")
    arr = np.asarray(rows)
    print(f"means over {len(rows)} seed(s): none={arr[:, 0].mean():.4f} "
          f"stationary={arr[:, 1].mean():.4f} moving={arr[:, 2].mean():.4f}")
    if out:
        (out / "braess.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_optimize(args):
    path, scenario = _load(args)
    grid = []
    for raw in Path(args.grid).read_text(encoding="utf-8").splitlines():
        raw = raw.split("#", 1)[0].strip()
        if raw:
            grid.append(tuple(float(v) for v in raw.split()))
    best, table = optimize_obstacle(scenario, grid)
    lines = ["c1,c2,a1,a2,spin,objective,runtime_s,admissible"]
    for r in table:
        lines.append(",".join([*(f"{v!r}" for v in r.params),
                               f"{r.objective:.6f}", f"{r.runtime:.3f}",
                               str(r.admissible).lower()]))
    text = "\n".join(lines) + "\n"
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "results.csv").write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    print(f"best: params={best.params} objective={best.objective:.6f}")
    return 0


def cmd_w2(args):
    a = ParticleCloud(read_cloud_csv(args.cloud_a))
    b = ParticleCloud(read_cloud_csv(args.cloud_b))
    dist, _ = w2(a, b)
    print(f"{dist:.17g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="crowdsweep",
                                     description="Particle sweeping-process solver")
    parser.add_argument("--version", action="version", version=f"crowdsweep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--scenario", required=True,
                       help="scenario file path or bundled preset name")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--tau", type=float)
        p.add_argument("--particles", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--substeps", type=int)
        p.add_argument("--integrator", choices=("euler", "rk4"))
        p.add_argument("--check", action="append",
                       choices=("support", "speed", "cone", "noflux", "stability", "all"))

    p_run = sub.add_parser("run", help="run a scenario and dump artifacts")
    add_run_flags(p_run)
    p_run.add_argument("--frames-every", type=int, default=0,
                       help="write an SVG frame every K mesh times")
    p_run.set_defaults(fn=cmd_run)

    p_check = sub.add_parser("check", help="run and evaluate invariants only")
    add_run_flags(p_check)
    p_check.set_defaults(fn=lambda a: cmd_run(a, diagnostics_only=True))

    p_braess = sub.add_parser("braess", help="run the three exit configurations")
    p_braess.add_argument("--seed", type=int, default=0)
    p_braess.add_argument("--seeds", type=int, default=1, help="panel size")
    p_braess.add_argument("--tau", type=float)
    p_braess.add_argument("--particles", type=int)
    p_braess.add_argument("--out")
    p_braess.set_defaults(fn=cmd_braess)

    p_opt = sub.add_parser("optimize", help="exhaustive obstacle grid search")
    p_opt.add_argument("--scenario", required=True)
    p_opt.add_argument("--grid", required=True,
                       help="text file, one 'c1 c2 a1 a2 spin' tuple per line")
    p_opt.add_argument("--out")
    p_opt.add_argument("--seed", type=int)
    p_opt.add_argument("--tau", type=float)
    p_opt.add_argument("--particles", type=int)
    p_opt.add_argument("--substeps", type=int)
    p_opt.add_argument("--integrator", choices=("euler", "rk4"))
    p_opt.set_defaults(fn=cmd_optimize)

    p_w2 = sub.add_parser("w2", help="transport distance between two cloud CSVs")
    p_w2.add_argument("cloud_a")
    p_w2.add_argument("cloud_b")
    p_w2.set_defaults(fn=cmd_w2)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CrowdsweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
