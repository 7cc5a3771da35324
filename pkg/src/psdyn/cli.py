"""``psdyn`` command line.

Exit codes: 0 success, 1 numerical or threshold failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (ClassifyConfig, Plane, ScanConfig, bifurcation_scan, classify,
                       histogram, strip_transient)
from .artifacts import (read_header, read_trajectory_csv, scan_sidecar, write_histogram_csv,
                        write_json, write_scan_csv, write_section_csv, write_trajectory_csv)
from .dsl import SchemeSyntaxError, parse_scheme, print_scheme
from .experiments import EXAMPLES, RunConfig, compare_clouds, run_example
from .models import MODEL_IDS, get_model, load_model
from .ode import DivergenceError, integrate
from .plotting import (render_bifurcation, render_comparison, render_trajectory,
                       write_comparison_script, write_scan_script, write_trajectory_script)
from .switching import (FramingError, SwitchingScheme, averaged_parameter, convex_weights,
                        decompose, ps_integrate, ps_integrate_random)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_STEPS = 400_000
DEFAULT_OUT = "psdyn_out"


class UsageError(Exception):
    pass


# --- argument types ------------------------------------------------------

def _float(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}") from None


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _vector(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def _plane(text):
    """``axis=3,level=80[,direction=up]`` with a 1-based axis."""
    fields = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"bad plane field {part!r}")
        fields[key.strip()] = value.strip()
    try:
        return Plane(int(fields["axis"]) - 1, float(fields["level"]), fields.get("direction", "up"))
    except (KeyError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"bad plane {text!r}: {exc}") from None


def _scheme(text):
    text = text.strip()
    try:
        if text.startswith("{"):
            return SwitchingScheme.from_json(json.loads(text))
        return parse_scheme(text)
    except SchemeSyntaxError as exc:
        raise argparse.ArgumentTypeError(f"scheme error: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad scheme: {exc}") from None


# --- helpers ---------------------------------------------------------------

def _system(args):
    if getattr(args, "model_file", None):
        return load_model(args.model_file)
    try:
        return get_model(args.model)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _out_dir(args, sub=""):
    root = args.out or os.environ.get("PSDYN_OUT", DEFAULT_OUT)
    path = Path(root) / sub if sub else Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _manifest(args, out: Path, outputs, **fields):
    doc = {
        "command": args.command,
        "argv": args.argv,
        "model": getattr(args, "model", None),
        "model_file": getattr(args, "model_file", None),
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": [p.name for p in outputs],
    }
    doc.update(fields)
    write_json(doc, out / "manifest.json")
    return doc


def _write_run(traj, out: Path, name: str, extra: dict):
    csv = write_trajectory_csv(traj, out / f"{name}.csv", dict(extra, manifest="manifest.json"))
    png = render_trajectory(traj.states, traj.times, out / f"{name}.png", title=name)
    script = write_trajectory_script(out / f"plot_{name}.py", csv.name, png.name, traj.system.dim)
    return [csv, png, script]


def _x0(args, system):
    x0 = args.x0 if args.x0 is not None else system.default_x0
    if len(x0) != system.dim:
        raise UsageError(f"--x0 needs {system.dim} components, got {len(x0)}")
    return x0


# --- commands --------------------------------------------------------------

def cmd_simulate(args) -> int:
    system = _system(args)
    p = args.p if args.p is not None else system.default_p
    x0 = _x0(args, system)
    out = _out_dir(args)
    extra = {"model_file": args.model_file}
    status = "ok"
    try:
        traj = integrate(system, p, x0, args.h, args.steps)
    except DivergenceError as exc:
        traj, status = exc.trajectory, "divergent"
        print(f"divergence: {exc}", file=sys.stderr)
    outputs = _write_run(traj, out, "trajectory", extra)
    _manifest(args, out, outputs, p=p, h=args.h, x0=list(x0), steps=args.steps, status=status)
    print(out / "trajectory.csv")
    return EXIT_OK if status == "ok" else EXIT_FAIL


def cmd_switch(args) -> int:
    system = _system(args)
    scheme = args.scheme if args.h is None else args.scheme.with_h(args.h)
    x0 = _x0(args, system)
    out = _out_dir(args)
    status = "ok"
    try:
        if args.seed is None:
            traj = ps_integrate(system, scheme, x0, args.steps)
        else:
            traj = ps_integrate_random(system, scheme, x0, args.steps, args.seed)
    except DivergenceError as exc:
        traj, status = exc.trajectory, "divergent"
        print(f"divergence: {exc}", file=sys.stderr)
    outputs = _write_run(traj, out, "trajectory", {"model_file": args.model_file})
    _manifest(args, out, outputs, scheme=print_scheme(scheme), p0=averaged_parameter(scheme),
              alphas=list(convex_weights(scheme).alphas), h=scheme.h, x0=list(x0),
              steps=args.steps, seed=args.seed, status=status)
    print(out / "trajectory.csv")
    return EXIT_OK if status == "ok" else EXIT_FAIL


def cmd_compare(args) -> int:
    systems = {}
    if args.model_file or args.model:
        systems["override"] = _system(args)
    runs = []
    for path in (args.run_a, args.run_b):
        head = read_header(path)
        if not head:
            raise UsageError(f"{path}: not a psdyn trajectory CSV")
        runs.append(read_trajectory_csv(path, systems.get("override")))
    a, b = runs
    if a.system.dim != b.system.dim:
        raise UsageError(f"dimension mismatch: {a.system.dim} vs {b.system.dim}")
    ta = args.transient if args.transient is not None else int(len(a) * 0.5)
    tb = args.transient if args.transient is not None else int(len(b) * 0.5)
    ca, cb = strip_transient(a, ta), strip_transient(b, tb)
    plane = args.plane or Plane(min(2, a.system.dim - 1), 80.0)
    cmp = compare_clouds(ca, cb, plane, args.bins)
    labels = {}
    for name, run, cloud in (("a", a, ca), ("b", b, cb)):
        if run.meta.get("status") == "divergent":
            labels[name] = {"label": "divergent"}
        else:
            try:
                labels[name] = classify(cloud, ClassifyConfig()).to_json()
            except ValueError as exc:
                labels[name] = {"label": "undetermined", "error": str(exc)}
    out = _out_dir(args)
    head = {"run_a": str(args.run_a), "run_b": str(args.run_b), "manifest": "manifest.json"}
    outputs = [
        write_section_csv(cmp["section_a"], out / "section_a.csv", dict(head, run="a")),
        write_section_csv(cmp["section_b"], out / "section_b.csv", dict(head, run="b")),
    ]
    lo = min(ca.points[:, 0].min(), cb.points[:, 0].min())
    hi = np.nextafter(max(ca.points[:, 0].max(), cb.points[:, 0].max()), np.inf)
    for name, cloud in (("a", ca), ("b", cb)):
        outputs.append(write_histogram_csv(histogram(cloud.points[:, 0], args.bins, (lo, hi)),
                                           out / f"histogram_{name}.csv", dict(head, run=name)))
    report = {
        "run_a": str(args.run_a), "run_b": str(args.run_b),
        "transient_a": ta, "transient_b": tb,
        "plane": {"axis": plane.axis + 1, "level": plane.level, "direction": plane.direction},
        "bins": args.bins,
        "hausdorff_raw": cmp["hausdorff_raw"],
        "hausdorff_normalized": cmp["hausdorff_normalized"],
        "histogram_l1": cmp["histogram_l1"],
        "section_hits_a": cmp["section_a"].hits,
        "section_hits_b": cmp["section_b"].hits,
        "cluster_tol": cmp["cluster_tol"],
        "clusters_a": cmp["clusters_a"],
        "clusters_b": cmp["clusters_b"],
        "labels": labels,
    }
    outputs.append(write_json(report, out / "report.json"))
    outputs.append(render_comparison(ca.points, cb.points, cmp["section_a"].hits, cmp["section_b"].hits,
                                     out / "comparison.png", bins=args.bins))
    outputs.append(write_comparison_script(out / "plot_comparison.py", os.path.abspath(args.run_a),
                                           os.path.abspath(args.run_b), "section_a.csv",
                                           "section_b.csv", "comparison.png", ta, tb, args.bins))
    _manifest(args, out, outputs, transient=args.transient, bins=args.bins)
    print(json.dumps({k: report[k] for k in ("hausdorff_raw", "hausdorff_normalized",
                                              "histogram_l1", "clusters_a", "clusters_b")}))
    return EXIT_OK


def cmd_bifurcate(args) -> int:
    if not args.p_min < args.p_max:
        raise UsageError("--p-min must be below --p-max")
    if args.grid < 2:
        raise UsageError("--grid must be >= 2")
    system = _system(args)
    kept = args.steps - args.transient if args.transient is not None else args.steps // 2
    transient = args.steps - kept
    if kept < 1:
        raise UsageError("--transient must be below --steps")
    cfg = ScanConfig(h=args.h, transient_steps=transient, kept_steps=kept,
                     samples_per_p=args.samples, continuation=not args.no_continuation,
                     workers=args.workers, x0=tuple(args.x0) if args.x0 else None,
                     observable="section" if args.plane else "maxima", plane=args.plane)
    scan = bifurcation_scan(system, (args.p_min, args.p_max), args.grid, cfg)
    out = _out_dir(args)
    head = {"system": system.name, "model_file": args.model_file, "h": args.h,
            "x0": list(cfg.x0 or system.default_x0), "transient": transient, "kept": kept,
            "grid": args.grid, "manifest": "manifest.json"}
    outputs = [write_scan_csv(scan, out / "scan.csv", head),
               write_json(scan_sidecar(scan, head), out / "scan.json"),
               render_bifurcation(scan.grid, scan.samples, out / "bifurcation.png", system.name)]
    outputs.append(write_scan_script(out / "plot_bifurcation.py", "scan.csv", "bifurcation.png"))
    n_div = scan.status.count("divergent")
    _manifest(args, out, outputs, p_min=args.p_min, p_max=args.p_max, grid=args.grid,
              h=args.h, steps=args.steps, transient=transient, workers=args.workers,
              divergent_points=n_div)
    print(f"{out / 'scan.csv'}: {args.grid - n_div}/{args.grid} grid points bounded")
    return EXIT_FAIL if n_div == args.grid else EXIT_OK


def cmd_decompose(args) -> int:
    try:
        schemes = decompose(args.target, args.values, args.budget, args.h)
    except FramingError as exc:
        raise UsageError(f"{exc}. The values must frame the target: p1 < p0 < pN.") from None
    if not schemes:
        print(f"no scheme with total weight <= {args.budget} reaches {args.target!r}", file=sys.stderr)
    for s in schemes:
        print(print_scheme(s))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    ex = EXAMPLES[args.example]
    system = get_model(ex.model)
    cfg = RunConfig(h=args.h, steps=args.steps,
                    x0=tuple(args.x0) if args.x0 else None)
    res = run_example(ex, cfg, system)
    out = _out_dir(args, ex.id)
    outputs = []
    for name in ("averaged", "switched"):
        traj = getattr(res, name)
        if traj is not None:
            outputs.append(write_trajectory_csv(traj, out / f"{name}.csv",
                                                {"example": ex.id, "manifest": "manifest.json"}))
            outputs.append(render_trajectory(traj.states, traj.times, out / f"{name}.png",
                                             title=f"{ex.id} {name} ({traj.meta.get('status', 'ok')})"))
            outputs.append(write_trajectory_script(out / f"plot_{name}.py", f"{name}.csv",
                                                   f"{name}.png", system.dim))
    transient = int((cfg.steps + 1) * cfg.transient_frac)
    if res.averaged is not None and res.switched is not None and len(res.averaged) > transient \
            and len(res.switched) > transient:
        ca = strip_transient(res.averaged, transient)
        cs = strip_transient(res.switched, transient)
        cmp = compare_clouds(ca, cs)
        head = {"example": ex.id, "manifest": "manifest.json"}
        outputs.append(write_section_csv(cmp["section_a"], out / "section_averaged.csv", head))
        outputs.append(write_section_csv(cmp["section_b"], out / "section_switched.csv", head))
        outputs.append(render_comparison(ca.points, cs.points, cmp["section_a"].hits,
                                         cmp["section_b"].hits, out / "comparison.png",
                                         title=f"{ex.id}: {print_scheme(res.scheme)} vs p0={res.p0!r}"))
        outputs.append(write_comparison_script(out / "plot_comparison.py", "averaged.csv", "switched.csv",
                                               "section_averaged.csv", "section_switched.csv",
                                               "comparison.png", transient, transient))
    report = {
        "example": ex.id, "model": ex.model, "scheme": print_scheme(res.scheme), "p0": res.p0,
        "alphas": list(convex_weights(res.scheme).alphas), "note": ex.note,
        "metrics": res.metrics,
        "checks": [{"name": c.name, "passed": c.passed, "value": c.value,
                    "threshold": c.threshold, "detail": c.detail} for c in res.checks],
        "passed": res.passed,
    }
    outputs.append(write_json(report, out / "report.json"))
    _manifest(args, out, outputs, example=ex.id, scheme=print_scheme(res.scheme), p0=res.p0,
              h=cfg.h, steps=cfg.steps, transient=transient,
              x0=list(cfg.x0 or system.default_x0), passed=res.passed)
    for c in res.checks:
        print(c.line())
    print(f"{ex.id}: {'PASS' if res.passed else 'FAIL'} ({out})")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_replay(args) -> int:
    doc = json.loads(Path(args.manifest).read_text())
    if doc.get("command") == "replay" or not doc.get("argv"):
        raise UsageError("manifest has no replayable command")
    return main(doc["argv"])


# --- parser ----------------------------------------------------------------

def _add_model(p):
    p.add_argument("--model", default="covid_p2", help=f"one of {', '.join(MODEL_IDS)}")
    p.add_argument("--model-file", help="JSON model definition (overrides --model)")


def _add_out(p):
    p.add_argument("--out", help="output directory (default: $PSDYN_OUT or ./psdyn_out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psdyn", description="Parameter switching for x' = g(x) + p*B*x")
    parser.add_argument("--version", action="version", version=f"psdyn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="constant-parameter run")
    _add_model(p)
    p.add_argument("--p", type=_float)
    p.add_argument("--x0", type=_vector)
    p.add_argument("--h", type=_float, default=0.005)
    p.add_argument("--steps", type=_positive_int, default=DEFAULT_STEPS)
    _add_out(p)

    p = sub.add_parser("switch", help="parameter-switching run")
    _add_model(p)
    p.add_argument("--scheme", type=_scheme, required=True, help="e.g. '[1*0.422, 1*0.424] @ h=0.005'")
    p.add_argument("--h", type=_float, help="override the scheme's step size")
    p.add_argument("--x0", type=_vector)
    p.add_argument("--steps", type=_positive_int, default=DEFAULT_STEPS)
    p.add_argument("--seed", type=int, help="randomise the order inside each period")
    _add_out(p)

    p = sub.add_parser("compare", help="compare two trajectory CSVs")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.add_argument("--model", default=None)
    p.add_argument("--model-file")
    p.add_argument("--transient", type=int, help="nodes to drop (default: half of each run)")
    p.add_argument("--plane", type=_plane, help="axis=3,level=80[,direction=up]")
    p.add_argument("--bins", type=_positive_int, default=50)
    _add_out(p)

    p = sub.add_parser("bifurcate", help="bifurcation scan over p")
    _add_model(p)
    p.add_argument("--p-min", type=_float, required=True)
    p.add_argument("--p-max", type=_float, required=True)
    p.add_argument("--grid", type=int, default=600)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--h", type=_float, default=0.005)
    p.add_argument("--steps", type=_positive_int, default=200_000, help="steps per grid point")
    p.add_argument("--transient", type=int, help="steps dropped per grid point (default: half)")
    p.add_argument("--samples", type=_positive_int, default=200, help="observable samples kept per p")
    p.add_argument("--x0", type=_vector)
    p.add_argument("--plane", type=_plane, help="sample Poincare x1 values instead of x1 maxima")
    p.add_argument("--no-continuation", action="store_true")
    _add_out(p)

    p = sub.add_parser("decompose", help="list schemes with a given averaged parameter")
    p.add_argument("--target", type=_float, required=True)
    p.add_argument("--values", type=_vector, required=True)
    p.add_argument("--budget", type=_positive_int, default=10, help="maximum total weight")
    p.add_argument("--h", type=_float, default=0.005)

    p = sub.add_parser("reproduce", help="run a pinned switched-vs-averaged experiment")
    p.add_argument("example", choices=sorted(EXAMPLES))
    p.add_argument("--h", type=_float, default=0.005)
    p.add_argument("--steps", type=_positive_int, default=DEFAULT_STEPS)
    p.add_argument("--x0", type=_vector)
    _add_out(p)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    return parser


COMMANDS = {
    "simulate": cmd_simulate, "switch": cmd_switch, "compare": cmd_compare,
    "bifurcate": cmd_bifurcate, "decompose": cmd_decompose, "reproduce": cmd_reproduce,
    "replay": cmd_replay,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        return COMMANDS[args.command](args)
    except (UsageError, SchemeSyntaxError, FileNotFoundError) as exc:
        print(f"psdyn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
