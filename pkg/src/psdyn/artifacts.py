"""CSV/JSON artifacts with provenance headers.

Every CSV starts with ``# key=value`` comment lines describing how it was
produced, followed by a single header row.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import BifurcationScan, Histogram, PoincareSection
from .models import get_model, load_model
from .ode import SystemDef, Trajectory

FLOAT_FMT = "%.17g"


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_value(x) for x in v)
    return str(v)


def header_lines(header: dict) -> list[str]:
    return [f"# {k}={_fmt_value(v)}" for k, v in header.items() if v is not None]


def read_header(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            out[key.strip()] = value.strip()
    return out


def trajectory_header(traj: Trajectory, extra: Optional[dict] = None) -> dict:
    from .dsl import print_scheme
    head = {
        "system": traj.system.name,
        "p": traj.meta.get("p"),
        "scheme": print_scheme(traj.scheme) if traj.scheme is not None else None,
        "p0": traj.meta.get("p0"),
        "h": traj.h,
        "x0": traj.x0.tolist(),
        "steps": traj.steps,
        "seed": traj.seed,
        "status": traj.meta.get("status", "ok"),
    }
    head.update(extra or {})
    return head


def write_trajectory_csv(traj: Trajectory, path, extra_header: Optional[dict] = None) -> Path:
    """``step,t,p,x1..xn`` rows at 17 significant digits."""
    path = Path(path)
    n = traj.system.dim
    cols = ["step", "t", "p"] + [f"x{i + 1}" for i in range(n)]
    data = np.column_stack([np.arange(len(traj)), traj.times, traj.params, traj.states])
    with open(path, "w", newline="\n") as fh:
        for line in header_lines(trajectory_header(traj, extra_header)):
            fh.write(line + "\n")
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, data, fmt=["%d"] + [FLOAT_FMT] * (n + 2), delimiter=",")
    return path


def resolve_system(header: dict, system: Optional[SystemDef] = None) -> SystemDef:
    if system is not None:
        return system
    if header.get("model_file"):
        return load_model(header["model_file"])
    return get_model(header["system"])


def read_trajectory_csv(path, system: Optional[SystemDef] = None) -> Trajectory:
    """Load a trajectory written by :func:`write_trajectory_csv`."""
    from .dsl import parse_scheme
    head = read_header(path)
    system = resolve_system(head, system)
    with open(path) as fh:
        skip = 1 + sum(1 for line in fh if line.startswith("#"))
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    if data.shape[1] != 3 + system.dim:
        raise ValueError(f"{path}: {data.shape[1] - 3} state columns, system {system.name} has {system.dim}")
    h = float(head["h"]) if "h" in head else float(data[1, 1] - data[0, 1])
    meta = {}
    if head.get("p"):
        meta["p"] = float(head["p"])
    if head.get("status", "ok") != "ok":
        meta["status"] = head["status"]
    scheme = parse_scheme(head["scheme"]) if head.get("scheme") else None
    seed = int(head["seed"]) if head.get("seed") else None
    return Trajectory(system, h, data[0, 3:].copy(), np.ascontiguousarray(data[:, 3:]),
                      np.ascontiguousarray(data[:, 2]), scheme=scheme, seed=seed, meta=meta)


def write_section_csv(section: PoincareSection, path, header: dict) -> Path:
    path = Path(path)
    n = section.points.shape[1]
    cols = ["t"] + [f"x{i + 1}" for i in range(n)]
    with open(path, "w", newline="\n") as fh:
        plane = section.plane
        head = dict(header, plane=f"axis={plane.axis + 1},level={plane.level!r},direction={plane.direction}")
        for line in header_lines(head):
            fh.write(line + "\n")
        fh.write(",".join(cols) + "\n")
        for t, row in zip(section.times, section.points):
            fh.write(",".join([FLOAT_FMT % t] + [FLOAT_FMT % v for v in row]) + "\n")
    return path


def write_histogram_csv(hist: Histogram, path, header: dict) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        head = dict(header, underflow=hist.underflow, overflow=hist.overflow)
        for line in header_lines(head):
            fh.write(line + "\n")
        fh.write("bin,lo,hi,count\n")
        for i, c in enumerate(hist.counts):
            fh.write(f"{i},{FLOAT_FMT % hist.edges[i]},{FLOAT_FMT % hist.edges[i + 1]},{int(c)}\n")
    return path


def write_scan_csv(scan: BifurcationScan, path, header: dict) -> Path:
    """``p,sample_index,value,status``; a divergent grid point gets one row
    with empty sample columns."""
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        for line in header_lines(header):
            fh.write(line + "\n")
        fh.write("p,sample_index,value,status\n")
        for p, vals, status in zip(scan.grid, scan.samples, scan.status):
            ps = FLOAT_FMT % p
            if status != "converged" or len(vals) == 0:
                fh.write(f"{ps},,,{status}\n")
                continue
            for i, v in enumerate(vals):
                fh.write(f"{ps},{i},{FLOAT_FMT % v},{status}\n")
    return path


def read_scan_csv(path) -> dict:
    """``p -> (values, status)`` in file order."""
    out = {}
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")][1:]
    for ln in lines:
        p, idx, v, status = ln.rstrip("\n").split(",")
        vals, _ = out.setdefault(float(p), ([], status))
        if v:
            vals.append(float(v))
    return {p: (np.array(v), s) for p, (v, s) in out.items()}


def scan_sidecar(scan: BifurcationScan, header: dict) -> dict:
    cfg = scan.config
    return {
        "header": header,
        "config": {
            "h": cfg.h, "transient_steps": cfg.transient_steps, "kept_steps": cfg.kept_steps,
            "samples_per_p": cfg.samples_per_p, "observable": cfg.observable,
            "continuation": cfg.continuation, "shard_size": cfg.shard_size,
            "x0": list(cfg.x0) if cfg.x0 is not None else list(scan.system.default_x0),
            "lyapunov_threshold": cfg.classify.threshold,
            "max_distinct": cfg.classify.max_distinct,
        },
        "points": [
            {"p": float(p), "status": s, **(lab.to_json() if lab is not None else {})}
            for p, s, lab in zip(scan.grid, scan.status, scan.labels)
        ],
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path
