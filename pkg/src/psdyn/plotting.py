"""Figures for runs, comparisons and scans.

Each ``render_*`` writes a PNG next to the CSV artifacts; each
``write_*_script`` emits a standalone script that rebuilds the same figure
from the CSVs alone.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SWITCHED = "tab:red"
AVERAGED = "tab:blue"
MAX_PLOT_POINTS = 40_000


def _thin(a: np.ndarray) -> np.ndarray:
    step = max(1, len(a) // MAX_PLOT_POINTS)
    return a[::step]


def render_trajectory(states, times, path, title=""):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    s, t = _thin(states), _thin(times)
    ax1.plot(t, s[:, 0], lw=0.5)
    ax1.set_xlabel("t")
    ax1.set_ylabel("$x_1$")
    ax2.plot(s[:, 0], s[:, -1], lw=0.3)
    ax2.set_xlabel("$x_1$")
    ax2.set_ylabel(f"$x_{states.shape[1]}$")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def render_comparison(avg_pts, sw_pts, sec_avg, sec_sw, path, title="", bins=50):
    """Phase plot, section overlay and the two x1 histograms."""
    fig = plt.figure(figsize=(11, 9))
    ax = fig.add_subplot(2, 2, 1, projection="3d")
    a, s = _thin(avg_pts), _thin(sw_pts)
    ax.plot(a[:, 0], a[:, 1], a[:, 2], color=AVERAGED, lw=0.4, label="averaged")
    ax.plot(s[:, 0], s[:, 1], s[:, 2], color=SWITCHED, lw=0.4, label="switched")
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.set_zlabel("$x_3$")
    ax.legend(loc="upper left", fontsize=8)
    ax = fig.add_subplot(2, 2, 2)
    ax.plot(sec_avg[:, 0], sec_avg[:, 1], "o", ms=4, mfc="none", color=AVERAGED, label="averaged")
    ax.plot(sec_sw[:, 0], sec_sw[:, 1], ".", ms=3, color=SWITCHED, label="switched")
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.set_title("Poincare section")
    ax.legend(fontsize=8)
    lo = min(avg_pts[:, 0].min(), sw_pts[:, 0].min())
    hi = max(avg_pts[:, 0].max(), sw_pts[:, 0].max())
    for k, (pts, color, name) in enumerate(((avg_pts, AVERAGED, "averaged"), (sw_pts, SWITCHED, "switched"))):
        ax = fig.add_subplot(2, 2, 3 + k)
        ax.hist(pts[:, 0], bins=bins, range=(lo, hi), density=True, color=color)
        ax.set_xlabel("$x_1$")
        ax.set_title(f"histogram, {name}")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def render_bifurcation(grid, samples, path, title=""):
    fig, ax = plt.subplots(figsize=(10, 5))
    ps = np.concatenate([np.full(len(v), p) for p, v in zip(grid, samples)] or [np.empty(0)])
    vs = np.concatenate([np.asarray(v) for v in samples] or [np.empty(0)])
    ax.plot(ps, vs, ",", color="k")
    ax.set_xlabel("p")
    ax.set_ylabel("$x_1$")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


_SCRIPT_HEAD = '''#!/usr/bin/env python3
"""Regenerate {png} from the CSV artifacts in this directory."""
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).resolve().parent


def load(name):
    lines = (HERE / name).read_text().splitlines()
    rows = [ln for ln in lines if not ln.startswith("#")][1:]
    if not rows:
        return np.empty((0, 4))
    return np.loadtxt(rows, delimiter=",", ndmin=2)

'''

_TRAJ_BODY = '''
d = load("{csv}")
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
ax1.plot(d[:, 1], d[:, 3], lw=0.5)
ax1.set_xlabel("t")
ax1.set_ylabel("x1")
ax2.plot(d[:, 3], d[:, -1], lw=0.3)
ax2.set_xlabel("x1")
ax2.set_ylabel("x{dim}")
fig.tight_layout()
fig.savefig(HERE / "{png}", dpi=120)
'''

_CMP_BODY = '''
a = load("{avg}")[{ta}:, 3:]
s = load("{sw}")[{ts}:, 3:]
sa = load("{sec_a}")
ss = load("{sec_b}")
fig = plt.figure(figsize=(11, 9))
ax = fig.add_subplot(2, 2, 1, projection="3d")
ax.plot(a[:, 0], a[:, 1], a[:, 2], color="tab:blue", lw=0.4)
ax.plot(s[:, 0], s[:, 1], s[:, 2], color="tab:red", lw=0.4)
ax = fig.add_subplot(2, 2, 2)
ax.plot(sa[:, 1], sa[:, 2], "o", ms=4, mfc="none", color="tab:blue")
ax.plot(ss[:, 1], ss[:, 2], ".", ms=3, color="tab:red")
lo, hi = min(a[:, 0].min(), s[:, 0].min()), max(a[:, 0].max(), s[:, 0].max())
for k, (pts, color) in enumerate(((a, "tab:blue"), (s, "tab:red"))):
    ax = fig.add_subplot(2, 2, 3 + k)
    ax.hist(pts[:, 0], bins={bins}, range=(lo, hi), density=True, color=color)
fig.tight_layout()
fig.savefig(HERE / "{png}", dpi=120)
'''

_SCAN_BODY = '''
rows = [ln.rstrip("\\n").split(",") for ln in open(HERE / "{csv}") if not ln.startswith("#")][1:]
pts = np.array([(float(r[0]), float(r[2])) for r in rows if r[2]])
fig, ax = plt.subplots(figsize=(10, 5))
if len(pts):
    ax.plot(pts[:, 0], pts[:, 1], ",", color="k")
ax.set_xlabel("p")
ax.set_ylabel("x1")
fig.tight_layout()
fig.savefig(HERE / "{png}", dpi=150)
'''


def _write_script(path, png, body) -> Path:
    path = Path(path)
    path.write_text(_SCRIPT_HEAD.format(png=png) + body)
    return path


def write_trajectory_script(path, csv, png, dim) -> Path:
    return _write_script(path, png, _TRAJ_BODY.format(csv=csv, png=png, dim=dim))


def write_comparison_script(path, avg_csv, sw_csv, sec_a, sec_b, png, transient_a, transient_b, bins=50) -> Path:
    return _write_script(path, png, _CMP_BODY.format(avg=avg_csv, sw=sw_csv, sec_a=sec_a, sec_b=sec_b,
                                                     png=png, ta=transient_a, ts=transient_b, bins=bins))


def write_scan_script(path, csv, png) -> Path:
    return _write_script(path, png, _SCAN_BODY.format(csv=csv, png=png))
