"""Attractor extraction and comparison."""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import _kernels
from .ode import DivergenceError, SystemDef, Trajectory, integrate, run_schedule
from .switching import SwitchingScheme, averaged_parameter, ps_integrate

DEFAULT_TRANSIENT_FRAC = 0.5


@dataclass(frozen=True)
class Provenance:
    system: SystemDef
    h: float
    x0: tuple
    transient_steps: int
    kept_steps: int
    p: Optional[float] = None
    scheme: Optional[SwitchingScheme] = None
    seed: Optional[int] = None

    def header(self) -> dict:
        from .dsl import print_scheme
        return {
            "system": self.system.name,
            "p": self.p,
            "scheme": print_scheme(self.scheme) if self.scheme is not None else None,
            "h": self.h,
            "x0": list(self.x0),
            "transient": self.transient_steps,
            "kept": self.kept_steps,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class AttractorCloud:
    """Post-transient samples, kept in time order, with the parameter
    applied at each sample."""

    points: np.ndarray
    params: np.ndarray
    provenance: Provenance

    def __len__(self):
        return self.points.shape[0]

    @property
    def times(self) -> np.ndarray:
        start = self.provenance.transient_steps
        return (start + np.arange(len(self))) * self.provenance.h

    def halves(self) -> tuple["AttractorCloud", "AttractorCloud"]:
        k = len(self) // 2
        if k == 0:
            raise ValueError("cloud too small to split")
        prov = self.provenance
        first = AttractorCloud(self.points[:k], self.params[:k], replace(prov, kept_steps=k))
        second = AttractorCloud(self.points[k:], self.params[k:],
                                replace(prov, transient_steps=prov.transient_steps + k,
                                        kept_steps=len(self) - k))
        return first, second


def strip_transient(traj: Trajectory, transient_steps: Optional[int] = None) -> AttractorCloud:
    """Drop the first ``transient_steps`` nodes (default: half the run)."""
    if transient_steps is None:
        transient_steps = int(len(traj) * DEFAULT_TRANSIENT_FRAC)
    if not 0 <= transient_steps < len(traj):
        raise ValueError(f"transient {transient_steps} leaves nothing of a {len(traj)}-node run")
    pts = traj.states[transient_steps:]
    p = traj.meta.get("p") if traj.scheme is None else None
    prov = Provenance(traj.system, traj.h, tuple(traj.x0.tolist()), transient_steps, len(pts),
                      p=p, scheme=traj.scheme, seed=traj.seed)
    return AttractorCloud(pts, traj.params[transient_steps:], prov)


# --- Poincare sections -----------------------------------------------------

@dataclass(frozen=True)
class Plane:
    """``x[axis] == level`` (``axis`` is 0-based) crossed ``up``, ``down`` or ``both``."""

    axis: int
    level: float
    direction: str = "up"

    def __post_init__(self):
        if self.direction not in ("up", "down", "both"):
            raise ValueError(f"direction must be up/down/both, not {self.direction!r}")


@dataclass(frozen=True, eq=False)
class PoincareSection:
    plane: Plane
    points: np.ndarray  # full-dimensional, points[:, axis] == level
    times: np.ndarray

    def __len__(self):
        return self.points.shape[0]

    @property
    def hits(self) -> np.ndarray:
        """Crossings with the section coordinate removed."""
        return np.delete(self.points, self.plane.axis, axis=1)


def _ordered(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, Trajectory):
        return data.states, data.times
    if isinstance(data, AttractorCloud):
        return data.points, data.times
    if isinstance(data, tuple) and len(data) == 2:  # (points, times)
        return np.asarray(data[0], dtype=float), np.asarray(data[1], dtype=float)
    arr = np.asarray(data, dtype=float)
    return arr, np.arange(arr.shape[0], dtype=float)


def poincare_section(data, plane: Plane) -> PoincareSection:
    """Linear interpolation of every crossing between consecutive samples."""
    X, t = _ordered(data)
    k = plane.axis
    s = X[:, k] - plane.level
    s0, s1 = s[:-1], s[1:]
    up = (s0 < 0) & (s1 >= 0)
    down = (s0 > 0) & (s1 <= 0)
    mask = {"up": up, "down": down, "both": up | down}[plane.direction]
    idx = np.nonzero(mask)[0]
    frac = s0[idx] / (s0[idx] - s1[idx])
    pts = X[idx] + frac[:, None] * (X[idx + 1] - X[idx])
    pts[:, k] = plane.level
    times = t[idx] + frac * (t[idx + 1] - t[idx])
    return PoincareSection(plane, pts, times)


def cluster_count(points, tol: float) -> int:
    """Number of single-linkage groups at distance ``tol``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) == 0:
        return 0
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    n = len(pts)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    return int(connected_components(graph, directed=False)[0])


def section_tolerance(*sections: PoincareSection, rel: float = 1e-2) -> float:
    """Grouping distance: ``rel`` times the diagonal of the joint hit extent."""
    hits = [s.hits for s in sections if len(s)]
    if not hits:
        return rel
    allh = np.vstack(hits)
    diag = float(np.linalg.norm(allh.max(0) - allh.min(0)))
    return rel * diag if diag > 0 else rel


# --- histograms ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow


def histogram(series, bins: int, range: Optional[tuple[float, float]] = None) -> Histogram:
    """Fixed-width bins over ``[lo, hi)``; samples outside go to the sentinels.

    Without an explicit range the data extent is used and the top bin is
    closed so every sample lands in a bin.
    """
    x = np.asarray(series, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty series")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    closed_top = range is None
    if range is None:
        lo, hi = float(x.min()), float(x.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
    else:
        lo, hi = map(float, range)
        if not hi > lo:
            raise ValueError("empty histogram range")
    width = (hi - lo) / bins
    idx = np.floor((x - lo) / width).astype(np.int64)
    # float rounding at the edges must not push in-range samples to a sentinel
    idx[(idx >= bins) & ((x < hi) | (closed_top & (x == hi)))] = bins - 1
    idx[(idx < 0) & (x >= lo)] = 0
    under = int(np.count_nonzero(idx < 0))
    over = int(np.count_nonzero(idx >= bins))
    inside = idx[(idx >= 0) & (idx < bins)]
    counts = np.bincount(inside, minlength=bins)
    return Histogram(np.linspace(lo, hi, bins + 1), counts, under, over)


def histogram_distance(a, b, bins: int = 50) -> float:
    """L1 distance between normalised histograms on the joint range (0..2)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if hi == lo:
        return 0.0
    ha = histogram(a, bins, (lo, np.nextafter(hi, np.inf)))
    hb = histogram(b, bins, (lo, np.nextafter(hi, np.inf)))
    return float(np.abs(ha.counts / a.size - hb.counts / b.size).sum())


# --- Hausdorff distance ----------------------------------------------------

def _points(c) -> np.ndarray:
    return c.points if isinstance(c, AttractorCloud) else np.asarray(c, dtype=float)


def directed_hausdorff(a, b) -> float:
    """``max_{x in a} min_{y in b} |x - y|`` (exact, via a k-d tree)."""
    A, B = _points(a), _points(b)
    d, _ = cKDTree(B).query(A, k=1)
    return float(d.max())


def hausdorff_distance(a, b, normalize: bool = False) -> float:
    """Symmetric Hausdorff distance under the Euclidean metric.

    With ``normalize`` each axis is divided by the span of the union first.
    """
    A, B = _points(a), _points(b)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("Hausdorff distance needs nonempty point sets")
    if normalize:
        both = np.vstack([A, B])
        span = both.max(0) - both.min(0)
        span[span == 0] = 1.0
        A, B = A / span, B / span
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


# --- classification --------------------------------------------------------

@dataclass(frozen=True)
class ClassifyConfig:
    threshold: float = 0.005  # per time unit
    lyap_steps: int = 200_000
    renorm_every: int = 10
    offset_rel: float = 1e-8
    align_frac: float = 0.1
    max_distinct: int = 32
    extrema_rel_tol: float = 1e-4
    min_points: int = 1000
    axis: int = 0


@dataclass(frozen=True)
class DynamicsLabel:
    label: str  # regular | chaotic | divergent | undetermined
    lyapunov: Optional[float]
    distinct_extrema: Optional[int]

    def to_json(self) -> dict:
        return {"label": self.label, "lyapunov": self.lyapunov,
                "distinct_extrema": self.distinct_extrema}


def local_maxima(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.size < 3:
        return x[:0]
    mid = x[1:-1]
    return mid[(mid > x[:-2]) & (mid >= x[2:])]


def distinct_count(values, rel_tol: float = 1e-4) -> int:
    """Groups of sorted values separated by gaps larger than the tolerance.

    The tolerance is ``rel_tol * max(|v|, 1)``; a sample with no extrema
    (a fixed point) counts as 1.
    """
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return 1
    tol = rel_tol * max(float(np.abs(v).max()), 1.0)
    return 1 + int(np.count_nonzero(np.diff(v) > tol))


def lyapunov_estimate(system: SystemDef, x0, params, h: float, cfg: ClassifyConfig) -> Optional[float]:
    """Largest exponent from a renormalised shadow run; ``None`` if it escapes."""
    params = np.ascontiguousarray(params, dtype=float)
    x0 = np.ascontiguousarray(x0, dtype=float)
    d0 = cfg.offset_rel * max(1.0, float(np.linalg.norm(x0)))
    n_renorm = params.size // cfg.renorm_every
    skip = int(n_renorm * cfg.align_frac)
    status, lam, used = _kernels.lyapunov_run(*system.kernel_args, params, float(h),
                                              float(system.divergence_radius), x0, d0,
                                              cfg.renorm_every, skip)
    if status != _kernels.OK or used == 0:
        return None
    return float(lam)


def classify(data: Union[Trajectory, AttractorCloud], config: ClassifyConfig = ClassifyConfig()) -> DynamicsLabel:
    """Label dynamics as regular, chaotic, divergent or undetermined.

    Chaotic: Lyapunov estimate above the threshold.  Regular: estimate at or
    below it and a bounded number of distinct local maxima of the chosen
    coordinate.  A limit cycle has a zero exponent, so no dead band below the
    threshold is applied.
    """
    if isinstance(data, Trajectory):
        if data.meta.get("status") == "divergent":
            return DynamicsLabel("divergent", None, None)
        data = strip_transient(data)
    cloud = data
    if len(cloud) < config.min_points:
        raise ValueError(f"insufficient data: {len(cloud)} points, need {config.min_points}")
    prov = cloud.provenance
    n = min(config.lyap_steps, len(cloud) - 1)
    lam = lyapunov_estimate(prov.system, cloud.points[0], cloud.params[:n], prov.h, config)
    distinct = distinct_count(local_maxima(cloud.points[:, config.axis]), config.extrema_rel_tol)
    if lam is None:
        return DynamicsLabel("divergent", None, distinct)
    if lam > config.threshold:
        label = "chaotic"
    elif distinct <= config.max_distinct:
        label = "regular"
    else:
        label = "undetermined"
    return DynamicsLabel(label, lam, distinct)


# --- bifurcation scans -----------------------------------------------------

@dataclass(frozen=True)
class ScanConfig:
    h: float = 0.005
    transient_steps: int = 100_000
    kept_steps: int = 100_000
    samples_per_p: int = 200
    observable: str = "maxima"  # or "section"
    plane: Optional[Plane] = None
    continuation: bool = True
    shard_size: int = 50
    workers: int = 1
    x0: Optional[tuple] = None
    label: bool = True
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)


@dataclass(frozen=True, eq=False)
class BifurcationScan:
    system: SystemDef
    grid: np.ndarray
    samples: list
    status: list
    labels: list
    config: ScanConfig

    def periodic_at(self, p: float) -> bool:
        i = int(np.argmin(np.abs(self.grid - p)))
        return (self.status[i] == "converged"
                and distinct_count(self.samples[i], self.config.classify.extrema_rel_tol)
                <= self.config.classify.max_distinct)


def _observable(cloud: AttractorCloud, cfg: ScanConfig) -> np.ndarray:
    if cfg.observable == "maxima":
        vals = local_maxima(cloud.points[:, 0])
    elif cfg.observable == "section":
        plane = cfg.plane or Plane(2, 80.0)
        vals = poincare_section(cloud, plane).points[:, 0]
    else:
        raise ValueError(f"unknown observable {cfg.observable!r}")
    if vals.size == 0:  # fixed point
        vals = cloud.points[-1:, 0]
    return vals[-cfg.samples_per_p:]


def _scan_shard(system, ps, cfg: ScanConfig):
    x_start = np.asarray(cfg.x0 if cfg.x0 is not None else system.default_x0, dtype=float)
    x = x_start
    rows = []
    steps = cfg.transient_steps + cfg.kept_steps
    for p in ps:
        try:
            # range already checked once by the caller
            traj = run_schedule(system, np.full(steps + 1, float(p)), x, cfg.h, meta={"p": float(p)})
        except DivergenceError:
            rows.append((np.empty(0), "divergent", DynamicsLabel("divergent", None, None)))
            x = x_start
            continue
        cloud = strip_transient(traj, cfg.transient_steps)
        label = classify(cloud, cfg.classify) if cfg.label else None
        rows.append((_observable(cloud, cfg), "converged", label))
        x = traj.states[-1] if cfg.continuation else x_start
    return rows


def bifurcation_scan(system: SystemDef, p_range: tuple[float, float], grid_points: int,
                     config: ScanConfig = ScanConfig()) -> BifurcationScan:
    """Sample the observable over an evenly spaced parameter grid.

    The grid is cut into fixed shards of ``config.shard_size`` points; each
    shard starts from the default initial state and continues along its
    points.  Shards are independent, so the result does not depend on
    ``config.workers``.
    """
    if grid_points < 2:
        raise ValueError("a scan needs at least 2 grid points")
    lo, hi = p_range
    if not lo < hi:
        raise ValueError("p_range must be increasing")
    if config.workers < 1:
        raise ValueError("workers must be >= 1")
    plo, phi = system.p_range
    if lo < plo or hi > phi:
        warnings.warn(f"{system.name}: scan range [{lo}, {hi}] leaves admissible range [{plo}, {phi}]",
                      stacklevel=2)
    grid = np.linspace(lo, hi, grid_points)
    shards = [grid[i:i + config.shard_size] for i in range(0, grid_points, config.shard_size)]
    if config.workers == 1:
        results = [_scan_shard(system, s, config) for s in shards]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda s: _scan_shard(system, s, config), shards))
    rows = [r for shard in results for r in shard]
    return BifurcationScan(system, grid, [r[0] for r in rows], [r[1] for r in rows],
                           [r[2] for r in rows], config)


# --- convergence of switched towards averaged ------------------------------

@dataclass(frozen=True)
class ConvergenceResult:
    entries: list  # (h, distance or None)
    slope: Optional[float]

    @property
    def distances(self) -> list:
        return [d for _, d in self.entries]

    def strictly_decreasing(self) -> bool:
        d = self.distances
        return all(x is not None for x in d) and all(b < a for a, b in zip(d, d[1:]))


def convergence_check(system: SystemDef, scheme: SwitchingScheme, x0, h_list: Sequence[float],
                      t_total: float = 2000.0, transient_frac: float = DEFAULT_TRANSIENT_FRAC,
                      normalize: bool = True) -> ConvergenceResult:
    """Switched-vs-averaged Hausdorff distance as ``h`` shrinks, over a fixed
    time horizon, with the least-squares slope of log(distance) on log(h)."""
    h_list = [float(h) for h in h_list]
    if len(h_list) < 3 or any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("h_list must be strictly decreasing with at least 3 entries")
    p0 = averaged_parameter(scheme)
    entries = []
    for h in h_list:
        steps = int(round(t_total / h))
        transient = int(steps * transient_frac)
        try:
            avg = strip_transient(integrate(system, p0, x0, h, steps), transient)
            sw = strip_transient(ps_integrate(system, scheme.with_h(h), x0, steps), transient)
        except DivergenceError:
            entries.append((h, None))
            continue
        entries.append((h, hausdorff_distance(avg, sw, normalize=normalize)))
    good = [(h, d) for h, d in entries if d is not None and d > 0]
    slope = None
    if len(good) >= 2:
        lh = np.log([h for h, _ in good])
        ld = np.log([d for _, d in good])
        slope = float(np.polyfit(lh, ld, 1)[0])
    return ConvergenceResult(entries, slope)

