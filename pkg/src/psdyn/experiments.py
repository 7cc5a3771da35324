"""Pinned switched-vs-averaged experiments on the COVID-19 model.

Each example integrates the averaged system at ``p0`` and the switched system
under the scheme from the same initial state, then checks the match with
thresholds that are fixed here and shared by the CLI ``reproduce`` command and
the acceptance tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .analysis import (AttractorCloud, ClassifyConfig, Plane, classify, cluster_count,
                       hausdorff_distance, histogram_distance, poincare_section,
                       section_tolerance, strip_transient)
from .dsl import parse_scheme
from .models import get_model
from .ode import DivergenceError, SystemDef, Trajectory, integrate
from .switching import SwitchingScheme, averaged_parameter, ps_integrate

DEFAULT_H = 0.005
DEFAULT_STEPS = 400_000
SECTION_PLANE = Plane(axis=2, level=80.0, direction="up")
HIST_BINS = 50


@dataclass(frozen=True)
class Example:
    id: str
    model: str
    scheme: str
    hausdorff_factor: Optional[float] = None  # x self-distance baseline
    equal_clusters: bool = False
    histogram_factor: Optional[float] = None
    expect_averaged: Optional[str] = None
    expect_switched: Optional[str] = None
    expect_sources: Optional[str] = None
    note: str = ""


EXAMPLES = {
    "ex1": Example("ex1", "covid_p2", "[1*0.422, 1*0.424] @ h=0.005",
                   hausdorff_factor=2.0, equal_clusters=True,
                   expect_averaged="regular", expect_switched="regular",
                   expect_sources="chaotic", note="chaos + chaos = order"),
    "ex2": Example("ex2", "covid_p2", "[1*0.4265, 1*0.4287, 3*0.4316] @ h=0.005",
                   hausdorff_factor=4.0, equal_clusters=True,
                   expect_averaged="regular", expect_switched="regular"),
    "ex3": Example("ex3", "covid_p2", "[1*0.4265, 1*0.4316] @ h=0.005",
                   histogram_factor=2.0,
                   expect_averaged="chaotic", expect_switched="chaotic",
                   note="chaos + chaos = chaos"),
    "ex4": Example("ex4", "covid_p2", "[1*0.423, 4*0.43] @ h=0.005",
                   expect_switched="chaotic", expect_sources="regular",
                   note="order + order = chaos"),
    "sys9": Example("sys9", "covid_p1", "[1*0.211, 5*0.2116] @ h=0.005",
                    hausdorff_factor=2.0, equal_clusters=True,
                    expect_averaged="regular", expect_switched="regular"),
}


@dataclass(frozen=True)
class RunConfig:
    h: float = DEFAULT_H
    steps: int = DEFAULT_STEPS
    transient_frac: float = 0.5
    x0: Optional[tuple] = None
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    threshold: object = None
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" value={self.value!r} threshold={self.threshold!r}" if self.threshold is not None else \
            (f" value={self.value!r}" if self.value is not None else "")
        return f"[{status}] {self.name}:{extra}" + (f" ({self.detail})" if self.detail else "")


@dataclass
class ExampleResult:
    example: Example
    scheme: SwitchingScheme
    p0: float
    checks: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    averaged: Optional[Trajectory] = None
    switched: Optional[Trajectory] = None

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)


def compare_clouds(a: AttractorCloud, b: AttractorCloud, plane: Plane = SECTION_PLANE,
                   bins: int = HIST_BINS) -> dict:
    """Raw and normalised Hausdorff distance, section hits and clusters and
    the x1-histogram distance between two clouds."""
    sa, sb = poincare_section(a, plane), poincare_section(b, plane)
    tol = section_tolerance(sa, sb)
    return {
        "hausdorff_raw": hausdorff_distance(a, b),
        "hausdorff_normalized": hausdorff_distance(a, b, normalize=True),
        "histogram_l1": histogram_distance(a.points[:, 0], b.points[:, 0], bins),
        "section_a": sa,
        "section_b": sb,
        "cluster_tol": tol,
        "clusters_a": cluster_count(sa.hits, tol),
        "clusters_b": cluster_count(sb.hits, tol),
    }


def _run(fn, *args):
    try:
        return fn(*args), None
    except DivergenceError as exc:
        return exc.trajectory, exc


def run_example(ex: Example, cfg: RunConfig = RunConfig(), system: Optional[SystemDef] = None) -> ExampleResult:
    system = system or get_model(ex.model)
    scheme = parse_scheme(ex.scheme).with_h(cfg.h)
    p0 = averaged_parameter(scheme)
    x0 = cfg.x0 if cfg.x0 is not None else system.default_x0
    res = ExampleResult(ex, scheme, p0)
    transient = int((cfg.steps + 1) * cfg.transient_frac)

    avg, avg_err = _run(integrate, system, p0, x0, cfg.h, cfg.steps)
    sw, sw_err = _run(ps_integrate, system, scheme, x0, cfg.steps)
    res.averaged, res.switched = avg, sw
    res.checks.append(Check("averaged run bounded", avg_err is None,
                            detail=str(avg_err) if avg_err else ""))
    res.checks.append(Check("switched run bounded", sw_err is None,
                            detail=str(sw_err) if sw_err else ""))

    if ex.expect_sources:
        for p in sorted(set(scheme.values)):
            traj, err = _run(integrate, system, p, x0, cfg.h, cfg.steps)
            label = "divergent" if err else classify(strip_transient(traj, transient), cfg.classify).label
            res.metrics[f"label_source_{p!r}"] = label
            res.checks.append(Check(f"source p={p!r} is {ex.expect_sources}",
                                    label == ex.expect_sources, label))

    if avg_err or sw_err:
        for name in ("averaged", "switched"):
            if getattr(ex, f"expect_{name}"):
                res.checks.append(Check(f"{name} is {getattr(ex, f'expect_{name}')}", False,
                                        "divergent"))
        return res

    ca, cs = strip_transient(avg, transient), strip_transient(sw, transient)
    cmp = compare_clouds(ca, cs)
    res.metrics.update({k: v for k, v in cmp.items() if not k.startswith("section")})
    h1, h2 = ca.halves()
    for name, cloud, want in (("averaged", ca, ex.expect_averaged), ("switched", cs, ex.expect_switched)):
        lab = classify(cloud, cfg.classify)
        res.metrics[f"label_{name}"] = lab.label
        res.metrics[f"lyapunov_{name}"] = lab.lyapunov
        res.metrics[f"distinct_extrema_{name}"] = lab.distinct_extrema
        if want:
            res.checks.append(Check(f"{name} is {want}", lab.label == want, lab.label,
                                    detail=f"lyapunov={lab.lyapunov!r}"))
    if ex.hausdorff_factor is not None:
        base = hausdorff_distance(h1, h2, normalize=True)
        res.metrics["hausdorff_baseline"] = base
        limit = ex.hausdorff_factor * base
        res.checks.append(Check(f"normalized Hausdorff <= {ex.hausdorff_factor:g} x baseline",
                                cmp["hausdorff_normalized"] <= limit,
                                cmp["hausdorff_normalized"], limit))
    if ex.equal_clusters:
        res.checks.append(Check("section cluster counts equal",
                                cmp["clusters_a"] == cmp["clusters_b"],
                                (cmp["clusters_a"], cmp["clusters_b"])))
    if ex.histogram_factor is not None:
        base = histogram_distance(h1.points[:, 0], h2.points[:, 0], HIST_BINS)
        res.metrics["histogram_baseline"] = base
        limit = ex.histogram_factor * base
        res.checks.append(Check(f"histogram L1 <= {ex.histogram_factor:g} x baseline",
                                cmp["histogram_l1"] <= limit, cmp["histogram_l1"], limit))
    return res
