import numpy as np
import pytest
from scipy.spatial.distance import cdist

from psdyn.analysis import (ClassifyConfig, Plane, ScanConfig, bifurcation_scan, classify,
                            cluster_count, convergence_check, directed_hausdorff, distinct_count,
                            hausdorff_distance, histogram, histogram_distance, local_maxima,
                            poincare_section, strip_transient)
from psdyn.artifacts import write_scan_csv
from psdyn.models import get_model
from psdyn.ode import integrate
from psdyn.switching import SwitchingScheme, ps_integrate

LORENZ = get_model("lorenz_rho")
X0 = [1.0, 1.0, 1.0]


def brute_hausdorff(a, b):
    d = cdist(a, b)
    return max(d.min(1).max(), d.min(0).max())


def test_strip_transient_counts_nodes():
    traj = integrate(LORENZ, 28.0, X0, 0.01, 99)
    cloud = strip_transient(traj, 40)
    assert len(cloud) == 60
    assert np.array_equal(cloud.points[0], traj.states[40])
    assert cloud.provenance.p == 28.0
    with pytest.raises(ValueError):
        strip_transient(traj, 100)


def test_hausdorff_matches_brute_force_and_axioms(rng):
    for _ in range(50):
        a = rng.normal(size=(int(rng.integers(1, 40)), 3))
        b = rng.normal(size=(int(rng.integers(1, 40)), 3))
        c = rng.normal(size=(int(rng.integers(1, 40)), 3))
        dab = hausdorff_distance(a, b)
        assert dab == pytest.approx(brute_hausdorff(a, b), rel=1e-12)
        assert hausdorff_distance(a, a) == 0.0
        assert dab == hausdorff_distance(b, a)
        assert dab >= 0
        assert dab <= hausdorff_distance(a, c) + hausdorff_distance(c, b) + 1e-12


def test_directed_hausdorff_is_asymmetric():
    a = np.array([[0.0, 0.0]])
    b = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert directed_hausdorff(a, b) == 0.0
    assert directed_hausdorff(b, a) == 5.0
    assert hausdorff_distance(a, b) == 5.0


def test_normalized_hausdorff_is_scale_free(rng):
    a = rng.normal(size=(30, 3))
    b = rng.normal(size=(30, 3))
    scale = np.array([1.0, 1e3, 1e-2])
    assert hausdorff_distance(a * scale, b * scale, normalize=True) == pytest.approx(
        hausdorff_distance(a, b, normalize=True), rel=1e-12)


def test_poincare_section_on_straight_segments():
    # piecewise-linear data: interpolated hits lie exactly on the segments
    t = np.linspace(0, 10, 101)
    x = np.column_stack([t, np.sin(t), 2.0 * t + 1.0])
    sec = poincare_section((x, t), Plane(1, 0.0, "both"))
    assert len(sec) == 3
    for pt, tt in zip(sec.points, sec.times):
        assert pt[1] == 0.0
        # x1 == t and x3 == 2 t + 1 are affine in t, so interpolation is exact
        assert pt[0] == pytest.approx(tt, abs=1e-12)
        assert pt[2] == pytest.approx(2 * tt + 1, abs=1e-12)
        assert abs(tt - np.pi * round(tt / np.pi)) < 2e-3


def test_poincare_directions():
    t = np.linspace(0, 4 * np.pi, 2001)
    x = np.column_stack([np.cos(t), np.sin(t)])
    up = poincare_section((x, t), Plane(1, 0.0, "up"))
    down = poincare_section((x, t), Plane(1, 0.0, "down"))
    assert len(up) == 1 and len(down) == 2
    assert np.allclose(down.hits[:, 0], -1.0, atol=1e-5)


def test_cluster_count():
    pts = np.array([[0, 0], [0.01, 0], [5, 5], [5, 5.005], [10, 0]])
    assert cluster_count(pts, 0.1) == 3
    assert cluster_count(pts, 100) == 1
    assert cluster_count(np.empty((0, 2)), 1.0) == 0


def test_histogram_edges_and_sentinels():
    h = histogram([0.0, 0.5, 1.0, 1.0, 2.0, -1.0], 2, (0.0, 1.0))
    assert h.counts.tolist() == [1, 1]
    assert (h.underflow, h.overflow) == (1, 3)
    auto = histogram([0.0, 0.5, 1.0], 2)
    assert auto.counts.tolist() == [1, 2]
    assert auto.total == 3
    const = histogram([3.0, 3.0], 4)
    assert const.total == 2 and const.underflow == const.overflow == 0


def test_histogram_distance_range(rng):
    a = rng.normal(size=2000)
    assert histogram_distance(a, a) == 0.0
    assert histogram_distance(a, a + 100.0) == pytest.approx(2.0)


def test_extrema_helpers():
    v = np.array([0, 1, 0, 2, 0, 1, 0], dtype=float)
    assert local_maxima(v).tolist() == [1, 2, 1]
    assert distinct_count([1.0, 1.0 + 1e-9, 2.0]) == 2


def test_classifier_labels_lorenz():
    chaotic = classify(integrate(LORENZ, 28.0, X0, 0.005, 200_000))
    assert chaotic.label == "chaotic"
    assert 0.7 < chaotic.lyapunov < 1.1
    assert classify(integrate(LORENZ, 10.0, X0, 0.005, 200_000)).label == "regular"
    assert classify(integrate(LORENZ, 160.0, X0, 0.005, 200_000)).label == "regular"


def test_classifier_invariance():
    # label depends on the attractor, not on the start point or transient length
    for rho, want in ((28.0, "chaotic"), (160.0, "regular")):
        for x0, transient in (([1.0, 1.0, 1.0], 100_000), ([-3.0, 2.0, 20.0], 60_000)):
            traj = integrate(LORENZ, rho, x0, 0.005, 200_000)
            assert classify(strip_transient(traj, transient)).label == want


def test_classifier_needs_data():
    traj = integrate(LORENZ, 28.0, X0, 0.005, 500)
    with pytest.raises(ValueError, match="insufficient"):
        classify(traj, ClassifyConfig(min_points=1000))


def test_scan_is_identical_for_any_worker_count(tmp_path):
    cfg = dict(transient_steps=4000, kept_steps=4000, samples_per_p=20, shard_size=3)
    paths = []
    for w in (1, 2, 8):
        scan = bifurcation_scan(LORENZ, (20.0, 180.0), 10, ScanConfig(workers=w, **cfg))
        paths.append(write_scan_csv(scan, tmp_path / f"scan{w}.csv", {"system": "lorenz_rho"}))
    data = [p.read_bytes() for p in paths]
    assert data[0] == data[1] == data[2]


def test_scan_records_divergence_and_labels():
    cfg = ScanConfig(h=0.05, transient_steps=2000, kept_steps=2000, samples_per_p=10, label=False)
    scan = bifurcation_scan(LORENZ, (20.0, 340.0), 3, cfg)
    assert "divergent" in scan.status
    with pytest.raises(ValueError):
        bifurcation_scan(LORENZ, (2.0, 1.0), 10)


def test_convergence_check_lorenz_periodic():
    scheme = SwitchingScheme.of([1, 1], [150.0, 170.0])
    res = convergence_check(LORENZ, scheme, [1.0, 1.0, 1.0], [0.004, 0.002, 0.001], t_total=60.0)
    assert res.strictly_decreasing()
    assert res.slope > 0


def test_switched_lorenz_matches_averaged_cycle():
    scheme = SwitchingScheme.of([1, 1], [150.0, 170.0], h=0.001)
    sw = strip_transient(ps_integrate(LORENZ, scheme, X0, 100_000))
    avg = strip_transient(integrate(LORENZ, 160.0, X0, 0.001, 100_000))
    h1, h2 = avg.halves()
    assert hausdorff_distance(sw, avg, normalize=True) < 0.02
    assert hausdorff_distance(h1, h2, normalize=True) < 0.02
