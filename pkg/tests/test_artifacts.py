import numpy as np

from psdyn.analysis import Plane, ScanConfig, bifurcation_scan, histogram, poincare_section, strip_transient
from psdyn.artifacts import (read_header, read_scan_csv, read_trajectory_csv, write_histogram_csv,
                             write_scan_csv, write_section_csv, write_trajectory_csv)
from psdyn.models import get_model
from psdyn.ode import DivergenceError, integrate
from psdyn.switching import SwitchingScheme, ps_integrate_random

LORENZ = get_model("lorenz_rho")


def test_trajectory_csv_round_trip_is_exact(tmp_path):
    s = SwitchingScheme.of([1, 3], [20.0, 30.0], h=0.01)
    traj = ps_integrate_random(LORENZ, s, [1.0, 1.0, 1.0], 500, 9)
    path = write_trajectory_csv(traj, tmp_path / "t.csv")
    back = read_trajectory_csv(path)
    assert np.array_equal(back.states, traj.states)
    assert np.array_equal(back.params, traj.params)
    assert back.scheme == s and back.seed == 9 and back.h == 0.01
    head = read_header(path)
    assert head["system"] == "lorenz_rho" and head["p0"] == "27.5"


def test_trajectory_csv_is_deterministic(tmp_path):
    traj = integrate(LORENZ, 28.0, [1.0, 1.0, 1.0], 0.01, 300)
    a = write_trajectory_csv(traj, tmp_path / "a.csv").read_bytes()
    b = write_trajectory_csv(integrate(LORENZ, 28.0, [1.0, 1.0, 1.0], 0.01, 300),
                             tmp_path / "b.csv").read_bytes()
    assert a == b


def test_divergent_run_keeps_status_marker(tmp_path):
    try:
        integrate(LORENZ, 28.0, [1.0, 1.0, 1.0], 0.2, 1000)
    except DivergenceError as exc:
        path = write_trajectory_csv(exc.trajectory, tmp_path / "d.csv")
    assert read_header(path)["status"] == "divergent"
    assert read_trajectory_csv(path).meta["status"] == "divergent"


def test_section_and_histogram_files(tmp_path):
    cloud = strip_transient(integrate(LORENZ, 28.0, [1.0, 1.0, 1.0], 0.01, 5000))
    sec = poincare_section(cloud, Plane(2, 27.0))
    path = write_section_csv(sec, tmp_path / "s.csv", {"run": "a"})
    assert read_header(path)["plane"] == "axis=3,level=27.0,direction=up"
    rows = np.loadtxt(path, delimiter=",", comments="#", skiprows=len(read_header(path)) + 1, ndmin=2)
    assert np.array_equal(rows[:, 1:], sec.points)
    hist = histogram(cloud.points[:, 0], 10)
    hpath = write_histogram_csv(hist, tmp_path / "h.csv", {})
    lines = [ln for ln in hpath.read_text().splitlines() if not ln.startswith("#")]
    assert lines[0] == "bin,lo,hi,count" and len(lines) == 11


def test_scan_csv_round_trip(tmp_path):
    cfg = ScanConfig(h=0.05, transient_steps=1000, kept_steps=1000, samples_per_p=5, label=False)
    scan = bifurcation_scan(LORENZ, (20.0, 340.0), 3, cfg)
    back = read_scan_csv(write_scan_csv(scan, tmp_path / "scan.csv", {}))
    for p, vals, status in zip(scan.grid, scan.samples, scan.status):
        got, st = back[float(p)]
        assert st == status
        if status == "converged":
            assert np.array_equal(got, vals)
