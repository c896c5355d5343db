import math

import numpy as np
import pytest

from spreaddim.metric_space import DistanceMatrix, PointCloud, euclidean_distances

_ACCEPTANCE_RESULTS = {}


def random_metric(rng: np.random.Generator, n: int) -> DistanceMatrix:
    """Shortest-path closure of random positive edge weights: a valid non-Euclidean metric."""
    w = rng.uniform(0.1, 5.0, size=(n, n))
    d = np.minimum(w, w.T)
    np.fill_diagonal(d, 0.0)
    for m in range(n):
        d = np.minimum(d, d[:, m][:, None] + d[m, :][None, :])
    return DistanceMatrix(d)


def random_cloud_matrix(rng: np.random.Generator, n: int) -> DistanceMatrix:
    dim = int(rng.integers(1, 6))
    return euclidean_distances(PointCloud(rng.standard_normal((n, dim)) * rng.uniform(0.2, 3)))


def random_space(rng: np.random.Generator, max_n: int = 200) -> DistanceMatrix:
    n = int(rng.integers(2, max_n + 1))
    if rng.random() < 0.5:
        return random_cloud_matrix(rng, n)
    return random_metric(rng, n)


def oracle_psi_phi(row, t):
    """Pure-Python psi and phi, written straight from the definitions."""
    n = len(row)
    z = 0.0
    dz = 0.0
    for d in row:
        e = math.exp(-t * d)
        z += e
        dz += d * e
    return n / z, n * dz / (z * z)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(id): exit criterion from the acceptance list")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        key = marker.args[0]
        prev = _ACCEPTANCE_RESULTS.get(key)
        ok = report.outcome == "passed"
        if prev is None or (prev[0] and not ok):
            _ACCEPTANCE_RESULTS[key] = (ok, item.name)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE_RESULTS):
        ok, name = _ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"AC{key:<3} {'PASS' if ok else 'FAIL'}  {name}")
