import numpy as np
import pytest

from cylwig.core import CylinderFunction, CylinderOperator

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    label = getattr(report, "criterion", None)
    if label is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    _CRITERIA.setdefault(label, []).append((report.nodeid.split("::")[-1], report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = str(marker.args[0])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    key = lambda s: [int(p) if p.isdigit() else p for p in s.replace(".", " ").split()]
    for label in sorted(_CRITERIA, key=key):
        for name, outcome in _CRITERIA[label]:
            verdict = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"criterion {label:<5} {verdict}  {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def random_symbol(rng, grid, band, bandwidth, guard=0, hbar=1.0, real=False):
    """Random angular trig polynomial of degree ``bandwidth`` supported on the
    band interior at distance ``guard`` from the edges."""
    p = np.arange(-bandwidth, bandwidth + 1)
    coef = rng.normal(size=(band.dim, p.size)) + 1j * rng.normal(size=(band.dim, p.size))
    coef[~band.interior(guard)] = 0.0
    vals = np.exp(1j * np.outer(grid.points, p)) @ coef.T
    if real:
        vals = vals.real
    return CylinderFunction(grid, band, vals, hbar)


def random_operator(rng, band, bandwidth, guard=0):
    """Random matrix with ``|j - k| <= bandwidth`` supported on the band interior."""
    X = rng.normal(size=(band.dim, band.dim)) + 1j * rng.normal(size=(band.dim, band.dim))
    J, K = np.meshgrid(np.arange(band.dim), np.arange(band.dim), indexing="ij")
    X[np.abs(J - K) > bandwidth] = 0.0
    inner = band.interior(guard)
    X[~inner, :] = 0.0
    X[:, ~inner] = 0.0
    return CylinderOperator(band, X)
