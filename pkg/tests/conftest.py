import numpy as np
import pytest

from rdlab import Grid, Problem, ReactionSpec

# criterion number -> [title, ok, reached call phase]
CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.user_properties.append(("criterion", m.args))


def pytest_runtest_logreport(report):
    args = dict(report.user_properties).get("criterion")
    if args is None:
        return
    n, title = args
    state = CRITERIA.setdefault(n, [title, True, False])
    if report.when == "call":
        state[2] = True
    if not report.passed:
        state[1] = False


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        title, ok, called = CRITERIA[n]
        verdict = "PASS" if ok and called else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {verdict}  {title}")


@pytest.fixture
def make_scalar():
    """Factory for scalar problems on the unit interval."""

    def make(f, u0=1.0, T=1.0, nodes=257, grid=None, **kw):
        grid = grid or Grid.interval(1.0, nodes)
        init = grid.constant(u0) if np.isscalar(u0) else grid.field(u0)
        return Problem(grid, ReactionSpec.scalar(f), init, T, **kw)

    return make
