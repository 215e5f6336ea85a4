import hypothesis
import pytest

import phsfd

hypothesis.settings.register_profile(
    "suite", max_examples=25, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("suite")


@pytest.fixture(scope="session")
def solved_small():
    """Shared coarse pipeline run: h=0.2, m=2, seed=0."""
    return phsfd.solve_poisson(0.2, 2, seed=0)


@pytest.fixture(scope="session")
def solved_medium():
    """Shared pipeline run at h=0.1, m=2, seed=0."""
    return phsfd.solve_poisson(0.1, 2, seed=0)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import _acceptance_log

    if not _acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in _acceptance_log.RESULTS:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {criterion}: {detail}")
