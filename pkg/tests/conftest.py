import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("fixed", derandomize=True, deadline=None, max_examples=200)
settings.load_profile("fixed")


@pytest.fixture(scope="session")
def default_cfg():
    from afs_pacbf.config import default_config

    return default_config()


@pytest.fixture(scope="session")
def filtered_run(default_cfg):
    from afs_pacbf.scenario import run_scenario

    return run_scenario(default_cfg)


@pytest.fixture(scope="session")
def unfiltered_run(default_cfg):
    from afs_pacbf.scenario import run_scenario

    return run_scenario(default_cfg.replace(filter_enabled=False))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record a one-line verdict per acceptance criterion for the run summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, {})

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
