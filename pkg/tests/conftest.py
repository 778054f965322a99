import time

import pytest

from autoqsar import PipelineConfig, default_roster, run_pipeline
from autoqsar.synthetic import synthetic_dataset

ACCEPTANCE = []


def record_criterion(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def signal_dataset():
    return synthetic_dataset(200, seed=0)


@pytest.fixture(scope="session")
def signal_run(signal_dataset):
    """The default protocol on the 200-molecule signal set, roster {PLS, KPLS-radial}."""
    config = PipelineConfig(methods=default_roster(("pls", "kpls-radial")))
    t0 = time.perf_counter()
    rm = run_pipeline(config, signal_dataset)
    return rm, time.perf_counter() - t0
