import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pdediscover.synthetic import make_case

settings.register_profile(
    "default", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def wave_case():
    return make_case("wave")


@pytest.fixture(scope="session")
def wave_table(wave_case):
    return wave_case.table("analytic")


@pytest.fixture(scope="session")
def burgers_case():
    return make_case("burgers")


@pytest.fixture(scope="session")
def burgers_table(burgers_case):
    return burgers_case.table("analytic")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_EXPERIMENTS = {}


@pytest.fixture(scope="session")
def experiment():
    """Default-config experiments (10 seeds), computed once per session."""
    from pdediscover.harness import ExperimentConfig, run_experiment

    def get(case, mode):
        key = (case, mode)
        if key not in _EXPERIMENTS:
            _EXPERIMENTS[key] = run_experiment(ExperimentConfig(case=case, mode=mode))
        return _EXPERIMENTS[key]
    return get


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
