import pytest
from hypothesis import HealthCheck, settings

from phasemirror.config import DEFAULT_CONFIG, QD1_PRESET, RunConfig
from phasemirror.modesolver import solve_te0

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def default_profile():
    cfg = RunConfig.from_dict(DEFAULT_CONFIG)
    return solve_te0(cfg.geometry(), n_points=cfg.grid_points)


@pytest.fixture(scope="session")
def default_cfg():
    return RunConfig.from_dict(DEFAULT_CONFIG)


@pytest.fixture(scope="session")
def qd1_cfg():
    return RunConfig.from_dict(QD1_PRESET)
