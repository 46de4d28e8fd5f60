import sys
from pathlib import Path

import pytest

from emfbeam.scenario import ScenarioConfig, build_scenario

sys.path.insert(0, str(Path(__file__).parent))


# small geometry that keeps grid and circle scans cheap in unit tests
def small_config(**overrides):
    base = dict(M=8, N=2, K=2, P=4, R=120.0, square_half_width=150.0,
                circle_samples=1024, grid_step=15.0, seed=3)
    base.update(overrides)
    return ScenarioConfig(**base)


@pytest.fixture
def tiny_scenario():
    return build_scenario(small_config())


@pytest.fixture
def paper_config():
    return ScenarioConfig(seed=11)
