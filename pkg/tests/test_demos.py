from pathlib import Path

import pytest

from rdlab.scenarios import ScenarioSpec, SweepSpec, load_config

CONFIGS = sorted((Path(__file__).parent.parent / "demos" / "configs").glob("*.json"))


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_demo_configs_validate(path):
    spec = load_config(str(path))
    assert isinstance(spec, SweepSpec if "sweep" in path.name else ScenarioSpec)
