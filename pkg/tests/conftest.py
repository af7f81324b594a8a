import pytest

from kronnet import make_config


@pytest.fixture
def worked_cfg():
    """2x2 parameter matrix, 3 levels, 2 untied: the worked example config."""
    return make_config([[0.9, 0.7], [0.5, 0.3]], 3, 2)


@pytest.fixture
def theta3_cfg():
    """3x3 parameter matrix, 2 levels, 1 untied."""
    rows = [[0.9, 0.6, 0.3], [0.6, 0.5, 0.2], [0.3, 0.2, 0.1]]
    return make_config(rows, 2, 1)
