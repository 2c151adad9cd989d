import pytest

from dragonwatch.ingest import RunConfig
from dragonwatch.model import FrameGeometry


@pytest.fixture
def geom():
    return FrameGeometry(640, 480, 30.0)


@pytest.fixture
def config():
    return RunConfig()
