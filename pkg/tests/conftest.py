import os

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))


@pytest.fixture
def wine_path():
    return os.path.join(HERE, "data", "wine.data")
