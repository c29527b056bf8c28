import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import shipped_scenario  # noqa: E402


@pytest.fixture(scope="session")
def competition():
    return shipped_scenario()
