import os
import shutil
from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def cli():
    path = os.environ.get("CALLFUSE_CLI") or shutil.which("callfuse")
    if not path:
        pytest.skip("callfuse executable not available")
    return path
