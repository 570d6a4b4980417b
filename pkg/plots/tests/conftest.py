import sys
from pathlib import Path

import pytest

PLOTS_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PLOTS_DIR))


@pytest.fixture
def fixtures_dir() -> Path:
    return PLOTS_DIR / "tests" / "fixtures"


@pytest.fixture
def golden_dir() -> Path:
    return PLOTS_DIR / "tests" / "golden"
