import sys
from pathlib import Path

import pytest

from sureamp import SeededRng

PLUGIN_DIR = Path(__file__).parent / "plugins"


@pytest.fixture
def rng():
    return SeededRng(1234)


def plugin_command(name):
    return [sys.executable, str(PLUGIN_DIR / name)]
