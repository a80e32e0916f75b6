"""
Pytest configuration file
"""

import sys
import os

import pytest

# Add the current directory to Python path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'fixtures')


@pytest.fixture
def fixture_path():
    """Absolute path of a file under fixtures/."""
    def _path(name):
        return os.path.join(FIXTURES_DIR, name)
    return _path


@pytest.fixture
def load_fixture_game(fixture_path):
    """Parse a game document from fixtures/."""
    from documents import read_game

    def _load(name):
        return read_game(fixture_path(name))
    return _load
