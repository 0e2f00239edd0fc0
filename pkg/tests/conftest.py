import pytest

from rsnoum.cli import load_thresholds


@pytest.fixture(scope="session")
def thresholds():
    """The threshold table shipped with the package."""
    return load_thresholds()
