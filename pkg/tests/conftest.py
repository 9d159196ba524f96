from pathlib import Path

import pytest
from click.testing import CliRunner


@pytest.fixture(scope="session")
def datadir() -> Path:
    return Path(__file__).parent / "json"


@pytest.fixture(scope="session")
def configdir() -> Path:
    return Path(__file__).parent.parent / "configs"


@pytest.fixture
def runner() -> CliRunner:
    """A CliRunner with stdout and stderr not mixed."""
    try:
        return CliRunner(mix_stderr=False)  # type: ignore[call-arg]
    except TypeError:
        # click >= 8.2 always keeps stderr apart
        return CliRunner()
