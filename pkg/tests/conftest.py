import pathlib

import pytest

DATA_DIR = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def nav_path() -> pathlib.Path:
    return DATA_DIR / "brdc2060.13n"


@pytest.fixture(scope="session")
def nav_text(nav_path) -> str:
    return nav_path.read_text()
