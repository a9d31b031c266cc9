from pathlib import Path

import pytest

from crn_certify import parse_file

DATA = Path(__file__).parent / "data"


def load(name: str):
    return parse_file(DATA / f"{name}.crn")


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def net():
    return load
