from importlib.resources import files
from pathlib import Path

import pytest

from hkl import library

FIXTURES = Path(__file__).parent / "fixtures"
LETTERS = Path(str(files("hkl") / "data" / "letters.hkl"))


@pytest.fixture
def letters_path():
    return LETTERS


@pytest.fixture
def s0():
    return library.letter_system()


@pytest.fixture(scope="session")
def s0_run():
    from hkl.runs import unfold
    (run,) = unfold(library.letter_system())
    return run
