import pathlib

import pytest

from fraisse.structures import parse_structure

DATA = pathlib.Path(__file__).parent / "data"


def load(name):
    return parse_structure((DATA / name).read_text())


@pytest.fixture(scope="session")
def corpus():
    """All shipped structure files, parsed."""
    return {p.name: parse_structure(p.read_text())
            for p in sorted(DATA.glob("*.struct"))}
