import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture
def listings_text():
    return (FIXTURES / "reference_listings.sva").read_text()


@pytest.fixture
def listings(listings_text):
    from svagen.sva.suite import parse_sva_text
    located, problems = parse_sva_text(listings_text)
    assert not problems
    return {a.name: a for a in located}
