import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def bitmap_text():
    return (DATA / "two_rectangles.txt").read_text()


@pytest.fixture
def bitmap(bitmap_text):
    from spatial_aggregation.field import load_grid_text

    return load_grid_text(bitmap_text)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, _, line in results:
        terminalreporter.write_line(line)
