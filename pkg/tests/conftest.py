import numpy as np
import pytest

from sfmask.image import Image


@pytest.fixture
def rng():
    return np.random.default_rng(20201019)


def random_image(rng, h, w, c=1, scale=1.0):
    return Image(rng.uniform(0.0, scale, size=(h, w, c)))


_criteria = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the terminal summary."""
    entry = {"name": request.node.name, "doc": (request.function.__doc__ or "").strip().splitlines()[0], "detail": ""}
    _criteria.append(entry)

    def note(detail):
        entry["detail"] = detail

    yield note
    entry["done"] = True


def pytest_runtest_makereport(item, call):
    if call.when == "call":
        for entry in _criteria:
            if entry["name"] == item.name:
                entry["passed"] = call.excinfo is None


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for entry in _criteria:
        status = "PASS" if entry.get("passed") else "FAIL"
        line = f"[{status}] {entry['doc']}"
        if entry["detail"]:
            line += f"  ({entry['detail']})"
        terminalreporter.write_line(line)
