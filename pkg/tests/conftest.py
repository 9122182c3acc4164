import json
from pathlib import Path

import pytest

from stallmon.events import Event, parse_state
from stallmon.scenarios import reference_config

FIXTURES = Path(__file__).parent / "fixtures"


def load_reference_videos():
    """{video: {"pred": [Event], "gt": [Event]}} from the transcribed reference videos."""
    raw = json.loads((FIXTURES / "reference_videos.json").read_text())
    out = {}
    for row in raw["videos"]:
        clip = f"video-{row['video']:02d}"
        pred, gt = [], []
        for cls in ("person", "horse"):
            p = row[f"{cls}_pred"]
            g = p if row[f"{cls}_gt"] == "same" else row[f"{cls}_gt"]
            pred += [Event(cls, parse_state(s), float(a), float(b), clip, "ref") for a, b, s in p]
            gt += [Event(cls, parse_state(s), float(a), float(b), clip, "ref") for a, b, s in g]
        out[row["video"]] = {"clip_id": clip, "pred": pred, "gt": gt}
    return out


@pytest.fixture(scope="session")
def ref_videos():
    return load_reference_videos()


@pytest.fixture
def cfg():
    return reference_config()


# one line per acceptance criterion, printed after the run
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
