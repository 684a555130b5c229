import random

import numpy as np
import pytest

from lnfrec.records import EventDescriptor

TALK = 3000
SLOT = 3600


def _reads(user, zone, start, n, step=60):
    return [(user, zone, str(start + step * k)) for k in range(n)]


def cleansing_log():
    """1,000-row presence log with a composition fixed by construction.

    Reads come every 60 s, so n reads starting at t give the interval
    [t, t + 60 n] under the default 120 s gap. Three sessions, two rooms (A, B),
    common zones ``hall`` and ``cafe``; ``entrance`` is neither.

    * u01-u04: full talk in room A, all three sessions (600 rows, 12 records)
    * u05: full talk in room B, all three sessions (150 rows, 3 records)
    * u06: full talk in room B, sessions 1-2 only (100 rows, 2 records -> sparse)
    * u07: 2 reads per session in room A -> 120 s each (6 rows, 3 short records)
    * u08: 3 reads per session in room B -> 180 s each, kept at the boundary (9 rows)
    * hall after s1: u01, u02 together 600 s (20 rows) -> kept
    * hall after s3: u03 600 s, u04 last 120 s of it (12 rows) -> short encounter
    * hall after s2: u05, u06 together 600 s (20 rows) -> kept, later removed with u06
    * cafe after s1: u07, u08 together 180 s (6 rows) -> kept at the boundary
    * 7 malformed rows, 70 entrance reads by u09
    """
    rows = []
    for s in range(3):
        t = s * SLOT
        for u in ("u01", "u02", "u03", "u04"):
            rows += _reads(u, "A", t, 50)
        rows += _reads("u05", "B", t, 50)
        if s < 2:
            rows += _reads("u06", "B", t, 50)
        rows += _reads("u07", "A", t + 600, 2)
        rows += _reads("u08", "B", t + 600, 3)
    rows += _reads("u01", "hall", 3000, 10) + _reads("u02", "hall", 3000, 10)
    rows += _reads("u03", "hall", 10200, 10) + _reads("u04", "hall", 10680, 2)
    rows += _reads("u05", "hall", 6600, 10) + _reads("u06", "hall", 6600, 10)
    rows += _reads("u07", "cafe", 3000, 3) + _reads("u08", "cafe", 3000, 3)
    rows += [
        ("u09", "hall", "not-a-number"),
        ("", "hall", "100"),
        ("u09", "", "100"),
        ("u09", "hall"),
        ("u09", "hall", "nan"),
        ("u09", "hall", "inf"),
        ("u09", "hall", "12", "extra"),
    ]
    rows += _reads("u09", "entrance", 0, 70)
    random.Random(7).shuffle(rows)
    return rows


CLEANSING_EXPECTED = {
    "rows_read": 1000,
    "rows_rejected": 7,
    "records_dropped_short": 3,
    "encounters_dropped_short": 1,
    "users_dropped_sparse": 1,
    "participation_kept": 18,
    "encounters_extracted": 3,
    "encounters_kept": 1,
}


def cleansing_schedule():
    events = []
    for s in range(3):
        t = s * SLOT
        for room in ("A", "B"):
            events.append(EventDescriptor(f"{room}{s + 1}", f"s{s + 1}", room, t, t + TALK, (f"topic-{room}",)))
    return events


@pytest.fixture
def log_rows():
    return cleansing_log()


@pytest.fixture
def log_schedule():
    return cleansing_schedule()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report one line each; printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
