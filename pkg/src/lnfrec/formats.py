"""Readers and writers for the on-disk CSV / JSON formats."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .records import DataError, EncounterRecord, EventDescriptor, ParticipationRecord

RAW_LOG_HEADER = ["user_id", "zone_id", "timestamp_unix_s"]
PARTICIPATION_HEADER = ["user_id", "event_id", "duration_s"]
ENCOUNTER_HEADER = ["user_a", "user_b", "start_unix_s", "duration_s"]


def _open_csv(path, header):
    f = open(path, newline="")
    reader = csv.reader(f)
    first = next(reader, None)
    if first is None or [c.strip() for c in first] != header:
        f.close()
        raise DataError(f"{path}: expected header {','.join(header)}")
    return f, reader


def read_raw_log(path) -> list[tuple]:
    """Rows of a raw presence log, unparsed; validation happens in ``sessionize``."""
    f, reader = _open_csv(path, RAW_LOG_HEADER)
    with f:
        return [tuple(row) for row in reader if row]


def write_raw_log(path, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(RAW_LOG_HEADER)
        w.writerows(rows)


def read_schedule(path) -> list[EventDescriptor]:
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, list):
        raise DataError(f"{path}: schedule must be a JSON array")
    events = []
    for i, item in enumerate(data):
        try:
            events.append(EventDescriptor(
                id=str(item["id"]),
                session_id=str(item["session_id"]),
                zone_id=str(item["zone_id"]),
                start=float(item["start_unix_s"]),
                end=float(item["end_unix_s"]),
                contexts=tuple(str(c) for c in item["contexts"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: event #{i} malformed ({exc})") from exc
    return events


def write_schedule(path, events) -> None:
    data = [{"id": e.id, "session_id": e.session_id, "zone_id": e.zone_id,
             "start_unix_s": e.start, "end_unix_s": e.end, "contexts": list(e.contexts)}
            for e in events]
    with open(path, "w") as f:
        json.dump(data, f, indent=1)
        f.write("\n")


def read_participation(path) -> list[ParticipationRecord]:
    f, reader = _open_csv(path, PARTICIPATION_HEADER)
    out = []
    with f:
        for n, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(ParticipationRecord(row[0].strip(), row[1].strip(), float(row[2])))
            except (IndexError, ValueError) as exc:
                raise DataError(f"{path}:{n}: malformed participation row") from exc
    return out


def write_participation(path, records) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(PARTICIPATION_HEADER)
        for r in records:
            w.writerow([r.user_id, r.event_id, _num(r.duration)])


def read_encounters(path) -> list[EncounterRecord]:
    f, reader = _open_csv(path, ENCOUNTER_HEADER)
    out = []
    with f:
        for n, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(EncounterRecord.make(row[0].strip(), row[1].strip(), float(row[3]), float(row[2])))
            except (IndexError, ValueError) as exc:
                raise DataError(f"{path}:{n}: malformed encounter row ({exc})") from exc
    return out


def write_encounters(path, records) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(ENCOUNTER_HEADER)
        for r in records:
            w.writerow([r.user_a, r.user_b, _num(r.start), _num(r.duration)])


def write_json(path, obj) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=1, sort_keys=True)
        f.write("\n")


def _num(x):
    """Integers print without a trailing .0 so round trips stay byte-stable."""
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
