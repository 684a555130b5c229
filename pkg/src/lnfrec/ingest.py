"""Turn presence logs into participation and encounter records, and cleanse them.

Raw reader logs are a stream of ``(user_id, zone_id, timestamp)`` reads.
:func:`sessionize` folds them into presence intervals; the two extractors then
intersect intervals with the talk schedule (participation) or with each other
inside common areas (encounters). Short records and sparse attendees are
dropped according to a :class:`~lnfrec.records.CleansingConfig`.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from typing import Iterable, Sequence

from .records import (
    CleansingConfig,
    CleansingReport,
    ConfigError,
    EncounterRecord,
    EventDescriptor,
    ParticipationRecord,
    PresenceInterval,
)

log = logging.getLogger(__name__)

DEFAULT_GAP = 120.0


def _parse_row(row):
    if len(row) != 3:
        raise ValueError("expected 3 fields")
    user, zone, ts = row
    if user is None or zone is None:
        raise ValueError("missing identifier")
    user = str(user).strip()
    zone = str(zone).strip()
    if not user or not zone:
        raise ValueError("empty identifier")
    t = float(ts)
    if t != t or t in (float("inf"), float("-inf")):
        raise ValueError("non-finite timestamp")
    return user, zone, t


def sessionize(raw_rows: Iterable[Sequence], gap: float = DEFAULT_GAP,
               report: CleansingReport | None = None) -> list[PresenceInterval]:
    """Merge consecutive reads of a (user, zone) into presence intervals.

    Two reads at most ``gap`` seconds apart belong to the same interval. An
    interval spans from its first read to its last read plus ``gap / 2``.
    Malformed rows are counted in ``report`` and skipped.
    """
    if not gap > 0:
        raise ConfigError("gap must be > 0")
    report = report if report is not None else CleansingReport()
    reads = defaultdict(list)
    for row in raw_rows:
        report.rows_read += 1
        try:
            user, zone, t = _parse_row(tuple(row))
        except (TypeError, ValueError) as exc:
            report.rows_rejected += 1
            report.rejected_rows.append((report.rows_read, str(exc)))
            continue
        reads[user, zone].append(t)

    out = []
    for (user, zone), times in reads.items():
        times.sort()
        start = last = times[0]
        for t in times[1:]:
            if t - last > gap:
                out.append(PresenceInterval(user, zone, start, last + gap / 2))
                start = t
            last = t
        out.append(PresenceInterval(user, zone, start, last + gap / 2))
    out.sort()
    return out


def _merge_spans(spans):
    """Union of (start, end) spans as a sorted list of disjoint spans."""
    merged = []
    for s, e in sorted(spans):
        if merged and s <= merged[-1][1]:
            if e > merged[-1][1]:
                merged[-1][1] = e
        else:
            merged.append([s, e])
    return merged


def _by_user_zone(intervals):
    spans = defaultdict(list)
    for iv in intervals:
        spans[iv.user_id, iv.zone_id].append((iv.start, iv.end))
    return {k: _merge_spans(v) for k, v in spans.items()}


def extract_participation(intervals: Iterable[PresenceInterval], schedule: Sequence[EventDescriptor],
                          cfg: CleansingConfig = CleansingConfig(), room_zones=None,
                          report: CleansingReport | None = None) -> list[ParticipationRecord]:
    """Participation records from the overlap of presence with each event's room and window.

    A user's duration for an event is the summed overlap of all their
    intervals in the event's room with the event window. Records shorter than
    ``cfg.min_participation_duration`` are dropped. If ``room_zones`` is given,
    every event must be held in one of them.
    """
    report = report if report is not None else CleansingReport()
    for ev in schedule:
        if not ev.zone_id or (room_zones is not None and ev.zone_id not in room_zones):
            raise ConfigError(f"event {ev.id!r} is held in unknown zone {ev.zone_id!r}")

    by_zone = defaultdict(list)
    for (user, zone), spans in _by_user_zone(intervals).items():
        by_zone[zone].append((user, spans))

    out = []
    for ev in schedule:
        for user, spans in by_zone.get(ev.zone_id, ()):
            overlap = 0.0
            for s, e in spans:
                lo, hi = max(s, ev.start), min(e, ev.end)
                if hi > lo:
                    overlap += hi - lo
            if overlap <= 0:
                continue
            if overlap < cfg.min_participation_duration:
                report.records_dropped_short += 1
                continue
            out.append(ParticipationRecord(user, ev.id, overlap))
    out.sort()
    return out


def _pair_overlaps(spans_by_user):
    """Yield (a, b, start, end) for every overlap of two users' spans in one zone (sweep line)."""
    items = sorted((s, e, u) for u, spans in spans_by_user.items() for s, e in spans)
    active = []
    for s, e, u in items:
        active = [x for x in active if x[1] > s]
        for s2, e2, u2 in active:
            if u2 == u:
                continue
            hi = min(e, e2)
            if hi > s:
                a, b = (u, u2) if u < u2 else (u2, u)
                yield a, b, s, hi
        active.append((s, e, u))


def extract_encounters(intervals: Iterable[PresenceInterval], common_zones,
                       cfg: CleansingConfig = CleansingConfig(),
                       report: CleansingReport | None = None) -> list[EncounterRecord]:
    """One record per maximal co-presence of a user pair inside a common-area zone.

    Co-presence in any zone outside ``common_zones`` (conference rooms) is
    never an encounter. Records shorter than ``cfg.min_encounter_duration``
    are dropped.
    """
    report = report if report is not None else CleansingReport()
    common_zones = set(common_zones)
    zones = defaultdict(dict)
    for (user, zone), spans in _by_user_zone(intervals).items():
        if zone in common_zones:
            zones[zone][user] = spans

    out = []
    for zone in sorted(zones):
        pairs = defaultdict(list)
        for a, b, s, e in _pair_overlaps(zones[zone]):
            pairs[a, b].append((s, e))
        for (a, b), spans in pairs.items():
            for s, e in _merge_spans(spans):
                if e - s < cfg.min_encounter_duration:
                    report.encounters_dropped_short += 1
                    continue
                out.append(EncounterRecord(a, b, e - s, s))
    out.sort(key=lambda r: (r.user_a, r.user_b, r.start, r.duration))
    return out


def drop_short_participation(records: Iterable[ParticipationRecord], cfg: CleansingConfig = CleansingConfig(),
                             report: CleansingReport | None = None) -> list[ParticipationRecord]:
    """Duration floor for pre-extracted participation records."""
    report = report if report is not None else CleansingReport()
    out = []
    for r in records:
        if r.duration < cfg.min_participation_duration:
            report.records_dropped_short += 1
        else:
            out.append(r)
    return out


def drop_short_encounters(records: Iterable[EncounterRecord], cfg: CleansingConfig = CleansingConfig(),
                          report: CleansingReport | None = None) -> list[EncounterRecord]:
    """Duration floor for pre-extracted encounter records."""
    report = report if report is not None else CleansingReport()
    out = []
    for r in records:
        if r.duration < cfg.min_encounter_duration:
            report.encounters_dropped_short += 1
        else:
            out.append(r)
    return out


def cleanse_attendees(participation: Sequence[ParticipationRecord], cfg: CleansingConfig = CleansingConfig(),
                      report: CleansingReport | None = None) -> list[ParticipationRecord]:
    """Remove every record of users attending fewer than ``min_participation_count`` distinct events."""
    report = report if report is not None else CleansingReport()
    events = defaultdict(set)
    for r in participation:
        events[r.user_id].add(r.event_id)
    keep = {u for u, evs in events.items() if len(evs) >= cfg.min_participation_count}
    report.users_dropped_sparse += len(events) - len(keep)
    out = [r for r in participation if r.user_id in keep]
    if participation and not out:
        log.warning("all %d attendees fall below %d participations; nothing left",
                    len(events), cfg.min_participation_count)
    return out


def filter_encounters(encounters: Iterable[EncounterRecord], users) -> list[EncounterRecord]:
    """Keep encounters whose two users both survived attendee cleansing."""
    users = set(users)
    return [r for r in encounters if r.user_a in users and r.user_b in users]
