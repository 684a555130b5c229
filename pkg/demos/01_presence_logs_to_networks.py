"""
From presence logs to observed networks
=======================================

A badge reader log is a stream of ``(user, zone, timestamp)`` reads. Here we
fold a tiny hand-written log into presence intervals, cut participation and
encounter records out of them, and build the two observed networks.
"""

from lnfrec import ingest
from lnfrec.obsnet import build_observed
from lnfrec.records import CleansingReport, EventDescriptor

# two parallel talks in rooms A and B, then a coffee break in the hall
schedule = [
    EventDescriptor("talk-1", "morning", "A", 0, 3000, ("databases",)),
    EventDescriptor("talk-2", "morning", "B", 0, 3000, ("networks",)),
]

###############################################################################
# Reads arrive every minute while a badge is in range.

rows = []
for user, room in [("ana", "A"), ("ben", "A"), ("cai", "B"), ("dee", "B")]:
    rows += [(user, room, t) for t in range(0, 3000, 60)]
# ana and ben chat in the hall for ten minutes; cai passes by briefly
rows += [(u, "hall", t) for u in ("ana", "ben") for t in range(3000, 3600, 60)]
rows += [("cai", "hall", 3300), ("cai", "hall", 3360)]
rows.append(("dee", "hall", "garbled"))

report = CleansingReport()
intervals = ingest.sessionize(rows, gap=120, report=report)
print(f"{len(intervals)} presence intervals, {report.rows_rejected} rejected row(s)")

###############################################################################
# Participation is the overlap of presence with a talk's room and window.
# Encounters only count in common areas, never inside the lecture rooms.

participation = ingest.extract_participation(intervals, schedule, report=report)
encounters = ingest.extract_encounters(intervals, {"hall"}, report=report)
for r in participation:
    print(f"  {r.user_id} attended {r.event_id} for {r.duration:.0f} s")
for r in encounters:
    print(f"  {r.user_a} met {r.user_b} for {r.duration:.0f} s")
print("short encounters dropped:", report.encounters_dropped_short)

###############################################################################
# The bipartite participation network and the proximity multigraph.

obs = build_observed(participation, encounters, schedule)
print("participation edges:", dict(obs.participation.edges))
print("proximity edges:", obs.proximity.edges)
