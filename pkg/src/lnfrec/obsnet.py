"""Observed interaction networks: event participation (bipartite) and physical proximity (multigraph).

Both networks are immutable values. :func:`merge_slice` grows them one
session slot at a time and returns a new value, so building incrementally and
building from the concatenated records give the same result.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .records import DataError, EncounterRecord, EventDescriptor, ParticipationRecord


@dataclass(frozen=True)
class EventParticipationNetwork:
    users: frozenset
    events: Mapping[str, EventDescriptor]
    # (user_id, event_id) -> participation seconds
    edges: Mapping[tuple, float]

    def attended(self, user) -> dict:
        """Event id -> duration for one user."""
        return {e: w for (u, e), w in self.edges.items() if u == user}

    def to_json(self) -> dict:
        return {
            "users": sorted(self.users),
            "events": sorted(self.events),
            "edges": [{"a": u, "b": e, "w": w} for (u, e), w in sorted(self.edges.items())],
        }


@dataclass(frozen=True)
class PhysicalProximityNetwork:
    users: frozenset
    # parallel edges allowed: one (user_a, user_b, seconds) per encounter
    edges: tuple = ()

    def to_json(self) -> dict:
        return {
            "users": sorted(self.users),
            "events": [],
            "edges": [{"a": a, "b": b, "w": w} for a, b, w in self.edges],
        }


@dataclass(frozen=True)
class TimeSlice:
    index: int
    participation: tuple = ()
    encounters: tuple = ()
    events: tuple = ()


@dataclass(frozen=True)
class ObservedNetworks:
    participation: EventParticipationNetwork
    proximity: PhysicalProximityNetwork
    slice_index: int = 0
    # raw records kept so a merge can rebuild without mutating the previous value
    _records: tuple = field(default=((), (), ()), repr=False, compare=False)


def build_participation_network(records: Iterable[ParticipationRecord], schedule: Sequence[EventDescriptor],
                                users: Iterable = ()) -> EventParticipationNetwork:
    """Bipartite user-event network; repeated (user, event) rows are summed into one edge."""
    events = {e.id: e for e in schedule}
    edges = {}
    members = set(users)
    for r in records:
        if r.event_id not in events:
            raise DataError(f"participation of {r.user_id!r} in unknown event {r.event_id!r}")
        if not r.duration > 0:
            raise DataError(f"non-positive duration for ({r.user_id!r}, {r.event_id!r})")
        key = (r.user_id, r.event_id)
        edges[key] = edges.get(key, 0.0) + float(r.duration)
        members.add(r.user_id)
    return EventParticipationNetwork(frozenset(members), MappingProxyType(events), MappingProxyType(edges))


def build_proximity_network(records: Iterable[EncounterRecord], users: Iterable = ()) -> PhysicalProximityNetwork:
    """One parallel edge per encounter record."""
    members = set(users)
    edges = []
    for r in records:
        if r.user_a == r.user_b:
            raise DataError(f"encounter of user {r.user_a!r} with itself")
        a, b = sorted((r.user_a, r.user_b))
        edges.append((a, b, float(r.duration)))
        members.update((a, b))
    return PhysicalProximityNetwork(frozenset(members), tuple(edges))


def empty_networks() -> ObservedNetworks:
    return ObservedNetworks(build_participation_network((), ()), build_proximity_network(()), 0)


def merge_slice(networks: ObservedNetworks, slice_: TimeSlice) -> ObservedNetworks:
    """Union of the networks at t-1 with the slice for t; slices must arrive in order."""
    if slice_.index != networks.slice_index + 1:
        raise DataError(f"slice {slice_.index} cannot follow slice {networks.slice_index}")
    parts, encs, evs = networks._records
    parts = parts + tuple(slice_.participation)
    encs = encs + tuple(slice_.encounters)
    known = {e.id for e in evs}
    evs = evs + tuple(e for e in slice_.events if e.id not in known)
    users = set(networks.participation.users | networks.proximity.users)
    users.update(r.user_id for r in slice_.participation)
    users.update(u for r in slice_.encounters for u in (r.user_a, r.user_b))
    return ObservedNetworks(
        build_participation_network(parts, evs, users),
        build_proximity_network(encs, users),
        slice_.index,
        (parts, encs, evs),
    )


def build_observed(participation, encounters, schedule, users: Iterable = ()) -> ObservedNetworks:
    """Both networks in one shot, over a shared user universe."""
    participation, encounters = tuple(participation), tuple(encounters)
    universe = set(users) | {r.user_id for r in participation}
    universe |= {u for r in encounters for u in (r.user_a, r.user_b)}
    return ObservedNetworks(
        build_participation_network(participation, schedule, universe),
        build_proximity_network(encounters, universe),
        0,
        (participation, encounters, tuple(schedule)),
    )
