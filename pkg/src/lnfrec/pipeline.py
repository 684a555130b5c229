"""End-to-end glue: train/test split, cleansing, latent networks and per-method recommendation."""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from . import ingest
from .latent import FREQUENCY, TIME, ContextCatalog, LatentNetworks, RelationThresholds, derive_latent
from .lnf import DEFAULT_BETA, LbpParams, MarginalTable, infer_all_contexts
from .obsnet import ObservedNetworks, build_observed
from .rank import naive_rank, rank_session, ubcf_preferences, ubcf_rank
from .records import (
    CleansingConfig,
    CleansingReport,
    ConfigError,
    DataError,
    EventDescriptor,
    ParticipationRecord,
)

log = logging.getLogger(__name__)

METHODS = ("Naive", "UBCF", "LNF-g", "LNF-gf", "LNF-gfh-EF", "LNF-gfh-ET")

# method -> (factor families, encounter mode)
_LNF = {
    "LNF-g": ("g", TIME),
    "LNF-gf": ("gf", TIME),
    "LNF-gfh-EF": ("gfh", FREQUENCY),
    "LNF-gfh-ET": ("gfh", TIME),
}


@dataclass
class Bundle:
    schedule: list
    participation: list
    encounters: list


@dataclass
class Split:
    """Training networks plus the test sessions and their ground truth."""

    schedule: list
    train_events: list
    test_sessions: dict  # session id -> [EventDescriptor] (2+ parallel events)
    observed: ObservedNetworks
    catalog: ContextCatalog
    truth: dict  # (user, session) -> attended event id
    test_participation: list
    report: CleansingReport = field(default_factory=CleansingReport)

    @property
    def users(self) -> tuple:
        return tuple(sorted(self.observed.participation.users))


def session_order(schedule: Sequence[EventDescriptor]) -> list:
    """Session ids ordered by their earliest start time."""
    first = {}
    for e in schedule:
        first[e.session_id] = min(first.get(e.session_id, e.start), e.start)
    return sorted(first, key=lambda s: (first[s], s))


def ground_truth(records: Sequence[ParticipationRecord], schedule: Sequence[EventDescriptor], users=None) -> dict:
    """(user, session) -> attended event; the longest attendance wins, then the lower event id."""
    by_id = {e.id: e for e in schedule}
    best = {}
    for r in records:
        if users is not None and r.user_id not in users:
            continue
        ev = by_id.get(r.event_id)
        if ev is None:
            continue
        key = (r.user_id, ev.session_id)
        cur = best.get(key)
        if cur is None or r.duration > cur[1] or (r.duration == cur[1] and r.event_id < cur[0]):
            best[key] = (r.event_id, r.duration)
    return {k: v[0] for k, v in sorted(best.items())}


def split_bundle(bundle: Bundle, train_sessions: int, cleansing: CleansingConfig = CleansingConfig(),
                 report: CleansingReport | None = None) -> Split:
    """Split on session order: the first ``train_sessions`` sessions train, the rest test."""
    report = report if report is not None else CleansingReport()
    order = session_order(bundle.schedule)
    if not 1 <= train_sessions < len(order):
        raise ConfigError(f"train_sessions must lie in [1, {len(order) - 1}], got {train_sessions}")
    train_ids = set(order[:train_sessions])
    train_events = [e for e in bundle.schedule if e.session_id in train_ids]
    train_event_ids = {e.id for e in train_events}
    train_end = max(e.end for e in train_events)

    by_session = defaultdict(list)
    for e in bundle.schedule:
        if e.session_id not in train_ids:
            by_session[e.session_id].append(e)
    test_sessions = {}
    for s in order[train_sessions:]:
        evs = sorted(by_session[s], key=lambda e: e.id)
        if len(evs) < 2:
            log.info("session %s has %d event(s); excluded from testing", s, len(evs))
            continue
        test_sessions[s] = evs

    known = {e.id for e in bundle.schedule}
    unknown = sorted({r.event_id for r in bundle.participation} - known)
    if unknown:
        raise DataError(f"participation references events missing from the schedule: {unknown[:5]}")

    parts = ingest.drop_short_participation(bundle.participation, cleansing, report)
    train_parts = ingest.cleanse_attendees([r for r in parts if r.event_id in train_event_ids], cleansing, report)
    users = {r.user_id for r in train_parts}
    encs = ingest.drop_short_encounters(bundle.encounters, cleansing, report)
    encs = ingest.filter_encounters([r for r in encs if r.start < train_end], users)

    observed = build_observed(train_parts, encs, train_events, users)
    catalog = ContextCatalog.from_schedule(bundle.schedule)
    test_event_ids = {e.id for evs in test_sessions.values() for e in evs}
    test_parts = [r for r in parts if r.event_id in test_event_ids]
    truth = ground_truth(test_parts, bundle.schedule, users)
    return Split(list(bundle.schedule), train_events, test_sessions, observed, catalog, truth, test_parts, report)


@dataclass
class MethodResult:
    method: str
    recommendations: list
    marginals: MarginalTable | None = None


class Recommender:
    """Runs any of the six methods on one split, caching latent networks per (K, mode)."""

    def __init__(self, split: Split, params: LbpParams = LbpParams(), beta: float = DEFAULT_BETA,
                 neighbor_fraction: float = 0.05):
        self.split = split
        self.params = params
        self.beta = beta
        self.neighbor_fraction = neighbor_fraction
        self._latent = {}

    def latent(self, thresholds: RelationThresholds, mode: str = TIME) -> LatentNetworks:
        key = (thresholds.k, mode)
        if key not in self._latent:
            obs = self.split.observed
            self._latent[key] = derive_latent(obs.participation, obs.proximity, self.split.catalog, thresholds, mode)
        return self._latent[key]

    def run(self, method: str, thresholds: RelationThresholds = RelationThresholds()) -> MethodResult:
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
        users = self.split.users
        recs = []
        if method in ("Naive", "UBCF"):
            lat = self.latent(thresholds)
            filled = ubcf_preferences(lat.prefs, lat.lam, self.neighbor_fraction) if method == "UBCF" else None
            for s, evs in self.split.test_sessions.items():
                if filled is None:
                    recs += naive_rank(users, evs, lat.prefs)
                else:
                    recs += ubcf_rank(users, evs, lat.prefs, lat.lam, filled=filled)
            return MethodResult(method, recs)
        factors, mode = _LNF[method]
        lat = self.latent(thresholds, mode)
        marg = infer_all_contexts(lat, thresholds, self.params, factors, self.beta)
        for s, evs in self.split.test_sessions.items():
            recs += rank_session(users, evs, marg)
        return MethodResult(method, recs, marg)


def method_for_mode(mode: str) -> str:
    if mode not in (FREQUENCY, TIME):
        raise ConfigError(f"encounter mode must be {FREQUENCY!r} or {TIME!r}")
    return "LNF-gfh-EF" if mode == FREQUENCY else "LNF-gfh-ET"
