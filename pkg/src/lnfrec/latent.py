"""Latent context preferences and the three latent social-relation networks.

* preference similarity (directed KNN graph, weights in [0, 1]),
* attendance relevancy (weighted Jaccard over shared events),
* encounters (frequency or total time per pair),

plus the relation classifiers built on them: like-minded peers, co-attendees
and friends. Users are always ordered by ascending id so that ties resolve the
same way on every run.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .obsnet import EventParticipationNetwork, PhysicalProximityNetwork
from .records import ConfigError, DataError, EventDescriptor

log = logging.getLogger(__name__)

# centred vectors shorter than this count as flat (no similarity signal)
FLAT_NORM = 1e-12

FREQUENCY = "frequency"
TIME = "time"


@dataclass(frozen=True)
class ContextCatalog:
    contexts: tuple
    event_contexts: Mapping[str, tuple]

    def __post_init__(self):
        if not self.contexts:
            raise ConfigError("context catalog is empty")
        known = set(self.contexts)
        for ev, cs in self.event_contexts.items():
            if not cs:
                raise ConfigError(f"event {ev!r} has no context")
            missing = set(cs) - known
            if missing:
                raise ConfigError(f"event {ev!r} uses unknown contexts {sorted(missing)}")

    @classmethod
    def from_schedule(cls, schedule: Sequence[EventDescriptor], contexts=None) -> "ContextCatalog":
        mapping = {e.id: tuple(e.contexts) for e in schedule}
        if contexts is None:
            contexts = sorted({c for cs in mapping.values() for c in cs})
        return cls(tuple(contexts), mapping)

    def index(self, context) -> int:
        return self.contexts.index(context)


@dataclass(frozen=True)
class RelationThresholds:
    k: int = 6
    phi: float = 0.4
    delta: int = 6
    theta: float = 1800.0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("K must be >= 1")
        if not 0.0 <= self.phi <= 1.0:
            raise ConfigError("phi must lie in [0, 1]")
        if self.delta < 1:
            raise ConfigError("delta must be >= 1")
        if not self.theta > 0:
            raise ConfigError("theta must be > 0")


@dataclass(frozen=True)
class ContextStats:
    users: tuple
    contexts: tuple
    frequency: np.ndarray  # PF, users x contexts, counts
    time: np.ndarray  # PT, users x contexts, seconds
    session_time: np.ndarray  # total scheduled seconds per context


@dataclass(frozen=True)
class PreferenceMatrix:
    users: tuple
    contexts: tuple
    values: np.ndarray  # users x contexts, entries in [0, 1]

    @cached_property
    def _pos(self):
        return {u: i for i, u in enumerate(self.users)}, {c: j for j, c in enumerate(self.contexts)}

    def row(self, user) -> np.ndarray:
        return self.values[self._pos[0][user]]

    def __getitem__(self, key):
        user, context = key
        return float(self.values[self._pos[0][user], self._pos[1][context]])


@dataclass(frozen=True)
class SimilarityNetwork:
    prefs: PreferenceMatrix
    # user -> ((neighbor, lambda), ...) best first
    neighbors: Mapping[str, tuple]
    k: int

    def to_json(self) -> dict:
        edges = [{"a": u, "b": v, "w": w} for u in sorted(self.neighbors) for v, w in self.neighbors[u]]
        return {"kind": "similarity", "users": list(self.prefs.users), "events": [], "edges": edges}


@dataclass(frozen=True)
class RelevancyNetwork:
    users: tuple
    # canonical (a, b) with a < b -> mu
    edges: Mapping[tuple, float]

    def coattendees(self, phi: float) -> dict:
        """Pairs with relevancy at or above ``phi`` and their weights."""
        return {p: mu for p, mu in self.edges.items() if mu >= phi}

    def to_json(self) -> dict:
        return {"kind": "relevancy", "users": list(self.users), "events": [],
                "edges": [{"a": a, "b": b, "w": w} for (a, b), w in sorted(self.edges.items())]}


@dataclass(frozen=True)
class EncounterNetwork:
    mode: str
    edges: Mapping[tuple, float]

    def to_json(self) -> dict:
        kind = "encounter-frequency" if self.mode == FREQUENCY else "encounter-time"
        users = sorted({u for p in self.edges for u in p})
        return {"kind": kind, "users": users, "events": [],
                "edges": [{"a": a, "b": b, "w": w} for (a, b), w in sorted(self.edges.items())]}


# interaction measures ---------------------------------------------------

def context_stats(net: EventParticipationNetwork, catalog: ContextCatalog) -> ContextStats:
    """Per (user, context) participation counts and times, plus scheduled time per context.

    An event with several contexts credits its full duration to each of them.
    """
    users = tuple(sorted(net.users))
    uidx = {u: i for i, u in enumerate(users)}
    d = len(catalog.contexts)
    cidx = {c: j for j, c in enumerate(catalog.contexts)}
    freq = np.zeros((len(users), d), dtype=np.int64)
    ptime = np.zeros((len(users), d))
    session = np.zeros(d)

    def contexts_of(event_id):
        try:
            return catalog.event_contexts[event_id]
        except KeyError:
            raise DataError(f"event {event_id!r} is not mapped to any context") from None

    for ev in sorted(net.events):
        for c in contexts_of(ev):
            session[cidx[c]] += net.events[ev].duration
    for (u, ev), w in sorted(net.edges.items()):
        for c in contexts_of(ev):
            freq[uidx[u], cidx[c]] += 1
            ptime[uidx[u], cidx[c]] += w
    return ContextStats(users, tuple(catalog.contexts), freq, ptime, session)


def latent_preferences(stats: ContextStats) -> PreferenceMatrix:
    """Share of each context's scheduled time a user spent attending it, clamped to [0, 1]."""
    total = stats.session_time
    empty = total <= 0
    if empty.any():
        log.warning("contexts with no scheduled training time get zero preference: %s",
                    [c for c, e in zip(stats.contexts, empty) if e])
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(empty, 0.0, stats.time / np.where(empty, 1.0, total))
    return PreferenceMatrix(stats.users, stats.contexts, np.clip(z, 0.0, 1.0))


def encounter_stats(net: PhysicalProximityNetwork) -> dict:
    """(a, b) -> (encounter count, total encounter seconds); pairs that never met are absent."""
    out = {}
    for a, b, w in net.edges:
        key = (a, b) if a < b else (b, a)
        n, t = out.get(key, (0, 0.0))
        out[key] = (n + 1, t + w)
    return dict(sorted(out.items()))


# preference similarity --------------------------------------------------

def normalize_similarity(raw):
    """Map an adjusted cosine in [-1, 1] onto [0, 1] through its angle."""
    return 1.0 - np.arccos(np.clip(raw, -1.0, 1.0)) / np.pi


def preference_similarity(z_i, z_j) -> float:
    """Normalized adjusted-cosine similarity of two preference vectors.

    Each vector is centred on its own mean before the cosine. Returns NaN
    when either centred vector is all zeros (similarity undefined).
    """
    a = np.asarray(z_i, dtype=float)
    b = np.asarray(z_j, dtype=float)
    a = a - a.mean()
    b = b - b.mean()
    na, nb = math.sqrt(float(a @ a)), math.sqrt(float(b @ b))
    if na <= FLAT_NORM or nb <= FLAT_NORM:
        return float("nan")
    return float(normalize_similarity(float(a @ b) / (na * nb)))


def similarity_matrix(prefs: PreferenceMatrix) -> np.ndarray:
    """All-pairs normalized similarity; NaN on the diagonal and for undefined pairs."""
    dev = prefs.values - prefs.values.mean(axis=1, keepdims=True)
    norms = np.sqrt((dev * dev).sum(axis=1))
    defined = norms > FLAT_NORM
    unit = np.zeros_like(dev)
    unit[defined] = dev[defined] / norms[defined, None]
    lam = normalize_similarity(unit @ unit.T)
    lam[~(defined[:, None] & defined[None, :])] = np.nan
    np.fill_diagonal(lam, np.nan)
    return lam


def top_k(candidates, k):
    """Best ``k`` of (user, weight) pairs: weight descending, then user id ascending."""
    return tuple(sorted(candidates, key=lambda p: (-p[1], p[0]))[:k])


def build_similarity_network(prefs: PreferenceMatrix, k: int = 6, lam: np.ndarray | None = None) -> SimilarityNetwork:
    """Each user's K most similar peers among those with defined similarity."""
    if k < 1:
        raise ConfigError("K must be >= 1")
    if len(prefs.users) < 2:
        log.warning("similarity network over %d user(s) has no edges", len(prefs.users))
    if lam is None:
        lam = similarity_matrix(prefs)
    users = prefs.users
    neighbors = {}
    for i, u in enumerate(users):
        row = lam[i]
        cand = [(users[j], float(row[j])) for j in np.flatnonzero(~np.isnan(row))]
        neighbors[u] = top_k(cand, k)
    return SimilarityNetwork(prefs, neighbors, k)


# attendance relevancy ---------------------------------------------------

def attendance_relevancy(net: EventParticipationNetwork, u_i, u_j) -> float:
    """Duration-weighted Jaccard coefficient of two users' attended events."""
    if u_i not in net.users or u_j not in net.users:
        raise DataError(f"user {u_i!r} or {u_j!r} not in the participation network")
    d_i, d_j = net.attended(u_i), net.attended(u_j)
    common = d_i.keys() & d_j.keys()
    num = sum(d_i[e] + d_j[e] for e in common)
    den = sum(d_i.values()) + sum(d_j.values())
    return num / den if den > 0 else 0.0


def build_relevancy_network(net: EventParticipationNetwork) -> RelevancyNetwork:
    """Relevancy edges for every pair of users sharing at least one event."""
    users = tuple(sorted(net.users))
    uidx = {u: i for i, u in enumerate(users)}
    events = sorted(net.events)
    eidx = {e: j for j, e in enumerate(events)}
    dur = np.zeros((len(users), len(events)))
    for (u, e), w in net.edges.items():
        dur[uidx[u], eidx[e]] = w
    went = (dur > 0).astype(float)
    shared = went @ went.T
    # numerator: own duration on events the other also attended, both ways
    own = dur @ went.T
    num = own + own.T
    tot = dur.sum(axis=1)
    den = tot[:, None] + tot[None, :]
    edges = {}
    for i, j in zip(*np.nonzero(np.triu(shared, k=1))):
        edges[users[i], users[j]] = float(num[i, j] / den[i, j])
    return RelevancyNetwork(users, edges)


# encounters -------------------------------------------------------------

def build_encounter_network(stats: Mapping[tuple, tuple], mode: str = TIME) -> EncounterNetwork:
    """Encounter network weighted by count (``frequency``) or total seconds (``time``)."""
    if mode not in (FREQUENCY, TIME):
        raise ConfigError(f"encounter mode must be {FREQUENCY!r} or {TIME!r}, got {mode!r}")
    pos = 0 if mode == FREQUENCY else 1
    return EncounterNetwork(mode, {p: v[pos] for p, v in stats.items()})


def classify_friends(net: EncounterNetwork, thresholds: RelationThresholds) -> set:
    """Pairs whose encounter weight reaches the mode's threshold."""
    cut = thresholds.delta if net.mode == FREQUENCY else thresholds.theta
    return {p for p, w in net.edges.items() if w >= cut}


@dataclass(frozen=True)
class LatentNetworks:
    """Everything the factor graphs are built from, for one training window."""

    prefs: PreferenceMatrix
    similarity: SimilarityNetwork
    relevancy: RelevancyNetwork
    encounters: EncounterNetwork
    lam: np.ndarray  # all-pairs similarity, reused by UBCF


def derive_latent(participation: EventParticipationNetwork, proximity: PhysicalProximityNetwork,
                  catalog: ContextCatalog, thresholds: RelationThresholds = RelationThresholds(),
                  mode: str = TIME) -> LatentNetworks:
    prefs = latent_preferences(context_stats(participation, catalog))
    lam = similarity_matrix(prefs)
    sim = build_similarity_network(prefs, thresholds.k, lam)
    rel = build_relevancy_network(participation)
    enc = build_encounter_network(encounter_stats(proximity), mode)
    return LatentNetworks(prefs, sim, rel, enc, lam)
