"""Synthetic conference generator with planted interest groups, friendships and cold users.

Every session holds one talk per group, on a topic only that group cares
about, plus optional filler talks. Without noise every warm user attends
their group's talk in every session. Cold users show no interest in any
group topic during training: they only go to a group-specific meetup held
alongside the training sessions. Each cold user is planted with warm friends
inside the group, and every friend pair meets often and long enough to clear
both encounter thresholds. In the test sessions cold users attend their
group's talk like everyone else.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .pipeline import Bundle
from .records import ConfigError, EncounterRecord, EventDescriptor, ParticipationRecord

T0 = 1_216_368_000  # conference start, unix seconds
SLOT = 3600
TALK = 3000


@dataclass(frozen=True)
class SyntheticSpec:
    n_groups: int = 2
    users_per_group: int = 20
    contexts_per_group: int = 2
    events_per_session: int = 2
    n_sessions: int = 8
    train_sessions: int = 4
    noise: float = 0.0
    cold_fraction: float = 0.0
    friends_per_user: int = 3
    friend_meetings: int = 8
    background_pairs: int = 40

    @classmethod
    def from_dict(cls, data) -> "SyntheticSpec":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown synthetic spec keys: {sorted(unknown)}")
        return cls(**data)

    def validate(self):
        if self.events_per_session < 2:
            raise ConfigError("each session needs at least 2 parallel events")
        if self.events_per_session < self.n_groups:
            raise ConfigError(f"{self.n_groups} planted group talks do not fit in "
                              f"{self.events_per_session} parallel slots")
        if self.n_groups < 1 or self.users_per_group < 2 or self.contexts_per_group < 1:
            raise ConfigError("need at least one group of two users with one context")
        if not 1 <= self.train_sessions < self.n_sessions:
            raise ConfigError("train_sessions must leave at least one test session")
        if not 0.0 <= self.noise <= 1.0 or not 0.0 <= self.cold_fraction < 1.0:
            raise ConfigError("noise must lie in [0, 1] and cold_fraction in [0, 1)")


@dataclass
class SyntheticBundle:
    bundle: Bundle
    spec: SyntheticSpec
    seed: int
    groups: dict  # user -> group index
    cold: frozenset
    group_contexts: dict  # group index -> [context]

    @property
    def truth(self) -> list:
        """Test-window participation, i.e. the records ground truth is built from."""
        train_end = T0 + self.spec.train_sessions * SLOT
        test_ids = {e.id for e in self.bundle.schedule if e.start >= train_end}
        return [r for r in self.bundle.participation if r.event_id in test_ids]

    def planted(self) -> dict:
        return {"seed": self.seed, "spec": asdict(self.spec),
                "groups": dict(sorted(self.groups.items())), "cold": sorted(self.cold),
                "group_contexts": {str(g): cs for g, cs in self.group_contexts.items()}}


def generate_synthetic(seed: int, spec: SyntheticSpec = SyntheticSpec()) -> SyntheticBundle:
    spec.validate()
    rng = np.random.default_rng(seed)
    width = max(3, len(str(spec.n_groups * spec.users_per_group)))
    users, groups = [], {}
    for g in range(spec.n_groups):
        for k in range(spec.users_per_group):
            u = f"u{len(users):0{width}d}"
            users.append(u)
            groups[u] = g
    members = {g: [u for u in users if groups[u] == g] for g in range(spec.n_groups)}
    n_cold = math.floor(spec.cold_fraction * spec.users_per_group)
    if n_cold and spec.users_per_group - n_cold < 1:
        raise ConfigError("every group needs at least one warm member")
    cold = set()
    for g, ms in members.items():
        cold.update(rng.choice(ms, size=n_cold, replace=False).tolist())

    group_contexts = {g: [f"topic-{g}-{j}" for j in range(spec.contexts_per_group)] for g in range(spec.n_groups)}
    schedule, planted_event = [], {}
    for s in range(spec.n_sessions):
        sid = f"s{s:02d}"
        start = T0 + s * SLOT
        contexts = [[group_contexts[g][s % spec.contexts_per_group]] for g in range(spec.n_groups)]
        contexts += [["general"] for _ in range(spec.events_per_session - spec.n_groups)]
        slots = rng.permutation(spec.events_per_session)
        for pos, slot in enumerate(slots):
            ev = EventDescriptor(f"{sid}-e{slot}", sid, f"room-{slot}", start, start + TALK, tuple(contexts[pos]))
            schedule.append(ev)
            if pos < spec.n_groups:
                planted_event[sid, pos] = ev
        if cold and s < spec.train_sessions:
            for g in range(spec.n_groups):
                slot = spec.events_per_session + g
                ev = EventDescriptor(f"{sid}-e{slot}", sid, f"lounge-{g}", start, start + TALK, (f"meetup-{g}",))
                schedule.append(ev)
                planted_event[sid, "meetup", g] = ev
    schedule.sort(key=lambda e: (e.start, e.id))
    by_session = {}
    for e in schedule:
        by_session.setdefault(e.session_id, []).append(e)

    participation = []
    for s in range(spec.n_sessions):
        sid = f"s{s:02d}"
        train = s < spec.train_sessions
        talks = [e for e in by_session[sid] if not e.contexts[0].startswith("meetup")]
        for u in users:
            g = groups[u]
            if u in cold and train:
                ev = planted_event[sid, "meetup", g]
            else:
                ev = planted_event[sid, g]
                if spec.noise and rng.random() < spec.noise:
                    others = [e for e in talks if e.id != ev.id]
                    ev = others[rng.integers(len(others))]
            duration = int(rng.integers(int(0.6 * TALK), TALK + 1))
            participation.append(ParticipationRecord(u, ev.id, float(duration)))

    train_end = T0 + spec.train_sessions * SLOT
    encounters = []

    def meet(a, b, n, lo, hi):
        for _ in range(n):
            start = int(rng.integers(T0, train_end - hi))
            encounters.append(EncounterRecord.make(a, b, float(rng.integers(lo, hi + 1)), float(start)))

    pairs = set()
    for g, ms in members.items():
        warm = [u for u in ms if u not in cold]
        for u in ms:
            pool = [v for v in (warm if u in cold else ms) if v != u]
            k = min(spec.friends_per_user, len(pool))
            for v in rng.choice(pool, size=k, replace=False).tolist():
                pairs.add(tuple(sorted((u, v))))
    for a, b in sorted(pairs):
        meet(a, b, spec.friend_meetings, 300, 600)
    # casual contacts: one pair meets at most twice, far below both friend thresholds
    for _ in range(spec.background_pairs):
        a, b = sorted(rng.choice(users, size=2, replace=False).tolist())
        if (a, b) in pairs:
            continue
        pairs.add((a, b))
        meet(a, b, int(rng.integers(1, 3)), 200, 400)
    encounters.sort(key=lambda r: (r.start, r.user_a, r.user_b))
    participation.sort()
    return SyntheticBundle(Bundle(schedule, participation, encounters), spec, seed, groups,
                           frozenset(cold), group_contexts)
