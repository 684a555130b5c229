"""Ranking of parallel events: the inferred-marginal ranker and the two baselines."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .latent import PreferenceMatrix, top_k
from .lnf import MarginalTable
from .records import ConfigError, EventDescriptor

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankedRecommendation:
    user_id: str
    session_id: str
    items: tuple  # ((event_id, score), ...) best first

    @property
    def event_ids(self) -> list:
        return [e for e, _ in self.items]

    @property
    def top(self) -> str:
        return self.items[0][0]


def order_events(scores) -> tuple:
    """(event_id, score) pairs sorted by score descending, then event id ascending."""
    return tuple(sorted(((e, float(s)) for e, s in scores), key=lambda p: (-p[1], p[0])))


def event_score(marginals: MarginalTable, event: EventDescriptor, user) -> float:
    """Mean attendance marginal over the event's contexts."""
    return float(np.mean([marginals[user, c] for c in event.contexts]))


def _session_of(events):
    sessions = {e.session_id for e in events}
    if len(sessions) != 1:
        raise ConfigError(f"events span several sessions: {sorted(sessions)}")
    if len(events) < 2:
        raise ConfigError("a session needs at least two parallel events to rank")
    return sessions.pop()


def _rank_with(users, events: Sequence[EventDescriptor], table_users, lookup):
    session = _session_of(events)
    known = set(table_users)
    out = []
    for u in users:
        if u not in known:
            log.warning("user %r has no training data; skipped", u)
            continue
        scores = [(e.id, np.mean([lookup(u, c) for c in e.contexts])) for e in events]
        out.append(RankedRecommendation(u, session, order_events(scores)))
    return out


def rank_session(users, events: Sequence[EventDescriptor], marginals: MarginalTable) -> list[RankedRecommendation]:
    """Rank one session's parallel events for each user by inferred attendance probability."""
    return _rank_with(users, events, marginals.users, lambda u, c: marginals[u, c])


def naive_rank(users, events: Sequence[EventDescriptor], prefs: PreferenceMatrix) -> list[RankedRecommendation]:
    """Baseline: rank by the user's own context preferences only."""
    return _rank_with(users, events, prefs.users, lambda u, c: prefs[u, c])


def ubcf_preferences(prefs: PreferenceMatrix, lam: np.ndarray, neighbor_fraction: float = 0.05) -> np.ndarray:
    """Preferences with zero entries filled from the most similar users.

    Each user's neighbors are the ``ceil(neighbor_fraction * N)`` users with
    the highest defined similarity. A zero preference is replaced by the
    similarity-weighted mean of those neighbors' preferences on the context.
    """
    if not 0.0 < neighbor_fraction <= 1.0:
        raise ConfigError("neighbor_fraction must lie in (0, 1]")
    users = prefs.users
    z = prefs.values
    n_nb = math.ceil(neighbor_fraction * len(users))
    out = z.copy()
    for i in range(len(users)):
        zero = z[i] == 0
        if not zero.any():
            continue
        cand = [(j, float(lam[i, j])) for j in np.flatnonzero(~np.isnan(lam[i]))]
        # tie-break on user id, which matches index order
        nb = top_k(cand, n_nb)
        weight = sum(w for _, w in nb)
        fill = np.zeros(z.shape[1])
        if weight > 0:
            fill = sum(w * z[j] for j, w in nb) / weight
        out[i, zero] = fill[zero]
    return out


def ubcf_rank(users, events: Sequence[EventDescriptor], prefs: PreferenceMatrix, lam: np.ndarray,
              neighbor_fraction: float = 0.05, filled: np.ndarray | None = None) -> list[RankedRecommendation]:
    """Baseline: user-based collaborative filtering on zero preferences."""
    if filled is None:
        filled = ubcf_preferences(prefs, lam, neighbor_fraction)
    filled_prefs = PreferenceMatrix(prefs.users, prefs.contexts, filled)
    return naive_rank(users, events, filled_prefs)
