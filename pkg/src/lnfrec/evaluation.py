"""Ranking metrics, attendance forecasts and the method x threshold experiment harness."""
from __future__ import annotations

import dataclasses
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .latent import RelationThresholds
from .pipeline import METHODS, Recommender, Split
from .rank import RankedRecommendation
from .records import ConfigError, DataError

SWEEPABLE = ("k", "phi", "delta", "theta")


def _index(recommendations) -> dict:
    if isinstance(recommendations, Mapping):
        return dict(recommendations)
    return {(r.user_id, r.session_id): r for r in recommendations}


def precision(recommendations, truth: Mapping[tuple, str]) -> float:
    """Share of attended (user, session) pairs whose top-ranked event was the one attended."""
    if not truth:
        raise DataError("precision is undefined without ground truth")
    recs = _index(recommendations)
    hits = 0
    for key, attended in truth.items():
        if key not in recs:
            raise DataError(f"no recommendation for user {key[0]!r} in session {key[1]!r}")
        hits += recs[key].top == attended
    return hits / len(truth)


def dcg(relevance: Sequence[int]) -> float:
    return sum((2 ** rel - 1) / math.log2(i + 1) for i, rel in enumerate(relevance, start=1))


def ndcg(ranked_events: Sequence[str], attended: str, p: int | None = None) -> float:
    """nDCG@p with binary relevance and a single attended event, so the ideal DCG is 1."""
    ranked = list(ranked_events)
    p = len(ranked) if p is None else p
    if attended not in ranked:
        raise DataError(f"attended event {attended!r} is not among the ranked events")
    rel = [int(e == attended) for e in ranked[:p]]
    return dcg(rel) / dcg(sorted(rel, reverse=True) or [1])


def mean_ndcg(recommendations, truth: Mapping[tuple, str]) -> float:
    if not truth:
        raise DataError("nDCG is undefined without ground truth")
    recs = _index(recommendations)
    total = 0.0
    for key, attended in truth.items():
        if key not in recs:
            raise DataError(f"no recommendation for user {key[0]!r} in session {key[1]!r}")
        total += ndcg(recs[key].event_ids, attended)
    return total / len(truth)


def predicted_attendance(recommendations: Sequence[RankedRecommendation], session_id=None) -> dict:
    """Per event: users ranking it first, and the expected head count from normalized scores.

    Ties at the top are already resolved by event id inside each ranking.
    Users whose scores are all zero spread their expected attendance evenly.
    """
    counts = Counter()
    expected = Counter()
    events = set()
    for r in recommendations:
        if session_id is not None and r.session_id != session_id:
            continue
        counts[r.top] += 1
        total = sum(s for _, s in r.items)
        for e, s in r.items:
            events.add(e)
            expected[e] += s / total if total > 0 else 1.0 / len(r.items)
    return {e: {"count": counts[e], "expected": expected[e]} for e in sorted(events)}


@dataclass
class MetricsReport:
    cells: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"cells": self.cells}

    def rows(self) -> list:
        """Cells flattened for CSV output."""
        out = []
        for c in self.cells:
            row = {"method": c["method"]}
            row.update({f"threshold_{k}": v for k, v in c["thresholds"].items()})
            row.update({k: c[k] for k in ("precision", "ndcg", "n_users", "n_sessions")})
            out.append(row)
        return out


def threshold_grid(sweep: Mapping[str, Sequence] | None = None,
                   base: RelationThresholds = RelationThresholds()) -> list:
    """Threshold settings: each swept parameter varies alone, the rest stay at ``base``."""
    if not sweep:
        return [base]
    grid = []
    for name, values in sweep.items():
        if name not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {name!r}; choose from {', '.join(SWEEPABLE)}")
        for v in values:
            grid.append(dataclasses.replace(base, **{name: v}))
    return grid


def _cell(rec: Recommender, method: str, th: RelationThresholds) -> dict:
    res = rec.run(method, th)
    truth = rec.split.truth
    cell = {
        "method": method,
        "thresholds": dataclasses.asdict(th),
        "precision": precision(res.recommendations, truth),
        "ndcg": mean_ndcg(res.recommendations, truth),
        "n_users": len({u for u, _ in truth}),
        "n_sessions": len({s for _, s in truth}),
        "attendance": {s: predicted_attendance(res.recommendations, s) for s in rec.split.test_sessions},
    }
    if res.marginals is not None:
        cell["converged"] = res.marginals.all_converged
    return cell


def run_experiment(split: Split, methods: Sequence[str] = METHODS, thresholds: Sequence[RelationThresholds] | None = None,
                   recommender: Recommender | None = None, threads: int = 1) -> MetricsReport:
    """Evaluate every method under every threshold setting; cells come out in grid order."""
    if not methods:
        raise ConfigError("no methods to evaluate")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    thresholds = list(thresholds or [RelationThresholds()])
    rec = recommender or Recommender(split)
    jobs = [(m, th) for th in thresholds for m in methods]
    if threads > 1:
        # warm the latent cache serially so worker threads only read it
        for m, th in jobs:
            rec.latent(th, "frequency" if m == "LNF-gfh-EF" else "time")
        with ThreadPoolExecutor(threads) as pool:
            cells = list(pool.map(lambda job: _cell(rec, *job), jobs))
    else:
        cells = [_cell(rec, m, th) for m, th in jobs]
    return MetricsReport(cells)
