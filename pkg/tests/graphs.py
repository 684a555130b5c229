"""Random factor graph families and a small latent fixture shared by the inference tests."""
import numpy as np

from lnfrec.latent import ContextCatalog, RelationThresholds, derive_latent
from lnfrec.lnf import PairwiseFactorGraph, clamp, correlation_table
from lnfrec.obsnet import build_observed
from lnfrec.records import EncounterRecord, EventDescriptor, ParticipationRecord


def _unary(rng, n):
    p = clamp(rng.random(n))
    return np.column_stack([1.0 - p, p])


def random_tree(seed, max_n=15):
    """Random tree: node i > 0 hangs off a uniform earlier node; couplings mu ~ U(0.05, 0.95)."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_n + 1))
    pairs = np.array([(int(rng.integers(0, i)), i) for i in range(1, n)], dtype=np.int64).reshape(-1, 2)
    tables = np.array([correlation_table(mu) for mu in rng.uniform(0.05, 0.95, len(pairs))]).reshape(-1, 2, 2)
    return PairwiseFactorGraph(tuple(f"v{i}" for i in range(n)), _unary(rng, n), pairs, tables, "c")


def random_loopy(seed, max_n=12, density=0.3):
    """Spanning tree plus random chords (at least one cycle); couplings mu ~ U(0.3, 0.8)."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, max_n + 1))
    edges = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    chords = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in edges]
    extra = [c for c in chords if rng.random() < density]
    if not extra:
        extra = [chords[int(rng.integers(len(chords)))]]
    pairs = np.array(sorted(edges | set(extra)), dtype=np.int64)
    tables = np.array([correlation_table(mu) for mu in rng.uniform(0.3, 0.8, len(pairs))])
    return PairwiseFactorGraph(tuple(f"v{i}" for i in range(n)), _unary(rng, n), pairs, tables, "c")


def small_latent(thresholds=RelationThresholds(k=2, phi=0.3, delta=2)):
    """6 users, 2 contexts, two loose groups with friend pairs inside each."""
    sched = [EventDescriptor(f"e{s}{k}", f"s{s}", f"r{k}", s * 3600, s * 3600 + 3000, (("x", "y")[k],))
             for s in range(3) for k in range(2)]
    P = ParticipationRecord
    parts = [P("a", "e00", 3000), P("a", "e10", 2000), P("a", "e21", 600),
             P("b", "e00", 2500), P("b", "e10", 3000), P("b", "e20", 1000),
             P("c", "e00", 1200), P("c", "e11", 1500), P("c", "e20", 2800),
             P("d", "e01", 3000), P("d", "e11", 2500), P("d", "e21", 2000),
             P("e", "e01", 2200), P("e", "e11", 3000), P("e", "e20", 400),
             P("f", "e01", 900), P("f", "e10", 1800), P("f", "e21", 3000)]
    E = EncounterRecord.make
    encs = [E("a", "b", 600)] * 3 + [E("d", "e", 1000)] * 2 + [E("c", "f", 300)]
    obs = build_observed(parts, encs, sched)
    return derive_latent(obs.participation, obs.proximity, ContextCatalog.from_schedule(sched), thresholds)
