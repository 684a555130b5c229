"""Pairwise factor graphs over binary attendance variables, and inference on them.

For each context there is one binary variable per user (will / will not
attend that context). Unary factors hold the prior built from the user's own
preference and their like-minded peers; pairwise factors couple co-attendees
(relevancy table) and friends (agreement table). :func:`run_lbp` computes
marginals with synchronous, damped sum-product loopy belief propagation;
:func:`exact_marginals` enumerates small graphs and serves as the reference.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .latent import LatentNetworks, RelationThresholds, classify_friends
from .records import ConfigError

log = logging.getLogger(__name__)

EPS = 1e-4
DEFAULT_BETA = 0.7
MAX_EXACT_VARIABLES = 20


class GraphTooLargeError(ValueError):
    pass


class InferenceError(RuntimeError):
    pass


def clamp(x, eps: float = EPS):
    return np.clip(x, eps, 1.0 - eps)


@dataclass(frozen=True)
class LbpParams:
    damping: float = 0.5
    tolerance: float = 1e-6
    max_iterations: int = 200

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ConfigError("damping must lie in [0, 1)")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")


@dataclass(frozen=True)
class PairwiseFactorGraph:
    """Binary pairwise graph.

    ``unary[i] = (phi_i(0), phi_i(1))``; ``tables[e][a, b]`` is the factor
    value for ``y[pairs[e, 0]] = a`` and ``y[pairs[e, 1]] = b``.
    """

    variables: tuple
    unary: np.ndarray  # n x 2
    pairs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))  # m x 2
    tables: np.ndarray = field(default_factory=lambda: np.zeros((0, 2, 2)))  # m x 2 x 2
    context: str | None = None

    def __post_init__(self):
        n = len(self.variables)
        if self.unary.shape != (n, 2):
            raise ValueError("unary must be n x 2")
        if len(self.pairs) != len(self.tables):
            raise ValueError("pairs and tables differ in length")
        if len(self.pairs) and (self.pairs.min() < 0 or self.pairs.max() >= n
                                or (self.pairs[:, 0] == self.pairs[:, 1]).any()):
            raise ValueError("pair factor references a missing variable or a self loop")


@dataclass(frozen=True)
class MarginalTable:
    users: tuple
    contexts: tuple
    prob: np.ndarray  # users x contexts, P(y = 1)
    converged: Mapping[str, bool]
    iterations: Mapping[str, int]

    @cached_property
    def _pos(self):
        return {u: i for i, u in enumerate(self.users)}, {c: j for j, c in enumerate(self.contexts)}

    def __getitem__(self, key) -> float:
        user, context = key
        return float(self.prob[self._pos[0][user], self._pos[1][context]])

    def column(self, context) -> np.ndarray:
        return self.prob[:, self.contexts.index(context)]

    @property
    def all_converged(self) -> bool:
        return all(self.converged.values())


def compute_prior(z_im: float, neighbors: Sequence[tuple] = (), eps: float = EPS) -> float:
    """Prior attendance probability from a user's own preference and their peers'.

    ``neighbors`` holds ``(similarity, neighbor_preference)`` pairs. The prior
    is the larger of the own preference and the similarity-weighted mean of
    the neighbors' preferences, clamped to ``[eps, 1 - eps]``.
    """
    p = float(z_im)
    weight = sum(lam for lam, _ in neighbors)
    if weight > 0:
        p = max(p, sum(lam * z for lam, z in neighbors) / weight)
    return float(clamp(p, eps))


def correlation_table(mu: float, eps: float = EPS) -> np.ndarray:
    """Co-attendance factor: ``mu`` on agreement, ``1 - mu`` on disagreement."""
    return clamp(np.array([[mu, 1.0 - mu], [1.0 - mu, mu]]), eps)


def agreement_table(beta: float = DEFAULT_BETA, eps: float = EPS) -> np.ndarray:
    return correlation_table(beta, eps)


def prior_matrix(latent: LatentNetworks, eps: float = EPS) -> np.ndarray:
    """Priors for every (user, context) in one pass."""
    prefs = latent.prefs
    z = prefs.values
    uidx = {u: i for i, u in enumerate(prefs.users)}
    out = np.empty_like(z)
    for i, u in enumerate(prefs.users):
        nb = latent.similarity.neighbors.get(u, ())
        idx = [uidx[v] for v, _ in nb]
        lam = np.array([w for _, w in nb])
        own = z[i]
        if len(idx) and lam.sum() > 0:
            own = np.maximum(own, lam @ z[idx] / lam.sum())
        out[i] = own
    return clamp(out, eps)


def _pair_factors(users, coattendees: Mapping[tuple, float] | None, friends, beta, eps):
    uidx = {u: i for i, u in enumerate(users)}
    tables = {}
    for (a, b), mu in sorted((coattendees or {}).items()):
        if a in uidx and b in uidx:
            tables[uidx[a], uidx[b]] = correlation_table(mu, eps)
    friend_t = agreement_table(beta, eps)
    for a, b in sorted(friends or ()):
        if a in uidx and b in uidx:
            key = (uidx[a], uidx[b])
            tables[key] = tables[key] * friend_t if key in tables else friend_t.copy()
    keys = sorted(tables)
    pairs = np.array(keys, dtype=np.int64).reshape(-1, 2)
    arr = np.array([tables[k] for k in keys]).reshape(-1, 2, 2)
    return pairs, arr


def build_context_graph(context, latent: LatentNetworks, thresholds: RelationThresholds = RelationThresholds(),
                        friends=None, use_correlation: bool = True, beta: float = DEFAULT_BETA,
                        eps: float = EPS, priors: np.ndarray | None = None) -> PairwiseFactorGraph:
    """Factor graph of one context.

    Unary factors come from :func:`compute_prior`. Co-attendee pairs (relevancy
    at least ``thresholds.phi``) get a :func:`correlation_table` when
    ``use_correlation``; pairs in ``friends`` get an agreement table with
    strength ``beta``; pairs that are both get the entrywise product.
    """
    users = latent.prefs.users
    if not users:
        raise ConfigError("cannot build a factor graph over an empty user set")
    m = latent.prefs.contexts.index(context)
    if priors is None:
        priors = prior_matrix(latent, eps)
    p = priors[:, m]
    unary = np.column_stack([1.0 - p, p])
    co = latent.relevancy.coattendees(thresholds.phi) if use_correlation else None
    pairs, tables = _pair_factors(users, co, friends, beta, eps)
    return PairwiseFactorGraph(tuple(users), unary, pairs, tables, context)


def _single_context_table(graph, prob, converged, iterations):
    ctx = graph.context if graph.context is not None else "context"
    return MarginalTable(tuple(graph.variables), (ctx,), prob.reshape(-1, 1), {ctx: converged}, {ctx: iterations})


def run_lbp(graph: PairwiseFactorGraph, params: LbpParams = LbpParams()) -> MarginalTable:
    """Sum-product loopy belief propagation with a synchronous, damped schedule.

    Messages live on directed edges and are normalized after every update.
    Iteration stops once the undamped update would move no message entry by
    more than ``params.tolerance``, or after ``params.max_iterations`` sweeps; in the
    latter case the current beliefs are returned with ``converged=False``.
    """
    n = len(graph.variables)
    log_unary = np.log(graph.unary)
    m = len(graph.pairs)
    if m == 0:
        prob = graph.unary[:, 1] / graph.unary.sum(axis=1)
        return _single_context_table(graph, prob, True, 0)

    # directed edge 2e: pairs[e,0] -> pairs[e,1]; 2e+1 the reverse
    src = np.empty(2 * m, dtype=np.int64)
    dst = np.empty(2 * m, dtype=np.int64)
    src[0::2], dst[0::2] = graph.pairs[:, 0], graph.pairs[:, 1]
    src[1::2], dst[1::2] = graph.pairs[:, 1], graph.pairs[:, 0]
    # psi[k][x_src, x_dst]
    log_psi = np.empty((2 * m, 2, 2))
    log_psi[0::2] = np.log(graph.tables)
    log_psi[1::2] = np.log(graph.tables.transpose(0, 2, 1))
    reverse = np.arange(2 * m) ^ 1

    msg = np.full((2 * m, 2), 0.5)
    converged = False
    it = 0
    for it in range(1, params.max_iterations + 1):
        log_msg = np.log(msg)
        incoming = np.zeros((n, 2))
        np.add.at(incoming, dst, log_msg)
        # cavity at the source: everything except what dst sent back
        cavity = log_unary[src] + incoming[src] - log_msg[reverse]
        new = logsumexp(cavity[:, :, None] + log_psi, axis=1)
        new = np.exp(new - logsumexp(new, axis=1, keepdims=True))
        # residual of the undamped update, so damping does not stop us early
        delta = np.abs(new - msg).max()
        if delta < params.tolerance:
            msg = new
            converged = True
            break
        if params.damping:
            new = (1.0 - params.damping) * new + params.damping * msg
            new /= new.sum(axis=1, keepdims=True)
        msg = new

    incoming = np.zeros((n, 2))
    np.add.at(incoming, dst, np.log(msg))
    belief = log_unary + incoming
    belief = np.exp(belief - logsumexp(belief, axis=1, keepdims=True))
    if not converged:
        log.warning("LBP on context %s did not converge in %d iterations", graph.context, params.max_iterations)
    return _single_context_table(graph, belief[:, 1], converged, it)


def exact_marginals(graph: PairwiseFactorGraph) -> MarginalTable:
    """Marginals by enumerating all joint assignments (at most 20 variables)."""
    n = len(graph.variables)
    if n > MAX_EXACT_VARIABLES:
        raise GraphTooLargeError(f"{n} variables; exact enumeration handles at most {MAX_EXACT_VARIABLES}")
    states = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64).reshape(-1, n)
    log_unary = np.log(graph.unary)
    score = log_unary[np.arange(n), states].sum(axis=1)
    log_tab = np.log(graph.tables)
    for e, (a, b) in enumerate(graph.pairs):
        score += log_tab[e][states[:, a], states[:, b]]
    w = np.exp(score - logsumexp(score))
    prob = w @ states
    return _single_context_table(graph, prob, True, 0)


def infer_all_contexts(latent: LatentNetworks, thresholds: RelationThresholds = RelationThresholds(),
                       params: LbpParams = LbpParams(), factors: str = "gfh", beta: float = DEFAULT_BETA,
                       eps: float = EPS, solver=run_lbp) -> MarginalTable:
    """Solve one independent graph per context and stack the marginals.

    ``factors`` selects the factor families: ``"g"`` priors only, ``"gf"`` adds
    co-attendee coupling, ``"gfh"`` adds friend coupling as well.
    """
    if factors not in ("g", "gf", "gfh"):
        raise ConfigError(f"unknown factor selection {factors!r}")
    contexts = latent.prefs.contexts
    if not contexts:
        raise ConfigError("no contexts to infer")
    priors = prior_matrix(latent, eps)
    friends = classify_friends(latent.encounters, thresholds) if "h" in factors else None
    cols, conv, iters = [], {}, {}
    for c in contexts:
        try:
            graph = build_context_graph(c, latent, thresholds, friends, "f" in factors, beta, eps, priors)
            res = solver(graph, params)
        except Exception as exc:
            raise InferenceError(f"context {c!r}: {exc}") from exc
        cols.append(res.prob[:, 0])
        conv[c] = res.converged[graph.context]
        iters[c] = res.iterations[graph.context]
    return MarginalTable(latent.prefs.users, tuple(contexts), np.column_stack(cols), conv, iters)
