"""Sublayer routing for language-specific layers, with random re-routing.

An encoder-side layer routes by source language and a decoder-side layer by
target language. During training a fraction of translations can be sent to
another group's sublayer instead; inference uses ``reroute_rate=0``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from bitextkit.grouping import GroupingError, GroupingPlan

DEFAULT_REROUTE_RATE = 0.2
SIDES = ("encoder", "decoder")


class RoutingError(ValueError):
    pass


@dataclass(frozen=True)
class RouteQuery:
    src_lang: str
    tgt_lang: str
    side: str = "encoder"

    def __post_init__(self):
        if self.side not in SIDES:
            raise RoutingError(f"side must be 'encoder' or 'decoder', got {self.side!r}")

    @property
    def routing_language(self) -> str:
        return self.src_lang if self.side == "encoder" else self.tgt_lang


@dataclass(frozen=True)
class RouteDecision:
    group_id: int
    rerouted: bool
    assigned_group_id: int


def assigned_group(query: RouteQuery, grouping: GroupingPlan) -> int:
    for iso in (query.src_lang, query.tgt_lang):
        try:
            grouping.group_of(iso)
        except GroupingError:
            raise RoutingError(f"language {iso!r} is not in the grouping") from None
    return grouping.group_of(query.routing_language)


class Router:
    """Routes queries against one grouping; keeps a language -> group index.

    ``similarity`` (a K x K group similarity matrix) switches re-routing from
    uniform over the other groups to draws weighted by similarity to the
    assigned group.
    """

    def __init__(self, grouping: GroupingPlan, reroute_rate: float = DEFAULT_REROUTE_RATE,
                 similarity: np.ndarray | None = None):
        if not 0.0 <= reroute_rate < 1.0:
            raise RoutingError(f"reroute_rate must be in [0, 1), got {reroute_rate}")
        if reroute_rate > 0 and grouping.K < 2:
            raise RoutingError("re-routing needs at least two groups")
        self.grouping = grouping
        self.reroute_rate = reroute_rate
        self._index = grouping.index()
        self._weights = None
        if similarity is not None:
            sim = np.asarray(similarity, dtype=np.float64)
            if sim.shape != (grouping.K, grouping.K):
                raise RoutingError(f"similarity must be {grouping.K}x{grouping.K}")
            self._weights = _reroute_weights(sim)

    def assigned(self, query: RouteQuery) -> int:
        try:
            self._index[query.src_lang]
            self._index[query.tgt_lang]
        except KeyError as exc:
            raise RoutingError(f"language {exc.args[0]!r} is not in the grouping") from None
        return self._index[query.routing_language]

    def route(self, query: RouteQuery, rng: np.random.Generator) -> RouteDecision:
        g = self.assigned(query)
        if self.reroute_rate == 0.0 or rng.random() >= self.reroute_rate:
            return RouteDecision(g, False, g)
        K = self.grouping.K
        if self._weights is None:
            other = int(rng.integers(K - 1))
            other += other >= g
        else:
            other = int(rng.choice(K, p=self._weights[g]))
        return RouteDecision(other, True, g)


def _reroute_weights(sim: np.ndarray) -> np.ndarray:
    K = sim.shape[0]
    w = np.clip(sim, 0.0, None).copy()
    np.fill_diagonal(w, 0.0)
    for g in range(K):
        total = w[g].sum()
        if total > 0:
            w[g] /= total
        else:
            w[g] = 1.0 / (K - 1)
            w[g, g] = 0.0
    return w


def route(query: RouteQuery, grouping: GroupingPlan, reroute_rate: float,
          rng: np.random.Generator) -> RouteDecision:
    """One routing decision; see :class:`Router` for repeated use."""
    return Router(grouping, reroute_rate).route(query, rng)


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent per-worker generators derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def simulate(router: Router, queries: Sequence[RouteQuery], n: int, seed: int):
    """Route ``n`` queries (cycling through ``queries``) with one seeded stream."""
    if not queries:
        raise RoutingError("no queries to route")
    rng = np.random.default_rng(seed)
    decisions = []
    for i in range(n):
        q = queries[i % len(queries)]
        decisions.append((q, router.route(q, rng)))
    return decisions


def summarize(decisions: Iterable[tuple[RouteQuery, RouteDecision]], K: int) -> dict:
    n = rerouted = 0
    hist = Counter()
    rerouted_hist = Counter()
    for _, d in decisions:
        n += 1
        hist[d.group_id] += 1
        if d.rerouted:
            rerouted += 1
            rerouted_hist[d.group_id] += 1
    return {
        "n": n,
        "rerouted": rerouted,
        "empirical_rate": rerouted / n if n else 0.0,
        "per_group": [hist.get(g, 0) for g in range(K)],
        "rerouted_per_group": [rerouted_hist.get(g, 0) for g in range(K)],
    }


# -- multi-source self-ensemble ---------------------------------------------------

def combine_logprobs(distributions: Sequence[Sequence[float]], weights: Sequence[float],
                     check_normalized: bool = True) -> np.ndarray:
    """Weighted average of token log-probabilities over several source versions.

    The result is a score vector for ranking and beam search; it is not
    renormalized.
    """
    if not distributions:
        raise ValueError("no distributions to combine")
    if len(weights) != len(distributions):
        raise ValueError(f"{len(weights)} weights for {len(distributions)} distributions")
    lengths = {len(d) for d in distributions}
    if len(lengths) != 1:
        raise ValueError(f"log-probability vectors differ in length: {sorted(lengths)}")
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must be >= 0 and sum to 1, got {list(weights)}")
    lp = np.asarray(distributions, dtype=np.float64)
    if check_normalized:
        mass = np.exp(lp).sum(axis=1)
        bad = np.flatnonzero(np.abs(mass - 1.0) > 1e-6)
        if bad.size:
            raise ValueError(f"input {int(bad[0])} is not a log-distribution (mass {mass[bad[0]]:.8f})")
    # zero weights must not turn -inf entries into nan
    active = w > 0
    return w[active] @ lp[active]
