"""Language groups for language-specific sublayers.

Languages with more training data than ``singleton_threshold`` each get a
group of their own. The rest are clustered by vocabulary overlap: greedy
average-linkage agglomeration where a merge is only allowed if the merged
cluster stays under a data-mass cap, until ``target_cluster_count``
clusters remain.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_TOP_N = 50_000
DEFAULT_SINGLETON_THRESHOLD = 100_000_000
DEFAULT_CLUSTER_COUNT = 18
DEFAULT_BALANCE_SLACK = 2.0


class GroupingError(ValueError):
    pass


@dataclass(frozen=True)
class VocabProfile:
    language: str
    top_tokens: frozenset[str]
    total_sentences: int

    def __post_init__(self):
        if not self.top_tokens:
            raise GroupingError(f"profile for {self.language!r} has no tokens")
        if self.total_sentences < 0:
            raise GroupingError(f"negative sentence count for {self.language!r}")

    @classmethod
    def from_counts(cls, language: str, token_counts: Mapping[str, int], total_sentences: int,
                    top_n: int = DEFAULT_TOP_N) -> "VocabProfile":
        ranked = sorted(token_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return cls(language, frozenset(tok for tok, _ in ranked[:top_n]), total_sentences)


@dataclass(frozen=True)
class GroupingPlan:
    groups: tuple[tuple[str, ...], ...]
    singleton_threshold: float
    masses: tuple[int, ...] = ()
    n_singletons: int = 0

    @property
    def K(self) -> int:
        return len(self.groups)

    def group_of(self, iso: str) -> int:
        for gid, members in enumerate(self.groups):
            if iso in members:
                return gid
        raise GroupingError(f"language {iso!r} is not in any group")

    def index(self) -> dict[str, int]:
        return {iso: gid for gid, members in enumerate(self.groups) for iso in members}

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "singleton_threshold": self.singleton_threshold,
            "n_singletons": self.n_singletons,
            "groups": [
                {"id": gid, "members": list(members), "mass": self.masses[gid] if self.masses else None}
                for gid, members in enumerate(self.groups)
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GroupingPlan":
        groups = tuple(tuple(g["members"]) for g in data["groups"])
        seen: set[str] = set()
        for members in groups:
            if not members:
                raise GroupingError("empty group")
            dup = seen.intersection(members)
            if dup:
                raise GroupingError(f"languages in more than one group: {', '.join(sorted(dup))}")
            seen.update(members)
        masses = tuple(int(g.get("mass") or 0) for g in data["groups"])
        return cls(groups, float(data.get("singleton_threshold", DEFAULT_SINGLETON_THRESHOLD)), masses,
                   int(data.get("n_singletons", 0)))


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def overlap_matrix(profiles: Sequence[VocabProfile]) -> np.ndarray:
    """Pairwise Jaccard similarity of top-token sets; diagonal is 1."""
    if len(profiles) < 2:
        raise GroupingError("need at least two profiles")
    n = len(profiles)
    out = np.eye(n)
    for i, j in itertools.combinations(range(n), 2):
        out[i, j] = out[j, i] = jaccard(profiles[i].top_tokens, profiles[j].top_tokens)
    return out


def build_groups(profiles: Sequence[VocabProfile],
                 singleton_threshold: float = DEFAULT_SINGLETON_THRESHOLD,
                 target_cluster_count: int = DEFAULT_CLUSTER_COUNT,
                 balance_slack: float = DEFAULT_BALANCE_SLACK) -> GroupingPlan:
    """Singletons above the threshold, then balanced overlap clusters for the rest.

    Each step merges the pair of clusters with the highest average pairwise
    overlap among merges that keep the cluster mass within
    ``balance_slack * remaining_mass / target_cluster_count``. Ties go to
    the lexicographically smaller pair of member lists. If no merge fits
    under the cap, the two lightest clusters are merged instead.
    """
    if target_cluster_count < 1:
        raise GroupingError("target_cluster_count must be >= 1")
    names = [p.language for p in profiles]
    if len(set(names)) != len(names):
        raise GroupingError("duplicate language in profiles")

    big = sorted((p for p in profiles if p.total_sentences > singleton_threshold), key=lambda p: p.language)
    rest = sorted((p for p in profiles if p.total_sentences <= singleton_threshold), key=lambda p: p.language)
    if len(rest) < target_cluster_count:
        raise GroupingError(
            f"{len(rest)} languages at or below the singleton threshold cannot form {target_cluster_count} clusters")

    clusters = _agglomerate(rest, target_cluster_count, balance_slack)
    mass = {p.language: p.total_sentences for p in profiles}
    groups = [(p.language,) for p in big] + sorted(clusters)
    return GroupingPlan(
        groups=tuple(groups),
        singleton_threshold=singleton_threshold,
        masses=tuple(sum(mass[iso] for iso in g) for g in groups),
        n_singletons=len(big),
    )


def _agglomerate(profiles: Sequence[VocabProfile], k: int, slack: float) -> list[tuple[str, ...]]:
    if not profiles:
        return []
    sim = overlap_matrix(profiles) if len(profiles) > 1 else np.ones((1, 1))
    members: list[tuple[str, ...]] = [(p.language,) for p in profiles]
    mass = [float(p.total_sentences) for p in profiles]
    # link[i][j] = sum of pairwise overlaps between clusters i and j
    link = sim.copy()
    alive = list(range(len(profiles)))
    cap = slack * sum(mass) / k

    while len(alive) > k:
        best = None
        for a, b in itertools.combinations(alive, 2):
            if mass[a] + mass[b] > cap:
                continue
            score = round(link[a, b] / (len(members[a]) * len(members[b])), 12)
            key = (-score, min(members[a], members[b]), max(members[a], members[b]))
            if best is None or key < best[0]:
                best = (key, a, b)
        if best is None:
            a, b = sorted(alive, key=lambda i: (mass[i], members[i]))[:2]
        else:
            _, a, b = best
        a, b = (a, b) if members[a] < members[b] else (b, a)
        members[a] = tuple(sorted(members[a] + members[b]))
        mass[a] += mass[b]
        link[a, :] += link[b, :]
        link[:, a] += link[:, b]
        alive.remove(b)
    return [members[i] for i in alive]


def group_similarity(plan: GroupingPlan, profiles: Iterable[VocabProfile]) -> np.ndarray:
    """Average pairwise overlap between the members of every two groups."""
    by_lang = {p.language: p for p in profiles}
    K = plan.K
    out = np.eye(K)
    for g, h in itertools.combinations(range(K), 2):
        vals = [jaccard(by_lang[a].top_tokens, by_lang[b].top_tokens)
                for a in plan.groups[g] for b in plan.groups[h]]
        out[g, h] = out[h, g] = float(np.mean(vals))
    return out


def read_profile(path: str | Path, total_sentences: int, language: str | None = None,
                 top_n: int = DEFAULT_TOP_N) -> VocabProfile:
    """Profile from a ``token<TAB>count`` file; the language defaults to the file stem."""
    path = Path(path)
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise GroupingError(f"{path}:{lineno}: expected 'token<TAB>count'")
            if lineno == 1 and fields == ["token", "count"]:
                continue
            counts[fields[0]] = counts.get(fields[0], 0) + int(fields[1])
    return VocabProfile.from_counts(language or path.stem, counts, total_sentences, top_n)


def write_grouping(plan: GroupingPlan, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plan.to_dict(), indent=2) + "\n", encoding="utf-8")


def read_grouping(path: str | Path) -> GroupingPlan:
    return GroupingPlan.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
