"""Sparse mining plans over the language matrix and backtranslation picks."""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from bitextkit.catalog import LanguageCatalog

STRATEGIES = ("bridge", "random", "random_with_en", "full", "english")


class PlanError(ValueError):
    pass


def _pair(a: str, b: str) -> tuple[str, str]:
    if a == b:
        raise PlanError(f"self pair ({a}, {a})")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class MiningPlan:
    pairs: frozenset[tuple[str, str]]
    strategy: str
    seed: int | None = None
    catalog_hash: str = ""

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: object) -> bool:
        if not isinstance(pair, tuple) or len(pair) != 2 or pair[0] == pair[1]:
            return False
        return _pair(*pair) in self.pairs

    def sorted_pairs(self) -> list[tuple[str, str]]:
        return sorted(self.pairs)

    def directions(self) -> list[tuple[str, str]]:
        """Both orientations of every mined pair."""
        return sorted(itertools.chain.from_iterable(((a, b), (b, a)) for a, b in self.pairs))


def make_plan(pairs: Iterable[tuple[str, str]], strategy: str, catalog: LanguageCatalog,
              seed: int | None = None) -> MiningPlan:
    normed = set()
    for a, b in pairs:
        for iso in (a, b):
            if iso not in catalog:
                raise PlanError(f"plan references unknown language {iso!r}")
        normed.add(_pair(a, b))
    return MiningPlan(frozenset(normed), strategy, seed, catalog.fingerprint())


def all_pairs(catalog: LanguageCatalog) -> list[tuple[str, str]]:
    return [_pair(a, b) for a, b in itertools.combinations(sorted(catalog.isos), 2)]


def build_full_plan(catalog: LanguageCatalog) -> MiningPlan:
    return make_plan(all_pairs(catalog), "full", catalog)


def build_english_plan(catalog: LanguageCatalog) -> MiningPlan:
    en = catalog.english_iso
    return make_plan(((en, iso) for iso in catalog.isos if iso != en), "english", catalog)


def build_bridge_plan(catalog: LanguageCatalog) -> MiningPlan:
    """Intra-grouping pairs, bridge x bridge pairs, and every language with English.

    The grouping holding English needs no bridge since English already
    reaches every language.
    """
    missing = [gid for gid, members in catalog.groupings.items()
               if catalog.english_iso not in members and not any(catalog[iso].is_bridge for iso in members)]
    if missing:
        raise PlanError(f"groupings without a bridge language: {', '.join(sorted(missing))}")

    pairs = set()
    for members in catalog.groupings.values():
        pairs.update(itertools.combinations(members, 2))
    pairs.update(itertools.combinations(catalog.bridges, 2))
    en = catalog.english_iso
    pairs.update((en, iso) for iso in catalog.isos if iso != en)
    return make_plan(pairs, "bridge", catalog)


def bridge_membership(catalog: LanguageCatalog, a: str, b: str) -> bool:
    """Whether (a, b) belongs in the bridge plan, decided pair by pair."""
    if a == b:
        return False
    la, lb = catalog[a], catalog[b]
    return (
        la.grouping_id == lb.grouping_id
        or (la.is_bridge and lb.is_bridge)
        or catalog.english_iso in (a, b)
    )


def target_pair_count(n_languages: int, sparsity_target: float) -> int:
    total = math.comb(n_languages, 2)
    # round half up; Python's round() is banker's rounding
    return int(math.floor((1.0 - sparsity_target) * total + 0.5))


def build_random_plan(catalog: LanguageCatalog, sparsity_target: float, include_english: bool,
                      seed: int) -> MiningPlan:
    """Uniformly sampled pairs reaching ``sparsity_target``.

    With ``include_english`` every English pair is forced in first and only
    the remainder is sampled, so the English subset does not depend on seed.
    """
    if not 0.0 <= sparsity_target <= 1.0:
        raise PlanError(f"sparsity_target must be in [0, 1], got {sparsity_target}")
    target = target_pair_count(len(catalog), sparsity_target)
    candidates = all_pairs(catalog)
    forced: list[tuple[str, str]] = []
    if include_english:
        en = catalog.english_iso
        forced = [p for p in candidates if en in p]
        if len(forced) > target:
            raise PlanError(
                f"sparsity {sparsity_target} allows {target} pairs but {len(forced)} English pairs are mandatory")
        candidates = [p for p in candidates if en not in p]
    rng = random.Random(seed)
    chosen = forced + rng.sample(candidates, target - len(forced))
    strategy = "random_with_en" if include_english else "random"
    return make_plan(chosen, strategy, catalog, seed=seed)


def sparsity(plan: MiningPlan, catalog: LanguageCatalog) -> float:
    """Fraction of all unordered language pairs the plan does not mine."""
    for pair in plan.pairs:
        for iso in pair:
            if iso not in catalog:
                raise PlanError(f"plan references unknown language {iso!r}")
    total = math.comb(len(catalog), 2)
    if total == 0:
        return 0.0
    return 1.0 - len(plan.pairs) / total


def build_plan(catalog: LanguageCatalog, strategy: str, sparsity_target: float | None = None,
               seed: int | None = None) -> MiningPlan:
    if strategy == "bridge":
        return build_bridge_plan(catalog)
    if strategy == "full":
        return build_full_plan(catalog)
    if strategy == "english":
        return build_english_plan(catalog)
    if strategy in ("random", "random_with_en"):
        if sparsity_target is None or seed is None:
            raise PlanError(f"strategy {strategy!r} needs a sparsity target and a seed")
        return build_random_plan(catalog, sparsity_target, strategy == "random_with_en", seed)
    raise PlanError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")


def write_plan(plan: MiningPlan, catalog: LanguageCatalog, path: str | Path) -> Path:
    """Write ``src<TAB>tgt`` rows plus a ``.json`` sidecar; returns the sidecar path."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("src\ttgt\n")
        for a, b in plan.sorted_pairs():
            fh.write(f"{a}\t{b}\n")
    sidecar = path.with_suffix(".json")
    meta = {
        "strategy": plan.strategy,
        "seed": plan.seed,
        "pairs": len(plan.pairs),
        "directions": 2 * len(plan.pairs),
        "sparsity": sparsity(plan, catalog),
        "catalog_hash": plan.catalog_hash,
    }
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def read_plan(path: str | Path, catalog: LanguageCatalog) -> MiningPlan:
    path = Path(path)
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#") or (lineno == 1 and line == "src\ttgt"):
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise PlanError(f"{path}:{lineno}: expected 'src<TAB>tgt'")
            pairs.append((fields[0], fields[1]))
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text(encoding="utf-8")) if sidecar.exists() else {}
    return make_plan(pairs, meta.get("strategy", "custom"), catalog, seed=meta.get("seed"))


# -- backtranslation --------------------------------------------------------

@dataclass(frozen=True)
class BTSelection:
    directions: tuple[tuple[str, str], ...]
    score_window: tuple[float, float] = (2.0, 10.0)
    limit: int = 100
    scores: Mapping[tuple[str, str], float] = field(default_factory=dict, compare=False)


def select_bt_directions(scores: Mapping[tuple[str, str], float], lo: float = 2.0, hi: float = 10.0,
                         limit: int = 100) -> BTSelection:
    """Directions scoring within [lo, hi], weakest first, at most ``limit``.

    Backtranslation is expensive, so the cut keeps the lowest-scoring
    directions. Ties break on (src, tgt).
    """
    for direction, s in scores.items():
        if not math.isfinite(s) or s < 0:
            raise ValueError(f"score for {direction} must be finite and >= 0, got {s}")
    window = [(s, d) for d, s in scores.items() if lo <= s <= hi]
    window.sort()
    picked = tuple(d for _, d in window[:limit])
    return BTSelection(picked, (lo, hi), limit, {d: scores[d] for d in picked})


def read_scores(path: str | Path) -> dict[tuple[str, str], float]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if lineno == 1 and fields[:3] == ["src", "tgt", "bleu"]:
                continue
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'src<TAB>tgt<TAB>bleu'")
            try:
                out[(fields[0], fields[1])] = float(fields[2])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad score {fields[2]!r}") from None
    return out
