"""Shard planning with replication for low-resource languages.

Training data is split into ``total_shards`` global shards. Each language
gets a power-of-two number of local shards based on its size; a language
with ``n`` local shards has each of them replicated ``total_shards / n``
times, so every global shard sees every language. Global shard ``g`` reads
local shard ``g % n``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

DEFAULT_TOTAL_SHARDS = 256


class ShardError(ValueError):
    pass


@dataclass(frozen=True)
class LanguageShards:
    n_shards: int
    replication: int


@dataclass(frozen=True)
class ShardPlan:
    total_shards: int
    per_language: Mapping[str, LanguageShards]
    target_shard_size: int = 0

    def n_shards(self, iso: str) -> int:
        try:
            return self.per_language[iso].n_shards
        except KeyError:
            raise ShardError(f"language {iso!r} is not in the shard plan") from None

    def pair_shards(self, src: str, tgt: str) -> int:
        """Local shard count for a direction: the rarer language decides."""
        return min(self.n_shards(src), self.n_shards(tgt))

    def to_dict(self) -> dict:
        return {
            "total_shards": self.total_shards,
            "target_shard_size": self.target_shard_size,
            "per_language": {
                iso: {"n_shards": s.n_shards, "replication": s.replication}
                for iso, s in sorted(self.per_language.items())
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ShardPlan":
        total = int(data["total_shards"])
        per = {iso: LanguageShards(int(v["n_shards"]), int(v["replication"]))
               for iso, v in data["per_language"].items()}
        for iso, s in per.items():
            if s.n_shards * s.replication != total:
                raise ShardError(f"{iso}: n_shards x replication != {total}")
        return cls(total, per, int(data.get("target_shard_size", 0)))


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def shards_for_size(size: int, total_shards: int, target_shard_size: int) -> int:
    """Largest power of two <= ceil(size / target), clamped to [1, total_shards]."""
    wanted = max(1, min(math.ceil(size / target_shard_size), total_shards))
    return 1 << (wanted.bit_length() - 1)


def plan_shards(sizes: Mapping[str, int], total_shards: int = DEFAULT_TOTAL_SHARDS,
                target_shard_size: int = 1_000_000) -> ShardPlan:
    if not sizes:
        raise ShardError("no languages to shard")
    if not is_power_of_two(total_shards):
        raise ShardError(f"total_shards must be a power of two, got {total_shards}")
    if target_shard_size <= 0:
        raise ShardError("target_shard_size must be positive")
    per = {}
    for iso, size in sizes.items():
        if size < 0:
            raise ShardError(f"negative size for {iso!r}")
        n = shards_for_size(size, total_shards, target_shard_size)
        per[iso] = LanguageShards(n, total_shards // n)
    return ShardPlan(total_shards, per, target_shard_size)


def stable_hash(*parts: str, seed: int = 0) -> int:
    """64-bit hash that does not change across processes or Python versions."""
    h = hashlib.blake2b(digest_size=8, key=seed.to_bytes(8, "little", signed=False))
    for p in parts:
        h.update(p.encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


def assign_record(record, plan: ShardPlan, hash_seed: int = 0) -> int:
    """Local shard index of a record within its direction.

    The index is also the first global shard holding the record; the
    others are ``global_shards(index, n, total)``.
    """
    n = plan.pair_shards(record.src_lang, record.tgt_lang)
    if n == 1:
        return 0
    return stable_hash(record.src_lang, record.tgt_lang, record.src_text, seed=hash_seed) % n


def global_shards(local_index: int, n_shards: int, total_shards: int = DEFAULT_TOTAL_SHARDS) -> range:
    if not 0 <= local_index < n_shards:
        raise ShardError(f"local index {local_index} out of range for {n_shards} shards")
    return range(local_index, total_shards, n_shards)


def write_plan(plan: ShardPlan, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plan.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_plan(path: str | Path) -> ShardPlan:
    return ShardPlan.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def read_sizes(path: str | Path) -> dict[str, int]:
    """``iso<TAB>sentences`` rows."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ShardError(f"{path}:{lineno}: expected 'iso<TAB>sentences'")
            if lineno == 1 and not fields[1].strip().isdigit():
                continue
            out[fields[0]] = int(fields[1])
    return out
