"""Language catalog: per-language metadata, groupings and bitext counts.

A catalog is read from two TSV files. The language table has one row per
language::

    iso  name  family  scripts  grouping  is_bridge  mono_sentences

and the companion bitext table lists every unordered pair once::

    src  tgt  sentence_pairs

By default the companion file is looked up next to the language table as
``<stem>_bitext.tsv`` (``m2m100.tsv`` -> ``m2m100_bitext.tsv``).
"""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

CATALOG_COLUMNS = ("iso", "name", "family", "scripts", "grouping", "is_bridge", "mono_sentences")
BITEXT_COLUMNS = ("src", "tgt", "sentence_pairs")

DEFAULT_TIER_THRESHOLDS = (1_000_000, 10_000_000)

_TRUE = {"1", "true", "yes", "y"}
_FALSE = {"0", "false", "no", "n", ""}


class CatalogError(ValueError):
    """Raised when a catalog file is malformed or violates an invariant."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


@dataclass(frozen=True)
class Language:
    iso: str
    name: str
    family: str
    scripts: tuple[str, ...]
    grouping_id: str
    is_bridge: bool = False
    mono_sentences: int = 0
    bitext_sentences: Mapping[str, int] = field(default_factory=dict)

    @property
    def total_bitext(self) -> int:
        return sum(self.bitext_sentences.values())


@dataclass(frozen=True)
class LanguageCatalog:
    languages: tuple[Language, ...]
    groupings: Mapping[str, tuple[str, ...]]
    english_iso: str = "en"

    def __post_init__(self):
        object.__setattr__(self, "_by_iso", {lang.iso: lang for lang in self.languages})

    def __len__(self) -> int:
        return len(self.languages)

    def __contains__(self, iso: object) -> bool:
        return iso in self._by_iso

    def __getitem__(self, iso: str) -> Language:
        try:
            return self._by_iso[iso]
        except KeyError:
            raise KeyError(f"unknown language {iso!r}") from None

    @property
    def isos(self) -> tuple[str, ...]:
        return tuple(lang.iso for lang in self.languages)

    @property
    def bridges(self) -> tuple[str, ...]:
        return tuple(lang.iso for lang in self.languages if lang.is_bridge)

    def bitext_count(self, a: str, b: str) -> int:
        return self[a].bitext_sentences.get(b, 0)

    def bitext_pairs(self) -> dict[tuple[str, str], int]:
        """Unordered pairs (a < b) with a positive count."""
        out = {}
        for lang in self.languages:
            for other, n in lang.bitext_sentences.items():
                if lang.iso < other and n > 0:
                    out[(lang.iso, other)] = n
        return out

    def fingerprint(self) -> str:
        """Content hash, independent of file layout and row order."""
        h = hashlib.sha256()
        for lang in sorted(self.languages, key=lambda x: x.iso):
            row = [lang.iso, lang.name, lang.family, ";".join(lang.scripts), lang.grouping_id,
                   str(int(lang.is_bridge)), str(lang.mono_sentences)]
            h.update(("\t".join(row) + "\n").encode("utf-8"))
        for (a, b), n in sorted(self.bitext_pairs().items()):
            h.update(f"{a}\t{b}\t{n}\n".encode("utf-8"))
        h.update(f"english={self.english_iso}\n".encode("utf-8"))
        return h.hexdigest()[:16]


def build_catalog(
    languages: Iterable[Language],
    bitext: Mapping[tuple[str, str], int] | None = None,
    english_iso: str = "en",
) -> LanguageCatalog:
    """Assemble and validate a catalog from in-memory rows.

    ``bitext`` maps unordered pairs to sentence-pair counts; it is mirrored onto
    both languages. Any ``bitext_sentences`` already on the languages are
    merged in and must be symmetric.
    """
    langs = list(languages)
    seen: dict[str, Language] = {}
    for lang in langs:
        if not lang.iso:
            raise CatalogError("empty iso code")
        if lang.iso in seen:
            raise CatalogError(f"duplicate iso {lang.iso!r}")
        if lang.mono_sentences < 0:
            raise CatalogError(f"negative mono_sentences for {lang.iso!r}")
        seen[lang.iso] = lang

    counts: dict[str, dict[str, int]] = {iso: dict(lang.bitext_sentences) for iso, lang in seen.items()}
    for (a, b), n in (bitext or {}).items():
        _add_pair(counts, a, b, n)
    for a, row in counts.items():
        for b, n in row.items():
            if b not in seen:
                raise CatalogError(f"bitext count {a}-{b} references unknown language {b!r}")
            if n < 0:
                raise CatalogError(f"negative bitext count for {a}-{b}")
            if counts[b].get(a) != n:
                raise CatalogError(
                    f"asymmetric bitext counts: {a}->{b}={n}, {b}->{a}={counts[b].get(a)}")

    groupings: dict[str, list[str]] = {}
    for lang in langs:
        groupings.setdefault(lang.grouping_id, []).append(lang.iso)

    if english_iso not in seen:
        raise CatalogError(f"english_iso {english_iso!r} not in catalog")

    frozen = tuple(
        Language(
            iso=lang.iso,
            name=lang.name,
            family=lang.family,
            scripts=tuple(lang.scripts),
            grouping_id=lang.grouping_id,
            is_bridge=lang.is_bridge,
            mono_sentences=lang.mono_sentences,
            bitext_sentences=MappingProxyType(dict(sorted(counts[lang.iso].items()))),
        )
        for lang in langs
    )
    return LanguageCatalog(
        languages=frozen,
        groupings=MappingProxyType({g: tuple(m) for g, m in groupings.items()}),
        english_iso=english_iso,
    )


def _add_pair(counts: dict[str, dict[str, int]], a: str, b: str, n: int) -> None:
    if a == b:
        raise CatalogError(f"self pair {a}-{a} in bitext table")
    for x, y in ((a, b), (b, a)):
        if x not in counts:
            raise CatalogError(f"bitext pair {a}-{b} references unknown language {x!r}")
        prev = counts[x].get(y)
        if prev is not None and prev != n:
            raise CatalogError(f"asymmetric bitext counts: {x}->{y}={prev}, new value {n}")
        counts[x][y] = n


def default_bitext_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_bitext{path.suffix or '.tsv'}")


def _rows(path: Path, columns: tuple[str, ...]):
    """Yield (line_number, fields) for data rows, validating the header."""
    with open(path, encoding="utf-8", newline="") as fh:
        header_seen = False
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if not header_seen:
                header_seen = True
                if tuple(f.strip() for f in fields) != columns:
                    raise CatalogError(
                        f"expected header {' '.join(columns)!r}, got {' '.join(fields)!r}",
                        path=str(path), line=lineno)
                continue
            if len(fields) != len(columns):
                raise CatalogError(f"expected {len(columns)} fields, got {len(fields)}",
                                   path=str(path), line=lineno)
            yield lineno, [f.strip() for f in fields]
        if not header_seen:
            raise CatalogError("empty file", path=str(path))


def _parse_int(value: str, name: str, path: Path, lineno: int) -> int:
    try:
        n = int(value.replace("_", ""))
    except ValueError:
        raise CatalogError(f"{name} is not an integer: {value!r}", path=str(path), line=lineno) from None
    if n < 0:
        raise CatalogError(f"{name} must be >= 0, got {n}", path=str(path), line=lineno)
    return n


def load_catalog(
    path: str | Path,
    bitext_path: str | Path | None = None,
    english_iso: str = "en",
) -> LanguageCatalog:
    """Load and validate a catalog TSV plus its companion bitext table.

    A missing companion file is only accepted when ``bitext_path`` was not
    given explicitly; the catalog then carries no bitext counts.
    """
    path = Path(path)
    explicit = bitext_path is not None
    bitext_path = Path(bitext_path) if explicit else default_bitext_path(path)

    languages: list[Language] = []
    first_line: dict[str, int] = {}
    for lineno, f in _rows(path, CATALOG_COLUMNS):
        iso, name, family, scripts, grouping, is_bridge, mono = f
        if not iso:
            raise CatalogError("empty iso code", path=str(path), line=lineno)
        if iso in first_line:
            raise CatalogError(f"duplicate iso {iso!r} (first seen on line {first_line[iso]})",
                               path=str(path), line=lineno)
        first_line[iso] = lineno
        if not grouping:
            raise CatalogError(f"language {iso!r} has no grouping", path=str(path), line=lineno)
        flag = is_bridge.lower()
        if flag not in _TRUE | _FALSE:
            raise CatalogError(f"is_bridge must be a boolean, got {is_bridge!r}",
                               path=str(path), line=lineno)
        languages.append(Language(
            iso=iso,
            name=name,
            family=family,
            scripts=tuple(s.strip() for s in scripts.split(";") if s.strip()),
            grouping_id=grouping,
            is_bridge=flag in _TRUE,
            mono_sentences=_parse_int(mono, "mono_sentences", path, lineno),
        ))

    counts: dict[str, dict[str, int]] = {lang.iso: {} for lang in languages}
    if bitext_path.exists():
        for lineno, (a, b, n) in _rows(bitext_path, BITEXT_COLUMNS):
            value = _parse_int(n, "sentence_pairs", bitext_path, lineno)
            try:
                _add_pair(counts, a, b, value)
            except CatalogError as exc:
                raise CatalogError(str(exc), path=str(bitext_path), line=lineno) from None
    elif explicit:
        raise CatalogError("bitext file not found", path=str(bitext_path))

    languages = [
        Language(lang.iso, lang.name, lang.family, lang.scripts, lang.grouping_id,
                 lang.is_bridge, lang.mono_sentences, counts[lang.iso])
        for lang in languages
    ]
    try:
        return build_catalog(languages, english_iso=english_iso)
    except CatalogError as exc:
        raise CatalogError(str(exc), path=str(path)) from None


def resource_tier(lang: Language, thresholds: tuple[int, int] = DEFAULT_TIER_THRESHOLDS) -> str:
    """Classify a language as ``low``, ``mid`` or ``high`` by total bitext.

    Boundaries go upward: a count equal to a threshold lands in the higher tier.
    """
    return tier_for_count(lang.total_bitext, thresholds)


def tier_for_count(count: int, thresholds: tuple[int, int] = DEFAULT_TIER_THRESHOLDS) -> str:
    lo, hi = thresholds
    if not lo < hi:
        raise ValueError(f"thresholds must be strictly increasing, got {thresholds}")
    if count < lo:
        return "low"
    if count < hi:
        return "mid"
    return "high"


def suggest_bridges(catalog: LanguageCatalog, k: int = 1) -> dict[str, tuple[str, ...]]:
    """Top-k languages per grouping by total bitext (ties broken by iso)."""
    out = {}
    for gid, members in catalog.groupings.items():
        ranked = sorted(members, key=lambda iso: (-catalog[iso].total_bitext, iso))
        out[gid] = tuple(ranked[:k])
    return out


def write_catalog(catalog: LanguageCatalog, path: str | Path, bitext_path: str | Path | None = None) -> None:
    path = Path(path)
    bitext_path = Path(bitext_path) if bitext_path is not None else default_bitext_path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(CATALOG_COLUMNS)
        for lang in catalog.languages:
            w.writerow([lang.iso, lang.name, lang.family, "; ".join(lang.scripts), lang.grouping_id,
                        "true" if lang.is_bridge else "false", lang.mono_sentences])
    with open(bitext_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(BITEXT_COLUMNS)
        for (a, b), n in sorted(catalog.bitext_pairs().items()):
            w.writerow([a, b, n])
