"""Bitext postprocessing: per-record filters, deduplication and BT tagging.

Per-record rules run in a fixed order and the first failure names the drop:

1. ``eval_overlap``  either side matches a validation/test sentence (any language)
2. ``punctuation``   either side is more than ``punct_threshold`` punctuation
3. ``max_subwords``  either side has more than ``max_subwords`` subwords
4. ``len_ratio``     longer/shorter subword count is more than ``max_len_ratio``
5. ``core_chars``    either side has more than ``core_char_threshold`` non-core characters

Every threshold is exclusive: a value exactly at the limit is kept.
Records that pass are deduplicated on (direction, normalized texts).
"""
from __future__ import annotations

import dataclasses
import io
import json
import logging
import multiprocessing
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, TextIO

from bitextkit import charclass, kernels
from bitextkit.catalog import LanguageCatalog

log = logging.getLogger(__name__)

BT_TOKEN = "__bt__"
ORIGINS = ("mined", "backtranslated")
RULES = ("eval_overlap", "punctuation", "max_subwords", "len_ratio", "core_chars", "duplicate")
TSV_FIELDS = ("src_lang", "tgt_lang", "src_text", "tgt_text", "origin")


class FilterInputError(ValueError):
    pass


class MissingCoreTableError(KeyError):
    pass


def normalize(text: str) -> str:
    """Trim and collapse internal whitespace runs to one space."""
    return " ".join(text.split())


@dataclass(frozen=True)
class BitextRecord:
    src_lang: str
    tgt_lang: str
    src_text: str
    tgt_text: str
    origin: str = "mined"
    bt_tagged: bool = False

    def __post_init__(self):
        if not self.src_text.strip() or not self.tgt_text.strip():
            raise FilterInputError(f"empty sentence in {self.src_lang}-{self.tgt_lang} record")
        if self.origin not in ORIGINS:
            raise FilterInputError(f"origin must be one of {ORIGINS}, got {self.origin!r}")
        if self.bt_tagged and self.origin != "backtranslated":
            raise FilterInputError("only backtranslated records can carry the BT tag")

    @property
    def direction(self) -> tuple[str, str]:
        return (self.src_lang, self.tgt_lang)

    def key(self) -> tuple[str, str, str, str]:
        return (self.src_lang, self.tgt_lang, normalize(self.src_text), normalize(self.tgt_text))

    def serialized_source(self) -> str:
        return f"{BT_TOKEN} {self.src_text}" if self.bt_tagged else self.src_text


def tag_backtranslation(record: BitextRecord) -> BitextRecord:
    """Mark a backtranslated record so its source is written with the BT token."""
    if record.origin != "backtranslated":
        raise ValueError(f"cannot BT-tag a {record.origin} record")
    if record.bt_tagged:
        return record
    return dataclasses.replace(record, bt_tagged=True)


# -- measurements -------------------------------------------------------------

def whitespace_subwords(text: str) -> int:
    return len(text.split())


class SentencePieceCounter:
    """Subword counter backed by a trained SentencePiece model (optional dependency)."""

    def __init__(self, model_path: str):
        import sentencepiece  # noqa: PLC0415

        self.model_path = model_path
        self._sp = sentencepiece.SentencePieceProcessor(model_file=model_path)

    def __call__(self, text: str) -> int:
        return len(self._sp.encode(text))

    def __reduce__(self):
        return (SentencePieceCounter, (self.model_path,))


def _histogram(text: str) -> list[int]:
    return kernels.class_histogram(text, charclass.class_table(), charclass.NUM_CLASSES)


def punctuation_ratio(text: str) -> float:
    """Punctuation and symbol characters over non-whitespace characters."""
    h = _histogram(text)
    visible = len(text) - h[charclass.SPACE]
    if visible <= 0:
        raise ValueError("punctuation ratio of an empty or whitespace-only text")
    return h[charclass.PUNCT] / visible


def non_core_ratio(text: str, core: frozenset[int]) -> float:
    """Non-core characters over non-whitespace characters."""
    h = _histogram(text)
    visible = len(text) - h[charclass.SPACE]
    if visible <= 0:
        raise ValueError("core-character ratio of an empty or whitespace-only text")
    core_hits = sum(h[c] for c in core if c != charclass.SPACE)
    return (visible - core_hits) / visible


# -- configuration ------------------------------------------------------------

@dataclass
class FilterConfig:
    punct_threshold: float = 0.5
    max_subwords: int = 250
    max_len_ratio: float = 3.0
    core_char_threshold: float = 0.5
    core_char_tables: dict[str, frozenset[int]] = field(default_factory=dict)
    eval_blocklist: frozenset[str] = frozenset()
    tokenizer: Callable[[str], int] = whitespace_subwords
    on_missing_core_table: str = "skip"

    def __post_init__(self):
        for name in ("punct_threshold", "core_char_threshold"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if self.max_subwords <= 0:
            raise ValueError("max_subwords must be positive")
        if not self.max_len_ratio > 0:
            raise ValueError("max_len_ratio must be positive")
        if self.on_missing_core_table not in ("skip", "error"):
            raise ValueError("on_missing_core_table must be 'skip' or 'error'")
        self.eval_blocklist = frozenset(normalize(s) for s in self.eval_blocklist)

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: str | Path = ".") -> "FilterConfig":
        """Build from a JSON-style dict.

        ``eval_sets`` lists text files (one sentence per line, relative to
        ``base_dir``); ``core_char_tables`` maps iso -> class names such as
        ``["cyrillic", "latin", "space", "digit", "punct"]``; ``tokenizer`` is
        ``"whitespace"`` or ``"spm:<model path>"``.
        """
        data = dict(data)
        base = Path(base_dir)
        blocklist = set(data.pop("eval_blocklist", []))
        for p in data.pop("eval_sets", []):
            blocklist.update(read_blocklist(base / p))
        tables = {}
        for iso, names in data.pop("core_char_tables", {}).items():
            try:
                tables[iso] = frozenset(charclass.CLASS_BY_NAME[n.lower()] for n in names)
            except KeyError as exc:
                raise ValueError(f"unknown character class {exc.args[0]!r} for {iso}") from None
        tok = data.pop("tokenizer", "whitespace")
        if tok == "whitespace":
            tokenizer = whitespace_subwords
        elif isinstance(tok, str) and tok.startswith("spm:"):
            tokenizer = SentencePieceCounter(str(base / tok[4:]))
        else:
            raise ValueError(f"unknown tokenizer {tok!r}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown filter config keys: {', '.join(sorted(unknown))}")
        return cls(core_char_tables=tables, eval_blocklist=frozenset(blocklist), tokenizer=tokenizer, **data)

    @classmethod
    def from_json(cls, path: str | Path) -> "FilterConfig":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")), base_dir=path.parent)

    def snapshot(self) -> dict:
        return {
            "punct_threshold": self.punct_threshold,
            "max_subwords": self.max_subwords,
            "max_len_ratio": self.max_len_ratio,
            "core_char_threshold": self.core_char_threshold,
            "core_char_tables": {k: sorted(charclass.CLASS_NAMES[c] for c in v)
                                 for k, v in sorted(self.core_char_tables.items())},
            "eval_blocklist_size": len(self.eval_blocklist),
            "tokenizer": getattr(self.tokenizer, "model_path", None) or getattr(self.tokenizer, "__name__", "custom"),
            "on_missing_core_table": self.on_missing_core_table,
        }


def read_blocklist(path: str | Path) -> set[str]:
    with open(path, encoding="utf-8") as fh:
        return {normalize(line) for line in fh if line.strip()}


def core_table(lang: str, config: FilterConfig, catalog: LanguageCatalog | None) -> frozenset[int] | None:
    if lang in config.core_char_tables:
        return config.core_char_tables[lang]
    if catalog is not None and lang in catalog and catalog[lang].scripts:
        return charclass.core_classes(catalog[lang].scripts)
    if config.on_missing_core_table == "error":
        raise MissingCoreTableError(f"no core-character table for language {lang!r}")
    return None


# -- rules --------------------------------------------------------------------

def remove_eval_overlap(record: BitextRecord, blocklist: frozenset[str] | set[str]) -> str | None:
    """``"eval_overlap"`` if either side is an evaluation sentence, else ``None``."""
    if normalize(record.src_text) in blocklist or normalize(record.tgt_text) in blocklist:
        return "eval_overlap"
    return None


_warned_missing: set[str] = set()


def filter_record(record: BitextRecord, config: FilterConfig,
                  catalog: LanguageCatalog | None = None) -> str | None:
    """Return ``None`` to keep the record, or the name of the first failing rule."""
    if config.eval_blocklist and remove_eval_overlap(record, config.eval_blocklist):
        return "eval_overlap"
    src, tgt = record.src_text, record.tgt_text
    if punctuation_ratio(src) > config.punct_threshold or punctuation_ratio(tgt) > config.punct_threshold:
        return "punctuation"
    n_src, n_tgt = config.tokenizer(src), config.tokenizer(tgt)
    if n_src > config.max_subwords or n_tgt > config.max_subwords:
        return "max_subwords"
    shorter, longer = min(n_src, n_tgt), max(n_src, n_tgt)
    if shorter == 0 or longer > config.max_len_ratio * shorter:
        return "len_ratio"
    for lang, text in ((record.src_lang, src), (record.tgt_lang, tgt)):
        core = core_table(lang, config, catalog)
        if core is None:
            if lang not in _warned_missing:
                _warned_missing.add(lang)
                log.warning("no core-character table for %s; skipping that rule", lang)
            continue
        if non_core_ratio(text, core) > config.core_char_threshold:
            return "core_chars"
    return None


def dedup_stream(records: Iterable[BitextRecord]) -> Iterator[BitextRecord]:
    """First occurrence of every (direction, normalized source, normalized target)."""
    seen: set[tuple[str, str, str, str]] = set()
    for rec in records:
        k = rec.key()
        if k not in seen:
            seen.add(k)
            yield rec


# -- pipeline -----------------------------------------------------------------

@dataclass
class FilterReport:
    input_count: int = 0
    kept_count: int = 0
    drops: Counter = field(default_factory=Counter)
    per_direction: dict = field(default_factory=lambda: defaultdict(Counter))

    def record(self, rec: BitextRecord, rule: str | None) -> None:
        self.input_count += 1
        d = self.per_direction[f"{rec.src_lang}-{rec.tgt_lang}"]
        d["input"] += 1
        if rule is None:
            self.kept_count += 1
            d["kept"] += 1
        else:
            self.drops[rule] += 1
            d[rule] += 1

    def conserved(self) -> bool:
        return self.input_count == self.kept_count + sum(self.drops.values())

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "kept_count": self.kept_count,
            "drops": {rule: self.drops.get(rule, 0) for rule in RULES + tuple(sorted(set(self.drops) - set(RULES)))},
            "per_direction": {k: dict(sorted(v.items())) for k, v in sorted(self.per_direction.items())},
        }


_worker_state: dict = {}


def _init_worker(config: FilterConfig, catalog: LanguageCatalog | None) -> None:
    _worker_state["config"] = config
    _worker_state["catalog"] = catalog
    charclass.class_table()


def _check(rec: BitextRecord) -> str | None:
    return filter_record(rec, _worker_state["config"], _worker_state["catalog"])


class FilterPipeline:
    """Stream records through the rules, dedup, then BT-tag what survives.

    State is the dedup seen-set plus the running report, so one pipeline
    instance corresponds to one logical stream.
    """

    def __init__(self, config: FilterConfig, catalog: LanguageCatalog | None = None, workers: int = 1,
                 tag_bt: bool = True, chunksize: int = 256):
        self.config = config
        self.catalog = catalog
        self.workers = max(1, int(workers))
        self.tag_bt = tag_bt
        self.chunksize = chunksize
        self.report = FilterReport()
        self._seen: set[tuple[str, str, str, str]] = set()

    def _verdicts(self, records: Iterable[BitextRecord]) -> Iterator[tuple[BitextRecord, str | None]]:
        if self.workers == 1:
            for rec in records:
                yield rec, filter_record(rec, self.config, self.catalog)
            return
        ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods() else "spawn")
        with ctx.Pool(self.workers, initializer=_init_worker, initargs=(self.config, self.catalog)) as pool:
            buffered: list[BitextRecord] = []
            for rec in records:
                buffered.append(rec)
                if len(buffered) >= self.chunksize * self.workers * 4:
                    # imap keeps submission order, so output order matches input
                    yield from zip(buffered, pool.imap(_check, buffered, chunksize=self.chunksize))
                    buffered = []
            if buffered:
                yield from zip(buffered, pool.imap(_check, buffered, chunksize=self.chunksize))

    def run(self, records: Iterable[BitextRecord]) -> Iterator[BitextRecord]:
        for rec, rule in self._verdicts(records):
            if rule is None:
                k = rec.key()
                if k in self._seen:
                    rule = "duplicate"
                else:
                    self._seen.add(k)
            self.report.record(rec, rule)
            if rule is None:
                if self.tag_bt and rec.origin == "backtranslated":
                    rec = tag_backtranslation(rec)
                yield rec


# -- stream formats -----------------------------------------------------------

def parse_tsv_line(line: str, lineno: int = 0) -> tuple[BitextRecord, list[str]]:
    fields = line.rstrip("\r\n").split("\t")
    if len(fields) < 5:
        raise FilterInputError(f"line {lineno}: expected at least 5 tab-separated fields, got {len(fields)}")
    src_lang, tgt_lang, src_text, tgt_text, origin = fields[:5]
    return _make_record(src_lang, tgt_lang, src_text, tgt_text, origin, lineno), fields[5:]


def _make_record(src_lang, tgt_lang, src_text, tgt_text, origin, lineno, bt_tagged=False) -> BitextRecord:
    origin = origin or "mined"
    if src_text.startswith(BT_TOKEN + " "):
        if origin != "backtranslated":
            raise FilterInputError(f"line {lineno}: BT token on a {origin} record")
        src_text = src_text[len(BT_TOKEN) + 1:]
        bt_tagged = True
    try:
        return BitextRecord(src_lang, tgt_lang, src_text, tgt_text, origin, bt_tagged)
    except FilterInputError as exc:
        raise FilterInputError(f"line {lineno}: {exc}") from None


def parse_json_line(line: str, lineno: int = 0) -> tuple[BitextRecord, dict]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FilterInputError(f"line {lineno}: invalid JSON ({exc.msg})") from None
    try:
        rec = _make_record(obj["src_lang"], obj["tgt_lang"], obj["src_text"], obj["tgt_text"],
                           obj.get("origin", "mined"), lineno, bool(obj.get("bt_tagged", False)))
    except KeyError as exc:
        raise FilterInputError(f"line {lineno}: missing field {exc.args[0]!r}") from None
    extra = {k: v for k, v in obj.items() if k not in TSV_FIELDS and k != "bt_tagged"}
    return rec, extra


def read_records(stream: TextIO, fmt: str = "tsv") -> Iterator[BitextRecord]:
    for rec, _ in read_records_with_extra(stream, fmt):
        yield rec


def read_records_with_extra(stream: TextIO, fmt: str = "tsv"):
    if fmt not in ("tsv", "jsonl"):
        raise ValueError(f"unknown format {fmt!r}")
    parse = parse_tsv_line if fmt == "tsv" else parse_json_line
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        if fmt == "tsv" and lineno == 1 and line.rstrip("\r\n").split("\t")[:5] == list(TSV_FIELDS):
            continue
        yield parse(line, lineno)


def format_record(rec: BitextRecord, fmt: str = "tsv", extra=None) -> str:
    if fmt == "tsv":
        fields = [rec.src_lang, rec.tgt_lang, rec.serialized_source(), rec.tgt_text, rec.origin]
        if extra:
            fields.extend(str(x) for x in extra)
        for f in fields:
            if "\t" in f or "\n" in f:
                raise FilterInputError("field contains a tab or newline; use jsonl")
        return "\t".join(fields) + "\n"
    obj = {
        "src_lang": rec.src_lang, "tgt_lang": rec.tgt_lang,
        "src_text": rec.serialized_source(), "tgt_text": rec.tgt_text,
        "origin": rec.origin, "bt_tagged": rec.bt_tagged,
    }
    if extra:
        obj.update(extra)
    return json.dumps(obj, ensure_ascii=False) + "\n"


def filter_text(text: str, config: FilterConfig, catalog: LanguageCatalog | None = None,
                fmt: str = "tsv") -> tuple[str, FilterReport]:
    """Convenience wrapper: filter a whole serialized stream held in memory."""
    pipe = FilterPipeline(config, catalog)
    out = io.StringIO()
    for rec in pipe.run(read_records(io.StringIO(text), fmt)):
        out.write(format_record(rec, fmt))
    return out.getvalue(), pipe.report
