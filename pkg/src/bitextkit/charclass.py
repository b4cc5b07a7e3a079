"""Codepoint -> character class table used by the text filters.

Every codepoint maps to one small integer. Whitespace, digits and
punctuation/symbols (Unicode general categories N*, P*, S*) are decided by
category first; letters and marks then fall into a script class by block
range, or ``OTHER`` when no known block covers them.
"""
from __future__ import annotations

import functools
import unicodedata

OTHER = 0
SPACE = 1
DIGIT = 2
PUNCT = 3
INHERITED = 4  # combining marks and joiners, core for every language
LATIN = 5
GREEK = 6
CYRILLIC = 7
ARMENIAN = 8
HEBREW = 9
ARABIC = 10
DEVANAGARI = 11
BENGALI = 12
GURMUKHI = 13
GUJARATI = 14
ORIYA = 15
TAMIL = 16
TELUGU = 17
KANNADA = 18
MALAYALAM = 19
SINHALA = 20
THAI = 21
LAO = 22
MYANMAR = 23
GEORGIAN = 24
HANGUL = 25
ETHIOPIC = 26
KHMER = 27
MONGOLIAN = 28
HIRAGANA = 29
KATAKANA = 30
HAN = 31

NUM_CLASSES = 32
TABLE_SIZE = 0x110000

CLASS_NAMES = {
    OTHER: "other", SPACE: "space", DIGIT: "digit", PUNCT: "punct", INHERITED: "inherited",
    LATIN: "latin", GREEK: "greek", CYRILLIC: "cyrillic", ARMENIAN: "armenian", HEBREW: "hebrew",
    ARABIC: "arabic", DEVANAGARI: "devanagari", BENGALI: "bengali", GURMUKHI: "gurmukhi",
    GUJARATI: "gujarati", ORIYA: "oriya", TAMIL: "tamil", TELUGU: "telugu", KANNADA: "kannada",
    MALAYALAM: "malayalam", SINHALA: "sinhala", THAI: "thai", LAO: "lao", MYANMAR: "myanmar",
    GEORGIAN: "georgian", HANGUL: "hangul", ETHIOPIC: "ethiopic", KHMER: "khmer",
    MONGOLIAN: "mongolian", HIRAGANA: "hiragana", KATAKANA: "katakana", HAN: "han",
}
CLASS_BY_NAME = {name: cid for cid, name in CLASS_NAMES.items()}

_RANGES = {
    LATIN: [(0x41, 0x5A), (0x61, 0x7A), (0xAA, 0xAA), (0xBA, 0xBA), (0xC0, 0x24F), (0x250, 0x2AF),
            (0x1E00, 0x1EFF), (0x2C60, 0x2C7F), (0xA720, 0xA7FF), (0xAB30, 0xAB6F),
            (0xFF21, 0xFF3A), (0xFF41, 0xFF5A)],
    GREEK: [(0x370, 0x3FF), (0x1F00, 0x1FFF)],
    CYRILLIC: [(0x400, 0x52F), (0x1C80, 0x1C8F), (0x2DE0, 0x2DFF), (0xA640, 0xA69F)],
    ARMENIAN: [(0x530, 0x58F), (0xFB13, 0xFB17)],
    HEBREW: [(0x590, 0x5FF), (0xFB1D, 0xFB4F)],
    ARABIC: [(0x600, 0x6FF), (0x750, 0x77F), (0x8A0, 0x8FF), (0xFB50, 0xFDFF), (0xFE70, 0xFEFF)],
    DEVANAGARI: [(0x900, 0x97F), (0xA8E0, 0xA8FF)],
    BENGALI: [(0x980, 0x9FF)],
    GURMUKHI: [(0xA00, 0xA7F)],
    GUJARATI: [(0xA80, 0xAFF)],
    ORIYA: [(0xB00, 0xB7F)],
    TAMIL: [(0xB80, 0xBFF)],
    TELUGU: [(0xC00, 0xC7F)],
    KANNADA: [(0xC80, 0xCFF)],
    MALAYALAM: [(0xD00, 0xD7F)],
    SINHALA: [(0xD80, 0xDFF)],
    THAI: [(0xE00, 0xE7F)],
    LAO: [(0xE80, 0xEFF)],
    MYANMAR: [(0x1000, 0x109F), (0xA9E0, 0xA9FF), (0xAA60, 0xAA7F)],
    GEORGIAN: [(0x10A0, 0x10FF), (0x1C90, 0x1CBF), (0x2D00, 0x2D2F)],
    HANGUL: [(0x1100, 0x11FF), (0x3130, 0x318F), (0xA960, 0xA97F), (0xAC00, 0xD7AF), (0xD7B0, 0xD7FF),
             (0xFFA0, 0xFFDC)],
    ETHIOPIC: [(0x1200, 0x139F), (0x2D80, 0x2DDF), (0xAB00, 0xAB2F)],
    KHMER: [(0x1780, 0x17FF), (0x19E0, 0x19FF)],
    MONGOLIAN: [(0x1800, 0x18AF)],
    HIRAGANA: [(0x3040, 0x309F)],
    KATAKANA: [(0x30A0, 0x30FF), (0x31F0, 0x31FF), (0xFF66, 0xFF9F)],
    HAN: [(0x3005, 0x3007), (0x3400, 0x4DBF), (0x4E00, 0x9FFF), (0xF900, 0xFAFF), (0x20000, 0x2A6DF),
          (0x2A700, 0x2EBEF), (0x2F800, 0x2FA1F), (0x30000, 0x3134F)],
    INHERITED: [(0x300, 0x36F), (0x1AB0, 0x1AFF), (0x1DC0, 0x1DFF), (0x200C, 0x200D), (0x20D0, 0x20FF),
                (0xFE00, 0xFE0F), (0xFE20, 0xFE2F)],
}

# Script names as they appear in catalogs, normalized to lowercase.
SCRIPT_ALIASES = {
    "latin": (LATIN,), "latin-welsch": (LATIN,), "greek": (GREEK,), "cyrillic": (CYRILLIC,),
    "armenian": (ARMENIAN,), "hebrew": (HEBREW,), "arabic": (ARABIC,), "persian": (ARABIC,),
    "devanagari": (DEVANAGARI,), "eastern-nagari": (BENGALI,), "bengali": (BENGALI,),
    "gurmukhi": (GURMUKHI,), "gujarati": (GUJARATI,), "odia": (ORIYA,), "oriya": (ORIYA,),
    "tamil": (TAMIL,), "telugu": (TELUGU,), "kannada": (KANNADA,), "malayalam": (MALAYALAM,),
    "sinhala": (SINHALA,), "thai": (THAI,), "lao": (LAO,), "burmese": (MYANMAR,), "myanmar": (MYANMAR,),
    "georgian": (GEORGIAN,), "hangul": (HANGUL,), "ge'ez": (ETHIOPIC,), "ethiopic": (ETHIOPIC,),
    "khmer": (KHMER,), "mongolian": (MONGOLIAN,), "kana": (HIRAGANA, KATAKANA),
    "hiragana": (HIRAGANA,), "katakana": (KATAKANA,), "kanji": (HAN,), "chinese": (HAN,), "han": (HAN,),
}

ALWAYS_CORE = frozenset({SPACE, DIGIT, PUNCT, INHERITED})


def classify(ch: str) -> int:
    """Class of a single character, computed without the table."""
    if ch.isspace():
        return SPACE
    cat = unicodedata.category(ch)
    if cat[0] == "N":
        return DIGIT
    if cat[0] in "PS":
        return PUNCT
    cp = ord(ch)
    for cid, ranges in _RANGES.items():
        for lo, hi in ranges:
            if lo <= cp <= hi:
                return cid
    return OTHER


@functools.lru_cache(maxsize=1)
def class_table() -> bytes:
    """The full codepoint table (1.1 MB), built once per process."""
    table = bytearray(TABLE_SIZE)
    for cid, ranges in _RANGES.items():
        for lo, hi in ranges:
            table[lo:hi + 1] = bytes([cid]) * (hi - lo + 1)
    category = unicodedata.category
    for cp in range(TABLE_SIZE):
        ch = chr(cp)
        cat = category(ch)[0]
        if cat == "N":
            table[cp] = DIGIT
        elif cat == "P" or cat == "S":
            table[cp] = PUNCT
        elif cp < 0x3100 and ch.isspace():
            table[cp] = SPACE
    return bytes(table)


def script_classes(script_names) -> frozenset[int]:
    """Map catalog script names (e.g. ``"Latin; Cyrillic"``) to class ids."""
    if isinstance(script_names, str):
        script_names = script_names.split(";")
    out = set()
    for name in script_names:
        key = name.strip().lower()
        if not key:
            continue
        if key in SCRIPT_ALIASES:
            out.update(SCRIPT_ALIASES[key])
        elif key in CLASS_BY_NAME:
            out.add(CLASS_BY_NAME[key])
        else:
            raise KeyError(f"unknown script {name.strip()!r}")
    return frozenset(out)


def core_classes(script_names) -> frozenset[int]:
    """Classes counted as core for a language written in ``script_names``.

    Whitespace, digits, punctuation and combining marks always count, and so
    do Latin letters: they are native for Latin-script languages and an
    accepted exception for everyone else.
    """
    scripts = script_classes(script_names)
    core = set(scripts) | ALWAYS_CORE
    core.add(LATIN)
    return frozenset(core)
