import random

import pytest

from bitextkit import charclass
from bitextkit.charclass import (CYRILLIC, DIGIT, GREEK, LATIN, PUNCT, SPACE, class_table, classify,
                                 core_classes, script_classes)


@pytest.mark.parametrize("ch, cls", [
    ("a", LATIN), ("Z", LATIN), ("é", LATIN), ("ж", CYRILLIC), ("λ", GREEK), (" ", SPACE),
    ("\t", SPACE), ("7", DIGIT), ("٣", DIGIT), (",", PUNCT), ("$", PUNCT), ("«", PUNCT),
    ("क", charclass.DEVANAGARI), ("中", charclass.HAN), ("ア", charclass.KATAKANA), ("한", charclass.HANGUL),
])
def test_classify(ch, cls):
    assert classify(ch) == cls


def test_table_agrees_with_classify():
    table = class_table()
    assert len(table) == charclass.TABLE_SIZE
    rng = random.Random(0)
    points = [rng.randrange(0x110000) for _ in range(5000)] + list(range(0x3000))
    for cp in points:
        if 0xD800 <= cp <= 0xDFFF:
            continue
        assert table[cp] == classify(chr(cp)), hex(cp)


class TestCoreClasses:
    def test_latin_always_core(self):
        assert LATIN in core_classes(("Cyrillic",))

    def test_exceptions_included(self):
        core = core_classes(("Devanagari",))
        assert {SPACE, DIGIT, PUNCT, charclass.DEVANAGARI} <= core
        assert GREEK not in core

    @pytest.mark.parametrize("names, expected", [
        (("Persian",), {charclass.ARABIC}),
        (("Kana",), {charclass.HIRAGANA, charclass.KATAKANA}),
        (("Latin", "Cyrillic"), {LATIN, CYRILLIC}),
    ])
    def test_aliases(self, names, expected):
        assert script_classes(names) == expected

    def test_unknown_script(self):
        with pytest.raises(KeyError, match="Klingon"):
            script_classes(("Klingon",))
