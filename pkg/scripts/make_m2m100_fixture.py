#!/usr/bin/env python3
"""Regenerate the bundled 100-language catalog fixture.

Language rows (iso, name, family, script, bridge flag) follow the published
language table. Groupings merge the bridgeless blocks into a neighbour and
split the blocks carrying more than three bridges so that every one of the
14 groupings has 1-3 bridges. English is the pivot and not flagged as a
bridge, which leaves 26 bridges.

Sentence counts are rough approximations (millions, log-scale guesses); they
only need the right order of magnitude for tiering and sampling demos.

    python scripts/make_m2m100_fixture.py src/bitextkit/data/m2m100.tsv
"""
import itertools
import sys
from pathlib import Path

# iso, name, family, scripts, approx total bitext in millions, bridge
LANGS = {
    "west_germanic_celtic": [
        ("af", "Afrikaans", "Germanic", "Latin", 12, False),
        ("nl", "Dutch", "Germanic", "Latin", 420, True),
        ("de", "German", "Germanic", "Latin", 1100, True),
        ("en", "English", "Germanic", "Latin", 3000, False),
        ("lb", "Luxembourgish", "Germanic", "Latin", 3, False),
        ("fy", "Western Frisian", "Germanic", "Latin", 2, False),
        ("yi", "Yiddish", "Germanic", "Hebrew", 1, False),
        ("br", "Breton", "Celtic", "Latin", 1, False),
        ("ga", "Irish", "Irish", "Latin", 6, False),
        ("gd", "Scottish Gaelic", "Celtic", "Latin", 1, False),
        ("cy", "Welsh", "Celtic", "Latin-Welsch", 4, False),
    ],
    "north_germanic": [
        ("da", "Danish", "Germanic", "Latin", 160, False),
        ("is", "Icelandic", "Germanic", "Latin", 14, False),
        ("no", "Norwegian", "Germanic", "Latin", 70, False),
        ("sv", "Swedish", "Germanic", "Latin", 260, True),
    ],
    "romance": [
        ("ast", "Asturian", "Romance", "Latin", 2, False),
        ("ca", "Catalan", "Romance", "Latin", 60, False),
        ("fr", "French", "Romance", "Latin", 1000, True),
        ("gl", "Galician", "Romance", "Latin", 20, False),
        ("it", "Italian", "Romance", "Latin", 500, False),
        ("oc", "Occitan", "Romance", "Latin", 2, False),
        ("pt", "Portuguese", "Romance", "Latin", 700, True),
        ("ro", "Romanian", "Romance", "Latin", 180, False),
        ("es", "Spanish", "Romance", "Latin", 1200, True),
        ("ht", "Haitian Creole", "Creole", "Latin", 3, False),
    ],
    "slavic": [
        ("be", "Belarusian", "Slavic", "Cyrillic", 6, False),
        ("bs", "Bosnian", "Slavic", "Latin", 30, False),
        ("bg", "Bulgarian", "Slavic", "Cyrillic", 140, False),
        ("hr", "Croatian", "Slavic", "Latin", 80, False),
        ("cs", "Czech", "Slavic", "Latin", 300, True),
        ("mk", "Macedonian", "Slavic", "Cyrillic", 40, False),
        ("pl", "Polish", "Slavic", "Latin", 380, True),
        ("ru", "Russian", "Slavic", "Cyrillic", 900, True),
        ("sr", "Serbian", "Slavic", "Cyrillic; Latin", 60, False),
        ("sk", "Slovak", "Slavic", "Latin", 90, False),
        ("sl", "Slovenian", "Slavic", "Latin", 75, False),
        ("uk", "Ukrainian", "Slavic", "Cyrillic", 70, False),
    ],
    "uralic_baltic": [
        ("et", "Estonian", "Uralic", "Latin", 60, False),
        ("fi", "Finnish", "Uralic", "Latin", 220, True),
        ("hu", "Hungarian", "Uralic", "Latin", 240, True),
        ("lv", "Latvian", "Baltic", "Latin", 50, False),
        ("lt", "Lithuanian", "Baltic", "Latin", 80, True),
    ],
    "balkan_caucasus": [
        ("sq", "Albanian", "Albanian", "Latin", 35, False),
        ("hy", "Armenian", "Armenian", "Armenian", 8, False),
        ("ka", "Georgian", "Kartvelian", "Georgian", 9, False),
        ("el", "Greek", "Hellenic", "Greek", 210, True),
    ],
    "turkic": [
        ("az", "Azerbaijani", "Turkic", "Latin; Cyrillic; Persian", 10, False),
        ("ba", "Bashkir", "Turkic", "Cyrillic", 1, False),
        ("kk", "Kazakh", "Turkic", "Cyrillic", 7, False),
        ("tr", "Turkish", "Turkic", "Latin", 230, True),
        ("uz", "Uzbek", "Turkic", "Latin; Cyrillic", 4, False),
    ],
    "east_asian": [
        ("ja", "Japanese", "Japonic", "Kanji; Kana", 280, True),
        ("ko", "Korean", "Koreanic", "Hangul", 180, True),
        ("zh", "Chinese Mandarin", "Chinese", "Chinese", 450, True),
        ("mn", "Mongolian", "Mongolic", "Cyrillic", 5, False),
    ],
    "southeast_asian": [
        ("vi", "Vietnamese", "Vietic", "Latin", 190, True),
        ("my", "Burmese", "Sino-Tibetan", "Burmese", 3, False),
        ("km", "Central Khmer", "Khmer", "Khmer", 4, False),
        ("lo", "Lao", "Kra-Dai", "Thai; Lao", 2, False),
        ("th", "Thai", "Kra-Dai", "Thai", 60, False),
    ],
    "indic": [
        ("bn", "Bengali", "Indo-Aryan", "Eastern-Nagari", 60, True),
        ("gu", "Gujarati", "Indo-Aryan", "Gujarati", 8, False),
        ("hi", "Hindi", "Indo-Aryan", "Devanagari", 120, True),
        ("kn", "Kannada", "Tamil", "Kannada", 4, False),
        ("mr", "Marathi", "Indo-Aryan", "Devanagari", 9, False),
        ("ne", "Nepali", "Indo-Aryan", "Devanagari", 5, False),
        ("or", "Oriya", "Indo-Aryan", "Odia", 2, False),
        ("pa", "Panjabi", "Indo-Aryan", "Gurmukhi", 5, False),
        ("sd", "Sindhi", "Indo-Aryan", "Persian; Devanagari", 2, False),
        ("si", "Sinhala", "Indo-Aryan", "Sinhala", 8, False),
        ("ur", "Urdu", "Indo-Aryan", "Arabic", 15, False),
        ("ta", "Tamil", "Dravidian", "Tamil", 25, True),
    ],
    "malayo_polynesian": [
        ("ceb", "Cebuano", "Malayo-Polyn.", "Latin", 3, False),
        ("ilo", "Iloko", "Philippine", "Latin", 1, False),
        ("id", "Indonesian", "Malayo-Polyn.", "Latin", 250, True),
        ("jv", "Javanese", "Malayo-Polyn.", "Latin", 3, False),
        ("mg", "Malagasy", "Malayo-Polyn.", "Latin", 3, False),
        ("ms", "Malay", "Malayo-Polyn.", "Latin", 110, False),
        ("ml", "Malayalam", "Dravidian", "Malayalam", 10, False),
        ("su", "Sundanese", "Malayo-Polyn.", "Latin", 2, False),
        ("tl", "Tagalog", "Malayo-Polyn.", "Latin", 25, False),
    ],
    "semitic": [
        ("ar", "Arabic", "Arabic", "Arabic", 340, True),
        ("he", "Hebrew", "Semitic", "Hebrew", 170, True),
    ],
    "iranian": [
        ("ps", "Pashto", "Iranian", "Arabic", 2, False),
        ("fa", "Farsi", "Iranian", "Arabic", 150, True),
    ],
    "african": [
        ("am", "Amharic", "Ethopian", "Ge'ez", 3, False),
        ("ff", "Fulah", "Niger-Congo", "Latin", 0.2, False),
        ("ha", "Hausa", "Afro-Asiatic", "Latin", 2, False),
        ("ig", "Igbo", "Niger-Congo", "Latin", 1, False),
        ("ln", "Lingala", "Niger-Congo", "Latin", 0.5, False),
        ("lg", "Luganda", "Niger-Congo", "Latin", 0.4, False),
        ("nso", "Northern Sotho", "Niger-Congo", "Latin", 0.6, False),
        ("so", "Somali", "Cushitic", "Latin", 2, False),
        ("sw", "Swahili", "Niger-Congo", "Latin", 12, True),
        ("ss", "Swati", "Niger-Congo", "Latin", 0.3, False),
        ("tn", "Tswana", "Niger-Congo", "Latin", 0.8, False),
        ("wo", "Wolof", "Niger-Congo", "Latin", 0.3, False),
        ("xh", "Xhosa", "Niger-Congo", "Latin", 2, False),
        ("yo", "Yoruba", "Niger-Congo", "Latin", 1, False),
        ("zu", "Zulu", "Niger-Congo", "Latin", 2, False),
    ],
}

# share of the smaller side's volume mined for each pair kind
PAIR_SHARE = {"english": 0.35, "grouping": 0.12, "bridge": 0.08}


def main(out: str) -> None:
    out = Path(out)
    rows = []
    size = {}
    group = {}
    bridge = set()
    for gid, langs in LANGS.items():
        for iso, name, family, scripts, millions, is_bridge in langs:
            rows.append((iso, name, family, scripts, gid, "true" if is_bridge else "false",
                         int(millions * 4_000_000)))
            size[iso] = millions * 1_000_000
            group[iso] = gid
            if is_bridge:
                bridge.add(iso)

    pairs = {}
    for a, b in itertools.combinations(sorted(size), 2):
        if "en" in (a, b):
            kind = "english"
        elif group[a] == group[b]:
            kind = "grouping"
        elif a in bridge and b in bridge:
            kind = "bridge"
        else:
            continue
        pairs[(a, b)] = int(min(size[a], size[b]) * PAIR_SHARE[kind])

    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# Approximate sizes; see scripts/make_m2m100_fixture.py\n")
        fh.write("\t".join(("iso", "name", "family", "scripts", "grouping", "is_bridge", "mono_sentences")) + "\n")
        for row in rows:
            fh.write("\t".join(map(str, row)) + "\n")
    with open(out.with_name(out.stem + "_bitext.tsv"), "w", encoding="utf-8") as fh:
        fh.write("src\ttgt\tsentence_pairs\n")
        for (a, b), n in sorted(pairs.items()):
            fh.write(f"{a}\t{b}\t{n}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/bitextkit/data/m2m100.tsv")
