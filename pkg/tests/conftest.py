from pathlib import Path

import pytest

from bitextkit.catalog import Language, build_catalog, load_catalog

ROOT = Path(__file__).resolve().parents[1]
FIXTURE = ROOT / "fixtures" / "m2m100.tsv"


def lang(iso, grouping, bridge=False, scripts=("Latin",), mono=0):
    return Language(iso, iso.upper(), "fam", tuple(scripts), grouping, bridge, mono)


@pytest.fixture(scope="session")
def m2m100():
    return load_catalog(FIXTURE)


@pytest.fixture
def toy_indic():
    """hi/mr/ta in one grouping with hi as bridge, plus English."""
    return build_catalog(
        [lang("en", "germanic"), lang("hi", "indic", True, ("Devanagari",)),
         lang("mr", "indic", False, ("Devanagari",)), lang("ta", "indic", False, ("Tamil",))],
        {("en", "hi"): 100, ("hi", "mr"): 10},
    )


def numbered_catalog(n, english=True):
    """n languages l00..l(n-1) in one grouping; l00 is renamed to en when english is set."""
    isos = [f"l{i:02d}" for i in range(n)]
    if english:
        isos[0] = "en"
    return build_catalog([lang(iso, "g", i == 1) for i, iso in enumerate(isos)], english_iso=isos[0])
