"""Synthetic inputs shared by several test modules."""
import numpy as np

from bitextkit.filtering import BitextRecord

WORDS = {
    "en": "the cat sat on a mat while rain fell over quiet hills".split(),
    "ru": "кот сидел на коврике пока дождь падал над тихими холмами".split(),
    "el": "η γάτα κάθισε στο χαλί ενώ η βροχή έπεφτε πάνω".split(),
    "hi": "बिल्ली चटाई पर बैठी थी जब बारिश शांत पहाड़ियों पर गिरी".split(),
}
CORE_TABLES = {
    "en": ["latin", "space", "digit", "punct"],
    "ru": ["cyrillic", "latin", "space", "digit", "punct"],
    "el": ["greek", "latin", "space", "digit", "punct"],
    "hi": ["devanagari", "inherited", "latin", "space", "digit", "punct"],
}
EVAL_SENTENCES = ["this sentence is reserved for testing", "тестовое предложение"]


def synthetic_stream(n, seed=0):
    """A mix of clean pairs and pairs built to trip each filter rule."""
    rng = np.random.default_rng(seed)
    langs = list(WORDS)
    out = []
    for _ in range(n):
        s, t = rng.choice(len(langs), 2, replace=False)
        src_lang, tgt_lang = langs[s], langs[t]
        ns = int(rng.integers(1, 12))
        nt = max(1, ns + int(rng.integers(-3, 4)))
        src = " ".join(rng.choice(WORDS[src_lang], ns))
        tgt = " ".join(rng.choice(WORDS[tgt_lang], nt))
        kind = rng.random()
        if kind < 0.05:
            src = "!!! ?? " + src[:2]
        elif kind < 0.08:
            src = " ".join(rng.choice(WORDS[src_lang], 260))
        elif kind < 0.12:
            tgt = tgt.split()[0]
            src = " ".join(rng.choice(WORDS[src_lang], 9))
        elif kind < 0.15:
            src = rng.choice(EVAL_SENTENCES)
        elif kind < 0.18 and src_lang != "en":
            src = " ".join(rng.choice(WORDS["el" if src_lang != "el" else "ru"], ns))
        elif kind < 0.25 and out:
            prev = out[int(rng.integers(len(out)))]
            out.append(BitextRecord(prev.src_lang, prev.tgt_lang, "  " + prev.src_text + " ",
                                    prev.tgt_text, prev.origin))
            continue
        origin = "backtranslated" if rng.random() < 0.2 else "mined"
        out.append(BitextRecord(src_lang, tgt_lang, src, tgt, origin))
    return out


HIGH_RESOURCE = ("hu ru hi ro fr nl fi pt ar el vi en ms tr he id pl cs sv fa zh bg de es ko ja it da").split()


def realistic_profiles(catalog, seed=0):
    """28 listed languages above 100M sentences, the rest below, with grouping-shaped vocabularies."""
    from bitextkit.grouping import VocabProfile

    rng = np.random.default_rng(seed)
    profiles = []
    for lang in catalog.languages:
        shared = {f"{lang.grouping_id}_{k}" for k in range(60)}
        own = {f"{lang.iso}_{k}" for k in range(40)}
        sample = set(rng.choice(sorted(shared), 45, replace=False)) | own | {"common"}
        if lang.iso in HIGH_RESOURCE:
            size = int(rng.integers(100_000_001, 2_000_000_000))
        else:
            size = int(rng.integers(10_000, 100_000_000))
        profiles.append(VocabProfile(lang.iso, frozenset(sample), size))
    return profiles
