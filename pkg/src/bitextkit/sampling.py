"""Temperature rescaling and Sinkhorn temperature sampling of language pairs.

Plain temperature sampling rescales each language independently, which does
not control the language marginals once pairs are sampled jointly. Here the
pair matrix Q is scaled by alternating row/column normalization until both
marginals equal the temperature-rescaled language distribution; pairs are
then drawn from the balanced matrix. Zero cells of Q (no bitext) stay zero.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from bitextkit import kernels
from bitextkit.catalog import LanguageCatalog

DEFAULT_TEMPERATURE = 5.0
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000


class InfeasibleError(ValueError):
    """The support of Q cannot carry the requested marginals."""

    def __init__(self, message: str, languages: Sequence[str] = ()):
        super().__init__(message)
        self.languages = tuple(languages)


class NotConvergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class MarginalTarget:
    probabilities: np.ndarray
    temperature: float
    languages: tuple[str, ...] = ()


@dataclass(frozen=True)
class PairMassMatrix:
    entries: np.ndarray
    languages: tuple[str, ...]

    def __post_init__(self):
        q = np.asarray(self.entries, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"pair matrix must be square, got shape {q.shape}")
        if len(self.languages) != q.shape[0]:
            raise ValueError("language list does not match matrix size")
        if not np.all(np.isfinite(q)) or np.any(q < 0):
            raise ValueError("pair matrix entries must be finite and >= 0")
        if np.any(np.diag(q) != 0):
            raise ValueError("pair matrix diagonal must be zero")
        if q.sum() <= 0:
            raise ValueError("pair matrix has no mass")
        object.__setattr__(self, "entries", q)

    @property
    def size(self) -> int:
        return len(self.languages)

    def language_mass(self) -> np.ndarray:
        """Row plus column mass per language."""
        return self.entries.sum(axis=1) + self.entries.sum(axis=0)


@dataclass(frozen=True)
class SinkhornResult:
    matrix: np.ndarray
    iterations: int
    max_marginal_error: float
    converged: bool
    languages: tuple[str, ...] = ()
    tol: float = DEFAULT_TOL

    def diagnostics(self) -> dict:
        return {
            "iterations": self.iterations,
            "max_marginal_error": self.max_marginal_error,
            "converged": self.converged,
        }


def temperature_rescale(counts: Sequence[float] | np.ndarray, T: float = DEFAULT_TEMPERATURE,
                        languages: Sequence[str] = ()) -> MarginalTarget:
    """q_l proportional to counts_l ** (1/T), normalized; zeros stay zero."""
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    c = np.asarray(counts, dtype=np.float64)
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise ValueError("counts must be finite and >= 0")
    if not c.sum() > 0:
        raise ValueError("counts are all zero")
    # rescale the proportions, not raw counts, to keep the power well inside float range
    scaled = np.power(c / c.max(), 1.0 / T)
    scaled[c == 0] = 0.0
    return MarginalTarget(scaled / scaled.sum(), float(T), tuple(languages))


def pair_matrix_from_counts(pair_counts: Mapping[tuple[str, str], float],
                            languages: Sequence[str] | None = None) -> PairMassMatrix:
    """Symmetric Q from unordered pair counts, normalized to total mass 1."""
    if languages is None:
        languages = sorted({iso for pair in pair_counts for iso in pair})
    index = {iso: i for i, iso in enumerate(languages)}
    q = np.zeros((len(languages), len(languages)))
    for (a, b), n in pair_counts.items():
        if a == b:
            raise ValueError(f"self pair {a}-{b}")
        if a not in index or b not in index:
            raise ValueError(f"pair {a}-{b} has a language outside the ordering")
        q[index[a], index[b]] += n
        q[index[b], index[a]] += n
    total = q.sum()
    if total > 0:
        q /= total
    return PairMassMatrix(q, tuple(languages))


def pair_matrix_from_catalog(catalog: LanguageCatalog) -> PairMassMatrix:
    return pair_matrix_from_counts(catalog.bitext_pairs(), catalog.isos)


def default_target(Q: PairMassMatrix, T: float = DEFAULT_TEMPERATURE) -> MarginalTarget:
    return temperature_rescale(Q.language_mass(), T, Q.languages)


def check_support(Q: PairMassMatrix, target: MarginalTarget) -> None:
    """Reject languages with positive target but no pair mass."""
    p = np.asarray(target.probabilities, dtype=np.float64)
    if p.shape != (Q.size,):
        raise ValueError(f"target has {p.size} entries for a {Q.size}x{Q.size} matrix")
    empty_rows = (Q.entries.sum(axis=1) == 0) & (p > 0)
    empty_cols = (Q.entries.sum(axis=0) == 0) & (p > 0)
    bad = [Q.languages[i] for i in np.flatnonzero(empty_rows | empty_cols)]
    if bad:
        raise InfeasibleError(
            f"languages with positive target probability but no bitext pairs: {', '.join(bad)}", bad)


def sinkhorn_balance(Q: PairMassMatrix, target: MarginalTarget, tol: float = DEFAULT_TOL,
                     max_iter: int = DEFAULT_MAX_ITER, backend: str | None = None) -> SinkhornResult:
    """Scale Q so every row and column sums to the target probability.

    Iterates row scaling then column scaling. A run that exhausts
    ``max_iter`` comes back with ``converged=False``; callers that need a
    solution should check the flag (``sample_pair`` does).
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 0:
        raise ValueError("max_iter must be >= 0")
    check_support(Q, target)
    p = np.ascontiguousarray(target.probabilities, dtype=np.float64)
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"target probabilities sum to {p.sum()}, expected 1")
    impl = kernels.available_backends()[backend] if backend else kernels
    P = np.ascontiguousarray(Q.entries, dtype=np.float64).copy()
    iterations, _ = impl.sinkhorn_scale(P, p, p, float(tol), int(max_iter))
    err = max_marginal_error(P, p)
    return SinkhornResult(P, int(iterations), err, bool(err < tol), Q.languages, float(tol))


def max_marginal_error(P: np.ndarray, target: np.ndarray) -> float:
    if P.size == 0:
        return 0.0
    return float(max(np.max(np.abs(P.sum(axis=1) - target)), np.max(np.abs(P.sum(axis=0) - target))))


class PairSampler:
    """Inverse-CDF draws over the row-major flattening of a balanced matrix."""

    def __init__(self, result: SinkhornResult, seed: int | np.random.Generator | None):
        if not result.converged:
            raise NotConvergedError(
                f"refusing to sample from an unconverged solution "
                f"(max marginal error {result.max_marginal_error:.3g} after {result.iterations} iterations)")
        if seed is None:
            raise ValueError("an explicit seed is required")
        flat = np.asarray(result.matrix, dtype=np.float64).ravel()
        total = flat.sum()
        if abs(total - 1.0) > max(1e-6, 10 * result.tol * len(result.languages)):
            raise ValueError(f"matrix sums to {total}, expected 1")
        self._cdf = np.cumsum(flat)
        self._n = result.matrix.shape[1]
        self.languages = result.languages
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def draw_indices(self, size: int) -> np.ndarray:
        u = self.rng.random(size) * self._cdf[-1]
        # side="right" skips zero-width cells, so impossible pairs are never drawn
        return np.minimum(np.searchsorted(self._cdf, u, side="right"), self._cdf.size - 1)

    def draw_cells(self, size: int) -> list[tuple[int, int]]:
        idx = self.draw_indices(size)
        return [(int(k // self._n), int(k % self._n)) for k in idx]

    def draw(self, size: int | None = None):
        if size is None:
            i, j = self.draw_cells(1)[0]
            return self.languages[i], self.languages[j]
        return [(self.languages[i], self.languages[j]) for i, j in self.draw_cells(size)]


def sample_pair(result: SinkhornResult, rng_seed: int | np.random.Generator) -> tuple[str, str]:
    """Draw one ordered (src, tgt) pair with probability P*[src, tgt]."""
    return PairSampler(result, rng_seed).draw()


def empirical_tv(result: SinkhornResult, indices: np.ndarray) -> float:
    """Total-variation distance between draw frequencies and the matrix."""
    p = np.asarray(result.matrix, dtype=np.float64).ravel()
    freq = np.bincount(indices, minlength=p.size) / len(indices)
    return 0.5 * float(np.abs(freq - p / p.sum()).sum())


def dictionary_coverage(dictionary_tokens: Iterable[str],
                        corpus_tokens: Mapping[str, Iterable[str] | Mapping[str, int]]) -> dict[str, float]:
    """Share of each language's token occurrences found in the dictionary.

    ``corpus_tokens`` values may be token iterables or ``{token: count}``
    mappings. Languages with no tokens raise rather than divide by zero.
    """
    vocab = set(dictionary_tokens)
    out = {}
    empty = []
    for lang, tokens in corpus_tokens.items():
        counts = tokens if isinstance(tokens, Mapping) else Counter(tokens)
        total = sum(counts.values())
        if total == 0:
            empty.append(lang)
            continue
        hit = sum(n for tok, n in counts.items() if tok in vocab)
        out[lang] = hit / total
    if empty:
        raise ValueError(f"languages with no tokens: {', '.join(sorted(empty))}")
    return out


# -- file formats -----------------------------------------------------------

def read_pair_counts(path: str | Path) -> dict[tuple[str, str], float]:
    out: dict[tuple[str, str], float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            if fields[2] in ("sentence_pairs", "probability", "count"):
                continue
            try:
                n = float(fields[2])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad count {fields[2]!r}") from None
            if n < 0:
                raise ValueError(f"{path}:{lineno}: negative count")
            key = (fields[0], fields[1]) if fields[0] < fields[1] else (fields[1], fields[0])
            if key in out:
                raise ValueError(f"{path}:{lineno}: pair {key[0]}-{key[1]} listed twice")
            out[key] = n
    return out


def read_marginals(path: str | Path) -> dict[str, float]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'iso<TAB>value'")
            if lineno == 1 and fields[1] in ("probability", "value", "count"):
                continue
            out[fields[0]] = float(fields[1])
    return out


def write_matrix(result: SinkhornResult, path: str | Path) -> None:
    """Nonzero cells as ``src<TAB>tgt<TAB>probability`` (repr floats round-trip)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("src\ttgt\tprobability\n")
        langs = result.languages
        for i, j in zip(*np.nonzero(result.matrix)):
            fh.write(f"{langs[i]}\t{langs[j]}\t{float(result.matrix[i, j])!r}\n")


def read_matrix(path: str | Path, diagnostics: Mapping | None = None) -> SinkhornResult:
    cells = []
    langs: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#") or line == "src\ttgt\tprobability":
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'src<TAB>tgt<TAB>probability'")
            cells.append((fields[0], fields[1], float(fields[2])))
            langs.update(fields[:2])
    order = tuple(sorted(langs))
    index = {iso: i for i, iso in enumerate(order)}
    P = np.zeros((len(order), len(order)))
    for a, b, v in cells:
        P[index[a], index[b]] = v
    diag = dict(diagnostics or {})
    row_err = float(np.max(np.abs(P.sum(axis=1) - P.sum(axis=0)))) if P.size else 0.0
    return SinkhornResult(
        matrix=P,
        iterations=int(diag.get("iterations", 0)),
        max_marginal_error=float(diag.get("max_marginal_error", row_err)),
        converged=bool(diag.get("converged", True)),
        languages=order,
        tol=float(diag.get("tol", DEFAULT_TOL)),
    )


def write_diagnostics(result: SinkhornResult, path: str | Path, extra: Mapping | None = None) -> None:
    payload = {**result.diagnostics(), "tol": result.tol, "languages": len(result.languages)}
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
