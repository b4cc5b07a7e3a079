"""Pure-Python/numpy versions of the compiled kernels."""
from __future__ import annotations

import numpy as np


def class_histogram(text: str, table: bytes, n_classes: int = 32) -> list[int]:
    counts = [0] * n_classes
    for ch in text:
        counts[table[ord(ch)]] += 1
    return counts


def sinkhorn_scale(P: np.ndarray, row_target: np.ndarray, col_target: np.ndarray,
                   tol: float, max_iter: int) -> tuple[int, float]:
    row = P.sum(axis=1)
    err = float(np.max(np.abs(row - row_target))) if row.size else 0.0
    if err < tol and np.all(np.abs(P.sum(axis=0) - col_target) < tol):
        return 0, err
    it = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        while it < max_iter:
            it += 1
            P *= np.where(row > 0.0, row_target / row, 0.0)[:, None]
            col = P.sum(axis=0)
            P *= np.where(col > 0.0, col_target / col, 0.0)[None, :]
            row = P.sum(axis=1)
            err = float(np.max(np.abs(row - row_target)))
            if err < tol:
                break
    return it, err
