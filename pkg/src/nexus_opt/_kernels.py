"""Hot dominance-scan kernels, JIT-compiled when numba is available.

The numpy fallbacks compute identical results; numba only changes speed.
Early exits matter here: archive candidates usually meet a dominator within
a few rows when the archive is scanned strongest-first.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


@njit(cache=True)
def _weakly_covered_jit(cand, archive, cutoffs):  # pragma: no cover - compiled
    b, m = cand.shape
    out = np.zeros(b, dtype=np.bool_)
    for i in range(b):
        limit = cutoffs[i]
        for j in range(limit):
            covered = True
            for k in range(m):
                if archive[j, k] > cand[i, k]:
                    covered = False
                    break
            if covered:
                out[i] = True
                break
    return out


@njit(cache=True)
def _strictly_dominated_jit(rows, by):  # pragma: no cover - compiled
    a, m = rows.shape
    e = by.shape[0]
    out = np.zeros(a, dtype=np.bool_)
    for i in range(a):
        for j in range(e):
            le = True
            lt = False
            for k in range(m):
                if by[j, k] > rows[i, k]:
                    le = False
                    break
                if by[j, k] < rows[i, k]:
                    lt = True
            if le and lt:
                out[i] = True
                break
    return out


def weakly_covered(cand: np.ndarray, archive_sorted: np.ndarray, cutoffs: np.ndarray) -> np.ndarray:
    """Per candidate: is it weakly dominated by any of the first cutoff rows?

    ``archive_sorted`` must be ordered so that potential dominators of
    candidate i all sit below ``cutoffs[i]`` (e.g. ascending coordinate sum).
    """
    cand = np.ascontiguousarray(cand, dtype=np.float64)
    archive_sorted = np.ascontiguousarray(archive_sorted, dtype=np.float64)
    cutoffs = np.ascontiguousarray(cutoffs, dtype=np.int64)
    if HAVE_NUMBA:
        return _weakly_covered_jit(cand, archive_sorted, cutoffs)
    out = np.zeros(len(cand), dtype=bool)
    for start in range(0, int(cutoffs.max(initial=0)), 512):
        idx = np.flatnonzero(~out & (cutoffs > start))
        if len(idx) == 0:
            break
        block = archive_sorted[start : start + 512]
        hit = (cand[idx][:, None, :] >= block[None, :, :]).all(axis=2).any(axis=1)
        out[idx[hit]] = True
    return out


def strictly_dominated(rows: np.ndarray, by: np.ndarray) -> np.ndarray:
    """Per row: is it strictly dominated by any of the ``by`` points?"""
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    by = np.ascontiguousarray(by, dtype=np.float64)
    if HAVE_NUMBA:
        return _strictly_dominated_jit(rows, by)
    le = (by[:, None, :] <= rows[None, :, :]).all(axis=2)
    lt = (by[:, None, :] < rows[None, :, :]).any(axis=2)
    return (le & lt).any(axis=0)
