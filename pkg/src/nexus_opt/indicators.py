"""Hypervolume indicators and the statistical comparison machinery.

Exact hypervolume uses a recursive dimension sweep with dominated-point
pruning at every level (practical up to 5 objectives and 200 points); the
Monte Carlo estimator covers everything larger.  Results are normalized
against an enclosing box so scores land in [0, 1], and algorithm samples are
compared with a two-sided Wilcoxon rank-sum test under the usual normal
approximation with tie correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EXACT_MAX_POINTS = 200
EXACT_MAX_OBJECTIVES = 5

_MC_CHUNK = 65536


@dataclass(frozen=True)
class ReferenceBox:
    """Upper corner bounding the measured objective region."""

    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))

    def contains(self, front: np.ndarray, tol: float = 0.0) -> bool:
        front = np.atleast_2d(np.asarray(front, dtype=float))
        return bool(np.all(front <= self.point + tol))

    @classmethod
    def from_fronts(cls, fronts, factor: float = 1.1) -> "ReferenceBox":
        """Factor times the componentwise nadir of the union of fronts.

        A hair of padding keeps the box non-degenerate when a component's
        nadir is zero or negative.
        """
        union = np.concatenate([np.atleast_2d(f) for f in fronts])
        nadir = union.max(axis=0)
        return cls(np.maximum(factor * nadir, nadir + 1e-9))


def _weakly_nondominated(pts: np.ndarray) -> np.ndarray:
    """Drop points weakly dominated by another (first duplicate survives)."""
    if len(pts) <= 1:
        return pts
    le = (pts[:, None, :] <= pts[None, :, :]).all(axis=2)
    eq = (pts[:, None, :] == pts[None, :, :]).all(axis=2)
    dominated = (le & ~eq).any(axis=0)
    dup = np.zeros(len(pts), dtype=bool)
    for j in range(1, len(pts)):
        if eq[:j, j].any():
            dup[j] = True
    return pts[~(dominated | dup)]


def _hv_recurse(pts: np.ndarray, ref: np.ndarray) -> float:
    pts = _weakly_nondominated(pts)
    m = ref.size
    if m == 1:
        return float(ref[0] - pts[:, 0].min())
    if m == 2:
        order = np.argsort(pts[:, 0], kind="stable")
        area = 0.0
        prev_f2 = ref[1]
        for x1, x2 in pts[order]:
            area += (ref[0] - x1) * (prev_f2 - x2)
            prev_f2 = x2
        return float(area)
    order = np.argsort(pts[:, -1], kind="stable")
    zs = pts[order, -1]
    vol = 0.0
    for i in range(len(order)):
        z_hi = zs[i + 1] if i + 1 < len(order) else ref[-1]
        depth = z_hi - zs[i]
        if depth > 0:
            vol += depth * _hv_recurse(pts[order[: i + 1], :-1], ref[:-1])
    return float(vol)


def hv_exact(front: np.ndarray, ref: np.ndarray) -> float:
    """Exact hypervolume of a minimization front against a reference point.

    Points not componentwise <= ref are discarded first.  Supported up to
    5 objectives and 200 points; use the Monte Carlo estimator beyond that.
    """
    ref = np.asarray(ref, dtype=float)
    front = np.asarray(front, dtype=float)
    if front.size == 0:
        return 0.0
    front = np.atleast_2d(front)
    if front.shape[1] != ref.size:
        raise ValueError("front and reference point disagree in objectives")
    if ref.size > EXACT_MAX_OBJECTIVES:
        raise ValueError(f"exact hypervolume supports at most {EXACT_MAX_OBJECTIVES} objectives")
    front = front[(front <= ref).all(axis=1)]
    if len(front) == 0:
        return 0.0
    if len(front) > EXACT_MAX_POINTS:
        raise ValueError(f"exact hypervolume supports at most {EXACT_MAX_POINTS} points")
    return _hv_recurse(front, ref)


def dominated_fraction(
    samples: np.ndarray, front: np.ndarray, order_hint: bool = True
) -> np.ndarray:
    """Boolean mask of samples weakly dominated by some front point."""
    covered = np.zeros(len(samples), dtype=bool)
    if len(front) == 0:
        return covered
    front = np.asarray(front, dtype=float)
    if order_hint:
        # Strong points first so most samples are resolved in early blocks.
        front = front[np.argsort(front.sum(axis=1), kind="stable")]
    block = 64
    for start in range(0, len(front), block):
        idx = np.flatnonzero(~covered)
        if len(idx) == 0:
            break
        chunk = front[start : start + block]
        hit = (samples[idx][:, None, :] >= chunk[None, :, :]).all(axis=2).any(axis=1)
        covered[idx[hit]] = True
    return covered


def hv_monte_carlo(front: np.ndarray, ref: np.ndarray, samples: int, seed=0) -> float:
    """Monte Carlo hypervolume: dominated fraction of a uniform cloud in the
    box spanned by the front's ideal point and the reference point."""
    if samples < 1:
        raise ValueError("need at least one sample")
    ref = np.asarray(ref, dtype=float)
    front = np.asarray(front, dtype=float)
    if front.size == 0:
        return 0.0
    front = np.atleast_2d(front)
    front = front[(front <= ref).all(axis=1)]
    if len(front) == 0:
        return 0.0
    lo = front.min(axis=0)
    volume = float(np.prod(ref - lo))
    if volume <= 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = samples
    while remaining > 0:
        b = min(_MC_CHUNK, remaining)
        cloud = rng.uniform(lo, ref, size=(b, ref.size))
        hits += int(dominated_fraction(cloud, front).sum())
        remaining -= b
    return hits / samples * volume


def normalized_hv(
    front: np.ndarray,
    ref: np.ndarray,
    ideal: np.ndarray | None = None,
    method: str = "auto",
    mc_samples: int = 100_000,
    seed=0,
) -> float:
    """Hypervolume divided by the volume of the box [ideal, ref].

    ``ideal`` defaults to the front's own ideal point; pass the union ideal
    when normalizing several fronts against a common box.  ``auto`` picks the
    exact method when the front fits its limits, Monte Carlo otherwise.
    """
    ref = np.asarray(ref, dtype=float)
    front = np.atleast_2d(np.asarray(front, dtype=float)) if np.size(front) else np.empty((0, ref.size))
    front = front[(front <= ref).all(axis=1)] if len(front) else front
    if len(front) == 0:
        return 0.0
    if ideal is None:
        ideal = front.min(axis=0)
    ideal = np.asarray(ideal, dtype=float)
    box = float(np.prod(ref - ideal))
    if box <= 0.0:
        return 0.0
    if method == "auto":
        method = (
            "exact"
            if len(front) <= EXACT_MAX_POINTS and ref.size <= EXACT_MAX_OBJECTIVES
            else "mc"
        )
    if method == "exact":
        hv = hv_exact(front, ref)
    elif method == "mc":
        hv = hv_monte_carlo(front, ref, mc_samples, seed)
    else:
        raise ValueError(f"unknown hypervolume method {method!r}")
    return hv / box


def _tied_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def rank_sum_test(a, b, level: float = 0.05) -> str:
    """Two-sided Wilcoxon rank-sum verdict: '+' when a is significantly
    larger than b, '-' when smaller, '≈' otherwise.

    Uses the normal approximation with tie correction; fully tied samples are
    reported as '≈'.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 3 or len(b) < 3:
        raise ValueError("each sample needs at least 3 values")
    n1, n2 = len(a), len(b)
    combined = np.concatenate([a, b])
    ranks = _tied_ranks(combined)
    u1 = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    n = n1 + n2
    _, counts = np.unique(combined, return_counts=True)
    tie_term = float(((counts**3) - counts).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0.0:
        return "≈"
    z = (u1 - mu) / math.sqrt(var)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    if p < level and u1 > mu:
        return "+"
    if p < level and u1 < mu:
        return "-"
    return "≈"


def format_mean_std(mean: float, std: float) -> str:
    """Scientific-notation cell like ``6.0296E-01 (6.37E-02)``."""
    return f"{mean:.4E} ({std:.2E})"


@dataclass
class ComparisonVerdict:
    """Per-algorithm statistics plus significance markers against a champion."""

    means: dict[str, float]
    stds: dict[str, float]
    formatted: dict[str, str]
    markers: dict[str, str]  # absent for the champion itself
    best: str
    champion: str | None
    level: float


def summarize(
    samples_by_algorithm: dict[str, "np.ndarray | list[float]"],
    champion: str | None = None,
    level: float = 0.05,
) -> ComparisonVerdict:
    """Means, stds, formatted cells, and rank-sum markers versus a champion.

    Standard deviations use the population convention so a single run reports
    0.00E+00.  The best mean is flagged; exact ties go to the
    lexicographically smallest name.
    """
    if not samples_by_algorithm:
        raise ValueError("need at least one algorithm")
    if champion is not None and champion not in samples_by_algorithm:
        raise ValueError(f"champion {champion!r} has no samples")
    means, stds, formatted = {}, {}, {}
    for name, values in samples_by_algorithm.items():
        arr = np.asarray(values, dtype=float)
        if arr.size == 0:
            raise ValueError(f"algorithm {name!r} has no runs")
        means[name] = float(arr.mean())
        stds[name] = float(arr.std(ddof=0))
        formatted[name] = format_mean_std(means[name], stds[name])
    markers = {}
    if champion is not None:
        champ_vals = np.asarray(samples_by_algorithm[champion], dtype=float)
        for name, values in samples_by_algorithm.items():
            if name == champion:
                continue
            vals = np.asarray(values, dtype=float)
            if len(vals) >= 3 and len(champ_vals) >= 3:
                markers[name] = rank_sum_test(vals, champ_vals, level)
            else:
                markers[name] = "≈"
    best_mean = max(means.values())
    best = min(name for name, m in means.items() if m == best_mean)
    return ComparisonVerdict(
        means=means,
        stds=stds,
        formatted=formatted,
        markers=markers,
        best=best,
        champion=champion,
        level=level,
    )
