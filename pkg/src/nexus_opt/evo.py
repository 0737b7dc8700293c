"""Shared many-objective EA machinery.

Dominance and non-dominated sorting, simplex-lattice reference vectors,
real-coded variation operators (SBX + polynomial mutation), and the
reference-vector niching used for environmental selection.  Everything is
minimization-convention and operates on plain numpy arrays; a thin
``Individual``/``Population`` layer wraps the arrays for callers that want
typed values.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np


@dataclass
class Individual:
    """A decision vector with its cached objective vector."""

    decision: np.ndarray
    objectives: np.ndarray


class Population:
    """Fixed-capacity set of evaluated individuals, stored as arrays."""

    def __init__(self, X: np.ndarray, F: np.ndarray, capacity: int):
        X = np.asarray(X, dtype=float)
        F = np.asarray(F, dtype=float)
        if len(X) != len(F):
            raise ValueError("decision and objective arrays disagree in length")
        self.X = X
        self.F = F
        self.capacity = capacity

    def __len__(self) -> int:
        return len(self.X)

    @property
    def members(self) -> list[Individual]:
        return [Individual(x.copy(), f.copy()) for x, f in zip(self.X, self.F)]


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff a is componentwise <= b and differs somewhere (minimization)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"objective shapes differ: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def domination_matrix(F: np.ndarray) -> np.ndarray:
    """Boolean matrix d[i, j] = point i dominates point j."""
    F = np.asarray(F, dtype=float)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


def nondominated_sort(F: np.ndarray) -> list[np.ndarray]:
    """Partition points into fronts of successively removed non-dominated sets.

    Returns index arrays; front 0 holds all points dominated by nobody, front
    k the points non-dominated once fronts < k are removed.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or len(F) == 0:
        raise ValueError("expected a non-empty (n, M) objective array")
    dom = domination_matrix(F)
    counts = dom.sum(axis=0)
    fronts = []
    alive = np.ones(len(F), dtype=bool)
    while alive.any():
        front = np.flatnonzero(alive & (counts == 0))
        fronts.append(front)
        alive[front] = False
        counts = counts - dom[front].sum(axis=0)
    return fronts


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    """Boolean mask of points not dominated by any other point."""
    return ~domination_matrix(np.asarray(F, dtype=float)).any(axis=0)


@dataclass(frozen=True)
class ReferenceVectorSet:
    """Simplex-lattice directions: weights sum to 1, units are length 1."""

    weights: np.ndarray
    units: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)


def das_dennis_vectors(n_obj: int, divisions: int) -> ReferenceVectorSet:
    """All compositions of ``divisions`` into ``n_obj`` parts, as directions.

    Produces comb(divisions + n_obj - 1, n_obj - 1) weight vectors on the unit
    simplex, each also unit-normalized for angle computations.
    """
    if n_obj < 2 or divisions < 1:
        raise ValueError("need n_obj >= 2 and divisions >= 1")
    weights = np.empty((comb(divisions + n_obj - 1, n_obj - 1), n_obj))
    for row, cuts in enumerate(combinations(range(divisions + n_obj - 1), n_obj - 1)):
        padded = (-1,) + cuts + (divisions + n_obj - 1,)
        weights[row] = np.diff(padded) - 1
    weights /= divisions
    units = weights / np.linalg.norm(weights, axis=1, keepdims=True)
    return ReferenceVectorSet(weights=weights, units=units)


def default_divisions(n_obj: int, population_size: int) -> int:
    """Largest lattice division count whose vector set fits the population."""
    h = 1
    while comb(h + n_obj, n_obj - 1) <= population_size:
        h += 1
    return h


def sbx_crossover(
    p1: np.ndarray,
    p2: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    eta_c: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover of two parents, children clipped to bounds."""
    c1, c2 = sbx_batch(p1[None, :], p2[None, :], lower, upper, eta_c, rng)
    return c1[0], c2[0]


def sbx_batch(
    P1: np.ndarray,
    P2: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    eta_c: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized SBX over (pairs, dim) parent arrays.

    Every pair is crossed (crossover probability 1); each gene participates
    with probability 0.5, otherwise both children copy the parents' gene.
    """
    P1 = np.asarray(P1, dtype=float)
    P2 = np.asarray(P2, dtype=float)
    u = rng.random(P1.shape)
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta_c + 1.0)),
        (0.5 / np.maximum(1.0 - u, 1e-16)) ** (1.0 / (eta_c + 1.0)),
    )
    active = rng.random(P1.shape) < 0.5
    beta = np.where(active, beta, 1.0)
    mean = 0.5 * (P1 + P2)
    diff = 0.5 * (P1 - P2)
    C1 = np.clip(mean + beta * diff, lower, upper)
    C2 = np.clip(mean - beta * diff, lower, upper)
    return C1, C2


def polynomial_mutation(
    v: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    eta_m: float,
    p_m: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Polynomial mutation of one vector, each gene mutated with prob p_m."""
    return polynomial_mutation_batch(v[None, :], lower, upper, eta_m, p_m, rng)[0]


def polynomial_mutation_batch(
    X: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    eta_m: float,
    p_m: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized polynomial mutation over a (count, dim) array."""
    X = np.asarray(X, dtype=float).copy()
    span = upper - lower
    site = rng.random(X.shape) < p_m
    u = rng.random(X.shape)
    # Normalized distances to the nearer bound control the achievable spread.
    with np.errstate(invalid="ignore", divide="ignore"):
        delta_lo = np.where(span > 0, (X - lower) / span, 0.0)
        delta_hi = np.where(span > 0, (upper - X) / span, 0.0)
    exp = 1.0 / (eta_m + 1.0)
    down = u < 0.5
    delta_q = np.where(
        down,
        (2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta_lo) ** (eta_m + 1.0)) ** exp - 1.0,
        1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta_hi) ** (eta_m + 1.0)) ** exp,
    )
    X = np.where(site, X + delta_q * span, X)
    return np.clip(X, lower, upper)


def ideal_point(F: np.ndarray) -> np.ndarray:
    """Componentwise minimum of a non-empty objective set."""
    F = np.asarray(F, dtype=float)
    if len(F) == 0:
        raise ValueError("ideal point of an empty set")
    return F.min(axis=0)


def nadir_point(front_F: np.ndarray) -> np.ndarray:
    """Componentwise maximum over a (first-front) objective set."""
    F = np.asarray(front_F, dtype=float)
    if len(F) == 0:
        raise ValueError("nadir point of an empty set")
    return F.max(axis=0)


def normalize_objectives(
    F: np.ndarray, ideal: np.ndarray, nadir: np.ndarray
) -> np.ndarray:
    """(F - ideal) / (nadir - ideal), degenerate components mapped to 0."""
    F = np.asarray(F, dtype=float)
    span = np.asarray(nadir, dtype=float) - np.asarray(ideal, dtype=float)
    ok = span >= 1e-12
    out = np.zeros_like(F)
    out[:, ok] = (F[:, ok] - ideal[ok]) / span[ok]
    return out


def associate(
    translated_F: np.ndarray, refs: ReferenceVectorSet
) -> tuple[np.ndarray, np.ndarray]:
    """Assign each ideal-translated point to its minimum-angle reference vector.

    Returns (vector index, perpendicular distance to that vector's line).
    Zero-norm points sit on the ideal and attach to vector 0 at distance 0.
    """
    G = np.asarray(translated_F, dtype=float)
    norms = np.linalg.norm(G, axis=1)
    proj = G @ refs.units.T
    with np.errstate(invalid="ignore", divide="ignore"):
        cosine = np.where(norms[:, None] > 0, proj / norms[:, None], 1.0)
    assoc = np.argmax(cosine, axis=1)
    along = proj[np.arange(len(G)), assoc]
    perp = np.sqrt(np.maximum(norms**2 - along**2, 0.0))
    return assoc, perp


def select_indices(F: np.ndarray, refs: ReferenceVectorSet, n: int) -> np.ndarray:
    """Indices of the n survivors under front rank + reference-vector niching.

    Whole fronts are admitted while they fit; the splitting front is
    translated by the ideal point, associated to reference vectors by angle,
    and filled round-robin per vector, best (smallest perpendicular distance)
    first.  First occurrence wins all ties, keeping selection deterministic.
    """
    F = np.asarray(F, dtype=float)
    if len(F) < n:
        raise ValueError(f"cannot select {n} from {len(F)}")
    if len(F) == n:
        return np.arange(n)
    fronts = nondominated_sort(F)
    picked: list[np.ndarray] = []
    total = 0
    for front in fronts:
        if total + len(front) <= n:
            picked.append(front)
            total += len(front)
            if total == n:
                return np.concatenate(picked)
        else:
            split = front
            break
    remaining = n - total
    ideal = ideal_point(F)
    assoc, perp = associate(F[split] - ideal, refs)
    # Per-vector candidate queues ordered by perpendicular distance.
    queues: dict[int, list[int]] = {}
    order = np.lexsort((split, perp))
    for pos in order:
        queues.setdefault(int(assoc[pos]), []).append(int(split[pos]))
    chosen: list[int] = []
    vector_ids = sorted(queues)
    while remaining > 0:
        for vid in vector_ids:
            queue = queues[vid]
            if queue and remaining > 0:
                chosen.append(queue.pop(0))
                remaining -= 1
    picked.append(np.array(sorted(chosen), dtype=int))
    return np.concatenate(picked) if picked else np.array(chosen, dtype=int)


def environmental_selection(
    pop: Population, refs: ReferenceVectorSet, n: int
) -> Population:
    """Truncate a population to capacity n by rank then reference niching."""
    idx = select_indices(pop.F, refs, n)
    return Population(pop.X[idx], pop.F[idx], capacity=n)
