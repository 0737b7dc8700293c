"""Solver variants for large-scale many-objective box problems.

Four interchangeable search strategies behind one ``run`` driver:

- ``ref_guided``: offspring sampled along per-individual convergence and
  diversity direction vectors in decision space, derived from reference-vector
  association.
- ``reformulated_dva``: a binary mask over variables is evolved by a (1+1)
  hill-climber to split them into convergence- and diversity-related groups,
  then the two masked subproblems are optimized alternately.
- ``inverse_model``: a ridge-regularized linear map from objective space back
  to decision space is refit each generation and queried at target points
  sampled near the current front, moved toward the ideal point.
- ``random_search``: uniform sampling baseline.

Problems are duck-typed: anything with ``dim``, ``n_obj``, ``bounds()`` and
``evaluate_batch(X)`` works.  Every evaluation any component performs flows
through one budget counter, which also maintains the elitist non-dominated
archive and its hypervolume trace, so budget accounting and elitism hold no
matter which variant is running.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from ._kernels import strictly_dominated, weakly_covered
from .evo import (
    Population,
    ReferenceVectorSet,
    associate,
    das_dennis_vectors,
    default_divisions,
    environmental_selection,
    nondominated_sort,
    polynomial_mutation_batch,
    sbx_batch,
)

VARIANTS = ("ref_guided", "reformulated_dva", "inverse_model", "random_search")


@dataclass
class SolverConfig:
    """Run parameters shared by all variants plus variant-specific knobs."""

    variant: str
    budget: int
    seed: int = 0
    population_size: int = 70
    eta_c: float = 20.0
    eta_m: float = 20.0
    mutation_rate: float | None = None  # per-gene probability; None -> 1/dim
    resource_split: float = 0.5  # offspring share spent on convergence moves
    perturbations: int = 4  # probes per variable when classifying roles
    ridge: float = 1e-6
    target_sigma: float = 0.3
    dva_mask_budget: int | None = None  # mask fitness evals; None -> ~10% of budget
    dva_sample_size: int = 5
    trace_samples: int = 4096

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(
                f"unknown variant {self.variant!r}; expected one of {VARIANTS}"
            )
        if self.population_size < 4 or self.population_size % 2:
            raise ValueError("population size must be even and >= 4")
        if self.budget < self.population_size:
            raise ValueError("budget must cover at least the initial population")
        if not 0.0 <= self.resource_split <= 1.0:
            raise ValueError("resource split must lie in [0, 1]")
        if self.perturbations < 2:
            raise ValueError("need at least 2 perturbations per variable")


@dataclass
class VariableRoles:
    """Convergence/diversity label per decision variable."""

    convergence_mask: np.ndarray  # bool, True = convergence-related

    def __post_init__(self):
        self.convergence_mask = np.asarray(self.convergence_mask, dtype=bool)

    @property
    def n_convergence(self) -> int:
        return int(self.convergence_mask.sum())

    @property
    def n_diversity(self) -> int:
        return int((~self.convergence_mask).sum())

    def labels(self) -> list[str]:
        return ["convergence" if c else "diversity" for c in self.convergence_mask]

    @classmethod
    def all_convergence(cls, dim: int) -> "VariableRoles":
        return cls(np.ones(dim, dtype=bool))

    @classmethod
    def all_diversity(cls, dim: int) -> "VariableRoles":
        return cls(np.zeros(dim, dtype=bool))


@dataclass
class InverseModel:
    """Linear map from objective space to decision space."""

    weights: np.ndarray  # (dim, n_obj)
    intercept: np.ndarray  # (dim,)

    def predict(self, targets: np.ndarray) -> np.ndarray:
        T = np.atleast_2d(np.asarray(targets, dtype=float))
        return T @ self.weights.T + self.intercept


@dataclass
class RunResult:
    """Outcome of one seeded run: the archive front plus bookkeeping."""

    variant: str
    seed: int
    front_X: np.ndarray
    front_F: np.ndarray
    trace: list[tuple[int, int, float]]  # (generation, evaluations, archive hv)
    evaluations: int
    duration: float
    trace_box: tuple[np.ndarray, np.ndarray]  # (lower corner, reference point)


class ParetoArchive:
    """Unbounded archive of mutually non-dominated evaluated points.

    Objectives live in one compact array; decision vectors are kept in an
    append-only chunk store and materialized only on demand, since eviction is
    frequent and decision rows are wide.  Dominance rejection scans the
    archive strongest-first in blocks so typical candidates exit early.
    """

    def __init__(self, dim: int, n_obj: int):
        self.dim = dim
        self.F = np.empty((0, n_obj))
        self._ids = np.empty(0, dtype=np.int64)
        self._chunks: list[np.ndarray] = []
        self._stored = 0

    def __len__(self) -> int:
        return len(self.F)

    @property
    def X(self) -> np.ndarray:
        if not self._chunks:
            return np.empty((0, self.dim))
        store = np.concatenate(self._chunks)
        return store[self._ids]

    def update(self, Xb: np.ndarray, Fb: np.ndarray) -> np.ndarray:
        """Insert a batch; returns the objective rows that actually entered."""
        Xb = np.asarray(Xb, dtype=float)
        Fb = np.asarray(Fb, dtype=float)
        if len(Fb) > 1:
            le = (Fb[:, None, :] <= Fb[None, :, :]).all(axis=2)
            eq = (Fb[:, None, :] == Fb[None, :, :]).all(axis=2)
            drop = (le & ~eq).any(axis=0) | np.triu(eq, 1).any(axis=0)
            Xb, Fb = Xb[~drop], Fb[~drop]
        if len(Fb) and len(self.F):
            # A dominator's coordinate sum never exceeds the candidate's, so
            # the sum-sorted archive only needs scanning up to that cutoff.
            sums = self.F.sum(axis=1)
            order = np.argsort(sums, kind="stable")
            cutoffs = np.searchsorted(sums[order], Fb.sum(axis=1), side="right")
            covered = weakly_covered(Fb, self.F[order], cutoffs)
            Xb, Fb = Xb[~covered], Fb[~covered]
        if len(Fb) == 0:
            return Fb
        if len(self.F):
            evict = strictly_dominated(self.F, Fb)
            if evict.any():
                self.F = self.F[~evict]
                self._ids = self._ids[~evict]
        new_ids = np.arange(self._stored, self._stored + len(Fb), dtype=np.int64)
        self._chunks.append(np.array(Xb, dtype=float))
        self._stored += len(Fb)
        self.F = np.concatenate([self.F, Fb]) if len(self.F) else Fb.copy()
        self._ids = np.concatenate([self._ids, new_ids])
        self._compact_if_stale()
        return Fb

    def _compact_if_stale(self) -> None:
        dead = self._stored - len(self._ids)
        if dead > 4096 and dead > len(self._ids):
            live = self.X
            self._chunks = [live]
            self._ids = np.arange(len(live), dtype=np.int64)
            self._stored = len(live)


class HvTrace:
    """Monte Carlo hypervolume of the archive over a fixed sample cloud.

    The sample points are frozen at construction.  A sample flips to
    "dominated" when an archive entrant weakly dominates it; because the
    archive's dominated region only ever grows, the flag always equals
    "dominated by the current archive", so the estimate is exact for the
    archive (up to sampling error) and non-decreasing by construction.
    """

    def __init__(self, lower: np.ndarray, reference: np.ndarray, samples: int, seed):
        self.lower = np.asarray(lower, dtype=float)
        self.reference = np.asarray(reference, dtype=float)
        rng = np.random.default_rng(seed)
        self.samples = rng.uniform(
            self.lower, self.reference, size=(samples, self.lower.size)
        )
        self.volume = float(np.prod(self.reference - self.lower))
        self.dominated = np.zeros(samples, dtype=bool)

    def update(self, F_new: np.ndarray) -> None:
        if len(F_new) == 0:
            return
        idx = np.flatnonzero(~self.dominated)
        if len(idx) == 0:
            return
        cutoffs = np.full(len(idx), len(F_new), dtype=np.int64)
        hit = weakly_covered(self.samples[idx], F_new, cutoffs)
        self.dominated[idx[hit]] = True

    def value(self) -> float:
        return float(self.dominated.mean()) * self.volume


class _BudgetedProblem:
    """Counts every evaluation, enforces the budget, and feeds observers."""

    def __init__(self, problem, budget: int, on_evaluate=None):
        self.problem = problem
        self.budget = budget
        self.used = 0
        self.on_evaluate = on_evaluate
        self.dim = problem.dim
        self.n_obj = problem.n_obj

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def bounds(self):
        return self.problem.bounds()

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if len(X) > self.remaining:
            raise RuntimeError(
                f"evaluation batch of {len(X)} exceeds remaining budget {self.remaining}"
            )
        F = self.problem.evaluate_batch(X)
        self.used += len(X)
        if self.on_evaluate is not None:
            self.on_evaluate(X, F)
        return F


def classify_variables(
    problem,
    base: np.ndarray,
    k: int,
    rng: np.random.Generator | None = None,
    ideal: np.ndarray | None = None,
) -> VariableRoles:
    """Label each variable convergence- or diversity-related by probing it.

    Each variable is set to k evenly spaced values across its range while the
    others stay at ``base``; the variable is convergence-related when its mean
    objective displacement points within 45 degrees of the direction from the
    base objectives toward the ideal point.  Variables with no objective
    effect default to diversity so that inert variables are never dragged
    toward the model's targets.
    """
    if k < 2:
        raise ValueError("need at least 2 probes per variable")
    base = np.asarray(base, dtype=float)
    dim = base.size
    lower, upper = problem.bounds()
    f_base = problem.evaluate_batch(base[None, :])[0]
    probes = np.tile(base, (dim * k, 1))
    rows = np.arange(dim * k)
    cols = np.repeat(np.arange(dim), k)
    steps = np.linspace(0.0, 1.0, k)
    probes[rows, cols] = (lower[cols] + steps[np.tile(np.arange(k), dim)]
                          * (upper[cols] - lower[cols]))
    F = problem.evaluate_batch(probes)
    mean_disp = F.reshape(dim, k, -1).mean(axis=1) - f_base
    if ideal is None:
        ideal = np.minimum(F.min(axis=0), f_base)
    to_ideal = np.asarray(ideal, dtype=float) - f_base
    ideal_norm = np.linalg.norm(to_ideal)
    disp_norms = np.linalg.norm(mean_disp, axis=1)
    if ideal_norm < 1e-12:
        return VariableRoles.all_diversity(dim)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosine = (mean_disp @ to_ideal) / (disp_norms * ideal_norm)
    mask = (disp_norms > 1e-12) & (cosine > np.cos(np.pi / 4))
    return VariableRoles(mask)


def fit_inverse_model(archive, ridge: float = 1e-6) -> InverseModel:
    """Ridge least-squares fit of decisions as a linear function of objectives.

    ``archive`` is a sequence of individuals carrying ``decision`` and
    ``objectives``; at least n_obj + 1 points are required.  The intercept is
    not penalized.
    """
    F = np.array([np.asarray(ind.objectives, dtype=float) for ind in archive])
    X = np.array([np.asarray(ind.decision, dtype=float) for ind in archive])
    return _fit_inverse_arrays(F, X, ridge)


def _fit_inverse_arrays(F: np.ndarray, X: np.ndarray, ridge: float) -> InverseModel:
    n, n_obj = F.shape
    if n < n_obj + 1:
        raise ValueError(
            f"need at least {n_obj + 1} points to fit the inverse model, got {n}"
        )
    A = np.hstack([F, np.ones((n, 1))])
    penalty = np.diag(np.append(np.full(n_obj, ridge), 0.0))
    G = A.T @ A + penalty
    B = A.T @ X
    try:
        theta = np.linalg.solve(G, B)
    except np.linalg.LinAlgError:
        theta = np.linalg.lstsq(G, B, rcond=None)[0]
    return InverseModel(weights=theta[:n_obj].T, intercept=theta[n_obj])


def sample_targets(
    front_F: np.ndarray,
    ideal: np.ndarray,
    sigma: float,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Objective-space targets in the front's neighborhood, pulled idealward.

    Each target starts from a uniformly chosen front point, moves a uniform
    fraction in [0, sigma] toward the ideal point, and receives Gaussian
    jitter scaled by sigma * (nadir - ideal) / 10.  Components are clipped so
    no target falls below the ideal.
    """
    front_F = np.atleast_2d(np.asarray(front_F, dtype=float))
    if len(front_F) == 0:
        raise ValueError("front must be non-empty")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    ideal = np.asarray(ideal, dtype=float)
    nadir = front_F.max(axis=0)
    picks = front_F[rng.integers(0, len(front_F), count)]
    pull = rng.uniform(0.0, sigma, size=(count, 1))
    targets = picks + pull * (ideal - picks)
    targets += rng.standard_normal(targets.shape) * (sigma * (nadir - ideal) / 10.0)
    return np.maximum(targets, ideal)


def inverse_generate(
    model: InverseModel,
    targets: np.ndarray,
    bounds: tuple[np.ndarray, np.ndarray],
    roles: VariableRoles,
    parent: np.ndarray,
) -> np.ndarray:
    """Offspring from objective targets: model output on convergence variables,
    the parent's values on diversity variables, clipped to bounds."""
    parent = np.asarray(parent, dtype=float)
    pred = model.predict(targets)
    out = np.tile(parent, (len(pred), 1))
    mask = roles.convergence_mask
    out[:, mask] = pred[:, mask]
    return np.clip(out, bounds[0], bounds[1])


def _inverse_generate_batch(model, targets, bounds, roles, parents):
    pred = model.predict(targets)
    out = np.array(parents, dtype=float, copy=True)
    mask = roles.convergence_mask
    out[:, mask] = pred[:, mask]
    return np.clip(out, bounds[0], bounds[1])


def direction_vectors(
    pop: Population, refs: ReferenceVectorSet
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decision-space search directions from reference-vector association.

    Returns ``(convergence, diversity, diversity_counts)``: for each
    individual a unit vector toward the best individual sharing its reference
    vector (zero when it is itself the best), and unit vectors toward its two
    nearest decision-space neighbors that sit on different reference vectors.
    A population of fewer than two members yields empty direction sets.
    """
    n, dim = pop.X.shape
    if n < 2:
        return (
            np.empty((0, dim)),
            np.empty((0, 2, dim)),
            np.empty(0, dtype=int),
        )
    ideal = pop.F.min(axis=0)
    translated = pop.F - ideal
    assoc, _ = associate(translated, refs)
    along = np.einsum("ij,ij->i", translated, refs.units[assoc])
    # Best member per occupied vector: smallest projection, lowest index on ties.
    order = np.lexsort((np.arange(n), along, assoc))
    sorted_assoc = assoc[order]
    first = np.ones(n, dtype=bool)
    first[1:] = sorted_assoc[1:] != sorted_assoc[:-1]
    best_of = {int(sorted_assoc[i]): int(order[i]) for i in np.flatnonzero(first)}
    best_idx = np.array([best_of[int(v)] for v in assoc])
    conv = pop.X[best_idx] - pop.X
    norms = np.linalg.norm(conv, axis=1, keepdims=True)
    conv = np.where(norms > 0, conv / np.maximum(norms, 1e-300), 0.0)
    # Two nearest neighbors on a different vector, by decision-space distance.
    sq = np.einsum("ij,ij->i", pop.X, pop.X)
    dist = sq[:, None] + sq[None, :] - 2.0 * (pop.X @ pop.X.T)
    dist[assoc[:, None] == assoc[None, :]] = np.inf
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :2]
    valid = np.take_along_axis(dist, nearest, axis=1) < np.inf
    div = pop.X[nearest] - pop.X[:, None, :]
    norms = np.linalg.norm(div, axis=2, keepdims=True)
    div = np.where((norms > 0) & valid[:, :, None], div / np.maximum(norms, 1e-300), 0.0)
    # Pack valid directions into the leading slots.
    div_counts = (np.linalg.norm(div, axis=2) > 0).sum(axis=1)
    swap = (np.linalg.norm(div[:, 0, :], axis=1) == 0) & (div_counts == 1)
    div[swap, 0, :] = div[swap, 1, :]
    div[swap, 1, :] = 0.0
    return conv, div, div_counts


def reference_guided_offspring(
    pop: Population,
    directions: tuple[np.ndarray, np.ndarray, np.ndarray],
    split: float,
    rng: np.random.Generator,
    bounds: tuple[np.ndarray, np.ndarray],
    count: int | None = None,
) -> np.ndarray:
    """Offspring stepped along direction vectors, a ``split`` share along
    convergence directions and the rest along diversity directions.

    Step lengths are uniform in (0, 1] times the unit direction; parents are
    cycled in population order; results are clipped to bounds.
    """
    conv, div, div_counts = directions
    n_pop, dim = pop.X.shape
    n_off = pop.capacity if count is None else count
    n_conv = int(round(split * n_off))
    parents = np.arange(n_off) % n_pop
    steps = 1.0 - rng.random(n_off)
    dirs = np.zeros((n_off, dim))
    if len(conv) == n_pop:
        dirs[:n_conv] = conv[parents[:n_conv]]
        div_parents = parents[n_conv:]
        slots = rng.integers(0, np.maximum(div_counts[div_parents], 1))
        picked = div[div_parents, slots]
        picked[div_counts[div_parents] == 0] = 0.0
        dirs[n_conv:] = picked
    return np.clip(pop.X[parents] + steps[:, None] * dirs, bounds[0], bounds[1])


def binary_dva(
    pop: Population,
    problem,
    mask_budget: int,
    rng: np.random.Generator,
    *,
    sample_size: int = 5,
    eta_c: float = 20.0,
    eta_m: float = 20.0,
    mutation_rate: float | None = None,
) -> VariableRoles:
    """Evolve a binary variable mask with a (1+1) bit-flip hill-climber.

    Mask fitness is the mean reduction in distance-to-ideal when one masked
    SBX + mutation step is applied to a few sampled members (unmasked
    variables copied from the parent).  Set bits become convergence labels.
    Stops early if the problem's evaluation budget runs out.
    """
    if mask_budget < 2:
        raise ValueError("mask budget must be at least 2")
    dim = pop.X.shape[1]
    lower, upper = problem.bounds()
    p_m = 1.0 / dim if mutation_rate is None else mutation_rate
    ideal = pop.F.min(axis=0)
    base_dist = np.linalg.norm(pop.F - ideal, axis=1)

    def fitness(mask: np.ndarray) -> float | None:
        b = min(sample_size, len(pop))
        remaining = getattr(problem, "remaining", None)
        if remaining is not None and remaining < b:
            return None
        idx = rng.choice(len(pop), size=b, replace=False)
        partners = rng.integers(0, len(pop), b)
        C, _ = sbx_batch(pop.X[idx], pop.X[partners], lower, upper, eta_c, rng)
        C = polynomial_mutation_batch(C, lower, upper, eta_m, p_m, rng)
        C = np.where(mask, C, pop.X[idx])
        F_c = problem.evaluate_batch(C)
        return float(np.mean(base_dist[idx] - np.linalg.norm(F_c - ideal, axis=1)))

    mask = rng.random(dim) < 0.5
    best = fitness(mask)
    if best is None:
        return VariableRoles(mask)
    for _ in range(mask_budget - 1):
        child = mask.copy()
        flips = rng.random(dim) < 1.0 / dim
        if not flips.any():
            flips[rng.integers(dim)] = True
        child[flips] = ~child[flips]
        score = fitness(child)
        if score is None:
            break
        if score >= best:
            mask, best = child, score
    return VariableRoles(mask)


def optimize_subproblem(
    pop: Population,
    roles: VariableRoles,
    mode: str,
    step_budget: int,
    rng: np.random.Generator,
    *,
    problem,
    refs: ReferenceVectorSet,
    eta_c: float = 20.0,
    eta_m: float = 20.0,
    mutation_rate: float | None = None,
) -> Population:
    """One masked optimization phase: vary only the ``mode`` variables.

    Children copy non-matching variables from their primary parent, so the
    other subproblem is untouched.  Consumes exactly ``step_budget``
    evaluations, applying environmental selection after each batch.
    """
    if mode not in ("convergence", "diversity"):
        raise ValueError("mode must be 'convergence' or 'diversity'")
    mask = (
        roles.convergence_mask if mode == "convergence" else ~roles.convergence_mask
    )
    lower, upper = problem.bounds()
    dim = pop.X.shape[1]
    p_m = 1.0 / dim if mutation_rate is None else mutation_rate
    produced = 0
    while produced < step_budget:
        b = min(pop.capacity, step_budget - produced)
        perm = rng.permutation(len(pop))
        partners = np.roll(perm, 1)
        C, _ = sbx_batch(pop.X[perm], pop.X[partners], lower, upper, eta_c, rng)
        C = polynomial_mutation_batch(C, lower, upper, eta_m, p_m, rng)
        C = np.where(mask, C, pop.X[perm])[:b]
        F_c = problem.evaluate_batch(C)
        merged = Population(
            np.concatenate([pop.X, C]), np.concatenate([pop.F, F_c]), pop.capacity
        )
        pop = environmental_selection(merged, refs, pop.capacity)
        produced += b
    return pop


class _RunState:
    """Per-run context shared by the variant loops."""

    def __init__(self, problem, config: SolverConfig):
        self.rng = np.random.default_rng(config.seed)
        self.config = config
        self.archive = ParetoArchive(problem.dim, problem.n_obj)
        self.trace: HvTrace | None = None
        self.counter = _BudgetedProblem(problem, config.budget, self._observe)
        self.lower, self.upper = problem.bounds()
        self.refs = das_dennis_vectors(
            problem.n_obj, default_divisions(problem.n_obj, config.population_size)
        )
        self.rows: list[tuple[int, int, float]] = []
        self.generation = 0

    def _observe(self, X: np.ndarray, F: np.ndarray) -> None:
        entered = self.archive.update(X, F)
        if self.trace is not None:
            self.trace.update(entered)

    def start_trace(self, F0: np.ndarray) -> None:
        lo = F0.min(axis=0)
        hi = F0.max(axis=0)
        span = np.maximum(hi - lo, 0.0)
        ref = hi + 0.1 * span + 1e-9
        self.trace = HvTrace(
            lo, ref, self.config.trace_samples, seed=(self.config.seed, 0x7E5)
        )
        self.trace.update(self.archive.F)

    def record(self) -> None:
        hv = self.trace.value() if self.trace is not None else 0.0
        self.rows.append((self.generation, self.counter.used, hv))

    def next_generation(self) -> None:
        self.generation += 1
        self.record()

    def mutation_rate(self, dim: int) -> float:
        if self.config.mutation_rate is not None:
            return self.config.mutation_rate
        return 1.0 / dim


def _init_population(state: _RunState) -> Population:
    n = state.config.population_size
    X0 = state.rng.uniform(
        state.lower, state.upper, size=(n, state.counter.dim)
    )
    F0 = state.counter.evaluate_batch(X0)
    state.start_trace(F0)
    state.record()
    return Population(X0, F0, n)


def _select(state: _RunState, pop: Population, X_off, F_off) -> Population:
    merged = Population(
        np.concatenate([pop.X, X_off]),
        np.concatenate([pop.F, F_off]),
        pop.capacity,
    )
    return environmental_selection(merged, state.refs, pop.capacity)


def _variation_fallback(state: _RunState, pop: Population, count: int) -> np.ndarray:
    """Plain SBX + mutation offspring, used when a masked phase cannot act."""
    cfg = state.config
    perm = state.rng.permutation(len(pop))
    partners = np.roll(perm, 1)
    C, _ = sbx_batch(
        pop.X[perm], pop.X[partners], state.lower, state.upper, cfg.eta_c, state.rng
    )
    C = polynomial_mutation_batch(
        C,
        state.lower,
        state.upper,
        cfg.eta_m,
        state.mutation_rate(state.counter.dim),
        state.rng,
    )
    return C[:count]


def _run_random_search(state: _RunState) -> Population:
    pop = _init_population(state)
    n = state.config.population_size
    while state.counter.remaining > 0:
        b = min(n, state.counter.remaining)
        Xb = state.rng.uniform(state.lower, state.upper, size=(b, state.counter.dim))
        state.counter.evaluate_batch(Xb)
        state.next_generation()
    return pop


def _run_ref_guided(state: _RunState) -> Population:
    # Direction steps have unit scale, which drives fast coarse moves but
    # cannot refine once the population contracts; half the offspring
    # therefore come from SBX so resolution keeps improving.
    cfg = state.config
    pop = _init_population(state)
    while state.counter.remaining > 0:
        b = min(cfg.population_size, state.counter.remaining)
        n_dir = b // 2
        parts = []
        if n_dir > 0:
            dirs = direction_vectors(pop, state.refs)
            guided = reference_guided_offspring(
                pop,
                dirs,
                cfg.resource_split,
                state.rng,
                (state.lower, state.upper),
                count=n_dir,
            )
            parts.append(
                polynomial_mutation_batch(
                    guided,
                    state.lower,
                    state.upper,
                    cfg.eta_m,
                    state.mutation_rate(state.counter.dim),
                    state.rng,
                )
            )
        if b - n_dir > 0:
            parts.append(_variation_fallback(state, pop, b - n_dir))
        off = np.concatenate(parts)
        F_off = state.counter.evaluate_batch(off)
        pop = _select(state, pop, off, F_off)
        state.next_generation()
    return pop


def _run_reformulated_dva(state: _RunState) -> Population:
    cfg = state.config
    pop = _init_population(state)
    dim = state.counter.dim
    sample = min(cfg.dva_sample_size, cfg.population_size)
    roles = VariableRoles.all_convergence(dim)
    if state.counter.remaining >= 2 * sample:
        mask_budget = cfg.dva_mask_budget
        if mask_budget is None:
            mask_budget = max(2, int(0.1 * cfg.budget) // sample)
        roles = binary_dva(
            pop,
            state.counter,
            mask_budget,
            state.rng,
            sample_size=sample,
            eta_c=cfg.eta_c,
            eta_m=cfg.eta_m,
            mutation_rate=cfg.mutation_rate,
        )
    n = cfg.population_size
    while state.counter.remaining > 0:
        conv_share = int(round(cfg.resource_split * n))
        if roles.n_convergence == 0:
            conv_share = 0
        div_share = n - conv_share
        if roles.n_diversity == 0:
            conv_share, div_share = (n, 0) if roles.n_convergence else (0, 0)
        if conv_share + div_share == 0:
            # Fully degenerate labeling; fall back to plain variation.
            b = min(n, state.counter.remaining)
            off = _variation_fallback(state, pop, b)
            F_off = state.counter.evaluate_batch(off)
            pop = _select(state, pop, off, F_off)
            state.next_generation()
            continue
        step = min(conv_share, state.counter.remaining)
        if step > 0:
            pop = optimize_subproblem(
                pop,
                roles,
                "convergence",
                step,
                state.rng,
                problem=state.counter,
                refs=state.refs,
                eta_c=cfg.eta_c,
                eta_m=cfg.eta_m,
                mutation_rate=cfg.mutation_rate,
            )
        step = min(div_share, state.counter.remaining)
        if step > 0:
            pop = optimize_subproblem(
                pop,
                roles,
                "diversity",
                step,
                state.rng,
                problem=state.counter,
                refs=state.refs,
                eta_c=cfg.eta_c,
                eta_m=cfg.eta_m,
                mutation_rate=cfg.mutation_rate,
            )
        state.next_generation()
    return pop


def _run_inverse_model(state: _RunState) -> Population:
    cfg = state.config
    pop = _init_population(state)
    dim = state.counter.dim
    n_obj = state.counter.n_obj
    n = cfg.population_size
    probe_cost = dim * cfg.perturbations + 1
    roles = VariableRoles.all_diversity(dim)
    if state.counter.remaining >= probe_cost:
        ideal = pop.F.min(axis=0)
        base = pop.X[np.argmin(np.linalg.norm(pop.F - ideal, axis=1))]
        roles = classify_variables(
            state.counter, base, cfg.perturbations, state.rng, ideal=ideal
        )
    fifo: deque[tuple[np.ndarray, np.ndarray]] = deque(maxlen=5 * n)
    for x, f in zip(pop.X, pop.F):
        fifo.append((x.copy(), f.copy()))
    mask = roles.convergence_mask
    while state.counter.remaining > 0:
        b = min(n, state.counter.remaining)
        n_conv = int(round(cfg.resource_split * b))
        n_div = b - n_conv
        front = nondominated_sort(pop.F)[0]
        fit_X = np.concatenate([pop.X[front], np.array([x for x, _ in fifo])])
        fit_F = np.concatenate([pop.F[front], np.array([f for _, f in fifo])])
        parts = []
        if n_conv > 0:
            can_model = roles.n_convergence > 0 and len(fit_F) >= n_obj + 1
            if can_model:
                model = _fit_inverse_arrays(fit_F, fit_X, cfg.ridge)
                ideal = pop.F.min(axis=0)
                targets = sample_targets(
                    pop.F[front], ideal, cfg.target_sigma, n_conv, state.rng
                )
                parents = pop.X[state.rng.integers(0, len(pop), n_conv)]
                conv_off = _inverse_generate_batch(
                    model, targets, (state.lower, state.upper), roles, parents
                )
                conv_off = polynomial_mutation_batch(
                    conv_off,
                    state.lower,
                    state.upper,
                    cfg.eta_m,
                    state.mutation_rate(dim),
                    state.rng,
                )
            else:
                conv_off = _variation_fallback(state, pop, n_conv)
            parts.append(conv_off)
        if n_div > 0:
            if roles.n_diversity > 0:
                perm = state.rng.permutation(len(pop))
                partners = np.roll(perm, 1)
                C, _ = sbx_batch(
                    pop.X[perm],
                    pop.X[partners],
                    state.lower,
                    state.upper,
                    cfg.eta_c,
                    state.rng,
                )
                C = polynomial_mutation_batch(
                    C,
                    state.lower,
                    state.upper,
                    cfg.eta_m,
                    state.mutation_rate(dim),
                    state.rng,
                )
                div_off = np.where(mask, pop.X[perm], C)[:n_div]
            else:
                div_off = _variation_fallback(state, pop, n_div)
            parts.append(div_off)
        off = np.concatenate(parts)
        F_off = state.counter.evaluate_batch(off)
        for x, f in zip(off, F_off):
            fifo.append((x.copy(), f.copy()))
        pop = _select(state, pop, off, F_off)
        state.next_generation()
    return pop


_VARIANT_LOOPS = {
    "random_search": _run_random_search,
    "ref_guided": _run_ref_guided,
    "reformulated_dva": _run_reformulated_dva,
    "inverse_model": _run_inverse_model,
}


def run(problem, config: SolverConfig) -> RunResult:
    """Execute one seeded run of the configured variant until the budget ends.

    Deterministic for a fixed (problem, config): all stochastic draws come
    from one generator seeded with ``config.seed``.  The returned front is the
    archive of every non-dominated point evaluated during the run.
    """
    config.validate()
    state = _RunState(problem, config)
    start = time.perf_counter()
    _VARIANT_LOOPS[config.variant](state)
    duration = time.perf_counter() - start
    assert state.counter.used <= config.budget
    return RunResult(
        variant=config.variant,
        seed=config.seed,
        front_X=state.archive.X.copy(),
        front_F=state.archive.F.copy(),
        trace=state.rows,
        evaluations=state.counter.used,
        duration=duration,
        trace_box=(
            state.trace.lower.copy(),
            state.trace.reference.copy(),
        ),
    )
