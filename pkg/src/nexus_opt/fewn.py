"""Food-energy-water nexus allocation problem.

The decision variables are the entries of a flow matrix built on input-output
accounting: each of the ``alpha + beta + gamma`` resource sources (water,
energy, food) allocates flow to every source and to ``epsilon`` final-demand
sectors.  A source's consumption is its row sum, and the five objectives are
cross-resource intensity ratios (e.g. water spent per unit of energy
consumed), all minimized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Objectives count of the nexus problem (five cross-resource intensities).
N_OBJECTIVES = 5

#: A consumption total below this is treated as zero and triggers the penalty.
DENOMINATOR_GUARD = 1e-9

#: Objective value assigned when the corresponding consumption total is zero.
PENALTY = 1e6

#: Lower bound for flows into final-demand columns; keeps row sums positive.
DEMAND_LOWER_BOUND = 0.01


@dataclass(frozen=True)
class ResourceTopology:
    """Shape of a nexus instance: source counts per resource plus demand sectors."""

    water: int
    energy: int
    food: int
    demand: int

    def __post_init__(self):
        for name in ("water", "energy", "food", "demand"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} count must be an integer >= 1, got {value!r}")

    @property
    def n_sources(self) -> int:
        return self.water + self.energy + self.food

    @property
    def n_destinations(self) -> int:
        return self.n_sources + self.demand

    @property
    def shape(self) -> tuple[int, int]:
        """Flow-matrix shape: one row per source, one column per destination."""
        return (self.n_sources, self.n_destinations)


def decision_dim(topology: ResourceTopology) -> int:
    """Number of decision variables: sources times destinations."""
    return topology.n_sources * topology.n_destinations


@dataclass(frozen=True)
class ConsumptionSummary:
    """Row-sum consumptions, their totals, and the five cross-flow aggregates."""

    per_water: np.ndarray
    per_energy: np.ndarray
    per_food: np.ndarray
    water_total: float
    energy_total: float
    food_total: float
    water_to_energy: float
    water_to_food: float
    food_to_water: float
    energy_to_food: float
    food_to_energy: float


class FewnProblem:
    """Box-constrained many-objective problem over a flow matrix.

    Rows of the matrix are ordered water, energy, food; columns are water,
    energy, food, demand.  Decision vectors are the row-major flattening.
    """

    def __init__(self, topology: ResourceTopology):
        self.topology = topology
        self.dim = decision_dim(topology)
        self.n_obj = N_OBJECTIVES
        a, b, g = topology.water, topology.energy, topology.food
        self._row_w = slice(0, a)
        self._row_e = slice(a, a + b)
        self._row_f = slice(a + b, a + b + g)
        self._col_w = slice(0, a)
        self._col_e = slice(a, a + b)
        self._col_f = slice(a + b, a + b + g)
        self._col_d = slice(a + b + g, topology.n_destinations)
        lower = np.zeros(topology.shape)
        lower[:, self._col_d] = DEMAND_LOWER_BOUND
        self._lower = lower.reshape(-1)
        self._upper = np.ones(self.dim)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-variable (lower, upper) bound vectors."""
        return self._lower.copy(), self._upper.copy()

    def decode(self, v: np.ndarray) -> np.ndarray:
        """Unflatten a decision vector into its flow matrix."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(
                f"decision vector has shape {v.shape}, expected ({self.dim},)"
            )
        return v.reshape(self.topology.shape)

    def encode(self, m: np.ndarray) -> np.ndarray:
        """Flatten a flow matrix into a decision vector (inverse of decode)."""
        m = np.asarray(m, dtype=float)
        if m.shape != self.topology.shape:
            raise ValueError(
                f"flow matrix has shape {m.shape}, expected {self.topology.shape}"
            )
        return m.reshape(-1)

    def consumption_summary(self, m: np.ndarray) -> ConsumptionSummary:
        """Row-sum consumptions and cross-flow aggregates of a flow matrix."""
        m = np.asarray(m, dtype=float)
        if m.shape != self.topology.shape:
            raise ValueError(
                f"flow matrix has shape {m.shape}, expected {self.topology.shape}"
            )
        per_water = m[self._row_w].sum(axis=1)
        per_energy = m[self._row_e].sum(axis=1)
        per_food = m[self._row_f].sum(axis=1)
        return ConsumptionSummary(
            per_water=per_water,
            per_energy=per_energy,
            per_food=per_food,
            water_total=float(per_water.sum()),
            energy_total=float(per_energy.sum()),
            food_total=float(per_food.sum()),
            water_to_energy=float(m[self._row_w, self._col_e].sum()),
            water_to_food=float(m[self._row_w, self._col_f].sum()),
            food_to_water=float(m[self._row_f, self._col_w].sum()),
            energy_to_food=float(m[self._row_e, self._col_f].sum()),
            food_to_energy=float(m[self._row_f, self._col_e].sum()),
        )

    def objectives_from_matrix(self, m: np.ndarray) -> np.ndarray:
        """Five intensity objectives of a flow matrix, without bounds checks.

        Each objective is a cross-flow aggregate divided by a consumption
        total; totals below the guard yield the penalty value instead.
        """
        s = self.consumption_summary(m)
        numerators = np.array(
            [
                s.water_to_energy,
                s.water_to_food,
                s.food_to_water,
                s.energy_to_food,
                s.food_to_energy,
            ]
        )
        denominators = np.array(
            [
                s.energy_total,
                s.food_total,
                s.water_total,
                s.food_total,
                s.energy_total,
            ]
        )
        guarded = denominators >= DENOMINATOR_GUARD
        f = np.full(N_OBJECTIVES, PENALTY)
        f[guarded] = numerators[guarded] / denominators[guarded]
        return f

    def evaluate(self, v: np.ndarray) -> np.ndarray:
        """Objectives of an in-bounds decision vector."""
        m = self.decode(v)
        flat = m.reshape(-1)
        if np.any(flat < self._lower - 1e-12) or np.any(flat > self._upper + 1e-12):
            raise ValueError("decision vector violates the box bounds")
        return self.objectives_from_matrix(m)

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        """Objectives for a (count, dim) batch of in-bounds decision vectors.

        Bounds are the caller's responsibility on this hot path; solvers clip
        every vector they construct.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"batch has shape {X.shape}, expected (count, {self.dim})")
        M = X.reshape(X.shape[0], *self.topology.shape)
        energy_total = M[:, self._row_e, :].sum(axis=(1, 2))
        food_total = M[:, self._row_f, :].sum(axis=(1, 2))
        water_total = M[:, self._row_w, :].sum(axis=(1, 2))
        numerators = np.stack(
            [
                M[:, self._row_w, self._col_e].sum(axis=(1, 2)),
                M[:, self._row_w, self._col_f].sum(axis=(1, 2)),
                M[:, self._row_f, self._col_w].sum(axis=(1, 2)),
                M[:, self._row_e, self._col_f].sum(axis=(1, 2)),
                M[:, self._row_f, self._col_e].sum(axis=(1, 2)),
            ],
            axis=1,
        )
        denominators = np.stack(
            [energy_total, food_total, water_total, food_total, energy_total], axis=1
        )
        F = np.full_like(numerators, PENALTY)
        guarded = denominators >= DENOMINATOR_GUARD
        F[guarded] = numerators[guarded] / denominators[guarded]
        return F

    def random_solution(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform sample inside the box bounds."""
        return rng.uniform(self._lower, self._upper)

    def random_batch(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self._lower, self._upper, size=(count, self.dim))
