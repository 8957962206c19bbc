"""Global-best particle swarm optimizer over a bounded continuous box.

Fitness is maximized.  Each step applies, per particle and dimension::

    v <- w(t) * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
    x <- x + v

with fresh uniform ``r1, r2``, the velocity clamped to ``[-v_max, v_max]`` and
the position clamped to ``pos_bounds``.  The inertia weight decays linearly
from ``w_start`` to ``w_end`` over the iteration budget.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError

Fitness = Callable[[np.ndarray], float]

WORKERS_ENV = "PALMVEIN_WORKERS"


@dataclass(frozen=True)
class SwarmConfig:
    particles: int = 20
    iterations: int = 100
    c1: float = 2.0
    c2: float = 2.0
    w_start: float = 0.9
    w_end: float = 0.4
    pos_bounds: tuple[float, float] = (-5.0, 5.0)
    v_max: float = 5.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.pos_bounds
        object.__setattr__(self, "pos_bounds", (float(lo), float(hi)))
        if self.particles < 1 or self.iterations < 1:
            raise ParameterError("particles and iterations must be positive")
        if not lo < hi:
            raise ParameterError(f"pos_bounds must satisfy lo < hi, got {self.pos_bounds}")
        if self.w_end > self.w_start:
            raise ParameterError("w_end must not exceed w_start")
        if not self.v_max > 0:
            raise ParameterError("v_max must be positive")
        if self.c1 < 0 or self.c2 < 0:
            raise ParameterError("c1 and c2 must be non-negative")

    def inertia(self, t: int) -> float:
        if self.iterations == 1:
            return self.w_start
        return self.w_start - (self.w_start - self.w_end) * t / (self.iterations - 1)


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_fitness: float


@dataclass
class SwarmState:
    """Whole-swarm state; row ``i`` of every matrix belongs to particle ``i``."""

    positions: np.ndarray
    velocities: np.ndarray
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray
    gbest_position: np.ndarray
    gbest_fitness: float
    rng: np.random.Generator
    iteration: int = 0
    history: list[float] = field(default_factory=list)

    @property
    def particles(self) -> list[Particle]:
        return [
            Particle(self.positions[i], self.velocities[i], self.pbest_positions[i], float(self.pbest_fitness[i]))
            for i in range(len(self.positions))
        ]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def evaluate(fitness: Fitness, positions: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate every row; runs on a thread pool when ``PALMVEIN_WORKERS`` > 1.

    Results always come back in row order, so the outcome does not depend on
    the worker count.
    """
    workers = _workers()
    if workers > 1 and len(positions) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(fitness, positions))
    else:
        values = [fitness(p) for p in positions]
    return np.asarray(values, dtype=np.float64)


def pso_init(cfg: SwarmConfig, dim: int, fitness: Fitness) -> SwarmState:
    if dim < 1:
        raise ParameterError(f"dimension must be positive, got {dim}")
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.pos_bounds
    pos = rng.uniform(lo, hi, size=(cfg.particles, dim))
    vel = rng.uniform(-cfg.v_max / 2, cfg.v_max / 2, size=(cfg.particles, dim))
    fit = evaluate(fitness, pos)
    best = int(np.argmax(fit))
    return SwarmState(
        positions=pos,
        velocities=vel,
        pbest_positions=pos.copy(),
        pbest_fitness=fit,
        gbest_position=pos[best].copy(),
        gbest_fitness=float(fit[best]),
        rng=rng,
    )


def pso_step(state: SwarmState, cfg: SwarmConfig, fitness: Fitness) -> SwarmState:
    """Advance the swarm by one synchronous iteration (updates ``state`` in place)."""
    shape = state.positions.shape
    r1 = state.rng.random(shape)
    r2 = state.rng.random(shape)
    x = state.positions
    v = (
        cfg.inertia(state.iteration) * state.velocities
        + cfg.c1 * r1 * (state.pbest_positions - x)
        + cfg.c2 * r2 * (state.gbest_position - x)
    )
    v = np.clip(v, -cfg.v_max, cfg.v_max)
    x = np.clip(x + v, *cfg.pos_bounds)
    fit = evaluate(fitness, x)

    improved = fit > state.pbest_fitness
    state.pbest_positions[improved] = x[improved]
    state.pbest_fitness[improved] = fit[improved]
    best = int(np.argmax(state.pbest_fitness))
    if state.pbest_fitness[best] > state.gbest_fitness:
        state.gbest_fitness = float(state.pbest_fitness[best])
        state.gbest_position = state.pbest_positions[best].copy()

    state.positions = x
    state.velocities = v
    state.iteration += 1
    state.history.append(state.gbest_fitness)
    return state


@dataclass
class PsoResult:
    gbest_position: np.ndarray
    gbest_fitness: float
    history: list[float]

    def __iter__(self):
        return iter((self.gbest_position, self.gbest_fitness, self.history))


def pso_run(cfg: SwarmConfig, dim: int, fitness: Fitness) -> PsoResult:
    """Initialise and step the swarm for ``cfg.iterations`` iterations.

    ``history[t]`` is the global best fitness after step ``t + 1``.
    """
    state = pso_init(cfg, dim, fitness)
    for _ in range(cfg.iterations):
        pso_step(state, cfg, fitness)
    return PsoResult(state.gbest_position.copy(), state.gbest_fitness, list(state.history))
