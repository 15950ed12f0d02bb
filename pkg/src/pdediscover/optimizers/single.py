"""Elitist generational EA minimizing the operator discrepancy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..derivatives import DerivativeTable
from ..grid import ConfigurationError
from ..operators import OperatorConfig, crossover, mutate
from ..regression import DEFAULT_LAMBDA
from ..representation import TokenPool, random_equation
from .common import Evaluator, RunResult, TraceRow
from .pareto import ParetoArchive


@dataclass(frozen=True)
class SingleConfig:
    population: int = 8
    iterations: int = 64
    operators: OperatorConfig = field(default_factory=OperatorConfig)
    lam: float = DEFAULT_LAMBDA
    tournament: int = 2
    elitism: int = 1

    def __post_init__(self):
        if self.population < 2:
            raise ConfigurationError("population must hold at least 2 individuals")
        if self.iterations < 0:
            raise ConfigurationError("iterations must be nonnegative")
        if not 1 <= self.elitism < self.population:
            raise ConfigurationError("elitism must be in [1, population)")
        if self.tournament < 1:
            raise ConfigurationError("tournament size must be positive")


def hv_reference(individuals, pool: TokenPool) -> tuple[float, float]:
    finite = [i.q_op for i in individuals if math.isfinite(i.q_op)]
    q_ref = 1.1 * max(finite) if finite and max(finite) > 0 else 1.0
    return (q_ref, float(pool.max_terms * pool.max_factors + 1))


def _tournament(pop, size, rng):
    picks = rng.integers(len(pop), size=size)
    return min((pop[i] for i in picks), key=lambda ind: ind.objectives.key())


def run_single_objective(table: DerivativeTable, pool: TokenPool,
                         config: SingleConfig = SingleConfig(), seed: int = 0) -> RunResult:
    rng = np.random.default_rng(seed)
    evaluate = Evaluator(table, config.lam)
    archive = ParetoArchive()
    pop = [evaluate(random_equation(pool, rng)) for _ in range(config.population)]
    for ind in pop:
        archive.add(ind)
    best = min(pop, key=lambda i: i.objectives.key())
    ref = hv_reference(pop, pool)

    def row(it):
        return TraceRow(it, evaluate.count, best.q_op, len(archive), archive.hypervolume(ref))

    trace = [row(0)]
    for it in range(1, config.iterations + 1):
        elite = sorted(pop, key=lambda i: i.objectives.key())[: config.elitism]
        offspring = []
        while len(offspring) < config.population - config.elitism:
            a = _tournament(pop, config.tournament, rng)
            b = _tournament(pop, config.tournament, rng)
            kids = crossover(a.equation, b.equation, config.operators, rng)
            for kid in kids:
                if len(offspring) == config.population - config.elitism:
                    break
                child = evaluate(mutate(kid, pool, config.operators, rng))
                archive.add(child)
                offspring.append(child)
                if child.objectives.key() < best.objectives.key():
                    best = child
        pop = elite + offspring
        trace.append(row(it))
    return RunResult(best, archive, trace, evaluate.count, pop)
