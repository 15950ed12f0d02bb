"""Baseline MOEA/DD over (operator discrepancy, complexity)."""

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
from .pareto import ParetoArchive, nondominated_sort, pbi, pbi_parts
from .single import hv_reference


@dataclass(frozen=True)
class MoeaddConfig:
    population: int = 8
    iterations: int = 8
    theta: float = 1.0
    delta: float = 0.9
    neighbors: int = 4
    parent_fraction: float = 0.4
    operators: OperatorConfig = field(default_factory=OperatorConfig)
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if self.population < 2:
            raise ConfigurationError("population must hold at least 2 individuals")
        if self.iterations < 0:
            raise ConfigurationError("iterations must be nonnegative")
        if not 1 <= self.neighbors <= self.population:
            raise ConfigurationError("neighbors must be in [1, population]")
        if not 0 <= self.delta <= 1 or not 0 < self.parent_fraction <= 1:
            raise ConfigurationError("delta and parent_fraction must be probabilities")

    @property
    def n_parents(self) -> int:
        return max(2, math.ceil(self.parent_fraction * self.population))


@dataclass(frozen=True)
class WeightSector:
    weight: np.ndarray
    neighbors: tuple


def weight_sectors(n: int, k: int) -> list[WeightSector]:
    """Uniform simplex lattice ``(i/(n-1), 1 - i/(n-1))`` with k nearest neighbours."""
    W = np.array([[i / (n - 1), 1 - i / (n - 1)] for i in range(n)])
    dist = np.linalg.norm(W[:, None, :] - W[None, :, :], axis=2)
    return [WeightSector(W[i], tuple(int(j) for j in np.argsort(dist[i], kind="stable")[:k]))
            for i in range(n)]


class _Normalizer:
    """Maps objective vectors to [0, 1]-ish using the ideal and current nadir."""

    def __init__(self, ideal, members):
        finite = np.array([m.objectives.vector() for m in members
                           if math.isfinite(m.q_op)] or [ideal])
        self.ideal = np.asarray(ideal, dtype=float)
        self.scale = np.maximum(finite.max(axis=0) - self.ideal, 1e-12)

    def __call__(self, ind):
        if not math.isfinite(ind.q_op):
            return None
        return (np.asarray(ind.objectives.vector()) - self.ideal) / self.scale


def _associate(norm_vec, sectors) -> int:
    if norm_vec is None:
        return 0
    d2 = [pbi_parts(norm_vec, s.weight, (0.0, 0.0))[1] for s in sectors]
    return int(np.argmin(d2))


class MOEADD:
    def __init__(self, table: DerivativeTable, pool: TokenPool, config: MoeaddConfig, seed: int):
        self.pool = pool
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.evaluate = Evaluator(table, config.lam)
        self.sectors = weight_sectors(config.population, config.neighbors)
        self.archive = ParetoArchive()
        self.ideal = np.array([math.inf, math.inf])
        self.population: list = []

    def _offer(self, ind):
        self.archive.add(ind)
        if math.isfinite(ind.q_op):
            self.ideal = np.minimum(self.ideal, ind.objectives.vector())

    def _sectors_of(self, members):
        norm = _Normalizer(self.ideal, members)
        vecs = [norm(m) for m in members]
        return [_associate(v, self.sectors) for v in vecs], vecs

    def insert(self, child) -> None:
        """Dominance-then-decomposition replacement keeping the size fixed."""
        if any(m.canonical == child.canonical for m in self.population):
            return
        union = self.population + [child]
        fronts = nondominated_sort([m.objectives.vector() for m in union])
        candidates = fronts[-1] if len(fronts) > 1 else list(range(len(union)))
        infinite = [i for i in candidates if not math.isfinite(union[i].q_op)]
        if infinite:
            victim = infinite[-1]
        else:
            sector_of, vecs = self._sectors_of(union)
            crowd = np.bincount(sector_of, minlength=len(self.sectors))
            target = max({sector_of[i] for i in candidates}, key=lambda s: (crowd[s], -s))
            in_sector = [i for i in candidates if sector_of[i] == target]
            victim = max(in_sector, key=lambda i: pbi(
                vecs[i], self.sectors[target].weight, (0.0, 0.0), self.config.theta))
        del union[victim]
        self.population = union

    def _parents(self, sector_index, sector_of):
        cfg = self.config
        pool = list(range(len(self.population)))
        if self.rng.random() < cfg.delta:
            near = set(self.sectors[sector_index].neighbors)
            local = [i for i, s in enumerate(sector_of) if s in near]
            if len(local) >= 2:
                pool = local
        replace = len(pool) < cfg.n_parents
        picks = self.rng.choice(pool, size=cfg.n_parents, replace=replace)
        return [self.population[int(i)] for i in picks]

    def run(self) -> RunResult:
        cfg = self.config
        ops = cfg.operators
        for _ in range(cfg.population):
            ind = self.evaluate(random_equation(self.pool, self.rng))
            self.population.append(ind)
            self._offer(ind)
        ref = hv_reference(self.population, self.pool)

        def row(it):
            best = self.archive.best()
            return TraceRow(it, self.evaluate.count, best.q_op if best else math.inf,
                            len(self.archive), self.archive.hypervolume(ref))

        trace = [row(0)]
        for it in range(1, cfg.iterations + 1):
            for s in range(len(self.sectors)):
                sector_of, _ = self._sectors_of(self.population)
                parents = self._parents(s, sector_of)
                if len(parents) % 2:
                    parents.append(parents[0])
                for a, b in zip(parents[::2], parents[1::2]):
                    for kid in crossover(a.equation, b.equation, ops, self.rng):
                        child = self.evaluate(mutate(kid, self.pool, ops, self.rng))
                        self._offer(child)
                        self.insert(child)
            trace.append(row(it))
        best = self.archive.best() or min(self.population, key=lambda i: i.objectives.key())
        return RunResult(best, self.archive, trace, self.evaluate.count, self.population)


def run_moeadd(table: DerivativeTable, pool: TokenPool,
               config: MoeaddConfig = MoeaddConfig(), seed: int = 0) -> RunResult:
    return MOEADD(table, pool, config, seed).run()
