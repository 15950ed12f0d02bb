"""Pareto dominance, non-dominated sorting, PBI scalarization and the archive."""

from __future__ import annotations

import math

import numpy as np


def dominates(a, b) -> bool:
    """Minimization dominance; vectors with an infinite entry lose to finite ones."""
    fa = all(math.isfinite(v) for v in a)
    fb = all(math.isfinite(v) for v in b)
    if fa != fb:
        return fa
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def nondominated_sort(vectors) -> list[list[int]]:
    """Indices grouped into fronts of increasing rank; stable inside a front."""
    n = len(vectors)
    dominated_by = [[] for _ in range(n)]
    counts = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(vectors[i], vectors[j]):
                dominated_by[i].append(j)
                counts[j] += 1
            elif dominates(vectors[j], vectors[i]):
                dominated_by[j].append(i)
                counts[i] += 1
    fronts = []
    current = [i for i in range(n) if counts[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        current = sorted(nxt)
    return fronts


def pbi_parts(F, weight, ideal) -> tuple[float, float]:
    diff = np.asarray(F, dtype=float) - np.asarray(ideal, dtype=float)
    w = np.asarray(weight, dtype=float)
    norm = np.linalg.norm(w)
    d1 = float(diff @ w / norm)
    d2 = float(np.linalg.norm(diff - d1 * w / norm))
    return d1, d2


def pbi(F, weight, ideal, theta: float = 1.0) -> float:
    """Penalty-based boundary intersection ``d1 + theta * d2``."""
    if not all(math.isfinite(v) for v in F):
        return math.inf
    d1, d2 = pbi_parts(F, weight, ideal)
    return d1 + theta * d2


def hypervolume_2d(points, reference) -> float:
    """Area dominated by ``points`` and bounded by ``reference`` (minimization)."""
    rx, ry = reference
    pts = sorted((x, y) for x, y in points if x < rx and y < ry)
    area, best_y = 0.0, ry
    for x, y in pts:
        if y < best_y:
            area += (rx - x) * (best_y - y)
            best_y = y
    return area


class ParetoArchive:
    """Every mutually non-dominated individual offered so far."""

    def __init__(self):
        self.individuals: list = []
        self.ideal = np.array([math.inf, math.inf])

    def add(self, ind) -> bool:
        v = ind.objectives.vector()
        if not all(math.isfinite(x) for x in v):
            return False
        self.ideal = np.minimum(self.ideal, v)
        for other in self.individuals:
            ov = other.objectives.vector()
            if dominates(ov, v) or (ov == v and other.canonical == ind.canonical):
                return False
        self.individuals = [o for o in self.individuals
                            if not dominates(v, o.objectives.vector())]
        self.individuals.append(ind)
        return True

    def vectors(self) -> list[tuple[float, float]]:
        return [i.objectives.vector() for i in self.individuals]

    def hypervolume(self, reference) -> float:
        return hypervolume_2d(self.vectors(), reference)

    def best(self):
        return min(self.individuals, key=lambda i: i.objectives.key()) if self.individuals else None

    def __len__(self):
        return len(self.individuals)

    def __iter__(self):
        return iter(sorted(self.individuals, key=lambda i: (i.complexity, i.q_op)))
