"""NSGA-II style Pareto GA over (GM, mean fairness)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .classifier import ForestParams
from .data import Dataset
from .evolve import (_INIT, _VARIATION, Evaluator, GAParams, breed, format_progress,
                     init_ramped, stream)
from .lexico import Individual

log = logging.getLogger(__name__)


def objectives(ind: Individual) -> tuple[float, float]:
    """(accuracy objective, fairness objective) of an evaluated individual."""
    f = ind.fitness
    return (f.gm, f.mean_fairness())


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` is no worse everywhere and strictly better somewhere (maximisation)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return bool(np.all(a >= b) and np.any(a > b))


@dataclass(frozen=True)
class RankedPopulation:
    fronts: tuple[tuple[int, ...], ...]
    crowding: np.ndarray
    rank: np.ndarray


def fast_nondominated_sort(points) -> list[list[int]]:
    """Fronts of point indices, best front first; indices ascending within a front."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or len(P) == 0:
        raise ValueError("need a non-empty 2-D array of points")
    ge = np.all(P[:, None, :] >= P[None, :, :], axis=2)
    gt = np.any(P[:, None, :] > P[None, :, :], axis=2)
    dom = ge & gt  # dom[i, j]: i dominates j
    n_dominators = dom.sum(axis=0)
    fronts: list[list[int]] = []
    current = [int(i) for i in np.flatnonzero(n_dominators == 0)]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in np.flatnonzero(dom[i]):
                n_dominators[j] -= 1
                if n_dominators[j] == 0:
                    nxt.append(int(j))
        current = sorted(nxt)
    return fronts


def crowding_distance(front) -> np.ndarray:
    """Crowding distance of each point within one front (boundaries get ``inf``)."""
    F = np.asarray(front, dtype=float)
    n = len(F)
    if n == 0:
        raise ValueError("empty front")
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for m in range(F.shape[1]):
        order = np.argsort(F[:, m], kind="stable")
        vals = F[order, m]
        span = vals[-1] - vals[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span == 0:
            continue
        dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def rank_population(points) -> RankedPopulation:
    P = np.asarray(points, dtype=float)
    fronts = fast_nondominated_sort(P)
    crowd = np.zeros(len(P))
    rank = np.zeros(len(P), dtype=np.int64)
    for r, fr in enumerate(fronts):
        crowd[fr] = crowding_distance(P[fr])
        rank[fr] = r
    return RankedPopulation(tuple(tuple(f) for f in fronts), crowd, rank)


def select_survivors(points, size: int) -> list[int]:
    """Indices kept by front-filling; the split front is cut by descending crowding."""
    ranked = rank_population(points)
    keep: list[int] = []
    for fr in ranked.fronts:
        if len(keep) + len(fr) <= size:
            keep.extend(fr)
            continue
        fr = np.asarray(fr)
        order = np.lexsort((fr, -ranked.crowding[fr]))
        keep.extend(int(i) for i in fr[order][: size - len(keep)])
        break
    return keep


def crowded_tournament(ranked: RankedPopulation, n: int, rng: np.random.Generator) -> int:
    """Binary tournament on (rank, crowding); the first contestant wins exact ties."""
    i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
    if ranked.rank[j] < ranked.rank[i]:
        return j
    if ranked.rank[j] == ranked.rank[i] and ranked.crowding[j] > ranked.crowding[i]:
        return j
    return i


def dedupe(pop: Sequence[Individual]) -> list[Individual]:
    seen: set[bytes] = set()
    out = []
    for ind in pop:
        if ind.key() not in seen:
            seen.add(ind.key())
            out.append(ind)
    return out


def run_pgaffs(train: Dataset, g: GAParams, fp: ForestParams, k: int = 5, workers: int = 1,
               on_generation: Callable[[int, list[Individual], RankedPopulation], None] | None = None,
               progress: Callable[[str], None] | None = None) -> list[Individual]:
    """Pareto GA; returns the de-duplicated first front of the final population."""
    evaluator = Evaluator(train, g, fp, k, workers)
    rng_var = stream(g.seed, _VARIATION)
    population = evaluator.evaluate(init_ramped(train.n_features, g, stream(g.seed, _INIT)))
    ranked = rank_population([objectives(i) for i in population])

    def report(gen: int):
        best = max(population, key=lambda ind: objectives(ind))
        line = format_progress("pgaffs", gen, best) + f" front_size={len(ranked.fronts[0])}"
        log.debug(line)
        if progress:
            progress(line)
        if on_generation:
            on_generation(gen, population, ranked)

    report(0)
    for gen in range(1, g.max_iterations):
        current, current_rank = population, ranked

        def parents():
            n = len(current)
            return (current[crowded_tournament(current_rank, n, rng_var)],
                    current[crowded_tournament(current_rank, n, rng_var)])

        offspring = evaluator.evaluate(breed(parents, g.population_size, g, rng_var, gen))
        merged = current + offspring
        keep = select_survivors([objectives(i) for i in merged], g.population_size)
        population = [merged[i] for i in keep]
        ranked = rank_population([objectives(i) for i in population])
        report(gen)
    return dedupe([population[i] for i in ranked.fronts[0]])
