"""Shared GA operators and the lexicographic GA for fair feature selection.

An individual is one bit per original feature.  Both GAs share ramped
initialisation, uniform crossover, bit-flip mutation and the cached
cross-validated fitness evaluator defined here.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .classifier import ForestParams
from .data import Dataset, make_folds
from .lexico import Individual, LexicoParams, lexicographic_top, tournament_select
from .metrics import FitnessVector, evaluate_mask

log = logging.getLogger(__name__)

# Stream tags for np.random.SeedSequence([master_seed, tag]).
_INIT, _VARIATION, _FOLDS, _FOREST = 1, 2, 3, 4


@dataclass(frozen=True)
class GAParams:
    population_size: int = 101
    max_iterations: int = 50
    crossover_prob: float = 0.9
    mutation_prob: float = 0.05
    min_p: float = 0.1
    max_p: float = 0.5
    tournament_size: int = 2
    n_folds: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("crossover_prob", "mutation_prob", "min_p", "max_p"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if self.min_p > self.max_p:
            raise ValueError("min_p must not exceed max_p")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")

    def with_seed(self, seed: int) -> "GAParams":
        return replace(self, seed=seed)


FAST_GA = GAParams(population_size=20, max_iterations=10)


def stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))


def _repair(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if not mask.any():
        mask[rng.integers(len(mask))] = True
    return mask


def ramp_probabilities(g: GAParams) -> np.ndarray:
    i = np.arange(g.population_size)
    return g.min_p + (g.max_p - g.min_p) * i / (g.population_size - 1)


def init_ramped(n_features: int, g: GAParams, rng: np.random.Generator) -> list[Individual]:
    """Individual i switches each bit on with a probability ramped from MIN_P to MAX_P."""
    if n_features < 1:
        raise ValueError("need at least one feature")
    pop = []
    for p in ramp_probabilities(g):
        mask = rng.random(n_features) < p
        pop.append(Individual(_repair(mask, rng), seed=g.seed, generation=0))
    return pop


def uniform_crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator,
                      swap: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Swap each bit position between the parents with probability 0.5.

    ``swap`` (boolean, per bit) fixes the choices instead of drawing them.
    """
    a, b = np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError("parents differ in length")
    if swap is None:
        swap = rng.random(a.shape) < 0.5
    return np.where(swap, b, a), np.where(swap, a, b)


def mutate(mask: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each bit with probability ``rate``; an all-zero result gets one random bit set."""
    mask = np.asarray(mask, dtype=bool)
    flips = rng.random(mask.shape) < rate
    return _repair(mask ^ flips, rng)


class Evaluator:
    """Cross-validated fitness with a per-run fold plan and a mask-keyed cache.

    The forest seed is fixed per run, so fitness is a pure function of the
    mask and caching does not change results.
    """

    def __init__(self, train: Dataset, g: GAParams, fp: ForestParams, k: int = 5,
                 workers: int = 1):
        self.train = train
        self.folds = make_folds(train, g.n_folds, int(stream(g.seed, _FOLDS).integers(2**31)))
        self.forest = fp.with_seed(int(stream(g.seed, _FOREST).integers(2**31)))
        self.k = k
        self.workers = workers
        self.cache: dict[bytes, FitnessVector] = {}
        self.n_evaluations = 0

    def fitness(self, mask: np.ndarray) -> FitnessVector:
        return evaluate_mask(mask, self.train, self.folds, self.forest, self.k)

    def evaluate(self, pop: Sequence[Individual]) -> list[Individual]:
        todo: dict[bytes, np.ndarray] = {}
        for ind in pop:
            if not ind.mask.any():
                raise ValueError("an all-zero mask reached evaluation")
            key = ind.key()
            if key not in self.cache and key not in todo:
                todo[key] = ind.mask
        if self.workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(self.workers) as ex:
                results = list(ex.map(self.fitness, todo.values()))
        else:
            results = [self.fitness(m) for m in todo.values()]
        self.cache.update(zip(todo.keys(), results))
        self.n_evaluations += len(todo)
        return [ind if ind.evaluated else replace(ind, fitness=self.cache[ind.key()]) for ind in pop]


def breed(parents: Callable[[], tuple[Individual, Individual]], n_children: int,
          g: GAParams, rng: np.random.Generator, generation: int) -> list[Individual]:
    """Pairwise crossover + mutation until ``n_children`` exist (overflow child dropped)."""
    children: list[Individual] = []
    while len(children) < n_children:
        p1, p2 = parents()
        if rng.random() < g.crossover_prob:
            c1, c2 = uniform_crossover(p1.mask, p2.mask, rng)
        else:
            c1, c2 = p1.mask.copy(), p2.mask.copy()
        for c in (c1, c2):
            children.append(Individual(mutate(c, g.mutation_prob, rng), seed=g.seed,
                                       generation=generation))
    return children[:n_children]


def format_progress(tag: str, generation: int, elite: Individual) -> str:
    f = elite.fitness
    vals = " ".join(f"{name}={v:.6f}" for name, v in f.as_dict().items() if not isinstance(v, bool))
    return f"{tag} gen={generation} {vals} n_features={elite.n_selected()}"


def run_lgaffs(train: Dataset, g: GAParams, lp: LexicoParams, fp: ForestParams, k: int = 5,
               workers: int = 1,
               on_generation: Callable[[int, list[Individual], Individual], None] | None = None,
               progress: Callable[[str], None] | None = None) -> Individual:
    """Lexicographic GA; returns the elite of the last evaluated generation."""
    evaluator = Evaluator(train, g, fp, k, workers)
    rng_var = stream(g.seed, _VARIATION)
    population = init_ramped(train.n_features, g, stream(g.seed, _INIT))
    best = None
    for gen in range(g.max_iterations):
        population = evaluator.evaluate(population)
        best = lexicographic_top(population, lp)
        line = format_progress("lgaffs", gen, best)
        log.debug(line)
        if progress:
            progress(line)
        if on_generation:
            on_generation(gen, population, best)
        if gen == g.max_iterations - 1:
            break
        current = population

        def parents():
            return (tournament_select(current, lp, g.tournament_size, rng_var),
                    tournament_select(current, lp, g.tournament_size, rng_var))

        population = [best] + breed(parents, g.population_size - 1, g, rng_var, gen + 1)
    return best
