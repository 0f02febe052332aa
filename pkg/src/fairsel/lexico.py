"""Lexicographic comparison of individuals: accuracy first, then fairness.

Fairness is compared through a vote over all 24 priority orders of the four
fairness measures.  Comparisons use an epsilon threshold, so they are not
transitive; every consumer here resolves results by an explicit scan order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metrics import FitnessVector

FIRST, SECOND, TIE = 1, -1, 0

FAIRNESS_ORDERS = tuple(itertools.permutations(range(4)))


@dataclass(frozen=True)
class LexicoParams:
    accuracy_eps: float = 0.01
    fairness_eps: float = 0.01
    fair_rank_eps: int = 1
    # Stored for completeness; no comparison step consults it.
    fair_test_eps: int = 1

    def __post_init__(self):
        if self.accuracy_eps < 0 or self.fairness_eps < 0:
            raise ValueError("epsilon thresholds must be non-negative")
        if self.fair_rank_eps < 0 or self.fair_test_eps < 0:
            raise ValueError("rank/test thresholds must be non-negative")


@dataclass(frozen=True, eq=False)
class Individual:
    mask: np.ndarray
    fitness: FitnessVector | None = None
    seed: int | None = None
    generation: int | None = None

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        m.flags.writeable = False
        object.__setattr__(self, "mask", m)

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    def key(self) -> bytes:
        return np.packbits(self.mask).tobytes() + len(self.mask).to_bytes(4, "little")

    def n_selected(self) -> int:
        return int(self.mask.sum())


def eps_compare(v1: float, v2: float, eps: float) -> int:
    if v1 - v2 > eps:
        return FIRST
    if v2 - v1 > eps:
        return SECOND
    return TIE


def permutation_vote(a: FitnessVector, b: FitnessVector, p: LexicoParams) -> tuple[int, int, int]:
    """(wins of a, wins of b, ties) over the 24 fairness priority orders."""
    fa, fb = a.fairness(), b.fairness()
    per_measure = [eps_compare(x, y, p.fairness_eps) for x, y in zip(fa, fb)]
    wins_a = wins_b = ties = 0
    for order in FAIRNESS_ORDERS:
        outcome = next((per_measure[m] for m in order if per_measure[m] != TIE), TIE)
        if outcome == FIRST:
            wins_a += 1
        elif outcome == SECOND:
            wins_b += 1
        else:
            ties += 1
    return wins_a, wins_b, ties


def compare_fitness(a: FitnessVector, b: FitnessVector, p: LexicoParams) -> int:
    r = eps_compare(a.gm, b.gm, p.accuracy_eps)
    if r != TIE:
        return r
    wins_a, wins_b, _ = permutation_vote(a, b, p)
    if wins_a != wins_b and abs(wins_a - wins_b) >= p.fair_rank_eps:
        return FIRST if wins_a > wins_b else SECOND
    if a.gm > b.gm:
        return FIRST
    if b.gm > a.gm:
        return SECOND
    return TIE


def lex_compare(a: Individual, b: Individual, p: LexicoParams) -> int:
    """FIRST if ``a`` wins, SECOND if ``b`` wins, TIE otherwise."""
    if a.fitness is None or b.fitness is None:
        raise ValueError("both individuals must be evaluated")
    return compare_fitness(a.fitness, b.fitness, p)


def tournament_select(pop: Sequence[Individual], p: LexicoParams, size: int,
                      rng: np.random.Generator) -> Individual:
    """Lexicographic tournament among ``size`` distinct random individuals.

    On a tie the earlier-sampled contestant is kept.
    """
    if not pop:
        raise ValueError("empty population")
    picks = rng.choice(len(pop), size=min(size, len(pop)), replace=False)
    winner = pop[picks[0]]
    for i in picks[1:]:
        if lex_compare(pop[i], winner, p) == FIRST:
            winner = pop[i]
    return winner


def lexicographic_top_index(pop: Sequence[Individual], p: LexicoParams) -> int:
    if not pop:
        raise ValueError("empty population")
    best = 0
    for i in range(1, len(pop)):
        if lex_compare(pop[i], pop[best], p) == FIRST:
            best = i
    return best


def lexicographic_top(pop: Sequence[Individual], p: LexicoParams) -> Individual:
    """Champion of a left-to-right scan; a challenger must strictly win to take over."""
    return pop[lexicographic_top_index(pop, p)]
