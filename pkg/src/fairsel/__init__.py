"""Fair feature selection with a lexicographic GA and a Pareto (NSGA-II) GA."""

from .classifier import ForestParams
from .data import Dataset, DatasetConfig, load_config, load_csv, make_folds, train_test_split
from .evolve import GAParams, run_lgaffs
from .lexico import Individual, LexicoParams
from .metrics import FitnessVector, evaluate_mask
from .pareto import run_pgaffs

__all__ = [
    "Dataset", "DatasetConfig", "FitnessVector", "ForestParams", "GAParams", "Individual",
    "LexicoParams", "evaluate_mask", "load_config", "load_csv", "make_folds", "run_lgaffs",
    "run_pgaffs", "train_test_split",
]
