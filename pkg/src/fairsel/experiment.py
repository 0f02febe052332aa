"""Seed-controlled experiments: split, run the GA(s), score on the held-out side."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import classifier
from .classifier import FAST_FOREST, ForestParams
from .compare import RESULT_SCHEMA, lexicographic_filter
from .data import Dataset, DatasetConfig, load_config, load_problem, train_test_split
from .evolve import _FOREST, FAST_GA, GAParams, run_lgaffs, stream
from .lexico import Individual, LexicoParams
from .metrics import FitnessVector, fitness_from_predictions
from .pareto import run_pgaffs

ALGORITHMS = ("lgaffs", "pgaffs", "both")
WORKERS_ENV = "FAIRSEL_WORKERS"


@dataclass(frozen=True)
class ExperimentSpec:
    config: str
    algorithm: str = "both"
    ga: GAParams = field(default_factory=GAParams)
    lexico: LexicoParams = field(default_factory=LexicoParams)
    forest: ForestParams = field(default_factory=ForestParams)
    k_neighbors: int = 5
    test_fraction: float = 0.3
    seeds: tuple[int, ...] = (0,)
    out_dir: str = "results"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")

    @classmethod
    def fast(cls, config: str, **kw) -> "ExperimentSpec":
        return cls(config=config, ga=FAST_GA, forest=FAST_FOREST, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        return cls(
            config=d["config"],
            algorithm=d["algorithm"],
            ga=GAParams(**d["ga"]),
            lexico=LexicoParams(**d["lexico"]),
            forest=ForestParams(**d["forest"]),
            k_neighbors=int(d["k_neighbors"]),
            test_fraction=float(d["test_fraction"]),
            seeds=tuple(int(s) for s in d["seeds"]),
            out_dir=d.get("out_dir", "results"),
        )


def workers_from_env() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _mask_str(mask: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in mask)


def holdout_fitness(mask: np.ndarray, train: Dataset, test: Dataset, fp: ForestParams,
                    k: int) -> FitnessVector:
    """Retrain on the whole training side under ``mask`` and score the test side."""
    cols = train.column_mask(mask)
    model = classifier.fit(train.X, train.y, fp, cols)
    pred = classifier.predict(model, test.X)
    return fitness_from_predictions(pred, test.y, test.s, test.X[:, cols], k)


def _describe(ind: Individual, train: Dataset, test: Dataset, fp: ForestParams, k: int) -> dict:
    f = ind.fitness
    return {
        "mask": _mask_str(ind.mask),
        "features": [n for n, b in zip(train.feature_names, ind.mask) if b],
        "train_fitness": f.as_dict(),
        "train_objectives": {"gm": f.gm, "mean_fairness": f.mean_fairness()},
        "test_fitness": holdout_fitness(ind.mask, train, test, fp, k).as_dict(),
    }


def run_seed(spec: ExperimentSpec, config: DatasetConfig, data: Dataset, seed: int,
             progress: Callable[[str], None] | None = None, workers: int = 1) -> dict:
    """One seed of an experiment as a JSON-ready ProblemResult document."""
    train, test = train_test_split(data, spec.test_fraction, seed)
    g = spec.ga.with_seed(seed)
    final_forest = spec.forest.with_seed(int(stream(seed, _FOREST + 100).integers(2**31)))
    doc: dict = {
        "schema": RESULT_SCHEMA,
        "dataset": config.name,
        "sensitive": config.sensitive_column,
        "seed": seed,
        "spec": {k: v for k, v in spec.to_dict().items() if k != "out_dir"} | {"seeds": [seed]},
        "dataset_config": config.to_mapping(),
        "split": {"n_train": len(train), "n_test": len(test)},
        "feature_names": list(data.feature_names),
    }
    k = spec.k_neighbors
    if spec.algorithm in ("lgaffs", "both"):
        best = run_lgaffs(train, g, spec.lexico, spec.forest, k, workers, progress=progress)
        doc["lgaffs"] = {"solution": _describe(best, train, test, final_forest, k)}
    if spec.algorithm in ("pgaffs", "both"):
        front = run_pgaffs(train, g, spec.forest, k, workers, progress=progress)
        chosen = lexicographic_filter(front, spec.lexico)
        members = [_describe(ind, train, test, final_forest, k) for ind in front]
        doc["pgaffs"] = {
            "filtered": members[next(i for i, ind in enumerate(front) if ind is chosen)],
            "front": members,
        }
    return doc


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run_experiment(spec: ExperimentSpec, workers: int | None = None,
                   echo: Callable[[str], None] | None = None) -> list[Path]:
    """Run every seed and write artifacts; returns the written paths.

    The dataset is loaded before anything is written, so a bad config leaves
    no artifacts behind.
    """
    from .plotting import plot_front

    workers = workers_from_env() if workers is None else workers
    config = load_config(spec.config)
    data = load_problem(config)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for seed in spec.seeds:
        lines: list[str] = []

        def progress(line: str):
            lines.append(line)
            if echo:
                echo(line)

        doc = run_seed(spec, config, data, seed, progress, workers)
        stem = f"{config.name}_seed{seed}"
        result = out / f"{stem}.json"
        tmp = result.with_suffix(".json.partial")
        tmp.write_text(dump_json(doc))
        tmp.replace(result)
        log_path = out / f"{stem}.progress.log"
        log_path.write_text("\n".join(lines) + "\n")
        fig = plot_front(doc, out / f"{stem}_front.png")
        written += [result, log_path, fig]
    return written


def replay_spec(artifact: str | Path, out_dir: str | None = None) -> ExperimentSpec:
    """Rebuild the spec embedded in a result artifact."""
    doc = json.loads(Path(artifact).read_text())
    spec = ExperimentSpec.from_dict(doc["spec"])
    return spec if out_dir is None else replace(spec, out_dir=out_dir)
