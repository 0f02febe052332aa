"""Post-hoc comparison of the lexicographic GA against the Pareto GA.

Two views are produced for a collection of problems:

* per-measure comparison of the LGAFFS solution against the single Pareto
  solution picked by a lexicographic filter (win counts and a Wilcoxon
  signed-rank test per measure);
* domination counts of the LGAFFS solution against every Pareto solution.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .lexico import Individual, LexicoParams, lexicographic_top
from .metrics import MEASURES, FitnessVector
from .pareto import dominates

RESULT_SCHEMA = "fairsel.problem_result/1"
REPORT_SCHEMA = "fairsel.comparison_report/1"
EXACT_MAX_N = 20
WIN_DECIMALS = 4


class ResultFormatError(ValueError):
    pass


@dataclass(frozen=True)
class DominationStats:
    pgaffs_dominates: int
    lgaffs_dominates: int
    no_domination: int
    higher_accuracy_proportion: float

    @property
    def total(self) -> int:
        return self.pgaffs_dominates + self.lgaffs_dominates + self.no_domination


@dataclass(frozen=True)
class ProblemResult:
    dataset: str
    sensitive: str
    lgaffs: FitnessVector
    pgaffs: FitnessVector
    pareto: tuple[FitnessVector, ...] = ()
    seed: int | None = None


@dataclass
class ComparisonReport:
    problems: list[ProblemResult]
    wins: dict[str, tuple[int, int, int]]  # measure -> (pgaffs, lgaffs, ties)
    p_values: dict[str, float | None]
    domination: list[DominationStats | None] = field(default_factory=list)


def lexicographic_filter(front: Sequence[Individual], lp: LexicoParams) -> Individual:
    """Pick one member of a Pareto set with the same ranking used for elitism."""
    if not front:
        raise ValueError("empty front")
    return lexicographic_top(front, lp)


def domination_stats(lex: FitnessVector, front: Sequence[FitnessVector]) -> DominationStats:
    """Dominance of ``lex`` against each front member over all five measures."""
    if not front:
        raise ValueError("empty front")
    ref = lex.values()
    by_front = by_lex = neither = 0
    higher = 0
    for f in front:
        v = f.values()
        if dominates(v, ref):
            by_front += 1
        elif dominates(ref, v):
            by_lex += 1
        else:
            neither += 1
        higher += f.gm >= lex.gm
    return DominationStats(by_front, by_lex, neither, higher / len(front))


def _signed_ranks(diffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Average ranks of |d| for non-zero d, and the tie-group sizes."""
    absd = np.abs(diffs)
    ranks = rankdata(absd, method="average")
    _, counts = np.unique(absd, return_counts=True)
    return ranks, counts


def _exact_two_sided(ranks: np.ndarray, w_plus: float) -> float:
    """P(|W+ - mean| >= |w - mean|) under random signs, by convolution over doubled ranks."""
    twice = np.rint(2 * ranks).astype(np.int64)
    total = int(twice.sum())
    dist = np.zeros(total + 1, dtype=np.int64)
    dist[0] = 1
    for r in twice:
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[: len(dist) - r]
        dist = dist + shifted
    obs = int(round(2 * w_plus))
    dev = abs(2 * obs - total)
    values = np.arange(total + 1)
    extreme = np.abs(2 * values - total) >= dev
    count = int(dist[extreme].sum())
    return min(1.0, float(count) / 2 ** len(twice))


def wilcoxon_signed_rank(pairs: Iterable[tuple[float, float]], exact_max_n: int = EXACT_MAX_N) -> float:
    """Two-sided Wilcoxon signed-rank p-value for paired samples.

    Zero differences are dropped; tied |differences| get average ranks.  With
    at most ``exact_max_n`` non-zero differences the exact permutation
    distribution is used, otherwise a tie-corrected normal approximation
    (no continuity correction).  All-zero differences give p = 1.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one pair")
    a = np.array([p[0] for p in pairs], dtype=float)
    b = np.array([p[1] for p in pairs], dtype=float)
    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return 1.0
    ranks, tie_counts = _signed_ranks(d)
    w_plus = float(ranks[d > 0].sum())
    if n <= exact_max_n:
        return _exact_two_sided(ranks, w_plus)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    if var <= 0:
        return 1.0
    z = (w_plus - mean) / math.sqrt(var)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def count_wins(pgaffs: Sequence[float], lgaffs: Sequence[float],
               decimals: int = WIN_DECIMALS) -> tuple[int, int, int]:
    """(Pareto wins, lexicographic wins, ties) after rounding to ``decimals``."""
    p = np.round(np.asarray(pgaffs, dtype=float), decimals)
    lg = np.round(np.asarray(lgaffs, dtype=float), decimals)
    return int(np.sum(p > lg)), int(np.sum(lg > p)), int(np.sum(p == lg))


def build_report(results: Sequence[ProblemResult],
                 lp: LexicoParams | None = None) -> ComparisonReport:
    """Wins, p-values and domination counts over problems.

    ``lp`` is accepted for interface symmetry; the results already carry the
    filtered Pareto solution, so it is not consulted here.
    """
    if not results:
        raise ValueError("need at least one problem result")
    wins, p_values = {}, {}
    for j, m in enumerate(MEASURES):
        pg = [r.pgaffs.values()[j] for r in results]
        lg = [r.lgaffs.values()[j] for r in results]
        wins[m] = count_wins(pg, lg)
        p_values[m] = wilcoxon_signed_rank(zip(pg, lg)) if len(results) > 1 else None
    domination = [domination_stats(r.lgaffs, r.pareto) if r.pareto else None for r in results]
    return ComparisonReport(list(results), wins, p_values, domination)


REPORT_COLUMNS = (
    ["dataset", "sensitive", "seed"]
    + [f"{alg}_{m}" for m in MEASURES for alg in ("pgaffs", "lgaffs")]
    + ["pgaffs_domination", "lgaffs_domination", "no_domination", "pareto_higher_accuracy_proportion"]
)


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def report_table(report: ComparisonReport) -> str:
    """One delimited row per problem: 10 measure columns then 4 domination columns."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r, dom in zip(report.problems, report.domination):
        row = [r.dataset, r.sensitive, _fmt(r.seed)]
        for pg, lg in zip(r.pgaffs.values(), r.lgaffs.values()):
            row += [_fmt(pg), _fmt(lg)]
        if dom is None:
            row += ["NA"] * 4
        else:
            row += [dom.pgaffs_dominates, dom.lgaffs_dominates, dom.no_domination,
                    _fmt(dom.higher_accuracy_proportion)]
        w.writerow(row)
    w.writerow(["wins", "", ""] + [x for m in MEASURES for x in report.wins[m][:2]] + [""] * 4)
    w.writerow(["wilcoxon_p", "", ""] + [x for m in MEASURES for x in (_fmt(report.p_values[m]), "")]
               + [""] * 4)
    return buf.getvalue()


def report_summary(report: ComparisonReport) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "n_problems": len(report.problems),
        "wins": {m: {"pgaffs": w[0], "lgaffs": w[1], "ties": w[2]} for m, w in report.wins.items()},
        "wilcoxon_p": {m: (None if p is None else round(p, 10)) for m, p in report.p_values.items()},
        "wilcoxon_variant": ("two-sided; zeros dropped; average ranks; exact for n <= "
                             f"{EXACT_MAX_N}, tie-corrected normal approximation otherwise"),
        "lgaffs_dominates_more_often": sum(
            1 for d in report.domination if d is not None and d.lgaffs_dominates > d.pgaffs_dominates
        ),
    }


def read_fixture(path: str | Path | None = None) -> list[ProblemResult]:
    """Published per-problem comparison values (10 measure columns per row)."""
    if path is None:
        text = (resources.files("fairsel") / "data" / "published_comparison.csv").read_text()
    else:
        text = Path(path).read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    need = {f"{alg}_{m}" for m in MEASURES for alg in ("pgaffs", "lgaffs")} | {"dataset", "sensitive"}
    if not rows or not need <= set(rows[0]):
        raise ResultFormatError(f"{path or 'bundled fixture'} is not a comparison fixture")
    out = []
    for r in rows:
        vec = {alg: FitnessVector(*(float(r[f"{alg}_{m}"]) for m in MEASURES))
               for alg in ("pgaffs", "lgaffs")}
        out.append(ProblemResult(r["dataset"], r["sensitive"], vec["lgaffs"], vec["pgaffs"]))
    return out


def problem_from_artifact(doc: dict, source: str = "") -> ProblemResult:
    """Extract the comparison view from a run artifact."""
    if doc.get("schema") != RESULT_SCHEMA:
        raise ResultFormatError(f"{source}: unexpected schema {doc.get('schema')!r}")
    try:
        lg = doc["lgaffs"]
        pg = doc["pgaffs"]
        return ProblemResult(
            dataset=doc["dataset"],
            sensitive=doc["sensitive"],
            lgaffs=FitnessVector.from_dict(lg["solution"]["test_fitness"]),
            pgaffs=FitnessVector.from_dict(pg["filtered"]["test_fitness"]),
            pareto=tuple(FitnessVector.from_dict(m["test_fitness"]) for m in pg["front"]),
            seed=doc.get("seed"),
        )
    except (KeyError, TypeError) as exc:
        raise ResultFormatError(f"{source}: artifact lacks both GA results ({exc})") from exc


def load_results(paths: Sequence[str | Path]) -> list[ProblemResult]:
    """Read run artifacts (``.json``) or fixture tables (``.csv``); kinds must not be mixed."""
    if not paths:
        raise ValueError("need at least one result file")
    kinds = {Path(p).suffix.lower() for p in paths}
    if len(kinds) > 1:
        raise ResultFormatError("mixed result schemas: " + ", ".join(sorted(kinds)))
    out: list[ProblemResult] = []
    for p in paths:
        if Path(p).suffix.lower() == ".csv":
            out.extend(read_fixture(p))
            continue
        try:
            doc = json.loads(Path(p).read_text())
        except json.JSONDecodeError as exc:
            raise ResultFormatError(f"{p}: not valid JSON ({exc})") from exc
        out.append(problem_from_artifact(doc, str(p)))
    return out
