"""Dataset loading, encoding and deterministic fold/split plans.

A problem is one (dataset, sensitive feature) pairing, described by a
:class:`DatasetConfig`.  Loading produces a :class:`Dataset` whose feature
matrix is fully numeric and min-max scaled to ``[0, 1]``.

Categorical features are one-hot encoded into several columns, but the GA
still works with one bit per *original* feature: ``Dataset.groups`` maps every
encoded column back to the feature it came from.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

MISSING_MARKERS = frozenset({"", "?"})
ONEHOT_MAX_LEVELS = 20


class DataError(ValueError):
    """Raised when a table or config cannot produce a valid Dataset."""


@dataclass(frozen=True)
class RawTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.columns) < 2:
            raise DataError("a table needs at least one feature and a class column")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise DataError(
                    f"row {i + 1} has {len(row)} cells, header has {len(self.columns)}"
                )

    def column(self, name: str) -> list[str]:
        try:
            j = self.columns.index(name)
        except ValueError:
            raise DataError(f"unknown column {name!r}") from None
        return [row[j] for row in self.rows]


@dataclass(frozen=True)
class DatasetConfig:
    """How to turn one delimited file into a binary fair-classification problem.

    ``protected_values`` lists the raw sensitive-column values mapped to s=1.
    For a numeric sensitive column ``protected_range`` (inclusive ``[lo, hi]``)
    may be given instead, e.g. age <= 25.
    """

    class_column: str
    positive_value: str
    sensitive_column: str
    protected_values: tuple[str, ...] = ()
    protected_range: tuple[float, float] | None = None
    encoding: Mapping[str, str] = field(default_factory=dict)
    missing_policy: str = "impute"
    include_sensitive: bool = False
    drop_columns: tuple[str, ...] = ()
    delimiter: str = ","
    name: str = "dataset"
    path: str | None = None

    def __post_init__(self):
        if not self.protected_values and self.protected_range is None:
            raise DataError("config needs protected_values or protected_range")
        if self.missing_policy not in ("impute", "drop"):
            raise DataError(f"unknown missing_policy {self.missing_policy!r}")
        for col, policy in self.encoding.items():
            if policy not in ("auto", "onehot", "ordinal", "numeric"):
                raise DataError(f"unknown encoding {policy!r} for column {col!r}")

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Any], base_dir: Path | None = None) -> "DatasetConfig":
        known = {
            "class_column", "positive_value", "sensitive_column", "protected_values",
            "protected_range", "encoding", "missing_policy", "include_sensitive",
            "drop_columns", "delimiter", "name", "path",
        }
        unknown = set(raw) - known
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        for key in ("class_column", "positive_value", "sensitive_column"):
            if key not in raw:
                raise DataError(f"config is missing {key!r}")
        path = raw.get("path")
        if path is not None and base_dir is not None and not Path(path).is_absolute():
            path = str((base_dir / path).resolve())
        prange = raw.get("protected_range")
        return cls(
            class_column=str(raw["class_column"]),
            positive_value=str(raw["positive_value"]),
            sensitive_column=str(raw["sensitive_column"]),
            protected_values=tuple(str(v) for v in raw.get("protected_values") or ()),
            protected_range=None if prange is None else (float(prange[0]), float(prange[1])),
            encoding={str(k): str(v) for k, v in (raw.get("encoding") or {}).items()},
            missing_policy=str(raw.get("missing_policy", "impute")),
            include_sensitive=bool(raw.get("include_sensitive", False)),
            drop_columns=tuple(str(c) for c in raw.get("drop_columns") or ()),
            delimiter=str(raw.get("delimiter", ",")),
            name=str(raw.get("name", "dataset")),
            path=path,
        )

    def to_mapping(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "path": self.path,
            "delimiter": self.delimiter,
            "class_column": self.class_column,
            "positive_value": self.positive_value,
            "sensitive_column": self.sensitive_column,
            "protected_values": list(self.protected_values),
            "protected_range": None if self.protected_range is None else list(self.protected_range),
            "encoding": dict(sorted(self.encoding.items())),
            "missing_policy": self.missing_policy,
            "include_sensitive": self.include_sensitive,
            "drop_columns": list(self.drop_columns),
        }


def bundled_configs() -> list[str]:
    root = resources.files("fairsel") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_config(path_or_name: str | Path) -> DatasetConfig:
    """Read a YAML/JSON config file, or a bundled config by name (e.g. ``german-age``)."""
    path = Path(path_or_name)
    if not path.exists():
        name = str(path_or_name)
        if name in bundled_configs():
            with resources.as_file(resources.files("fairsel") / "data" / f"{name}.yaml") as p:
                return load_config(p)
        raise DataError(f"config not found: {path_or_name}")
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, Mapping):
        raise DataError(f"config {path} is not a mapping")
    return DatasetConfig.from_mapping(raw, base_dir=path.parent)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded problem: ``X`` in [0, 1], binary ``y`` (class) and ``s`` (group).

    ``groups[j]`` is the original-feature index of encoded column ``j``;
    ``feature_names`` names the original features, ``column_names`` the
    encoded columns.
    """

    X: np.ndarray
    y: np.ndarray
    s: np.ndarray
    feature_names: tuple[str, ...]
    column_names: tuple[str, ...]
    groups: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        for arr in (self.X, self.y, self.s, self.groups):
            arr.flags.writeable = False
        n = self.X.shape[0]
        if self.y.shape != (n,) or self.s.shape != (n,):
            raise DataError("X, y and s disagree on the number of rows")
        if self.X.shape[1] != len(self.column_names) or self.groups.shape != (self.X.shape[1],):
            raise DataError("column metadata does not match X")
        if np.isnan(self.X).any():
            raise DataError("X contains missing values")
        if self.X.size and (self.X.min() < 0 or self.X.max() > 1):
            raise DataError("X entries must lie in [0, 1]")
        if set(np.unique(self.y)) != {0, 1}:
            raise DataError("both classes must be present")
        if set(np.unique(self.s)) != {0, 1}:
            raise DataError("empty protected or unprotected group")

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def __len__(self) -> int:
        return self.X.shape[0]

    def column_mask(self, mask: np.ndarray) -> np.ndarray:
        """Expand a per-feature bit mask to a boolean mask over encoded columns."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.n_features,):
            raise ValueError(f"mask has length {mask.shape}, expected {self.n_features}")
        return mask[self.groups]

    def subset(self, idx: np.ndarray) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(
            X=self.X[idx].copy(), y=self.y[idx].copy(), s=self.s[idx].copy(),
            feature_names=self.feature_names, column_names=self.column_names,
            groups=self.groups.copy(), name=self.name,
        )


def read_table(path: str | Path, delimiter: str = ",") -> RawTable:
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh, delimiter=delimiter, skipinitialspace=True)
            rows = [tuple(cell.strip() for cell in r) for r in reader if any(c.strip() for c in r)]
    except (csv.Error, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    return RawTable(columns=rows[0], rows=tuple(rows[1:]))


def _as_float(values: Sequence[str]) -> np.ndarray | None:
    out = np.empty(len(values))
    for i, v in enumerate(values):
        if v in MISSING_MARKERS:
            out[i] = np.nan
            continue
        try:
            out[i] = float(v)
        except ValueError:
            return None
    return out


def _minmax(col: np.ndarray) -> np.ndarray:
    lo, hi = col.min(), col.max()
    if hi == lo:
        return np.zeros_like(col)
    return (col - lo) / (hi - lo)


def encode_table(table: RawTable, config: DatasetConfig) -> Dataset:
    """Encode a parsed table according to ``config``."""
    for col in (config.class_column, config.sensitive_column, *config.drop_columns):
        if col not in table.columns:
            raise DataError(f"unknown column {col!r}")
    rows = list(table.rows)
    if config.missing_policy == "drop":
        rows = [r for r in rows if not any(c in MISSING_MARKERS for c in r)]
        table = RawTable(table.columns, tuple(rows))
    if not rows:
        raise DataError("no rows left to encode")

    cls = table.column(config.class_column)
    if any(v in MISSING_MARKERS for v in cls):
        raise DataError("class column has missing values")
    y = np.array([v == config.positive_value for v in cls], dtype=np.int64)
    if y.min() == y.max():
        raise DataError("dataset has a single class")

    sens = table.column(config.sensitive_column)
    if any(v in MISSING_MARKERS for v in sens):
        raise DataError("sensitive column has missing values")
    if config.protected_range is not None:
        vals = _as_float(sens)
        if vals is None:
            raise DataError("protected_range needs a numeric sensitive column")
        lo, hi = config.protected_range
        s = ((vals >= lo) & (vals <= hi)).astype(np.int64)
    else:
        observed = set(sens)
        protected = set(config.protected_values)
        if not protected & observed:
            raise DataError("empty protected or unprotected group")
        s = np.array([v in protected for v in sens], dtype=np.int64)
    if s.min() == s.max():
        raise DataError("empty protected or unprotected group")

    skip = {config.class_column, *config.drop_columns}
    if not config.include_sensitive:
        skip.add(config.sensitive_column)

    blocks: list[np.ndarray] = []
    feature_names: list[str] = []
    column_names: list[str] = []
    groups: list[int] = []
    for name in table.columns:
        if name in skip:
            continue
        raw = table.column(name)
        policy = config.encoding.get(name, "auto")
        numeric = _as_float(raw) if policy in ("auto", "numeric") else None
        if policy == "numeric" and numeric is None:
            raise DataError(f"column {name!r} is not numeric")
        g = len(feature_names)
        feature_names.append(name)
        if numeric is not None:
            col = numeric
            if np.isnan(col).all():
                col = np.zeros_like(col)
            elif np.isnan(col).any():
                col = np.where(np.isnan(col), np.nanmedian(col), col)
            blocks.append(_minmax(col)[:, None])
            column_names.append(name)
            groups.append(g)
            continue
        present = [v for v in raw if v not in MISSING_MARKERS]
        if not present:
            present = ["<missing>"]
        levels, counts = np.unique(present, return_counts=True)
        mode = levels[np.argmax(counts)]
        filled = [mode if v in MISSING_MARKERS else v for v in raw]
        levels = sorted(set(filled))
        if policy == "onehot" or (policy == "auto" and len(levels) <= ONEHOT_MAX_LEVELS):
            index = {lv: i for i, lv in enumerate(levels)}
            block = np.zeros((len(filled), len(levels)))
            block[np.arange(len(filled)), [index[v] for v in filled]] = 1.0
            blocks.append(block)
            column_names.extend(f"{name}={lv}" for lv in levels)
            groups.extend([g] * len(levels))
        else:
            index = {lv: i for i, lv in enumerate(levels)}
            blocks.append(_minmax(np.array([index[v] for v in filled], dtype=float))[:, None])
            column_names.append(name)
            groups.append(g)

    if not feature_names:
        raise DataError("no feature columns left after excluding class/sensitive columns")
    return Dataset(
        X=np.hstack(blocks), y=y, s=s,
        feature_names=tuple(feature_names), column_names=tuple(column_names),
        groups=np.array(groups, dtype=np.int64), name=config.name,
    )


def load_csv(path: str | Path, config: DatasetConfig) -> Dataset:
    return encode_table(read_table(path, config.delimiter), config)


def load_problem(config: DatasetConfig) -> Dataset:
    """Load the data file the config points at."""
    if config.path is None:
        raise DataError("config has no 'path'")
    return load_csv(config.path, config)


def save_encoded(d: Dataset, path: str | Path) -> None:
    """Write an encoded dataset; :func:`load_encoded` reads it back exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = [f"{d.feature_names[g]}::{c}" for g, c in zip(d.groups, d.column_names)]
        w.writerow([*header, "__y__", "__s__"])
        for row, yi, si in zip(d.X, d.y, d.s):
            w.writerow([repr(float(v)) for v in row] + [int(yi), int(si)])


def load_encoded(path: str | Path, name: str = "dataset") -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[-2:] != ["__y__", "__s__"]:
        raise DataError(f"{path} is not an encoded dataset")
    features: list[str] = []
    groups: list[int] = []
    cols: list[str] = []
    for h in header[:-2]:
        feat, _, col = h.partition("::")
        if feat not in features:
            features.append(feat)
        groups.append(features.index(feat))
        cols.append(col)
    arr = np.array([[float(v) for v in r[:-2]] for r in body]).reshape(len(body), len(cols))
    return Dataset(
        X=arr,
        y=np.array([int(r[-2]) for r in body], dtype=np.int64),
        s=np.array([int(r[-1]) for r in body], dtype=np.int64),
        feature_names=tuple(features), column_names=tuple(cols),
        groups=np.array(groups, dtype=np.int64), name=name,
    )


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignment: np.ndarray

    def __post_init__(self):
        self.assignment.flags.writeable = False

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train indices, held-out indices) for one fold."""
        held = self.assignment == fold
        return np.flatnonzero(~held), np.flatnonzero(held)


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))


def make_folds(d: Dataset, k: int, seed: int) -> FoldPlan:
    """Stratified fold plan: shuffle, group by class, then deal round-robin."""
    n = len(d)
    if k < 2:
        raise ValueError("need at least 2 folds")
    if k > n:
        raise ValueError(f"cannot make {k} folds from {n} instances")
    order = _rng(seed, 0xF01D).permutation(n)
    order = order[np.argsort(d.y[order], kind="stable")]
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = np.arange(n) % k
    return FoldPlan(k=k, assignment=assignment)


def train_test_split(d: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Hold-out split stratified jointly on (y, s)."""
    if not 0 < test_fraction < 1:
        raise ValueError("test fraction must be in (0, 1)")
    n = len(d)
    n_test = int(math.floor(n * test_fraction + 0.5))
    if n_test < 2 or n - n_test < 2:
        raise ValueError(f"test fraction {test_fraction} leaves a side with < 2 instances")

    rng = _rng(seed, 0x5B17)
    strata = d.y * 2 + d.s
    members = [rng.permutation(np.flatnonzero(strata == c)) for c in range(4)]
    exact = np.array([len(m) * n_test / n for m in members])
    take = np.floor(exact).astype(int)
    remainder = n_test - take.sum()
    for c in np.argsort(-(exact - take), kind="stable")[:remainder]:
        take[c] += 1
    test_idx = np.sort(np.concatenate([m[:t] for m, t in zip(members, take)]))
    train_mask = np.ones(n, dtype=bool)
    train_mask[test_idx] = False
    try:
        return d.subset(np.flatnonzero(train_mask)), d.subset(test_idx)
    except DataError as exc:
        raise ValueError(f"split leaves a side without both classes/groups: {exc}") from exc
