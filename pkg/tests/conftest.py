import sys

import numpy as np
import pytest

from fairsel.data import Dataset


def make_dataset(X, y, s, name="synthetic"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    f = X.shape[1]
    return Dataset(
        X=X, y=np.asarray(y, dtype=np.int64), s=np.asarray(s, dtype=np.int64),
        feature_names=tuple(f"f{j}" for j in range(f)),
        column_names=tuple(f"f{j}" for j in range(f)),
        groups=np.arange(f), name=name,
    )


def planted(n=500, f=20, seed=0):
    """Feature 0 decides the class exactly; s and the other features are noise."""
    rng = np.random.default_rng(seed)
    X = rng.random((n, f))
    y = (X[:, 0] > 0.5).astype(int)
    s = rng.integers(0, 2, n)
    return make_dataset(X, y, s, name="planted")


@pytest.fixture
def planted_dataset():
    return planted()


@pytest.fixture
def small_dataset():
    rng = np.random.default_rng(7)
    X = rng.random((60, 5))
    y = (X[:, 0] + 0.3 * X[:, 1] > 0.6).astype(int)
    s = (rng.random(60) < 0.4).astype(int)
    return make_dataset(X, y, s)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
