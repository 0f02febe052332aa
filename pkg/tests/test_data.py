import numpy as np
import pytest

from fairsel.data import (DataError, DatasetConfig, load_config, load_csv,
                          load_encoded, load_problem, make_folds, read_table, save_encoded,
                          train_test_split)

from conftest import make_dataset


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def cfg(**kw):
    base = dict(class_column="label", positive_value="yes", sensitive_column="sex",
                protected_values=("f",))
    base.update(kw)
    return DatasetConfig(**base)


CSV = "x,colour,sex,label\n1,red,m,yes\n3,blue,f,no\n2,red,m,yes\n"


def test_class_and_group_mapping(tmp_path):
    d = load_csv(write(tmp_path, CSV), cfg())
    assert d.y.tolist() == [1, 0, 1]
    assert d.s.tolist() == [0, 1, 0]


def test_sensitive_column_excluded_by_default(tmp_path):
    d = load_csv(write(tmp_path, CSV), cfg())
    assert d.feature_names == ("x", "colour")
    assert d.column_names == ("x", "colour=blue", "colour=red")
    assert d.groups.tolist() == [0, 1, 1]
    d2 = load_csv(write(tmp_path, CSV), cfg(include_sensitive=True))
    assert "sex" in d2.feature_names


def test_minmax_and_onehot(tmp_path):
    d = load_csv(write(tmp_path, CSV), cfg())
    np.testing.assert_array_equal(d.X[:, 0], [0.0, 1.0, 0.5])
    np.testing.assert_array_equal(d.X[:, 1:], [[0, 1], [1, 0], [0, 1]])


def test_constant_column_maps_to_zero(tmp_path):
    d = load_csv(write(tmp_path, "c,sex,label\n5,m,yes\n5,f,no\n"), cfg())
    assert d.X[:, 0].tolist() == [0.0, 0.0]


def test_single_sensitive_value_rejected(tmp_path):
    p = write(tmp_path, "x,sex,label\n1,m,yes\n2,m,no\n")
    with pytest.raises(DataError, match="empty protected or unprotected group"):
        load_csv(p, cfg())


def test_single_class_rejected(tmp_path):
    with pytest.raises(DataError, match="single class"):
        load_csv(write(tmp_path, "x,sex,label\n1,m,yes\n2,f,yes\n"), cfg())


def test_unknown_column(tmp_path):
    with pytest.raises(DataError, match="unknown column"):
        load_csv(write(tmp_path, CSV), cfg(sensitive_column="race"))


def test_ragged_rows_fail_to_parse(tmp_path):
    with pytest.raises(DataError):
        read_table(write(tmp_path, "a,b\n1,2,3\n"))


def test_missing_values_imputed(tmp_path):
    text = "x,colour,sex,label\n1,red,m,yes\n?,?,f,no\n3,red,m,no\n,blue,f,yes\n"
    d = load_csv(write(tmp_path, text), cfg())
    # median of {1, 3} = 2 -> 0.5 after scaling; mode colour = red
    assert d.X[1, 0] == 0.5
    assert d.column_names[1:] == ("colour=blue", "colour=red")
    assert d.X[1, 1:].tolist() == [0.0, 1.0]


def test_missing_rows_dropped(tmp_path):
    text = "x,sex,label\n1,m,yes\n?,f,no\n3,f,no\n4,m,no\n"
    d = load_csv(write(tmp_path, text), cfg(missing_policy="drop"))
    assert len(d) == 3


def test_ordinal_for_many_levels(tmp_path):
    rows = "\n".join(f"v{i:02d},{'m' if i % 2 else 'f'},{'yes' if i % 3 else 'no'}"
                     for i in range(25))
    d = load_csv(write(tmp_path, "code,sex,label\n" + rows + "\n"), cfg())
    assert d.X.shape == (25, 1)
    assert d.X[:, 0].min() == 0 and d.X[:, 0].max() == 1


def test_protected_range(tmp_path):
    p = write(tmp_path, "x,age,label\n1,22,yes\n2,40,no\n3,25,no\n")
    d = load_csv(p, cfg(sensitive_column="age", protected_values=(), protected_range=(0, 25)))
    assert d.s.tolist() == [1, 0, 1]


def test_encoded_round_trip(tmp_path):
    d = load_config("german-gender")
    data = load_problem(d)
    path = tmp_path / "enc.csv"
    save_encoded(data, path)
    back = load_encoded(path)
    np.testing.assert_array_equal(back.X, data.X)
    np.testing.assert_array_equal(back.y, data.y)
    np.testing.assert_array_equal(back.s, data.s)
    assert back.feature_names == data.feature_names
    np.testing.assert_array_equal(back.groups, data.groups)


def test_bundled_german_configs():
    for name, n_protected in (("german-age", 190), ("german-gender", 310)):
        data = load_problem(load_config(name))
        assert data.X.shape[0] == 1000
        assert data.n_features == 19
        assert int(data.s.sum()) == n_protected
        assert int(data.y.sum()) == 700


def test_config_rejects_unknown_keys():
    with pytest.raises(DataError, match="unknown config keys"):
        DatasetConfig.from_mapping({"class_column": "a", "positive_value": "1",
                                    "sensitive_column": "s", "protected_values": ["x"],
                                    "colour": "red"})


def _toy(n, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    s = (np.arange(n) // 2) % 2
    return make_dataset(rng.random((n, 2)), y, s)


@pytest.mark.parametrize("n,k,sizes", [(9, 3, [3, 3, 3]), (10, 3, [3, 3, 4])])
def test_fold_sizes(n, k, sizes):
    plan = make_folds(_toy(n), k, seed=1)
    assert sorted(np.bincount(plan.assignment, minlength=k).tolist()) == sizes


def test_folds_stratified_and_deterministic():
    d = _toy(30)
    a = make_folds(d, 3, seed=5)
    b = make_folds(d, 3, seed=5)
    np.testing.assert_array_equal(a.assignment, b.assignment)
    for f in range(3):
        assert set(d.y[a.assignment == f]) == {0, 1}


def test_folds_reject_bad_k():
    with pytest.raises(ValueError):
        make_folds(_toy(10), 1, seed=0)
    with pytest.raises(ValueError):
        make_folds(_toy(4), 5, seed=0)


def test_split_sizes_and_partition():
    d = _toy(10)
    tr, te = train_test_split(d, 0.3, seed=3)
    assert (len(tr), len(te)) == (7, 3)
    rows = {tuple(r) for r in tr.X} | {tuple(r) for r in te.X}
    assert len(rows) == 10


def test_split_deterministic():
    d = _toy(40)
    a = train_test_split(d, 0.3, seed=11)
    b = train_test_split(d, 0.3, seed=11)
    np.testing.assert_array_equal(a[1].X, b[1].X)


def test_split_stratified_on_class_and_group():
    d = _toy(200)
    tr, te = train_test_split(d, 0.3, seed=0)
    for part, n in ((tr, 140), (te, 60)):
        strata = np.bincount(part.y * 2 + part.s, minlength=4)
        assert strata.tolist() == [n // 4] * 4


def test_split_rejects_extreme_fraction():
    with pytest.raises(ValueError):
        train_test_split(_toy(10), 0.99, seed=0)
