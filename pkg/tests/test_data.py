import numpy as np
import pytest

from graphssl import (
    Dataset,
    ParseError,
    SchemaError,
    apply_standardization,
    compute_standardization,
    decompose_binary_tasks,
    load_csv_dataset,
    make_split,
)


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadCsv:
    def test_three_line_file(self, tmp_path):
        p = write(tmp_path, "1,2,A\n3,4,B\n5,6,A\n")
        ds = load_csv_dataset(p, label_column=-1)
        assert ds.n == 3 and ds.num_features == 2
        assert set(ds.class_labels) == {"A", "B"}
        assert np.array_equal(ds.features, [[1, 2], [3, 4], [5, 6]])

    def test_empty_file(self, tmp_path):
        with pytest.raises(ParseError, match="no rows"):
            load_csv_dataset(write(tmp_path, ""))

    def test_header_only_is_empty(self, tmp_path):
        with pytest.raises(ParseError, match="no rows"):
            load_csv_dataset(write(tmp_path, "a,b\n"), header=True)

    def test_non_numeric_cell_names_line(self, tmp_path):
        p = write(tmp_path, "1,2,A\n3,x,B\n")
        with pytest.raises(ParseError, match="line 2"):
            load_csv_dataset(p, label_column=-1)

    def test_ragged_row_names_line(self, tmp_path):
        p = write(tmp_path, "1,2,A\n3,4\n")
        with pytest.raises(ParseError, match="line 2"):
            load_csv_dataset(p, label_column=-1)

    def test_label_by_name_requires_header(self, tmp_path):
        p = write(tmp_path, "1,2,A\n")
        with pytest.raises(SchemaError):
            load_csv_dataset(p, label_column="cls")

    def test_label_by_name(self, tmp_path):
        p = write(tmp_path, "x,cls,y\n1,A,2\n3,B,4\n")
        ds = load_csv_dataset(p, label_column="cls", header=True)
        assert ds.class_labels == ("A", "B")
        assert np.array_equal(ds.features, [[1, 2], [3, 4]])

    def test_missing_label_name(self, tmp_path):
        p = write(tmp_path, "x,y\n1,2\n")
        with pytest.raises(SchemaError, match="not found"):
            load_csv_dataset(p, label_column="cls", header=True)

    def test_label_index_out_of_range(self, tmp_path):
        p = write(tmp_path, "1,2\n")
        with pytest.raises(SchemaError, match="out of range"):
            load_csv_dataset(p, label_column=5)

    def test_no_label_column(self, tmp_path):
        ds = load_csv_dataset(write(tmp_path, "1,2\n3,4\n"))
        assert ds.class_labels is None and ds.n == 2

    def test_row_order_preserved(self, tmp_path):
        p = write(tmp_path, "9,B\n1,A\n5,C\n")
        ds = load_csv_dataset(p, label_column=1)
        assert ds.class_labels == ("B", "A", "C")
        assert np.array_equal(ds.features.ravel(), [9, 1, 5])


class TestDatasetInvariants:
    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            Dataset(np.array([[1.0, np.nan]]))

    def test_label_length_mismatch(self):
        with pytest.raises(ValueError):
            Dataset(np.ones((2, 2)), ["A"])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Dataset(np.ones((0, 2)))


class TestStandardization:
    def test_hand_example(self):
        ds = Dataset(np.array([[0.0, 0.0], [2.0, 0.0]]))
        st = compute_standardization(ds, [0, 1])
        assert np.allclose(st.per_feature_mean, [1, 0])
        assert np.allclose(st.per_feature_std, [1, 0])  # population std
        assert st.sigma_bar == pytest.approx(0.5)

    def test_single_point(self):
        ds = Dataset(np.array([[3.0, 4.0]]))
        st = compute_standardization(ds, [0])
        assert np.all(st.per_feature_std == 0) and st.sigma_bar == 0

    def test_constant_feature(self):
        ds = Dataset(np.array([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]]))
        st = compute_standardization(ds, [0, 1, 2])
        assert st.per_feature_std[1] == 0

    def test_empty_index_set(self):
        with pytest.raises(ValueError):
            compute_standardization(Dataset(np.ones((2, 2))), [])

    def test_refit_after_transform_is_standard(self):
        rng = np.random.default_rng(7)
        ds = Dataset(rng.normal(size=(40, 5)) * [1, 10, 0.1, 3, 5] + [0, -4, 2, 0, 9])
        train = np.arange(25)
        st = compute_standardization(ds, train)
        z = apply_standardization(ds.features[train], st)
        st2 = compute_standardization(Dataset(z), np.arange(25))
        assert np.max(np.abs(st2.per_feature_mean)) <= 1e-10
        assert np.max(np.abs(st2.per_feature_std - 1)) <= 1e-10


class TestDecompose:
    def make(self, m, per=3):
        labels = [chr(ord("a") + c) for c in range(m) for _ in range(per)]
        return Dataset(np.arange(len(labels), dtype=float)[:, None], labels)

    def test_one_vs_one_counts(self):
        assert len(decompose_binary_tasks(self.make(10), "one_vs_one")) == 45

    def test_consecutive_counts(self):
        assert len(decompose_binary_tasks(self.make(26), "consecutive_pairs")) == 25

    def test_two_classes_single_task(self):
        tasks = decompose_binary_tasks(self.make(2), "one_vs_one")
        assert len(tasks) == 1 and tasks[0].n == 6

    def test_order_first_class_positive(self):
        t = decompose_binary_tasks(self.make(2))[0]
        assert t.positive_class == "a" and t.negative_class == "b"
        assert np.all(t.signed_labels[:3] == 1) and np.all(t.signed_labels[3:] == -1)

    def test_single_class_errors(self):
        with pytest.raises(ValueError):
            decompose_binary_tasks(self.make(1))

    def test_unlabeled_dataset_errors(self):
        with pytest.raises(ValueError):
            decompose_binary_tasks(Dataset(np.ones((2, 1))))


class TestMakeSplit:
    def make_task(self, n, imbalance=0.5):
        per_pos = int(n * imbalance)
        labels = ["p"] * per_pos + ["q"] * (n - per_pos)
        ds = Dataset(np.arange(n, dtype=float)[:, None], labels)
        return decompose_binary_tasks(ds)[0]

    def test_determinism(self):
        task = self.make_task(60)
        a = make_split(task, 0.1, seed=42)
        b = make_split(task, 0.1, seed=42)
        for name in ("train", "validation", "test", "labeled", "unlabeled"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_partition_invariants(self):
        task = self.make_task(61)
        s = make_split(task, 0.2, seed=1)
        assert set(s.labeled) | set(s.unlabeled) == set(s.train)
        assert not set(s.labeled) & set(s.unlabeled)
        assert not set(s.train) & set(s.validation)
        assert not set(s.train) & set(s.test)
        assert not set(s.validation) & set(s.test)
        # validation is truncated to n_l points; surplus points are unused
        all_points = set(s.train) | set(s.validation) | set(s.test)
        assert all_points <= set(task.point_indices.tolist())
        assert len(s.train) + len(s.test) >= 2 * (task.n // 3)

    def test_tiny_fraction_promotes_per_class(self):
        task = self.make_task(300)
        with pytest.warns(UserWarning, match="promoted"):
            s = make_split(task, 0.01, seed=3)
        assert s.n_l == 2
        labs = task.labels_for(s.labeled)
        assert set(labs.tolist()) == {1, -1}

    def test_full_fraction_labels_everything(self):
        task = self.make_task(30)
        s = make_split(task, 1.0, seed=0)
        assert np.array_equal(s.labeled, s.train) and s.unlabeled.size == 0

    def test_validation_truncated_to_labeled_count(self):
        task = self.make_task(120)
        s = make_split(task, 0.05, seed=5)
        assert s.validation.size <= s.n_l

    def test_both_classes_in_labeled(self):
        task = self.make_task(90, imbalance=0.9)
        for seed in range(5):
            s = make_split(task, 0.05, seed=seed)
            assert set(task.labels_for(s.labeled).tolist()) == {1, -1}

    def test_too_small_task(self):
        with pytest.raises(ValueError):
            make_split(self.make_task(2), 0.5, seed=0)

    def test_fraction_out_of_range(self):
        with pytest.raises(ValueError):
            make_split(self.make_task(30), 0.0, seed=0)

    def test_seed_changes_split(self):
        task = self.make_task(60)
        a = make_split(task, 0.2, seed=0)
        b = make_split(task, 0.2, seed=1)
        assert not np.array_equal(a.train, b.train)
