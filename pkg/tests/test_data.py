"""CSV ingestion, the stratified split, and the synthetic generator."""

from __future__ import annotations

import numpy as np
import pytest

from shapreuse import ParseError, ValidationError, generate_synthetic, ingest_csv, write_csv


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


class TestRoundTrip:
    def test_generate_write_ingest_preserves_everything(self, tmp_path):
        ds, tests = generate_synthetic(num_classes=2, per_class=4,
                                       test_per_class=2, dim=3, seed=7)
        out = tmp_path / "blobs.csv"
        write_csv(out, ds, tests)
        ds2, tests2 = ingest_csv(out)

        assert ds2.num_classes == ds.num_classes
        np.testing.assert_array_equal(ds2.feature_matrix, ds.feature_matrix)
        np.testing.assert_array_equal(ds2.labels, ds.labels)
        assert [t.id for t in tests2] == [t.id for t in tests]
        for a, b in zip(tests, tests2):
            assert a.label == b.label
            np.testing.assert_array_equal(a.features, b.features)

    def test_written_header_is_ingestible_layout(self, tmp_path):
        ds, tests = generate_synthetic(num_classes=2, per_class=2,
                                       test_per_class=1, dim=2, seed=1)
        out = tmp_path / "blobs.csv"
        write_csv(out, ds, tests)
        header = out.read_text().splitlines()[0]
        assert header == "f0,f1,label,split"


class TestSplitColumn:
    def test_markers_decide_membership(self, tmp_path):
        path = write_lines(tmp_path / "d.csv", [
            "f0,label,split",
            "10.0,0,train",
            "11.0,1,test",
            "12.0,1,train",
            "13.0,0,test",
        ])
        ds, tests = ingest_csv(path)
        assert [p.features[0] for p in ds.points] == [10.0, 12.0]
        assert [t.features[0] for t in tests] == [11.0, 13.0]
        assert [p.label for p in ds.points] == [0, 1]
        assert [t.label for t in tests] == [1, 0]

    def test_all_train_gives_empty_test_list(self, tmp_path):
        path = write_lines(tmp_path / "d.csv", [
            "f0,label,split", "1.0,0,train", "2.0,0,train"])
        ds, tests = ingest_csv(path)
        assert len(ds) == 2 and tests == []

    def test_no_training_rows_is_an_error(self, tmp_path):
        path = write_lines(tmp_path / "d.csv", [
            "f0,label,split", "1.0,0,test"])
        with pytest.raises(ParseError, match="no training rows"):
            ingest_csv(path)

    def test_marker_case_is_ignored(self, tmp_path):
        path = write_lines(tmp_path / "d.csv", [
            "f0,label,split", "1.0,0,TRAIN", "2.0,0,Test"])
        ds, tests = ingest_csv(path)
        assert len(ds) == 1 and len(tests) == 1


class TestStratifiedSplit:
    def iris_shaped(self, tmp_path):
        lines = ["f0,f1,label"]
        for i in range(150):
            lines.append(f"{float(i)},{float(i % 7)},{i // 50}")
        return write_lines(tmp_path / "iris.csv", lines)

    def test_seventy_thirty_per_class(self, tmp_path):
        ds, tests = ingest_csv(self.iris_shaped(tmp_path))
        assert len(ds) == 105 and len(tests) == 45
        for c in range(3):
            assert sum(1 for p in ds.points if p.label == c) == 35
            assert sum(1 for t in tests if t.label == c) == 15

    def test_file_order_is_kept_within_each_side(self, tmp_path):
        ds, tests = ingest_csv(self.iris_shaped(tmp_path))
        train_f0 = [p.features[0] for p in ds.points]
        test_f0 = [t.features[0] for t in tests]
        assert train_f0 == sorted(train_f0)
        assert test_f0 == sorted(test_f0)

    def test_seed_decides_the_split_deterministically(self, tmp_path):
        path = self.iris_shaped(tmp_path)
        first, _ = ingest_csv(path, seed=3)
        again, _ = ingest_csv(path, seed=3)
        np.testing.assert_array_equal(first.feature_matrix, again.feature_matrix)
        other, _ = ingest_csv(path, seed=4)
        assert not np.array_equal(first.feature_matrix, other.feature_matrix)

    def test_ids_are_dense_after_the_split(self, tmp_path):
        ds, tests = ingest_csv(self.iris_shaped(tmp_path))
        assert [p.id for p in ds.points] == list(range(105))
        assert [t.id for t in tests] == list(range(45))


class TestParseErrors:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("")
        with pytest.raises(ParseError, match="line 1: file is empty"):
            ingest_csv(path)

    def test_header_without_label(self, tmp_path):
        path = write_lines(tmp_path / "e.csv", ["f0,f1", "1.0,2.0"])
        with pytest.raises(ParseError, match="line 1: header has no 'label'"):
            ingest_csv(path)

    def test_no_feature_columns(self, tmp_path):
        path = write_lines(tmp_path / "e.csv", ["label,split", "0,train"])
        with pytest.raises(ParseError, match="no feature columns"):
            ingest_csv(path)

    def test_non_numeric_feature_names_line_and_column(self, tmp_path):
        path = write_lines(tmp_path / "e.csv", [
            "f0,f1,label", "1.0,2.0,0", "1.0,oops,1"])
        with pytest.raises(ParseError, match="line 3: feature column 'f1'"):
            ingest_csv(path)

    def test_fractional_label(self, tmp_path):
        path = write_lines(tmp_path / "e.csv", ["f0,label", "1.0,1.5"])
        with pytest.raises(ParseError, match="line 2: label '1.5' is not"):
            ingest_csv(path)

    def test_negative_label(self, tmp_path):
        path = write_lines(tmp_path / "e.csv", ["f0,label", "1.0,-2"])
        with pytest.raises(ParseError, match="line 2: label -2 is negative"):
            ingest_csv(path)

    def test_bad_split_token(self, tmp_path):
        path = write_lines(tmp_path / "e.csv", [
            "f0,label,split", "1.0,0,holdout"])
        with pytest.raises(ParseError, match="line 2: split must be"):
            ingest_csv(path)

    def test_wrong_column_count(self, tmp_path):
        path = write_lines(tmp_path / "e.csv", [
            "f0,f1,label", "1.0,2.0,0", "1.0,0"])
        with pytest.raises(ParseError, match="line 3: expected 3 columns, got 2"):
            ingest_csv(path)

    def test_header_only(self, tmp_path):
        path = write_lines(tmp_path / "e.csv", ["f0,label"])
        with pytest.raises(ParseError, match="line 2: no data rows"):
            ingest_csv(path)

    def test_blank_rows_are_skipped(self, tmp_path):
        path = write_lines(tmp_path / "d.csv", [
            "f0,label,split", "", "1.0,0,train", "  ,", "2.0,1,test"])
        ds, tests = ingest_csv(path)
        assert len(ds) == 1 and len(tests) == 1


class TestNormalization:
    def sample(self, tmp_path):
        return write_lines(tmp_path / "n.csv", [
            "f0,f1,label,split",
            "0.0,5.0,0,train",
            "2.0,5.0,0,train",
            "4.0,5.0,1,train",
            "2.0,7.0,1,test",
        ])

    def test_zscore_uses_training_statistics(self, tmp_path):
        ds, tests = ingest_csv(self.sample(tmp_path), normalize=True)
        std = np.sqrt(8.0 / 3.0)
        expected = np.array([-2.0, 0.0, 2.0]) / std
        np.testing.assert_allclose(ds.feature_matrix[:, 0], expected, atol=1e-12)
        assert tests[0].features[0] == pytest.approx(0.0)

    def test_zero_variance_column_passes_through(self, tmp_path):
        ds, tests = ingest_csv(self.sample(tmp_path), normalize=True)
        np.testing.assert_allclose(ds.feature_matrix[:, 1], 0.0, atol=1e-12)
        assert tests[0].features[1] == pytest.approx(2.0)

    def test_off_by_default(self, tmp_path):
        ds, _ = ingest_csv(self.sample(tmp_path))
        assert ds.feature_matrix[2, 0] == 4.0


class TestSyntheticGenerator:
    def test_deterministic_per_seed(self):
        a, at = generate_synthetic(seed=5, per_class=3, test_per_class=2)
        b, bt = generate_synthetic(seed=5, per_class=3, test_per_class=2)
        np.testing.assert_array_equal(a.feature_matrix, b.feature_matrix)
        np.testing.assert_array_equal(at[0].features, bt[0].features)
        c, _ = generate_synthetic(seed=6, per_class=3, test_per_class=2)
        assert not np.array_equal(a.feature_matrix, c.feature_matrix)

    def test_zero_noise_collapses_to_the_centers(self):
        ds, tests = generate_synthetic(num_classes=2, per_class=3,
                                       test_per_class=2, noise=0.0, seed=9)
        for c in range(2):
            block = ds.feature_matrix[ds.labels == c]
            assert np.ptp(block, axis=0).max() == 0.0
            center = block[0]
            for t in tests:
                if t.label == c:
                    np.testing.assert_array_equal(t.features, center)

    def test_shift_moves_test_centers_along_coordinate_zero(self):
        ds, tests = generate_synthetic(num_classes=2, per_class=2,
                                       test_per_class=1, noise=0.0,
                                       shift=4.5, seed=9)
        for t in tests:
            center = ds.feature_matrix[ds.labels == t.label][0]
            delta = t.features - center
            assert delta[0] == pytest.approx(4.5)
            np.testing.assert_allclose(delta[1:], 0.0, atol=1e-12)

    def test_counts_and_labels(self):
        ds, tests = generate_synthetic(num_classes=4, per_class=6,
                                       test_per_class=3, seed=0)
        assert len(ds) == 24 and len(tests) == 12
        assert ds.num_classes == 4
        assert sorted(set(ds.labels)) == [0, 1, 2, 3]

    def test_no_test_points_is_allowed(self):
        ds, tests = generate_synthetic(per_class=2, test_per_class=0, seed=0)
        assert tests == []

    def test_bad_parameters(self):
        with pytest.raises(ValidationError):
            generate_synthetic(per_class=0)
        with pytest.raises(ValidationError):
            generate_synthetic(noise=-0.5)
        with pytest.raises(ValidationError):
            generate_synthetic(dim=0)
