"""Dataset ingestion and synthetic generation.

CSV files carry a header with numeric feature columns, an integer ``label``
column, and an optional ``split`` column of train/test markers. Without a
split column, a deterministic stratified 70:30 split is derived from the
seed. The synthetic generator draws Gaussian blobs around seeded class
centers; a shift offsets every test center along the first coordinate to
push test points away from the training distribution.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import Dataset, TestPoint, TrainingPoint, ValidationError

TRAIN_FRACTION = 0.7


class ParseError(ValidationError):
    """A CSV row that cannot be interpreted, with its line number."""


def _parse_feature(raw: str, line: int, column: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ParseError(
            f"line {line}: feature column {column!r} has non-numeric value "
            f"{raw!r}") from None


def _parse_label(raw: str, line: int) -> int:
    try:
        label = int(raw)
    except ValueError:
        raise ParseError(
            f"line {line}: label {raw!r} is not an integer") from None
    if label < 0:
        raise ParseError(f"line {line}: label {label} is negative")
    return label


def ingest_csv(path: str | Path, *, seed: int = 0,
               normalize: bool = False) -> tuple[Dataset, list[TestPoint]]:
    """Read a labeled CSV into a training dataset and a test list.

    Rows keep file order within each side of the split. With ``normalize``,
    each feature column is z-scored with the mean and standard deviation of
    the training split; zero-variance columns pass through unscaled.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("line 1: file is empty, expected a header") from None
        header = [h.strip() for h in header]
        if "label" not in header:
            raise ParseError("line 1: header has no 'label' column")
        label_col = header.index("label")
        split_col = header.index("split") if "split" in header else None
        feature_cols = [i for i in range(len(header))
                        if i != label_col and i != split_col]
        if not feature_cols:
            raise ParseError("line 1: no feature columns besides label/split")

        rows: list[tuple[list[float], int, str | None]] = []
        for line, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) != len(header):
                raise ParseError(
                    f"line {line}: expected {len(header)} columns, got {len(raw)}")
            feats = [_parse_feature(raw[i].strip(), line, header[i])
                     for i in feature_cols]
            label = _parse_label(raw[label_col].strip(), line)
            side = None
            if split_col is not None:
                side = raw[split_col].strip().lower()
                if side not in ("train", "test"):
                    raise ParseError(
                        f"line {line}: split must be 'train' or 'test', "
                        f"got {raw[split_col]!r}")
            rows.append((feats, label, side))

    if not rows:
        raise ParseError("line 2: no data rows")

    if split_col is not None:
        train_rows = [i for i, r in enumerate(rows) if r[2] == "train"]
        test_rows = [i for i, r in enumerate(rows) if r[2] == "test"]
    else:
        train_rows, test_rows = _stratified_split(rows, seed)
    if not train_rows:
        raise ParseError("no training rows after the split")

    num_classes = max(r[1] for r in rows) + 1
    features = np.asarray([rows[i][0] for i in train_rows + test_rows],
                          dtype=np.float64)
    if normalize:
        train_block = features[: len(train_rows)]
        mean = train_block.mean(axis=0)
        std = train_block.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        features = (features - mean) / std

    train = [TrainingPoint(k, features[k], rows[i][1])
             for k, i in enumerate(train_rows)]
    tests = [TestPoint(k, features[len(train_rows) + k], rows[i][1])
             for k, i in enumerate(test_rows)]
    return Dataset(train, num_classes), tests


def _stratified_split(rows, seed: int) -> tuple[list[int], list[int]]:
    """Per-class 70:30 split, shuffled by the seed, file order preserved."""
    by_class: dict[int, list[int]] = {}
    for i, (_, label, _) in enumerate(rows):
        by_class.setdefault(label, []).append(i)
    rng = np.random.default_rng(seed)
    train: set[int] = set()
    for label in sorted(by_class):
        members = by_class[label]
        order = rng.permutation(len(members))
        take = int(np.floor(TRAIN_FRACTION * len(members)))
        train.update(members[int(j)] for j in order[:take])
    train_rows = [i for i in range(len(rows)) if i in train]
    test_rows = [i for i in range(len(rows)) if i not in train]
    return train_rows, test_rows


def generate_synthetic(*, num_classes: int = 3, per_class: int = 20,
                       test_per_class: int = 5, dim: int = 2,
                       noise: float = 1.0, center_scale: float = 3.0,
                       shift: float = 0.0, seed: int = 0
                       ) -> tuple[Dataset, list[TestPoint]]:
    """Gaussian blobs around seeded class centers.

    Training points come first in class order, then test points. ``shift``
    moves every test center by that amount along coordinate 0, so the
    train/test center distance equals the flag value exactly.
    """
    if num_classes < 1 or per_class < 1 or test_per_class < 0 or dim < 1:
        raise ValidationError("num_classes, per_class and dim must be positive; "
                              "test_per_class non-negative")
    if noise < 0:
        raise ValidationError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, center_scale, size=(num_classes, dim))
    train_pts: list[TrainingPoint] = []
    for c in range(num_classes):
        block = centers[c] + noise * rng.normal(size=(per_class, dim))
        for row in block:
            train_pts.append(TrainingPoint(len(train_pts), row.copy(), c))
    tests: list[TestPoint] = []
    offset = np.zeros(dim)
    offset[0] = shift
    for c in range(num_classes):
        block = centers[c] + offset + noise * rng.normal(size=(test_per_class, dim))
        for row in block:
            tests.append(TestPoint(len(tests), row.copy(), c))
    return Dataset(train_pts, num_classes), tests


def write_csv(path: str | Path, dataset: Dataset, tests: list[TestPoint]) -> None:
    """Write a dataset and test list in the ingestible CSV layout."""
    dim = dataset.feature_matrix.shape[1]
    header = [f"f{j}" for j in range(dim)] + ["label", "split"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for p in dataset.points:
            writer.writerow([repr(float(x)) for x in p.features]
                            + [p.label, "train"])
        for t in tests:
            writer.writerow([repr(float(x)) for x in t.features]
                            + [t.label, "test"])
