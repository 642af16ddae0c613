"""Dataset manifests and CSV ingestion.

A manifest is a JSON file that pins down everything needed to reproduce a
dataset split: which CSV to read, which columns are features, which
column is the target, how categoricals are encoded, which target
transform applies, and where the train/test boundary sits.  Ingestion is
strict about anything that could silently change results (unknown
manifest keys, unparseable cells, unknown category labels) and lenient
only about rows with missing values, which are dropped and counted.

Row order is preserved: the datasets this harness targets are time
series, and the split plus the contiguous cross-validation folds both
rely on row order being meaningful.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..preprocess import OneHotGroup, TargetTransform, one_hot_encode, transform_target


class ManifestError(ValueError):
    """The manifest file is malformed or self-contradictory."""


class IngestionError(ValueError):
    """The CSV contents cannot be interpreted under the manifest."""


@dataclass(frozen=True)
class CategoricalColumn:
    column: str
    categories: tuple[str, ...]


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    csv_path: Path
    feature_columns: tuple[str, ...]
    target_column: str
    categorical_groups: tuple[CategoricalColumn, ...]
    target_transform: TargetTransform
    clip_negative_predictions: bool
    train_fraction: float | None
    train_range: tuple[int, int] | None
    test_range: tuple[int, int] | None
    reverse_order: bool
    delimiter: str


@dataclass(frozen=True)
class Dataset:
    """Ingested, encoded, transformed and split data."""

    name: str
    train_inputs: np.ndarray
    test_inputs: np.ndarray
    train_target: np.ndarray        # transformed space
    test_target: np.ndarray         # transformed space
    train_target_raw: np.ndarray    # original units
    test_target_raw: np.ndarray     # original units
    feature_names: tuple[str, ...]
    onehot_groups: tuple[OneHotGroup, ...]
    target_transform: TargetTransform
    clip_negative_predictions: bool
    dropped_rows: int

    @property
    def indicator_columns(self) -> tuple[int, ...]:
        cols: list[int] = []
        for g in self.onehot_groups:
            cols.extend(g.column_indices)
        return tuple(sorted(cols))


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ManifestError(message)


def _check_keys(mapping: dict, allowed: set[str], context: str) -> None:
    unknown = set(mapping) - allowed
    _require(not unknown, f"{context}: unknown keys {sorted(unknown)}")


_TOP_KEYS = {"name", "csv_path", "feature_columns", "target_column",
             "categorical_groups", "target_transform",
             "clip_negative_predictions", "split", "reverse_order", "delimiter"}


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a manifest file."""
    manifest_path = Path(path)
    try:
        raw = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{manifest_path}: not valid JSON ({exc})") from exc
    _require(isinstance(raw, dict), f"{manifest_path}: manifest must be a JSON object")
    _check_keys(raw, _TOP_KEYS, str(manifest_path))

    for key in ("csv_path", "feature_columns", "target_column", "split"):
        _require(key in raw, f"{manifest_path}: missing required key {key!r}")

    csv_path = (manifest_path.parent / str(raw["csv_path"])).resolve()
    features = raw["feature_columns"]
    _require(isinstance(features, list) and features and
             all(isinstance(c, str) for c in features),
             "feature_columns must be a non-empty list of column names")
    _require(len(set(features)) == len(features),
             f"feature_columns contains duplicates: {features}")
    target = raw["target_column"]
    _require(isinstance(target, str) and target, "target_column must be a column name")
    _require(target not in features,
             f"target column {target!r} must not appear in feature_columns")

    categoricals: list[CategoricalColumn] = []
    for entry in raw.get("categorical_groups", []):
        _require(isinstance(entry, dict), "categorical_groups entries must be objects")
        _check_keys(entry, {"column", "categories"}, "categorical_groups entry")
        _require("column" in entry and "categories" in entry,
                 "categorical_groups entries need 'column' and 'categories'")
        column = str(entry["column"])
        _require(column in features,
                 f"categorical column {column!r} is not in feature_columns")
        cats = entry["categories"]
        _require(isinstance(cats, list) and len(cats) >= 1 and
                 all(isinstance(c, str) for c in cats),
                 f"categorical column {column!r} needs a list of string categories")
        _require(len(set(cats)) == len(cats),
                 f"categorical column {column!r} has duplicate categories")
        categoricals.append(CategoricalColumn(column=column, categories=tuple(cats)))
    seen = [c.column for c in categoricals]
    _require(len(set(seen)) == len(seen),
             f"categorical_groups lists a column twice: {seen}")

    transform_name = raw.get("target_transform", "none")
    try:
        transform = TargetTransform(transform_name)
    except ValueError:
        raise ManifestError(
            f"unknown target_transform {transform_name!r}; expected one of "
            f"{[t.value for t in TargetTransform]}"
        ) from None

    clip = raw.get("clip_negative_predictions", False)
    _require(isinstance(clip, bool), "clip_negative_predictions must be a boolean")
    reverse = raw.get("reverse_order", False)
    _require(isinstance(reverse, bool), "reverse_order must be a boolean")
    delimiter = raw.get("delimiter", ",")
    _require(isinstance(delimiter, str) and len(delimiter) == 1,
             "delimiter must be a single character")

    split = raw["split"]
    _require(isinstance(split, dict), "split must be an object")
    train_fraction = None
    train_range = None
    test_range = None
    if "train_fraction" in split:
        _check_keys(split, {"train_fraction"}, "split")
        train_fraction = float(split["train_fraction"])
        _require(0.0 < train_fraction < 1.0,
                 f"train_fraction must be in (0, 1), got {train_fraction}")
    else:
        _check_keys(split, {"train_range", "test_range"}, "split")
        _require("train_range" in split and "test_range" in split,
                 "split needs either train_fraction or both train_range and test_range")
        _require(not reverse, "reverse_order cannot be combined with explicit ranges")

        def _parse_range(key):
            pair = split[key]
            _require(isinstance(pair, list) and len(pair) == 2,
                     f"{key} must be [start, stop]")
            start, stop = int(pair[0]), int(pair[1])
            _require(0 <= start < stop, f"{key} must satisfy 0 <= start < stop")
            return start, stop

        train_range = _parse_range("train_range")
        test_range = _parse_range("test_range")

    name = str(raw.get("name", csv_path.stem))
    return DatasetManifest(
        name=name,
        csv_path=csv_path,
        feature_columns=tuple(features),
        target_column=target,
        categorical_groups=tuple(categoricals),
        target_transform=transform,
        clip_negative_predictions=clip,
        train_fraction=train_fraction,
        train_range=train_range,
        test_range=test_range,
        reverse_order=reverse,
        delimiter=delimiter,
    )


def _split_indices(manifest: DatasetManifest, n: int):
    if manifest.train_fraction is not None:
        n_train = int(round(manifest.train_fraction * n))
        n_train = min(max(n_train, 1), n - 1)
        return np.arange(n_train), np.arange(n_train, n)
    a, b = manifest.train_range
    c, d = manifest.test_range
    for key, stop in (("train_range", b), ("test_range", d)):
        if stop > n:
            raise ManifestError(f"{key} extends to {stop} but only {n} usable rows exist")
    first, second = sorted([(a, b), (c, d)])
    if first[0] != 0 or first[1] != second[0] or second[1] != n:
        raise ManifestError(
            f"train_range {[a, b]} and test_range {[c, d]} must partition "
            f"all {n} usable rows into two contiguous blocks"
        )
    return np.arange(a, b), np.arange(c, d)


def load_dataset(manifest: DatasetManifest) -> Dataset:
    """Read the CSV and produce the encoded, transformed, split dataset.

    Rows with an empty cell in any used column are dropped (and counted in
    ``dropped_rows``); any other irregularity is an error.  Splitting runs
    on the retained rows, after the optional whole-table order reversal.
    """
    if not manifest.csv_path.exists():
        raise IngestionError(f"CSV file not found: {manifest.csv_path}")
    categorical_names = {c.column: c for c in manifest.categorical_groups}
    used_columns = list(manifest.feature_columns) + [manifest.target_column]

    with open(manifest.csv_path, newline="") as handle:
        reader = csv.reader(handle, delimiter=manifest.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{manifest.csv_path}: file is empty") from None
        header = [h.strip() for h in header]
        positions = {}
        for column in used_columns:
            matches = [i for i, h in enumerate(header) if h == column]
            if not matches:
                raise IngestionError(
                    f"{manifest.csv_path}: column {column!r} not found in header {header}"
                )
            if len(matches) > 1:
                raise IngestionError(
                    f"{manifest.csv_path}: column {column!r} appears "
                    f"{len(matches)} times in the header"
                )
            positions[column] = matches[0]

        numeric_rows: list[list[float]] = []
        label_rows: list[dict[str, str]] = []
        target_values: list[float] = []
        dropped = 0
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            cells = {}
            missing = False
            for column in used_columns:
                pos = positions[column]
                value = row[pos].strip() if pos < len(row) else ""
                if value == "":
                    missing = True
                    break
                cells[column] = value
            if missing:
                dropped += 1
                continue
            numeric = []
            labels = {}
            try:
                for column in manifest.feature_columns:
                    if column in categorical_names:
                        labels[column] = cells[column]
                    else:
                        numeric.append(float(cells[column]))
                target_values.append(float(cells[manifest.target_column]))
            except ValueError as exc:
                raise IngestionError(
                    f"{manifest.csv_path}, line {line_number}: {exc}"
                ) from None
            numeric_rows.append(numeric)
            label_rows.append(labels)

    n = len(numeric_rows)
    if n < 2:
        raise IngestionError(
            f"{manifest.csv_path}: only {n} usable rows after dropping {dropped}"
        )

    # assemble the encoded feature matrix in feature_columns order
    blocks: list[np.ndarray] = []
    names: list[str] = []
    groups: list[OneHotGroup] = []
    numeric_iter = iter(range(len(numeric_rows[0])))
    numeric_matrix = np.asarray(numeric_rows, dtype=float) if numeric_rows[0] else \
        np.empty((n, 0))
    for column in manifest.feature_columns:
        if column in categorical_names:
            group_spec = categorical_names[column]
            try:
                encoded = one_hot_encode(
                    [labels[column] for labels in label_rows], group_spec.categories
                )
            except ValueError as exc:
                raise IngestionError(f"{manifest.csv_path}: column {column!r}: {exc}") \
                    from None
            start = sum(b.shape[1] for b in blocks)
            groups.append(OneHotGroup(
                column_indices=tuple(range(start, start + encoded.shape[1])),
                category_labels=group_spec.categories,
            ))
            blocks.append(encoded)
            names.extend(f"{column}={c}" for c in group_spec.categories)
        else:
            blocks.append(numeric_matrix[:, [next(numeric_iter)]])
            names.append(column)
    X = np.hstack(blocks)
    y_raw = np.asarray(target_values, dtype=float)
    if not np.isfinite(X).all() or not np.isfinite(y_raw).all():
        raise IngestionError(f"{manifest.csv_path}: non-finite values in used columns")

    if manifest.reverse_order:
        X = X[::-1].copy()
        y_raw = y_raw[::-1].copy()

    try:
        y = transform_target(y_raw, manifest.target_transform)
    except ValueError as exc:
        raise IngestionError(f"{manifest.csv_path}: target column: {exc}") from None

    train_idx, test_idx = _split_indices(manifest, n)
    return Dataset(
        name=manifest.name,
        train_inputs=X[train_idx],
        test_inputs=X[test_idx],
        train_target=y[train_idx],
        test_target=y[test_idx],
        train_target_raw=y_raw[train_idx],
        test_target_raw=y_raw[test_idx],
        feature_names=tuple(names),
        onehot_groups=tuple(groups),
        target_transform=manifest.target_transform,
        clip_negative_predictions=manifest.clip_negative_predictions,
        dropped_rows=dropped,
    )


def dataset_from_arrays(train_inputs, test_inputs, train_target, test_target,
                        name: str = "in-memory",
                        onehot_groups: tuple[OneHotGroup, ...] = (),
                        target_transform: TargetTransform = TargetTransform.NONE,
                        clip_negative_predictions: bool = False) -> Dataset:
    """Wrap already-loaded arrays in a Dataset (targets given in raw units)."""
    train_inputs = np.asarray(train_inputs, dtype=float)
    test_inputs = np.asarray(test_inputs, dtype=float)
    train_raw = np.asarray(train_target, dtype=float)
    test_raw = np.asarray(test_target, dtype=float)
    return Dataset(
        name=name,
        train_inputs=train_inputs,
        test_inputs=test_inputs,
        train_target=transform_target(train_raw, target_transform),
        test_target=transform_target(test_raw, target_transform),
        train_target_raw=train_raw,
        test_target_raw=test_raw,
        feature_names=tuple(f"x{i}" for i in range(train_inputs.shape[1])),
        onehot_groups=onehot_groups,
        target_transform=target_transform,
        clip_negative_predictions=clip_negative_predictions,
        dropped_rows=0,
    )
