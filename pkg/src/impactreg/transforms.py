"""CSV ingestion and the preprocessing transforms used before analysis.

Transforms are applied in order and never modify existing columns in
place; augmentation steps only append.  Missing values are a hard error
(the estimators assume complete i.i.d. rows).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import (EmptyAfterExclusion, InvalidConfig, MissingValue,
                     NonPositiveLogInput, ParseError, SchemaMismatch,
                     UnknownColumn)

_COMPARATORS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def read_csv(source, schema=None) -> Dataset:
    """Read an RFC-4180 CSV with a header row into a Dataset.

    ``source`` is a path or a text stream.  ``schema`` optionally pins
    the expected column names.
    """
    if hasattr(source, "read"):
        return _read_csv_stream(source, schema)
    with open(source, "r", newline="", encoding="utf-8") as fh:
        return _read_csv_stream(fh, schema)


def _read_csv_stream(stream, schema):
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, 1, "empty file") from None
    header = [h.strip() for h in header]
    if schema is not None and list(schema) != header:
        raise SchemaMismatch(
            f"expected columns {list(schema)}, found {header}")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(line_no, 1,
                             f"expected {len(header)} cells, found {len(row)}")
        parsed = []
        for col_no, cell in enumerate(row, start=1):
            cell = cell.strip()
            if cell == "":
                raise MissingValue(line_no, col_no)
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(line_no, col_no,
                                 f"non-numeric cell {cell!r}") from None
            if not math.isfinite(value):
                raise ParseError(line_no, col_no,
                                 f"non-finite cell {cell!r}")
            parsed.append(value)
        rows.append(parsed)
    if not rows:
        raise ParseError(2, 1, "no data rows")
    return Dataset(tuple(header), np.array(rows, dtype=float))


def write_csv(data: Dataset, target):
    """Write a Dataset as CSV, preserving values to 17 significant digits."""
    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(data.column_names)
        for row in data.values:
            writer.writerow([format(v, ".17g") for v in row])

    if hasattr(target, "write"):
        _write(target)
    else:
        with open(target, "w", newline="", encoding="utf-8") as fh:
            _write(fh)


@dataclass(frozen=True)
class TransformSpec:
    """An ordered list of transform steps (dicts with an ``op`` key)."""

    steps: tuple

    @classmethod
    def from_json(cls, source):
        if hasattr(source, "read"):
            raw = json.load(source)
        elif isinstance(source, (str,)) and source.lstrip().startswith(("[", "{")):
            raw = json.loads(source)
        else:
            with open(source, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        if isinstance(raw, dict):
            raw = raw.get("steps", [])
        if not isinstance(raw, list):
            raise InvalidConfig("transform spec must be a list of steps")
        return cls(steps=tuple(raw))


def _exclude_rows(data, step, log):
    column = data.column(step["column"])
    comparator = _COMPARATORS.get(step.get("comparator"))
    if comparator is None:
        raise InvalidConfig(f"unknown comparator {step.get('comparator')!r}")
    threshold = float(step["threshold"])
    if not math.isfinite(threshold):
        raise InvalidConfig("threshold must be finite")
    drop = comparator(column, threshold)
    keep = ~drop
    if keep.sum() < 2:
        raise EmptyAfterExclusion(
            f"exclusion on {step['column']!r} leaves {int(keep.sum())} rows")
    log.append(f"exclude_rows({step['column']} {step['comparator']} "
               f"{threshold}): dropped {int(drop.sum())} of {data.n} rows")
    return Dataset(data.column_names, data.values[keep])


def _replace_column(data, label, values):
    out = data.values.copy()
    out[:, data.index(label)] = values
    return Dataset(data.column_names, out)


def _log(data, step, log):
    label = step["column"]
    offset = float(step.get("offset", 0.0))
    if offset < 0 or not math.isfinite(offset):
        raise InvalidConfig("log offset must be finite and >= 0")
    shifted = data.column(label) + offset
    if np.any(shifted <= 0.0):
        raise NonPositiveLogInput(
            f"log of column {label!r} requires strictly positive input "
            f"(min {shifted.min():g}); supply an explicit offset")
    log.append(f"log({label}, offset={offset:g})")
    return _replace_column(data, label, np.log(shifted))


def _dichotomize(data, step, log):
    label = step["column"]
    column = data.column(label)
    rule = step.get("rule", "by_threshold")
    value = float(step["value"])
    if rule == "by_threshold":
        out = (column > value).astype(float)
    elif rule == "by_level":
        out = (column == value).astype(float)
    else:
        raise InvalidConfig(f"unknown dichotomize rule {rule!r}")
    log.append(f"dichotomize({label}, {rule}, {value:g})")
    return _replace_column(data, label, out)


def _standardize(data, step, log):
    label = step["column"]
    column = data.column(label)
    sd = column.std()
    if sd == 0.0:
        raise InvalidConfig(f"cannot standardize constant column {label!r}")
    log.append(f"standardize({label})")
    return _replace_column(data, label, (column - column.mean()) / sd)


def _augment_quadratic(data, step, log):
    labels = list(step["columns"])
    names = [f"{c}^2" for c in labels]
    values = data.columns(labels) ** 2
    log.append(f"augment_quadratic({', '.join(labels)}): added "
               f"{', '.join(names)}")
    return data.with_columns(names, values)


def _augment_interactions(data, step, log):
    labels = list(step["columns"])
    names, cols = [], []
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            names.append(f"{labels[i]}*{labels[j]}")
            cols.append(data.column(labels[i]) * data.column(labels[j]))
    if not names:
        return data
    log.append(f"augment_interactions({', '.join(labels)}): added "
               f"{', '.join(names)}")
    return data.with_columns(names, np.column_stack(cols))


_STEPS = {
    "exclude_rows": _exclude_rows,
    "log": _log,
    "dichotomize": _dichotomize,
    "standardize": _standardize,
    "augment_quadratic": _augment_quadratic,
    "augment_interactions": _augment_interactions,
}


def apply_transforms(data: Dataset, spec: TransformSpec):
    """Apply all steps in order; returns (dataset, provenance log)."""
    log: list[str] = []
    for step in spec.steps:
        op = step.get("op")
        fn = _STEPS.get(op)
        if fn is None:
            raise InvalidConfig(f"unknown transform op {op!r}")
        for key in ("column",):
            if key in step and step[key] not in data.column_names:
                raise UnknownColumn(step[key])
        if "columns" in step:
            for c in step["columns"]:
                if c not in data.column_names:
                    raise UnknownColumn(c)
        data = fn(data, step, log)
    return data, log
