"""Column-labeled numeric data matrix used throughout the package."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFinite, UnknownColumn


@dataclass(frozen=True)
class Dataset:
    """An n-by-c matrix of finite floats with unique column labels.

    Column 0 is conventionally (but not necessarily) the response.
    Instances are immutable; all transforms return new datasets.
    """

    column_names: tuple[str, ...]
    values: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = tuple(str(c) for c in self.column_names)
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DimensionMismatch("values must be a 2-d array")
        if values.shape[1] != len(names):
            raise DimensionMismatch(
                f"{len(names)} column names for {values.shape[1]} columns")
        if len(set(names)) != len(names):
            raise DimensionMismatch("duplicate column names")
        if values.shape[0] < 2:
            raise DimensionMismatch("need at least 2 observations")
        if not np.all(np.isfinite(values)):
            raise NonFinite("dataset contains NaN or infinite entries")
        values.setflags(write=False)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", {c: j for j, c in enumerate(names)})

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def ncols(self) -> int:
        return self.values.shape[1]

    def index(self, column: str) -> int:
        try:
            return self._index[column]
        except KeyError:
            raise UnknownColumn(column) from None

    def column(self, column: str) -> np.ndarray:
        return self.values[:, self.index(column)]

    def columns(self, columns) -> np.ndarray:
        idx = [self.index(c) for c in columns]
        return self.values[:, idx]

    def with_columns(self, names, values) -> "Dataset":
        """Return a new dataset with extra columns appended."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        return Dataset(self.column_names + tuple(names),
                       np.hstack([self.values, values]))
