"""Column-named numeric datasets and their CSV form."""

from __future__ import annotations

import csv
import re
from typing import Iterable, Mapping, Sequence

import numpy as np

_NAME = re.compile(r"^[A-Za-z0-9_]+$")


class DataError(ValueError):
    """Malformed or unusable dataset."""


class Dataset:
    """Rectangular float matrix with one name per column.

    Values are read-only; missing or non-finite entries are rejected.
    """

    __slots__ = ("columns", "values", "_index", "_corr")

    def __init__(self, columns: Sequence[str], values):
        columns = tuple(columns)
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(columns):
            raise DataError(f"expected a 2-D array with {len(columns)} columns, got shape {values.shape}")
        if values.shape[0] < 2:
            raise DataError("need at least 2 rows")
        for c in columns:
            if not _NAME.match(c):
                raise DataError(f"column name {c!r} must match [A-Za-z0-9_]+")
        if len(set(columns)) != len(columns):
            raise DataError("duplicate column names")
        if not np.all(np.isfinite(values)):
            raise DataError("dataset contains missing or non-finite values")
        values.setflags(write=False)
        self.columns = columns
        self.values = values
        self._index = {c: i for i, c in enumerate(columns)}
        self._corr = None

    @classmethod
    def from_columns(cls, cols: Mapping[str, Iterable[float]]) -> "Dataset":
        names = list(cols)
        return cls(names, np.column_stack([np.asarray(cols[c], dtype=float) for c in names]))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __contains__(self, name) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise DataError(f"unknown column {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]

    def select(self, names: Sequence[str]) -> np.ndarray:
        return self.values[:, [self.index(c) for c in names]]

    def correlation(self) -> np.ndarray:
        """Sample correlation matrix, computed once."""
        if self._corr is None:
            x = self.values - self.values.mean(axis=0)
            sd = np.sqrt(np.einsum("ij,ij->j", x, x))
            with np.errstate(invalid="ignore", divide="ignore"):
                corr = (x.T @ x) / np.outer(sd, sd)
            corr[~np.isfinite(corr)] = 0.0
            np.fill_diagonal(corr, 1.0)
            # constant columns get a zero diagonal so any test on them is degenerate
            const = np.flatnonzero(sd == 0)
            corr[const, const] = 0.0
            corr.setflags(write=False)
            self._corr = corr
        return self._corr

    def to_csv(self, path, precision: int = 17) -> None:
        fmt = f"%.{precision}g"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(self.columns) + "\n")
            np.savetxt(fh, self.values, fmt=fmt, delimiter=",")

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            rows = []
            for lineno, row in enumerate(reader, 2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
                try:
                    rows.append([float(v) for v in row])
                except ValueError:
                    raise DataError(f"{path}:{lineno}: non-numeric or missing value") from None
        return cls([h.strip() for h in header], np.array(rows, dtype=float).reshape(len(rows), len(header)))

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, columns={list(self.columns)})"
