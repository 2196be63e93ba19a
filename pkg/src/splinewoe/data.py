"""Schema-driven CSV ingestion and stratified fold assignment."""

from __future__ import annotations

import csv
import math
import shlex
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

__all__ = [
    "ROLES",
    "ColumnSpec",
    "Schema",
    "Dataset",
    "DataError",
    "FoldAssignment",
    "load_csv",
    "write_csv",
    "split_folds",
]

ROLES = (
    "response",
    "continuous_linear",
    "continuous_nonlinear_unconstrained",
    "continuous_nonlinear_constrained",
    "continuous_cyclic",
    "categorical",
    "ignored",
)
TREATMENTS = ("woe", "swoe", "cwoe")
NUMERIC_ROLES = ROLES[1:5]


class DataError(ValueError):
    """Problem with an input file or its declared schema."""


@dataclass(frozen=True)
class ColumnSpec:
    """One schema line.

    ``binning`` only applies to cyclic columns, which may be binned in
    either mode (default ``unconstrained``); the other nonlinear roles fix
    the mode through their name.
    """

    name: str
    role: str
    treatment: str | None = None
    period: float | None = None
    kmax: int = 10
    binning: str | None = None
    q: int = 10

    def __post_init__(self):
        if self.role not in ROLES:
            raise DataError(f"column {self.name!r}: unknown role {self.role!r}")
        if self.role == "categorical":
            t = self.treatment or "woe"
            if t not in TREATMENTS:
                raise DataError(f"column {self.name!r}: unknown treatment {t!r}")
            object.__setattr__(self, "treatment", t)
        elif self.treatment is not None:
            raise DataError(f"column {self.name!r}: treatment only applies to categoricals")
        if (self.period is not None) != (self.role == "continuous_cyclic"):
            raise DataError(f"column {self.name!r}: period is required for, and only for, "
                            "continuous_cyclic columns")
        if self.period is not None and not (math.isfinite(self.period) and self.period > 0):
            raise DataError(f"column {self.name!r}: period must be positive")
        if self.kmax < 1:
            raise DataError(f"column {self.name!r}: kmax must be a positive integer")
        if self.q < 3:
            raise DataError(f"column {self.name!r}: q must be at least 3")
        if self.role == "continuous_cyclic":
            b = self.binning or "unconstrained"
            if b not in ("constrained", "unconstrained"):
                raise DataError(f"column {self.name!r}: binning must be constrained or unconstrained")
            object.__setattr__(self, "binning", b)
        elif self.binning is not None:
            raise DataError(f"column {self.name!r}: binning= only applies to cyclic columns")

    @property
    def is_numeric(self) -> bool:
        return self.role in NUMERIC_ROLES

    @property
    def is_nonlinear(self) -> bool:
        return self.role in NUMERIC_ROLES[1:]

    @property
    def binning_mode(self) -> str | None:
        """constrained / unconstrained for nonlinear columns, else None."""
        if self.role == "continuous_nonlinear_constrained":
            return "constrained"
        if self.role == "continuous_nonlinear_unconstrained":
            return "unconstrained"
        if self.role == "continuous_cyclic":
            return self.binning
        return None

    def to_line(self) -> str:
        parts = [self.name, self.role]
        if self.treatment is not None:
            parts.append(f"treatment={self.treatment}")
        if self.period is not None:
            parts.append(f"period={self.period!r}")
        if self.kmax != 10:
            parts.append(f"kmax={self.kmax}")
        if self.binning is not None:
            parts.append(f"binning={self.binning}")
        if self.q != 10:
            parts.append(f"q={self.q}")
        return " ".join(shlex.quote(p) for p in parts)


_KEYS = {"treatment": str, "period": float, "kmax": int, "binning": str, "q": int}


@dataclass(frozen=True)
class Schema:
    columns: tuple[ColumnSpec, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        n_resp = sum(c.role == "response" for c in self.columns)
        if n_resp != 1:
            raise DataError(f"exactly one response column required, found {n_resp}")

    @property
    def response(self) -> str:
        return next(c.name for c in self.columns if c.role == "response")

    @property
    def predictors(self) -> list[ColumnSpec]:
        return [c for c in self.columns if c.role not in ("response", "ignored")]

    def __getitem__(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def with_column(self, spec: ColumnSpec) -> "Schema":
        return Schema(tuple(spec if c.name == spec.name else c for c in self.columns))

    @classmethod
    def parse(cls, text: str) -> "Schema":
        cols = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                tokens = shlex.split(line)
            except ValueError as exc:
                raise DataError(f"schema line {lineno}: {exc}") from None
            if len(tokens) < 2:
                raise DataError(f"schema line {lineno}: expected 'name role [key=value ...]'")
            kw = {}
            for tok in tokens[2:]:
                key, sep, val = tok.partition("=")
                if not sep or key not in _KEYS:
                    raise DataError(f"schema line {lineno}: bad option {tok!r}")
                try:
                    kw[key] = _KEYS[key](val)
                except ValueError:
                    raise DataError(f"schema line {lineno}: bad value for {key}: {val!r}") from None
            try:
                cols.append(ColumnSpec(tokens[0], tokens[1], **kw))
            except DataError as exc:
                raise DataError(f"schema line {lineno}: {exc}") from None
        return cls(tuple(cols))

    @classmethod
    def from_file(cls, path) -> "Schema":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def to_text(self) -> str:
        return "".join(c.to_line() + "\n" for c in self.columns)


@dataclass(frozen=True)
class Dataset:
    """Parsed columns: float arrays for numeric roles, str object arrays for
    categoricals; ``response`` is an int array or None."""

    schema: Schema
    columns: dict = field(repr=False)
    response: np.ndarray | None
    rejected_count: int = 0

    @property
    def n(self) -> int:
        if self.response is not None:
            return int(self.response.size)
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        cols = {k: _frozen(v[idx]) for k, v in self.columns.items()}
        resp = None if self.response is None else _frozen(self.response[idx])
        return replace(self, columns=cols, response=resp, rejected_count=0)

    def positives(self) -> int:
        return int(self.response.sum())


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


_RESPONSE = {"0": 0, "1": 1, "false": 0, "true": 1}


def _parse_response(v: str, row: int) -> int:
    try:
        return _RESPONSE[v.lower()]
    except KeyError:
        raise DataError(f"row {row}: non-binary response value {v!r}") from None


def load_csv(path, schema: Schema, require_response: bool = True) -> Dataset:
    """Read a CSV file according to ``schema``.

    Rows with an empty field in any used column are dropped and counted in
    ``rejected_count``. With ``require_response=False`` the response column
    may be absent (scoring data).
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        pos = {h: i for i, h in enumerate(header)}
        used = [c for c in schema.columns if c.role != "ignored"]
        has_resp = schema.response in pos
        if require_response and not has_resp:
            raise DataError(f"{path}: missing column {schema.response!r}")
        used = [c for c in used if c.role != "response" or has_resp]
        for c in used:
            if c.name not in pos:
                raise DataError(f"{path}: missing column {c.name!r}")
        values = {c.name: [] for c in used}
        rejected = 0
        for rowno, row in enumerate(reader, 2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            cells = [row[pos[c.name]].strip() if pos[c.name] < len(row) else "" for c in used]
            if any(cell == "" for cell in cells):
                rejected += 1
                continue
            for c, cell in zip(used, cells):
                if c.role == "response":
                    values[c.name].append(_parse_response(cell, rowno))
                elif c.role == "categorical":
                    values[c.name].append(cell)
                else:
                    try:
                        v = float(cell)
                    except ValueError:
                        raise DataError(f"row {rowno}: column {c.name!r}: cannot parse {cell!r} "
                                        "as a number") from None
                    if not math.isfinite(v):
                        raise DataError(f"row {rowno}: column {c.name!r}: non-finite value {cell!r}")
                    values[c.name].append(v)
    kept = len(next(iter(values.values()))) if values else 0
    if kept == 0:
        raise DataError(f"{path}: no usable rows ({rejected} rejected)")
    cols = {}
    response = None
    for c in used:
        if c.role == "response":
            response = _frozen(np.asarray(values[c.name], dtype=np.int64))
        elif c.role == "categorical":
            cols[c.name] = _frozen(np.asarray(values[c.name], dtype=object))
        else:
            cols[c.name] = _frozen(np.asarray(values[c.name], dtype=float))
    if require_response and (response.min() == response.max()):
        raise DataError(f"{path}: response needs both classes")
    return Dataset(schema, cols, response, rejected)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_csv(dataset: Dataset, path) -> None:
    """Write the used columns in schema order (numbers in shortest repr)."""
    names = [c.name for c in dataset.schema.columns
             if c.role != "ignored" and (c.role != "response" or dataset.response is not None)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i in range(dataset.n):
            row = []
            for nm in names:
                if nm == dataset.schema.response:
                    row.append(str(int(dataset.response[i])))
                else:
                    row.append(_fmt(dataset.columns[nm][i]))
            w.writerow(row)


@dataclass(frozen=True)
class FoldAssignment:
    fold_index: np.ndarray
    folds: int
    seed: int

    def train_test(self, fold: int):
        """Row indices (train, test) for a fold numbered 1..folds."""
        test = np.flatnonzero(self.fold_index == fold)
        train = np.flatnonzero(self.fold_index != fold)
        return train, test


def split_folds(y, folds: int, seed: int = 0) -> FoldAssignment:
    """Stratified fold labels 1..folds.

    Positives and negatives are shuffled separately and dealt round-robin,
    the negatives continuing where the positives stopped, so fold sizes and
    per-fold positive counts each differ by at most one.
    """
    if isinstance(y, Dataset):
        y = y.response
    y = np.asarray(y)
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if folds < 2:
        raise DataError("need at least 2 folds")
    if folds > pos.size or folds > neg.size:
        raise DataError(f"{folds} folds exceed the class counts ({pos.size} positive, "
                        f"{neg.size} negative)")
    rng = np.random.default_rng(seed)
    pos = rng.permutation(pos)
    neg = rng.permutation(neg)
    idx = np.empty(y.size, dtype=np.int64)
    idx[pos] = np.arange(pos.size) % folds + 1
    idx[neg] = (pos.size + np.arange(neg.size)) % folds + 1
    return FoldAssignment(_frozen(idx), folds, seed)
