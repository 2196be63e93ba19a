"""Reference model: logistic regression on raw numeric columns and dummy
coded categoricals."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset, Schema
from .glm import GlmFit, SeparationWarning, fit_glm, predict_glm

__all__ = ["DummyGlm", "fit_dummy_glm"]


@dataclass
class DummyGlm:
    """Numeric columns enter linearly; each categorical gets one indicator
    per non-reference level (reference = most frequent training level,
    unseen levels score as the reference)."""

    numeric: list[str]
    levels: dict[str, list[str]]
    glm: GlmFit

    def design(self, dataset: Dataset) -> np.ndarray:
        cols = [np.ones(dataset.n)]
        cols += [np.asarray(dataset[c], dtype=float) for c in self.numeric]
        for c, lv in self.levels.items():
            x = dataset[c]
            cols += [(x == v).astype(float) for v in lv]
        return np.column_stack(cols)

    def predict(self, dataset: Dataset) -> np.ndarray:
        return predict_glm(self.glm, self.design(dataset))


def fit_dummy_glm(dataset: Dataset, schema: Schema | None = None) -> DummyGlm:
    schema = schema or dataset.schema
    numeric, levels, names = [], {}, ["(Intercept)"]
    for c in schema.predictors:
        if c.is_numeric:
            numeric.append(c.name)
            names.append(c.name)
        else:
            vals, counts = np.unique(dataset[c.name].astype(str), return_counts=True)
            ref = vals[np.argmax(counts)]
            lv = [str(v) for v in vals if v != ref]
            levels[c.name] = lv
            names += [f"{c.name}={v}" for v in lv]
    model = DummyGlm(numeric, levels, None)
    with warnings.catch_warnings():
        # rare levels without positives drift towards -inf; the fit is
        # still usable for ranking
        warnings.simplefilter("ignore", SeparationWarning)
        warnings.simplefilter("ignore", RuntimeWarning)
        model.glm = fit_glm(model.design(dataset), dataset.response, names=names)
    return model
