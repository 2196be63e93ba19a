"""The fitted end-to-end model and its JSON representation."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .binning import StepFunction, apply_step
from .data import Dataset, Schema
from .glm import GlmFit, coef_table_tsv, predict_glm
from .splines import SmoothBasis
from .woe import WoeMap, apply_woe

__all__ = ["FORMAT_VERSION", "Feature", "StoredSmooth", "PipelineModel", "ModelFormatError",
           "woe_feature_name", "step_feature_name", "source_date"]

FORMAT_VERSION = "1.0"
INTERCEPT = "(Intercept)"


class ModelFormatError(ValueError):
    pass


def woe_feature_name(column: str, treatment: str) -> str:
    return f"{treatment}({column})"


def step_feature_name(column: str) -> str:
    return f"f({column})"


def source_date() -> int | None:
    """Build timestamp from SOURCE_DATE_EPOCH, or None when unset."""
    v = os.environ.get("SOURCE_DATE_EPOCH")
    return int(v) if v else None


@dataclass(frozen=True)
class Feature:
    """One GLM column: ``kind`` is linear (raw numeric column), woe (mapped
    categorical) or step (binned smooth)."""

    name: str
    source: str
    kind: str

    def to_dict(self) -> dict:
        return {"name": self.name, "source": self.source, "kind": self.kind}

    @classmethod
    def from_dict(cls, d: dict) -> "Feature":
        return cls(d["name"], d["source"], d["kind"])


@dataclass
class StoredSmooth:
    """A fitted smooth term: basis, coefficient block and its covariance."""

    basis: SmoothBasis
    coef: np.ndarray
    cov: np.ndarray
    x_min: float
    x_max: float

    def values(self, x) -> np.ndarray:
        return self.basis.design(np.asarray(x, dtype=float)) @ self.coef

    def band(self, x, z_crit: float = 1.959963984540054):
        B = self.basis.design(np.asarray(x, dtype=float))
        z = B @ self.coef
        se = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", B, self.cov, B), 0.0))
        return z, z - z_crit * se, z + z_crit * se

    def to_dict(self) -> dict:
        return {
            "basis": self.basis.to_dict(),
            "coef": [float(v) for v in self.coef],
            "cov": [[float(v) for v in row] for row in self.cov],
            "x_min": float(self.x_min),
            "x_max": float(self.x_max),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StoredSmooth":
        return cls(SmoothBasis.from_dict(d["basis"]), np.asarray(d["coef"], dtype=float),
                   np.asarray(d["cov"], dtype=float), float(d["x_min"]), float(d["x_max"]))


@dataclass
class PipelineModel:
    schema: Schema
    features: list[Feature]
    woe_maps: dict[str, WoeMap]
    smooths: dict[str, StoredSmooth]
    steps: dict[str, StepFunction]
    glm: GlmFit | None = None
    tuning: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    traces: list = field(default_factory=list, repr=False, compare=False)

    @property
    def names(self) -> list[str]:
        return [INTERCEPT] + [f.name for f in self.features]

    def feature_values(self, dataset: Dataset, feature: Feature,
                       unseen_policy: str = "overall_logodds") -> np.ndarray:
        try:
            x = dataset.columns[feature.source]
        except KeyError:
            raise KeyError(f"missing column {feature.source!r}") from None
        if feature.kind == "linear":
            return np.asarray(x, dtype=float)
        if feature.kind == "woe":
            return apply_woe(x, self.woe_maps[feature.source], unseen_policy)
        if feature.kind == "step":
            step = self.steps[feature.source]
            if step.mode == "constrained":
                return apply_step(step, x_new=x)
            return apply_step(step, z_new=self.smooths[feature.source].values(x))
        raise ModelFormatError(f"unknown feature kind {feature.kind!r}")

    def transform(self, dataset: Dataset, unseen_policy: str = "overall_logodds") -> np.ndarray:
        """Design matrix (intercept first) in the final GLM's column order."""
        n = dataset.n
        cols = [np.ones(n)]
        for f in self.features:
            cols.append(self.feature_values(dataset, f, unseen_policy))
        return np.column_stack(cols)

    def predict(self, dataset: Dataset, unseen_policy: str = "overall_logodds") -> np.ndarray:
        if self.glm is None:
            raise ModelFormatError("model has no fitted GLM")
        return predict_glm(self.glm, self.transform(dataset, unseen_policy))

    def coef_table(self) -> str:
        return coef_table_tsv(self.glm)

    # -- serialisation -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "schema": self.schema.to_text(),
            "features": [f.to_dict() for f in self.features],
            "woe_maps": {k: v.to_dict() for k, v in self.woe_maps.items()},
            "smooths": {k: v.to_dict() for k, v in self.smooths.items()},
            "steps": {k: v.to_dict() for k, v in self.steps.items()},
            "glm": None if self.glm is None else self.glm.to_dict(),
            "tuning": self.tuning,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineModel":
        version = str(d.get("version", ""))
        if version.split(".")[0] != FORMAT_VERSION.split(".")[0]:
            raise ModelFormatError(f"unsupported model format version {version!r} "
                                   f"(expected {FORMAT_VERSION})")
        try:
            return cls(
                schema=Schema.parse(d["schema"]),
                features=[Feature.from_dict(f) for f in d["features"]],
                woe_maps={k: WoeMap.from_dict(v) for k, v in d["woe_maps"].items()},
                smooths={k: StoredSmooth.from_dict(v) for k, v in d["smooths"].items()},
                steps={k: StepFunction.from_dict(v) for k, v in d["steps"].items()},
                glm=None if d["glm"] is None else GlmFit.from_dict(d["glm"]),
                tuning=d.get("tuning", {}),
                meta=d.get("meta", {}),
            )
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"malformed model file: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "PipelineModel":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"model file is not valid JSON: {exc}") from None
        return cls.from_dict(d)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "PipelineModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    # -- plot tables -----------------------------------------------------
    def smooth_table(self, column: str, points: int = 200) -> str:
        """TSV of x, fitted smooth, 95% band and binned value on a grid."""
        sm = self.smooths[column]
        if sm.basis.period is not None:
            grid = np.linspace(0.0, sm.basis.period, points)
        else:
            grid = np.linspace(sm.x_min, sm.x_max, points)
        z, lo, hi = sm.band(grid)
        step = self.steps.get(column)
        if step is None:
            binned = np.full(points, np.nan)
        elif step.mode == "constrained":
            binned = apply_step(step, x_new=grid)
        else:
            binned = apply_step(step, z_new=z)
        lines = ["x\tz_fit\tz_lower\tz_upper\tbin_value"]
        for row in zip(grid, z, lo, hi, binned):
            lines.append("\t".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def woe_table(self, column: str) -> str:
        m = self.woe_maps[column]
        lines = ["level\twoe\tcluster"]
        for i, lv in enumerate(m.levels):
            cl = "" if m.clusters is None else str(int(m.clusters[i]))
            lines.append(f"{lv}\t{float(m.values[i])!r}\t{cl}")
        return "\n".join(lines) + "\n"
