"""Weight-of-evidence encodings with shrinkage and clustering, and spline
binning of continuous effects, feeding an interpretable logistic regression."""

from .data import Dataset, Schema, load_csv
from .metrics import evaluate
from .model import PipelineModel
from .tuning import PipelineConfig, TuningGrid, cross_validate, fit_pipeline

__version__ = "0.1.0"

__all__ = ["Dataset", "Schema", "load_csv", "evaluate", "PipelineModel", "PipelineConfig",
           "TuningGrid", "cross_validate", "fit_pipeline"]
