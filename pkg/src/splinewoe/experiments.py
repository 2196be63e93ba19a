"""Simulation studies on the synthetic generators."""

from __future__ import annotations

from .baseline import fit_dummy_glm
from .metrics import MetricReport, evaluate
from .synthetic import (FraudConfig, PlantedConfig, fraud_data, fraud_schema, planted_clusters,
                        planted_schema, to_dataset)
from .tuning import PipelineConfig, fit_pipeline, tune_lambda_cat

__all__ = ["VARIANTS", "fraud_comparison", "planted_recovery", "TEST_SEED_OFFSET"]

TEST_SEED_OFFSET = 100_000

# model name -> schema arguments; "GLM" is the dummy-coded reference
VARIANTS = {
    "sWOE+SB": dict(country="swoe"),
    "cWOE+SB": dict(country="cwoe"),
    "WOE+SB": dict(country="woe"),
    "sWOE": dict(country="swoe", amount="continuous_linear", time="continuous_linear"),
    "WOE": dict(country="woe", amount="continuous_linear", time="continuous_linear"),
    "GLM": dict(country="woe", amount="continuous_linear", time="continuous_linear"),
}


def fraud_comparison(seed: int, variants=None, data_config: FraudConfig = FraudConfig(),
                     config: PipelineConfig | None = None) -> dict[str, MetricReport]:
    """Fit each variant on replicate ``seed`` and score it on an independent
    test replicate drawn from the same generator."""
    variants = variants or list(VARIANTS)
    train = fraud_data(seed, data_config)
    test = fraud_data(seed + TEST_SEED_OFFSET, data_config)
    out = {}
    for name in variants:
        sch = fraud_schema(**VARIANTS[name])
        tr = to_dataset(train[0], train[1], sch)
        te = to_dataset(test[0], test[1], sch)
        if name == "GLM":
            p = fit_dummy_glm(tr, sch).predict(te)
        else:
            p = fit_pipeline(tr, sch, config).predict(te)
        out[name] = evaluate(p, te.response)
    return out


def planted_recovery(seed: int, data_config: PlantedConfig = PlantedConfig(),
                     config: PipelineConfig | None = None):
    """(selected cluster count, planted count, lambda_cat, trace) on one replicate."""
    cols, y, truth = planted_clusters(seed, data_config)
    sch = planted_schema()
    lam, ks, _, trace = tune_lambda_cat(to_dataset(cols, y, sch), sch, config=config)
    return ks["cat"], truth["k"], lam, trace
