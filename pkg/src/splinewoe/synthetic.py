"""Synthetic data sets with known structure for tests and experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .data import Dataset, Schema

__all__ = ["FraudConfig", "fraud_data", "fraud_schema", "PlantedConfig", "planted_clusters",
           "planted_schema", "to_dataset"]


@dataclass(frozen=True)
class FraudConfig:
    """Transaction-style data: linear age, U-shaped log amount, cyclic hour,
    a 3-level channel and a many-level country with planted risk groups."""

    n: int = 3500
    prevalence: float = 0.03
    n_countries: int = 40
    country_groups: tuple[int, ...] = (28, 8, 4)
    group_effects: tuple[float, ...] = (0.0, 1.2, 2.4)
    age_slope: float = -0.025
    amount_curvature: float = 0.9
    time_amplitude: float = 1.2


CHANNELS = ("atm", "online", "pos")
CHANNEL_EFFECTS = {"atm": 0.4, "online": 0.6, "pos": 0.0}


def _calibrate(eta0, target):
    """Intercept shift giving mean predicted probability ``target``."""
    return brentq(lambda b: expit(eta0 + b).mean() - target, -40.0, 40.0)


def fraud_data(seed: int, config: FraudConfig = FraudConfig()):
    """Return (columns, y, truth) for one replicate.

    ``truth`` holds the true linear predictor and each country's risk group.
    Countries are drawn with Zipf-like frequencies so several are rare.
    """
    rng = np.random.default_rng(seed)
    n = config.n
    age = rng.uniform(18, 80, n)
    amount = np.exp(rng.normal(4.0, 1.2, n))
    # more transactions by day than at night
    hour = np.mod(rng.normal(14.0, 5.0, n), 24.0)
    channel = rng.choice(CHANNELS, size=n, p=[0.15, 0.5, 0.35])
    J = config.n_countries
    if sum(config.country_groups) != J:
        raise ValueError("country_groups must add up to n_countries")
    freq = 1.0 / np.arange(1, J + 1) ** 0.8
    freq /= freq.sum()
    country_idx = rng.choice(J, size=n, p=freq)
    # risk groups are assigned to countries at random, not by frequency
    groups = rng.permutation(np.repeat(np.arange(len(config.country_groups)), config.country_groups))
    country = np.array([f"C{j:02d}" for j in country_idx], dtype=object)

    la = np.log(amount) - 4.0
    eta0 = (config.age_slope * (age - 45.0)
            + config.amount_curvature * (la ** 2 - 1.2)
            + config.time_amplitude * np.cos(2 * np.pi * (hour - 2.0) / 24.0)
            + np.array([CHANNEL_EFFECTS[c] for c in channel])
            + np.asarray(config.group_effects)[groups[country_idx]])
    eta = eta0 + _calibrate(eta0, config.prevalence)
    y = rng.binomial(1, expit(eta))
    cols = {"age": age, "amount": amount, "time": hour, "channel": channel.astype(object),
            "country": country}
    truth = {"eta": eta, "country_group": {f"C{j:02d}": int(groups[j]) for j in range(J)}}
    return cols, y, truth


def fraud_schema(country: str = "swoe", amount: str = "continuous_nonlinear_constrained",
                 time: str = "continuous_cyclic", time_binning: str = "unconstrained",
                 channel: str | None = None) -> Schema:
    """Schema for :func:`fraud_data` with the given treatments."""
    channel = channel or country
    time_line = (f"time continuous_cyclic period=24 binning={time_binning}"
                 if time == "continuous_cyclic" else f"time {time}")
    return Schema.parse(f"""
y response
age continuous_linear
amount {amount}
{time_line}
channel categorical treatment={channel}
country categorical treatment={country}
""")


@dataclass(frozen=True)
class PlantedConfig:
    """One categorical with ``n_levels`` levels in a few risk groups plus a
    smooth effect of a continuous covariate."""

    n: int = 4000
    n_levels: int = 20
    group_effects: tuple[float, ...] = (-1.5, 0.0, 1.5)
    base: float = -1.0


def planted_clusters(seed: int, config: PlantedConfig = PlantedConfig()):
    rng = np.random.default_rng(seed)
    J = config.n_levels
    G = len(config.group_effects)
    groups = np.arange(J) % G
    lvl = rng.integers(0, J, config.n)
    x = rng.uniform(0, 1, config.n)
    eta = config.base + np.asarray(config.group_effects)[groups[lvl]] + np.sin(2 * np.pi * x)
    y = rng.binomial(1, expit(eta))
    cols = {"x": x, "cat": np.array([f"L{j:02d}" for j in lvl], dtype=object)}
    truth = {"groups": {f"L{j:02d}": int(groups[j]) for j in range(J)}, "k": G}
    return cols, y, truth


def planted_schema(x_role: str = "continuous_nonlinear_constrained") -> Schema:
    return Schema.parse(f"y response\nx {x_role}\ncat categorical treatment=cwoe\n")


def to_dataset(columns, y, schema: Schema) -> Dataset:
    """Wrap generated arrays as a :class:`Dataset`."""
    cols = {}
    for c in schema.predictors:
        a = np.asarray(columns[c.name], dtype=object if c.role == "categorical" else float)
        a.setflags(write=False)
        cols[c.name] = a
    resp = np.asarray(y, dtype=np.int64)
    resp.setflags(write=False)
    return Dataset(schema, cols, resp)
