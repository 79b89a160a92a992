"""Versioned JSON configuration documents.

Each document carries an explicit `schema` field and unknown keys are
rejected outright, so a sweep re-run years later either means the same
thing or fails loudly.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import ConfigError
from .harness import SweepSpec
from .engine import RunConfig
from .scores import ScoreSpec
from .toygen import MixtureSpec

RUN_SCHEMA = "groupinfer/run/v1"
SWEEP_SCHEMA = "groupinfer/sweep/v1"


def _require_keys(doc: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ConfigError(f"{where}: missing required keys {sorted(missing)}")


def mixture_from_dict(doc: Any) -> MixtureSpec:
    if not isinstance(doc, dict):
        raise ConfigError("condition must be an object")
    _require_keys(doc, {"sigma", "components"}, {"sigma", "components"}, "condition")
    components = doc["components"]
    if not isinstance(components, list) or not components:
        raise ConfigError("condition.components must be a nonempty list")
    weights, means = [], []
    for i, comp in enumerate(components):
        if not isinstance(comp, dict):
            raise ConfigError(f"condition.components[{i}] must be an object")
        _require_keys(comp, {"weight", "mean"}, {"weight", "mean"}, f"condition.components[{i}]")
        weights.append(comp["weight"])
        means.append(comp["mean"])
    return MixtureSpec(weights=weights, means=means, sigma=doc["sigma"])


def score_spec_from_dict(doc: Any) -> ScoreSpec:
    if not isinstance(doc, dict):
        raise ConfigError("scores must be an object")
    _require_keys(doc, {"unary", "binary"}, set(), "scores")
    unary = doc.get("unary", "mixture-loglik")
    binary = doc.get("binary", "euclidean")
    if unary == "external" or binary == "external":
        raise ConfigError("external score kinds need a registered callback and cannot come from a file")
    return ScoreSpec(unary_kind=unary, binary_kind=binary)


def run_config_from_dict(doc: Any) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("run config must be an object")
    allowed = {
        "schema", "m", "k", "rho", "steps", "lambda", "seed", "dimension",
        "condition", "scores", "strategy", "normalize_scores",
    }
    _require_keys(doc, allowed, {"schema", "m", "k", "seed", "condition"}, "run config")
    if doc["schema"] != RUN_SCHEMA:
        raise ConfigError(f"run config schema must be {RUN_SCHEMA!r}, got {doc['schema']!r}")
    condition = mixture_from_dict(doc["condition"])
    dimension = doc.get("dimension", condition.dimension)
    return RunConfig(
        m=doc["m"],
        k=doc["k"],
        rho=float(doc.get("rho", 0.5)),
        t_total=doc.get("steps", 20),
        lam=float(doc.get("lambda", 1.0)),
        seed=doc["seed"],
        dimension=dimension,
        condition=condition,
        score_spec=score_spec_from_dict(doc.get("scores", {})),
        strategy=doc.get("strategy", "auto"),
        normalize_scores=bool(doc.get("normalize_scores", False)),
    )


def sweep_spec_from_dict(doc: Any) -> SweepSpec:
    if not isinstance(doc, dict):
        raise ConfigError("sweep config must be an object")
    _require_keys(
        doc, {"schema", "base", "axis", "values", "seeds"},
        {"schema", "base", "axis", "values", "seeds"}, "sweep config",
    )
    if doc["schema"] != SWEEP_SCHEMA:
        raise ConfigError(f"sweep config schema must be {SWEEP_SCHEMA!r}, got {doc['schema']!r}")
    return SweepSpec(
        base=run_config_from_dict(doc["base"]),
        axis=doc["axis"],
        values=tuple(doc["values"]),
        seeds=tuple(doc["seeds"]),
    )


def load_json(text: str, where: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: invalid JSON ({exc})") from exc
