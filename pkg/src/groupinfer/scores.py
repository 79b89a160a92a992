"""Pluggable quality (unary) and diversity (binary) score functions.

Candidates are scored from their preview feature vectors. Built-in unary
kinds measure agreement with the conditioning mixture; built-in binary
kinds measure pairwise dissimilarity. Both sides accept a registered
callback instead, so external pipelines can plug in arbitrary scores (no
gradients are ever requested).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, ValidationError
from .qip import ScoreSet
from .toygen import MixtureSpec

UNARY_KINDS = ("mixture-loglik", "neg-dist-to-nearest-mode", "external")
BINARY_KINDS = ("euclidean", "one-minus-cosine", "mode-label-mismatch", "external")


@dataclass(frozen=True)
class ScoreSpec:
    """Which unary/binary scores to compute, plus open parameters.

    The default binary is one-minus-cosine: like the feature-space cosine
    distances it mimics, it is bounded, so diversity saturates once the
    group covers distinct regions and extra pool size goes into quality.
    `external` kinds dispatch to `unary_fn` / `binary_fn`, which must be
    registered callables taking the (n, d) preview matrix.
    """

    unary_kind: str = "mixture-loglik"
    binary_kind: str = "one-minus-cosine"
    params: dict = field(default_factory=dict)
    unary_fn: Callable[[np.ndarray], np.ndarray] | None = None
    binary_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.unary_kind not in UNARY_KINDS:
            raise ConfigError(f"unknown unary kind {self.unary_kind!r}; choose from {UNARY_KINDS}")
        if self.binary_kind not in BINARY_KINDS:
            raise ConfigError(f"unknown binary kind {self.binary_kind!r}; choose from {BINARY_KINDS}")


def _as_matrix(previews) -> np.ndarray:
    x = np.asarray(previews, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValidationError(f"previews must be a nonempty (n, d) matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("previews contain non-finite entries")
    return x


def unary_scores(previews, condition: MixtureSpec, spec: ScoreSpec) -> np.ndarray:
    """Per-candidate quality scores, one per preview row."""
    x = _as_matrix(previews)
    if spec.unary_kind == "mixture-loglik":
        return condition.log_density(x)
    if spec.unary_kind == "neg-dist-to-nearest-mode":
        sq = np.sum((x[:, None, :] - condition.means[None, :, :]) ** 2, axis=-1)
        return -np.sqrt(np.min(sq, axis=1))
    if spec.unary_fn is None:
        raise ConfigError("unary kind 'external' requires a registered unary_fn callback")
    out = np.asarray(spec.unary_fn(x), dtype=float)
    if out.shape != (x.shape[0],):
        raise ValidationError(f"external unary callback returned shape {out.shape}, expected ({x.shape[0]},)")
    if not np.all(np.isfinite(out)):
        raise ValidationError("external unary callback returned non-finite scores")
    return out


def binary_scores(previews, condition: MixtureSpec, spec: ScoreSpec) -> np.ndarray:
    """Symmetric zero-diagonal pairwise dissimilarity matrix over previews."""
    x = _as_matrix(previews)
    n = x.shape[0]
    if spec.binary_kind == "euclidean":
        diff = x[:, None, :] - x[None, :, :]
        return np.sqrt(np.sum(diff ** 2, axis=-1))
    if spec.binary_kind == "one-minus-cosine":
        norms = np.sqrt(np.sum(x ** 2, axis=1))
        nonzero = norms > 0.0
        unit = np.zeros_like(x)
        unit[nonzero] = x[nonzero] / norms[nonzero, None]
        cos = unit @ unit.T
        out = np.clip(1.0 - cos, 0.0, 2.0)
        # Pairs touching a zero vector have no defined angle; score them 1.
        out[~nonzero, :] = 1.0
        out[:, ~nonzero] = 1.0
        out = np.triu(out, 1)
        out = out + out.T  # mirror the upper triangle for exact symmetry
        return out
    if spec.binary_kind == "mode-label-mismatch":
        labels = condition.nearest_mode(x)
        return (labels[:, None] != labels[None, :]).astype(float)
    if spec.binary_fn is None:
        raise ConfigError("binary kind 'external' requires a registered binary_fn callback")
    out = np.asarray(spec.binary_fn(x), dtype=float)
    if out.shape != (n, n):
        raise ValidationError(f"external binary callback returned shape {out.shape}, expected ({n}, {n})")
    if not np.all(np.isfinite(out)):
        raise ValidationError("external binary callback returned non-finite scores")
    if not np.array_equal(out, out.T) or np.any(np.diagonal(out) != 0.0):
        raise ValidationError("external binary callback must return a symmetric zero-diagonal matrix")
    return out


def assemble(unary, binary) -> ScoreSet:
    """Validate and pack score arrays into a ScoreSet."""
    return ScoreSet(unary=unary, binary=binary)
