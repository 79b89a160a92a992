"""Analytic stand-in for an iterative generative model.

Candidates start as standard-normal latents at time t=1 and flow toward a
target Gaussian mixture along straight-line (rectified) paths integrated
with Euler steps. Because the target is a Gaussian mixture with shared
isotropic variance, the posterior mean of the endpoint given the current
state is available in closed form, which gives every step an exact
"preview" of where the candidate will land.

Randomness comes from a small counter-based generator (SplitMix64 streams
feeding Box-Muller) rather than numpy's: each candidate owns a stream
derived from (seed, candidate index), so pools are prefix-stable (the pool
for a larger m extends the pool for a smaller m) and the sequence is cheap
to reproduce outside Python.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO53 = float(1 << 53)


def _mix64_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))


def candidate_stream_state(seed: int, index: int) -> int:
    """64-bit stream state for candidate `index` under `seed`."""
    base = _mix64_int(seed & _MASK64)
    return _mix64_int((base + (index + 1) * _GAMMA) & _MASK64)


def _stream_uniforms(states: np.ndarray, count: int) -> np.ndarray:
    """(len(states), count) doubles in (0, 1): output j of a stream is the
    mixed value of state + (j+1)*gamma."""
    steps = (np.arange(1, count + 1, dtype=np.uint64) * np.uint64(_GAMMA))
    with np.errstate(over="ignore"):
        raw = _mix64_array(states[:, None] + steps[None, :])
    return ((raw >> np.uint64(11)).astype(float) + 0.5) / _TWO53


def _stream_normals(states: np.ndarray, dim: int) -> np.ndarray:
    pairs = (dim + 1) // 2
    u = _stream_uniforms(states, 2 * pairs)
    u1, u2 = u[:, 0::2], u[:, 1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * math.pi * u2
    out = np.empty((states.shape[0], 2 * pairs))
    out[:, 0::2] = radius * np.cos(angle)
    out[:, 1::2] = radius * np.sin(angle)
    return out[:, :dim]


@dataclass(frozen=True)
class MixtureSpec:
    """Isotropic Gaussian mixture acting as the conditioning target.

    weights: (C,) positive, summing to 1; means: (C, d); sigma: shared
    per-component standard deviation.
    """

    weights: np.ndarray
    means: np.ndarray
    sigma: float

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        means = np.array(self.means, dtype=float)
        if weights.ndim != 1 or weights.shape[0] < 1:
            raise ValidationError("weights must be a nonempty 1-d vector")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValidationError("weights must be positive and finite")
        if abs(float(weights.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"weights must sum to 1, got {weights.sum()!r}")
        if means.ndim != 2 or means.shape[0] != weights.shape[0]:
            raise ValidationError(
                f"means must be (C, d) with C={weights.shape[0]}, got shape {means.shape}"
            )
        if not np.all(np.isfinite(means)):
            raise ValidationError("means must be finite")
        sigma = float(self.sigma)
        if not math.isfinite(sigma) or sigma <= 0:
            raise ValidationError(f"sigma must be positive and finite, got {self.sigma!r}")
        weights.setflags(write=False)
        means.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dimension(self) -> int:
        return self.means.shape[1]

    def log_density(self, points: np.ndarray) -> np.ndarray:
        """Log mixture density at each row of `points` ((n, d) -> (n,))."""
        x = np.atleast_2d(np.asarray(points, dtype=float))
        d = self.dimension
        sq = np.sum((x[:, None, :] - self.means[None, :, :]) ** 2, axis=-1)
        var = self.sigma ** 2
        log_comp = (
            np.log(self.weights)[None, :]
            - 0.5 * d * math.log(2.0 * math.pi * var)
            - sq / (2.0 * var)
        )
        return _logsumexp(log_comp, axis=1)

    def nearest_mode(self, points: np.ndarray) -> np.ndarray:
        """Index of the closest component mean per row (ties to the lowest)."""
        x = np.atleast_2d(np.asarray(points, dtype=float))
        sq = np.sum((x[:, None, :] - self.means[None, :, :]) ** 2, axis=-1)
        return np.argmin(sq, axis=1)


def default_four_mode_mixture(separation: float = 40.0, sigma: float = 0.15) -> MixtureSpec:
    """Equal-weight four-mode mixture on the corners of a square in 2-d,
    with adjacent modes `separation` apart.

    The default geometry is deliberately wide (separation far above the
    component scale): previews then resolve the eventual mode within a few
    steps, which is the regime progressive pruning is built for.
    """
    h = separation / 2.0
    means = [[h, h], [h, -h], [-h, h], [-h, -h]]
    return MixtureSpec(weights=np.full(4, 0.25), means=means, sigma=sigma)


@dataclass(frozen=True)
class FlowState:
    """One candidate's latent at time t (t=1 pure noise, t=0 terminal)."""

    x: np.ndarray
    t: float
    candidate_id: int

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 1 or not np.all(np.isfinite(x)):
            raise ValidationError("state x must be a finite 1-d vector")
        t = float(self.t)
        if not 0.0 <= t <= 1.0:
            raise ValidationError(f"t must be in [0, 1], got {t!r}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class DenoiseOutput:
    preview: np.ndarray
    next: FlowState


def init_latents(seed: int, m: int, d: int) -> np.ndarray:
    """(m, d) standard-normal latents; row i depends only on (seed, i)."""
    if m < 1 or d < 1:
        raise ValidationError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    states = np.array(
        [candidate_stream_state(seed, i) for i in range(m)], dtype=np.uint64
    )
    return _stream_normals(states, d)


def init_candidates(seed: int, m: int, d: int) -> list[FlowState]:
    """Fresh candidate pool at t=1 with per-candidate seeded streams."""
    latents = init_latents(seed, m, d)
    return [FlowState(x=latents[i], t=1.0, candidate_id=i) for i in range(m)]


def posterior_mean(x_t: np.ndarray, t: float, cond: MixtureSpec) -> np.ndarray:
    """Expected endpoint given the state x_t at time t.

    Under the straight-line forward model x_t = (1-t) * x0 + t * eps with
    x0 drawn from `cond`, the endpoint posterior is a mixture whose
    component means and responsibilities are closed-form; this returns its
    mean. Accepts a single vector (d,) or a batch (n, d).
    """
    t = float(t)
    if not 0.0 < t <= 1.0:
        raise ValidationError(f"posterior_mean needs t in (0, 1], got {t!r}")
    x = np.asarray(x_t, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    if x2.shape[1] != cond.dimension:
        raise ValidationError(
            f"state dimension {x2.shape[1]} does not match mixture dimension {cond.dimension}"
        )

    a = 1.0 - t
    var0 = cond.sigma ** 2
    marg_var = a * a * var0 + t * t  # per-coordinate variance of x_t under one component

    diff = x2[:, None, :] - a * cond.means[None, :, :]
    log_resp = (
        np.log(cond.weights)[None, :]
        - 0.5 * cond.dimension * math.log(2.0 * math.pi * marg_var)
        - np.sum(diff ** 2, axis=-1) / (2.0 * marg_var)
    )
    log_resp = log_resp - _logsumexp(log_resp, axis=1)[:, None]
    resp = np.exp(log_resp)

    comp_mean = (a * var0 * x2[:, None, :] + t * t * cond.means[None, :, :]) / marg_var
    preview = np.sum(resp[:, :, None] * comp_mean, axis=1)
    return preview[0] if single else preview


def denoise_batch(x: np.ndarray, t: float, t_next: float,
                  cond: MixtureSpec) -> tuple[np.ndarray, np.ndarray]:
    """One Euler step for a batch of states: returns (previews, next states).

    The step follows the straight line from the state toward its preview;
    with t_next == 0 it lands exactly on the preview.
    """
    t = float(t)
    t_next = float(t_next)
    if not 0.0 <= t_next < t:
        raise ValidationError(f"need 0 <= t_next < t, got t_next={t_next!r}, t={t!r}")
    preview = posterior_mean(x, t, cond)
    if t_next == 0.0:
        return preview, np.array(preview, copy=True)
    velocity = (x - preview) / t
    return preview, x + (t_next - t) * velocity


def denoise_step(state: FlowState, t_next: float, cond: MixtureSpec) -> DenoiseOutput:
    """Advance a single candidate one step; the preview estimates its final
    sample. Each call corresponds to one model evaluation."""
    preview, nxt = denoise_batch(state.x, state.t, t_next, cond)
    return DenoiseOutput(
        preview=preview,
        next=FlowState(x=nxt, t=float(t_next), candidate_id=state.candidate_id),
    )


def make_timesteps(t_total: int) -> np.ndarray:
    """Uniform time grid from 1 down to 0 with t_total steps (t_total + 1 knots)."""
    if not isinstance(t_total, int) or isinstance(t_total, bool) or t_total < 1:
        raise ValidationError(f"t_total must be an integer >= 1, got {t_total!r}")
    return np.linspace(1.0, 0.0, t_total + 1)


def _logsumexp(values: np.ndarray, axis: int) -> np.ndarray:
    peak = np.max(values, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(values - peak), axis=axis)) + np.squeeze(peak, axis=axis)
    return out
