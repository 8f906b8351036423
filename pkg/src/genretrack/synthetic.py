"""Seeded synthetic scenarios: latent interest trajectories, noisy daily
snapshots, and watch-event streams that approximately reproduce them.

Each simulated user is a latent point moving through the genre space under the
same kinematic model the tracker assumes: per axis, position/velocity/
acceleration propagate through the constant-acceleration transition with white
acceleration noise of variance ``q_true``.  The observed daily snapshot is the
latent position plus N(0, r_true) measurement noise.  Both are clamped at zero
since interest cannot be negative; the clamp is inactive for the default
parameter ranges (initial positions in [0,1] dwarf the accumulated noise), so
the generated data stays effectively linear.  Three regimes:

* ``smooth_drift``: the plain model, nothing else.
* ``regime_change``: a one-off random velocity kick halfway through, an abrupt
  taste shift the filter must re-acquire.
* ``bursty``: heavy-tailed (Student-t, df=2) spikes added to a random ~5% of
  observation entries, modelling one-off binges.

Everything is driven by ``numpy.random.default_rng`` seeded through
``SeedSequence(seed, spawn_key=(user_index, stream))``, so output is a pure
function of the config: same config, same bytes out, serial or parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .profiles import ProfileSeries, WatchEvent
from .space import ConceptSpace, new_space
from .tracking import _transition_block

__all__ = [
    "DAY_SECONDS",
    "REGIMES",
    "ScenarioConfig",
    "SimulatedUser",
    "ScenarioData",
    "placeholder_vocabulary",
    "day_instants",
    "generate_users",
    "generate_trajectories",
    "generate_events",
    "generate_scenario",
]

DAY_SECONDS = 86400
REGIMES = ("smooth_drift", "regime_change", "bursty")

# Scale of the initial velocity/acceleration draw relative to sqrt(q_true).
_INIT_KINEMATIC_SCALE = 0.01
# Velocity kick magnitude for the regime_change regime.
_KICK_SCALE = 0.05
# Spike probability per observation entry for the bursty regime.
_SPIKE_PROB = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one synthetic scenario; the seed fixes every byte.

    ``d`` is the genre-space dimension, ``K`` the number of daily snapshot
    instants.  Defaults give the desk-scale reference scenario.
    """

    d: int = 44
    K: int = 35
    n_users: int = 50
    regime: str = "smooth_drift"
    q_true: float = 1e-3
    r_true: float = 1e-2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.K < 2:
            raise ValueError(f"K must be >= 2, got {self.K}")
        if self.n_users < 1:
            raise ValueError(f"n_users must be >= 1, got {self.n_users}")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.q_true < 0:
            raise ValueError(f"q_true must be >= 0, got {self.q_true}")
        if self.r_true < 0:
            raise ValueError(f"r_true must be >= 0, got {self.r_true}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class SimulatedUser:
    """Latent truth and noisy observations for one user, on the same day grid."""

    user_id: str
    truth: ProfileSeries
    observed: ProfileSeries


@dataclass(frozen=True)
class ScenarioData:
    """A complete generated scenario: vocabulary, users, and their watch events."""

    config: ScenarioConfig
    space: ConceptSpace
    users: tuple[SimulatedUser, ...]
    events: tuple[WatchEvent, ...]
    programs_per_day: int

    @property
    def instants(self) -> np.ndarray:
        return self.users[0].truth.instants.copy()

    def observed(self) -> dict[str, ProfileSeries]:
        return {u.user_id: u.observed for u in self.users}


def placeholder_vocabulary(d: int) -> tuple[str, ...]:
    """Zero-padded generic genre labels, e.g. genre_00 .. genre_43."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    width = max(2, len(str(d - 1)))
    return tuple(f"genre_{j:0{width}d}" for j in range(d))


def day_instants(n_days: int) -> np.ndarray:
    """Snapshot instants at the last second of each day: day k ends at (k+1)*86400 - 1."""
    if n_days < 1:
        raise ValueError(f"n_days must be >= 1, got {n_days}")
    return np.array([(k + 1) * DAY_SECONDS - 1.0 for k in range(n_days)])


def _user_rng(seed: int, user_index: int, stream: int) -> np.random.Generator:
    # stream 0: trajectory draws, stream 1: event draws.  Separate streams keep
    # event generation from perturbing the trajectory sequence.
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(user_index, stream)))


def _simulate_user(config: ScenarioConfig, user_index: int) -> SimulatedUser:
    d = config.d
    rng = _user_rng(config.seed, user_index, 0)
    A3 = _transition_block(T=1.0, alpha=1.0)
    g = np.array([0.5, 1.0, 1.0])  # T=1 white-acceleration injection vector

    sigma_a = math.sqrt(config.q_true)
    sigma_z = math.sqrt(config.r_true)
    kick_step = config.K // 2

    # Per-axis kinematic rows: position, velocity, acceleration.
    state = np.empty((d, 3))
    state[:, 0] = rng.uniform(0.0, 1.0, d)
    state[:, 1] = rng.normal(0.0, _INIT_KINEMATIC_SCALE * sigma_a, d)
    state[:, 2] = rng.normal(0.0, _INIT_KINEMATIC_SCALE * sigma_a, d)

    truth = np.empty((config.K, d))
    observed = np.empty((config.K, d))
    for k in range(config.K):
        if k > 0:
            if config.regime == "regime_change" and k == kick_step:
                state[:, 1] += rng.normal(0.0, _KICK_SCALE, d)
            accel_noise = rng.normal(0.0, sigma_a, d)
            state = state @ A3.T + g[None, :] * accel_noise[:, None]
            state[:, 0] = np.maximum(state[:, 0], 0.0)
        truth[k] = state[:, 0]
        z = state[:, 0] + rng.normal(0.0, sigma_z, d)
        if config.regime == "bursty":
            spike_scale = 5.0 * sigma_z if sigma_z > 0 else 0.05
            mask = rng.random(d) < _SPIKE_PROB
            spikes = rng.standard_t(2, d) * spike_scale
            z = z + np.where(mask, spikes, 0.0)
        observed[k] = np.maximum(z, 0.0)

    instants = day_instants(config.K)
    user_id = f"u{user_index:04d}"
    return SimulatedUser(
        user_id=user_id,
        truth=ProfileSeries(user_id=user_id, instants=instants, profiles=truth),
        observed=ProfileSeries(user_id=user_id, instants=instants.copy(), profiles=observed),
    )


def generate_users(config: ScenarioConfig) -> tuple[SimulatedUser, ...]:
    """Simulate every user, keeping both the latent truth and the observations.

    User i is driven by SeedSequence(seed, spawn_key=(i, 0)), so any one user
    can be regenerated without the others and adding users never changes
    existing ones.
    """
    return tuple(_simulate_user(config, i) for i in range(config.n_users))


def generate_trajectories(config: ScenarioConfig) -> dict[str, ProfileSeries]:
    """Observed daily snapshot series per user id, sorted by user id."""
    return {u.user_id: u.observed for u in generate_users(config)}


def generate_events(
    trajectories: Mapping[str, ProfileSeries],
    space: ConceptSpace,
    programs_per_day: int = 3,
    seed: int = 0,
) -> list[WatchEvent]:
    """Derive watch-event streams whose built profiles approximate the series.

    Day k of a series contributes its non-negative increment over day k-1 (day
    0 contributes the full first row).  That mass is split over
    ``programs_per_day`` single-genre events, more if needed to keep
    watched_fraction <= 1, each event's genre drawn categorically in
    proportion to the per-axis increment.  Days with no positive increment
    produce no events.  Timestamps are integer seconds, evenly spread inside
    the day, strictly before the day's snapshot instant.  Users are processed
    in sorted id order with a per-index random stream, so the output is
    deterministic in (trajectories, programs_per_day, seed).
    """
    if programs_per_day < 1:
        raise ValueError(f"programs_per_day must be >= 1, got {programs_per_day}")
    events: list[WatchEvent] = []
    for index, user_id in enumerate(sorted(trajectories)):
        series = trajectories[user_id]
        Z = series.profiles
        if Z.shape[1] != space.d:
            raise ValueError(
                f"series for {user_id!r} has dimension {Z.shape[1]}, space has d={space.d}"
            )
        if np.any(Z < 0):
            raise ValueError(f"series for {user_id!r} has negative entries")
        rng = _user_rng(seed, index, 1)
        for k in range(Z.shape[0]):
            delta = Z[k] - Z[k - 1] if k > 0 else Z[k]
            delta = np.maximum(delta, 0.0)
            total = float(delta.sum())
            if total <= 0.0:
                continue
            n = max(programs_per_day, math.ceil(total))
            fraction = total / n
            axes = rng.choice(space.d, size=n, p=delta / total)
            for i in range(n):
                offset = ((i + 1) * DAY_SECONDS) // (n + 1)
                events.append(
                    WatchEvent(
                        user_id=user_id,
                        timestamp=float(k * DAY_SECONDS + offset),
                        genres=frozenset({space.names[int(axes[i])]}),
                        watched_fraction=fraction,
                    )
                )
    return events


def generate_scenario(config: ScenarioConfig, programs_per_day: int = 3) -> ScenarioData:
    """Generate the full scenario: placeholder vocabulary, users, and all events."""
    space = new_space(placeholder_vocabulary(config.d))
    users = generate_users(config)
    events = generate_events(
        {u.user_id: u.observed for u in users}, space, programs_per_day, config.seed
    )
    return ScenarioData(
        config=config,
        space=space,
        users=users,
        events=tuple(events),
        programs_per_day=programs_per_day,
    )
