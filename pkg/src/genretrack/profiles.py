"""Turn raw watch events into per-user, per-instant interest vectors.

Each watch event bumps the interest scores of the genres attached to the
program, proportionally to how much of the program was actually watched.
Snapshots of the running profile taken at a fixed grid of instants form the
observation sequence that the tracker consumes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ioutil import fmt, parse_timestamp
from .space import ConceptSpace, UnknownGenreError

__all__ = [
    "WatchEvent",
    "ProfileSeries",
    "interest_update",
    "build_series",
    "read_events",
    "write_events",
    "read_profiles",
    "write_profiles",
]


@dataclass(frozen=True)
class WatchEvent:
    """One viewing record: who watched what kind of program, and how much of it.

    ``watched_fraction`` is the fraction of the program duration actually
    viewed, in [0, 1].  ``genres`` is the non-empty set of genre labels the
    program is tagged with.
    """

    user_id: str
    timestamp: float
    genres: frozenset[str]
    watched_fraction: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "genres", frozenset(self.genres))
        if not self.user_id:
            raise ValueError("event user_id must be non-empty")
        if not self.genres:
            raise ValueError(f"event for {self.user_id!r} has no genres")
        if not np.isfinite(self.timestamp):
            raise ValueError(f"event for {self.user_id!r} has non-finite timestamp")
        if not 0.0 <= self.watched_fraction <= 1.0:
            raise ValueError(
                f"watched_fraction must be in [0, 1], got {self.watched_fraction!r}"
            )


@dataclass(frozen=True, eq=False)
class ProfileSeries:
    """A user's interest vectors sampled at strictly increasing instants.

    ``profiles`` has one row per instant; row k is the profile observed at
    ``instants[k]``.
    """

    user_id: str
    instants: np.ndarray
    profiles: np.ndarray

    def __post_init__(self) -> None:
        instants = np.asarray(self.instants, dtype=float)
        profiles = np.asarray(self.profiles, dtype=float)
        object.__setattr__(self, "instants", instants)
        object.__setattr__(self, "profiles", profiles)
        if instants.ndim != 1 or instants.size < 1:
            raise ValueError("instants must be a non-empty 1-D sequence")
        if profiles.ndim != 2 or profiles.shape[0] != instants.size:
            raise ValueError(
                f"profiles shape {profiles.shape} does not match "
                f"{instants.size} instants"
            )
        if np.any(np.diff(instants) <= 0):
            raise ValueError("instants must be strictly increasing")
        if not np.all(np.isfinite(profiles)):
            raise ValueError(f"profiles for {self.user_id!r} contain non-finite values")

    @property
    def n_instants(self) -> int:
        return int(self.instants.size)

    @property
    def d(self) -> int:
        return int(self.profiles.shape[1])


def interest_update(
    profile: np.ndarray,
    event: WatchEvent,
    space: ConceptSpace,
    decay: float = 1.0,
) -> np.ndarray:
    """Fold one watch event into a profile.

    Every axis first decays by ``decay``; each genre of the event then gains
    ``watched_fraction / n_genres``, so a fully watched single-genre program
    adds exactly 1 to its axis.  Entries stay nonnegative.
    """
    profile = np.asarray(profile, dtype=float)
    if profile.shape != (space.d,):
        raise ValueError(f"profile shape {profile.shape} does not match d={space.d}")
    if not 0.0 <= decay <= 1.0:
        raise ValueError(f"decay must be in [0, 1], got {decay!r}")
    try:
        axes = space.axes(event.genres)
    except UnknownGenreError as exc:
        raise UnknownGenreError(f"{exc.args[0]} in event {event!r}") from None
    updated = decay * profile
    updated[axes] += event.watched_fraction / len(event.genres)
    return updated


def _event_sort_key(event: WatchEvent):
    # Timestamp ties broken by content so any input permutation folds the same.
    return (event.timestamp, tuple(sorted(event.genres)), event.watched_fraction)


def build_series(
    events: Iterable[WatchEvent],
    space: ConceptSpace,
    instants: Sequence[float],
    decay: float = 1.0,
    normalize: bool = False,
) -> dict[str, ProfileSeries]:
    """Fold a watch-event log into per-user profile series.

    Events are sorted by timestamp internally (input order never matters) and
    applied in order; the running profile is snapshotted at each instant,
    counting events with ``timestamp <= instant``.  A user enters the output
    at the first instant with at least one contributing event, so no series
    ever starts with an all-zero history; users with no usable events are
    omitted.  With ``normalize=True`` each snapshot is scaled to unit L2 norm.
    """
    grid = np.asarray(list(instants), dtype=float)
    if grid.size == 0:
        raise ValueError("instants list is empty")
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("instants must be strictly increasing")
    if not 0.0 <= decay <= 1.0:
        raise ValueError(f"decay must be in [0, 1], got {decay!r}")

    by_user: dict[str, list[WatchEvent]] = {}
    for event in events:
        for label in event.genres:
            if label not in space:
                raise UnknownGenreError(
                    f"unknown genre label: {label!r} in event {event!r}"
                )
        by_user.setdefault(event.user_id, []).append(event)

    out: dict[str, ProfileSeries] = {}
    for user_id in sorted(by_user):
        ordered = sorted(by_user[user_id], key=_event_sort_key)
        profile = space.zeros()
        consumed = 0
        kept_instants: list[float] = []
        kept_profiles: list[np.ndarray] = []
        for t in grid:
            while consumed < len(ordered) and ordered[consumed].timestamp <= t:
                profile = interest_update(profile, ordered[consumed], space, decay)
                consumed += 1
            if consumed > 0:
                kept_instants.append(float(t))
                kept_profiles.append(profile.copy())
        if not kept_profiles:
            continue
        mat = np.vstack(kept_profiles)
        if normalize:
            norms = np.linalg.norm(mat, axis=1, keepdims=True)
            np.divide(mat, norms, out=mat, where=norms > 0)
        out[user_id] = ProfileSeries(user_id, np.array(kept_instants), mat)
    return out


# ---------------------------------------------------------------------------
# file formats
#
# Watch-event log: CSV with header user_id,timestamp,genres,watched_fraction;
# genres is a semicolon-joined label list, timestamps are epoch seconds or
# ISO-8601 on input and epoch seconds on output.
#
# Profile table: CSV with header user_id,instant,<genre labels...>; one row
# per (user, instant), floats at full precision.
# ---------------------------------------------------------------------------

_EVENT_HEADER = ["user_id", "timestamp", "genres", "watched_fraction"]


def read_events(path: str | Path) -> list[WatchEvent]:
    events: list[WatchEvent] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"event log {path} is empty")
        if [h.strip() for h in header] != _EVENT_HEADER:
            raise ValueError(
                f"event log {path} has header {header!r}, expected {_EVENT_HEADER!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            user_id, raw_ts, raw_genres, raw_fraction = row
            labels = frozenset(g.strip() for g in raw_genres.split(";") if g.strip())
            try:
                events.append(
                    WatchEvent(
                        user_id=user_id,
                        timestamp=parse_timestamp(raw_ts),
                        genres=labels,
                        watched_fraction=float(raw_fraction),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return events


def write_events(events: Iterable[WatchEvent], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_EVENT_HEADER)
        for event in events:
            writer.writerow(
                [
                    event.user_id,
                    fmt(event.timestamp),
                    ";".join(sorted(event.genres)),
                    fmt(event.watched_fraction),
                ]
            )


def write_profiles(
    series: Mapping[str, ProfileSeries],
    space: ConceptSpace,
    path: str | Path,
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["user_id", "instant", *space.names])
        for user_id in sorted(series):
            ps = series[user_id]
            if ps.d != space.d:
                raise ValueError(
                    f"series for {user_id!r} has d={ps.d}, space has d={space.d}"
                )
            for t, row in zip(ps.instants, ps.profiles):
                writer.writerow([user_id, fmt(t), *(fmt(x) for x in row)])


def read_profiles(path: str | Path, space: ConceptSpace) -> dict[str, ProfileSeries]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"profile table {path} is empty")
        expected = ["user_id", "instant", *space.names]
        if header != expected:
            raise ValueError(
                f"profile table {path} columns do not match the vocabulary: "
                f"got {header[:4]}..., expected {expected[:4]}..."
            )
        instants: dict[str, list[float]] = {}
        rows: dict[str, list[list[float]]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 + space.d:
                raise ValueError(
                    f"{path}:{lineno}: expected {2 + space.d} fields, got {len(row)}"
                )
            user_id = row[0]
            instants.setdefault(user_id, []).append(float(row[1]))
            rows.setdefault(user_id, []).append([float(x) for x in row[2:]])
    return {
        user_id: ProfileSeries(user_id, np.array(instants[user_id]), np.array(rows[user_id]))
        for user_id in sorted(rows)
    }
