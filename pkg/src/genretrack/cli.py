"""Command-line pipeline: simulate -> build-profiles -> track -> recommend -> evaluate.

Every run is deterministic: outputs are pure functions of the inputs and the
effective parameters, numeric text is printed at 17 significant digits, and
each command writes a ``<command>.manifest.txt`` recording the effective
parameter values and where each came from (flag, config file, or default).
Parameter precedence is defaults < config file < command-line flags; config
files are plain ``key=value`` lines (``#`` starts a comment line).

Commands validate all inputs and compute results in memory before creating or
writing any output file, so a failing run leaves no partial artifacts.
Exit codes: 0 success, 2 usage or input validation error, 1 unexpected
failure.  Diagnostics are one line on stderr.
"""

from __future__ import annotations

import argparse
import datetime
import math
import re
import sys
from pathlib import Path
from typing import Callable

from .evaluation import evaluate_many, write_histogram, write_report, write_summary
from .ioutil import fmt, safe_filename
from .profiles import build_series, read_events, read_profiles, write_events, write_profiles
from .recommender import concept_deltas, recommend, write_recommendations
from .space import read_vocabulary, write_vocabulary
from .synthetic import DAY_SECONDS, ScenarioConfig, generate_scenario
from .tracking import (
    build_model,
    read_final_states,
    read_track_record,
    track_series,
    track_series_decoupled,
    write_final_states,
    write_track_record,
)

__all__ = ["main"]


class CliError(Exception):
    """Input or usage problem; reported on one line, exit code 2."""


def _bool_from_text(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


# dest -> (converter, default); required keys map to a None default and must
# arrive via flag or config file.  "out" is required everywhere.
_PARAMS: dict[str, dict[str, tuple]] = {
    "simulate": {
        "d": (int, 44),
        "k": (int, 35),
        "users": (int, 50),
        "regime": (str, "smooth_drift"),
        "q_true": (float, 1e-3),
        "r_true": (float, 1e-2),
        "programs_per_day": (int, 3),
        "seed": (int, 0),
        "out": (str, None),
    },
    "build-profiles": {
        "vocabulary": (str, None),
        "events": (str, None),
        "instants": (str, None),
        "decay": (float, 1.0),
        "normalize": (_bool_from_text, False),
        "seed": (int, 0),
        "out": (str, None),
    },
    "track": {
        "vocabulary": (str, None),
        "profiles": (str, None),
        "T": (float, 1.0),
        "alpha": (float, 1.0),
        "q": (float, 1e-3),
        "r": (float, 1e-2),
        "p0": (float, 10.0),
        "q_structure": (str, "white_accel"),
        "decoupled": (_bool_from_text, False),
        "seed": (int, 0),
        "out": (str, None),
    },
    "recommend": {
        "vocabulary": (str, None),
        "final_states": (str, None),
        "profiles": (str, None),
        "events": (str, None),
        "theta": (float, 0.05),
        "date": (str, ""),
        "seed": (int, 0),
        "out": (str, None),
    },
    "evaluate": {
        "vocabulary": (str, None),
        "profiles": (str, None),
        "tracks": (str, None),
        "tau": (float, 0.15),
        "seed": (int, 0),
        "out": (str, None),
    },
}

_FLAG_HELP = {
    "d": "genre-space dimension",
    "k": "number of daily snapshot instants",
    "users": "number of simulated users",
    "regime": "trajectory regime: smooth_drift, regime_change, or bursty",
    "q_true": "generative process-noise scale",
    "r_true": "generative measurement-noise variance",
    "programs_per_day": "baseline watch events per user per day",
    "seed": "random seed (data generation only)",
    "out": "output directory (created if absent)",
    "vocabulary": "genre vocabulary file, one label per line",
    "events": "watch-event log CSV",
    "instants": "snapshot instants file, one epoch-seconds value per line",
    "decay": "per-update profile decay factor in [0, 1]",
    "normalize": "scale each profile snapshot to unit L2 norm",
    "profiles": "profile series CSV",
    "T": "filter inter-sample interval",
    "alpha": "transition diagonal scalar",
    "q": "filter process-noise scale",
    "r": "filter measurement-noise variance",
    "p0": "initial covariance scale",
    "q_structure": "process-noise structure: white_accel or identity",
    "decoupled": "run d independent per-axis filters instead of the dense filter",
    "final_states": "final-state CSV written by track",
    "theta": "promotion/demotion threshold on interest deltas",
    "date": "recommendation day: integer day index or ISO date (default: last event day)",
    "tracks": "directory of track CSVs written by track",
    "tau": "cosine-distance quality threshold",
}

_COMMAND_HELP = {
    "simulate": "generate a synthetic scenario (vocabulary, events, profiles, truth)",
    "build-profiles": "fold a watch-event log into per-user profile series",
    "track": "run the Kalman predictor over profile series",
    "recommend": "classify predicted-vs-calculated deltas into genre recommendations",
    "evaluate": "score track output against the profile series it tracked",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genretrack",
        description="Track user interest through genre space and recommend rising genres.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, params in _PARAMS.items():
        sub = subparsers.add_parser(command, help=_COMMAND_HELP[command])
        sub.add_argument(
            "--config",
            default=argparse.SUPPRESS,
            help="key=value config file; flags override it",
        )
        for dest, (conv, default) in params.items():
            flag = "--" + dest.replace("_", "-")
            kwargs: dict = {"dest": dest, "default": argparse.SUPPRESS}
            if conv is _bool_from_text:
                kwargs["action"] = "store_true"
            else:
                kwargs["type"] = conv
                kwargs["metavar"] = dest.upper()
            note = "required" if default is None else f"default {default}"
            kwargs["help"] = f"{_FLAG_HELP[dest]} ({note})"
            sub.add_argument(flag, **kwargs)
    return parser


def _read_config_file(path: str, command: str) -> dict:
    params = _PARAMS[command]
    values: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from exc
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        if key not in params:
            raise CliError(f"{path}:{lineno}: unknown key {key!r} for {command}")
        conv = params[key][0]
        try:
            values[key] = conv(raw_value.strip())
        except ValueError as exc:
            raise CliError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _merge_params(command: str, args: argparse.Namespace) -> tuple[dict, dict]:
    """Apply precedence defaults < config file < flags; track each value's source."""
    params = _PARAMS[command]
    effective = {}
    sources = {}
    for dest, (_, default) in params.items():
        effective[dest] = default
        sources[dest] = "default"
    given = vars(args)
    if "config" in given:
        for key, value in _read_config_file(given["config"], command).items():
            effective[key] = value
            sources[key] = "config"
    for key, value in given.items():
        if key in params:
            effective[key] = value
            sources[key] = "flag"
    missing = sorted(k for k, v in effective.items() if v is None)
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise CliError(f"missing required parameters for {command}: {flags}")
    return effective, sources


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return fmt(value)
    return str(value)


# Parameters holding filesystem paths.  Manifests record only their basenames
# ("out" not even that) so identical runs into different directories produce
# byte-identical manifests.
_PATH_PARAMS = {"out", "vocabulary", "events", "instants", "profiles", "final_states", "tracks"}


def _write_manifest(outdir: Path, command: str, effective: dict, sources: dict) -> None:
    lines = [f"command={command}"]
    for key in sorted(effective):
        if key == "out":
            continue
        value = effective[key]
        if key in _PATH_PARAMS:
            value = Path(value).name
        lines.append(f"{key}={_format_value(value)}")
        lines.append(f"{key}.source={sources[key]}")
    (outdir / f"{command}.manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _make_outdir(effective: dict) -> Path:
    outdir = Path(effective["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _read_instants_file(path: str) -> list[float]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read instants file: {exc}") from exc
    instants = []
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            instants.append(float(line))
        except ValueError:
            raise CliError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not instants:
        raise CliError(f"instants file {path} contains no instants")
    return instants


_EPOCH = datetime.date(1970, 1, 1)


def _parse_day(raw: str) -> int:
    if re.fullmatch(r"[+-]?\d+", raw):
        return int(raw)
    try:
        day = datetime.date.fromisoformat(raw)
    except ValueError:
        raise CliError(f"date must be a day index or an ISO date, got {raw!r}") from None
    return (day - _EPOCH).days


def _day_to_iso(day: int) -> str:
    return (_EPOCH + datetime.timedelta(days=day)).isoformat()


def _event_day(timestamp: float) -> int:
    return int(math.floor(timestamp / DAY_SECONDS))


Writer = Callable[[Path], None]


def cmd_simulate(effective: dict) -> Writer:
    config = ScenarioConfig(
        d=effective["d"],
        K=effective["k"],
        n_users=effective["users"],
        regime=effective["regime"],
        q_true=effective["q_true"],
        r_true=effective["r_true"],
        seed=effective["seed"],
    )
    scenario = generate_scenario(config, programs_per_day=effective["programs_per_day"])

    def write(outdir: Path) -> None:
        write_vocabulary(scenario.space, outdir / "vocabulary.txt")
        (outdir / "instants.txt").write_text(
            "\n".join(fmt(t) for t in scenario.instants) + "\n", encoding="utf-8"
        )
        write_events(scenario.events, outdir / "events.csv")
        write_profiles(scenario.observed(), scenario.space, outdir / "profiles.csv")
        write_profiles(
            {u.user_id: u.truth for u in scenario.users}, scenario.space, outdir / "truth.csv"
        )

    return write


def cmd_build_profiles(effective: dict) -> Writer:
    space = read_vocabulary(effective["vocabulary"])
    events = read_events(effective["events"])
    if not events:
        raise CliError(f"event log {effective['events']} contains no events")
    instants = _read_instants_file(effective["instants"])
    series = build_series(
        events, space, instants, decay=effective["decay"], normalize=effective["normalize"]
    )
    if not series:
        raise CliError("no profile series could be built from the given events")

    def write(outdir: Path) -> None:
        write_profiles(series, space, outdir / "built_profiles.csv")

    return write


def cmd_track(effective: dict) -> Writer:
    space = read_vocabulary(effective["vocabulary"])
    series_by_user = read_profiles(effective["profiles"], space)
    if not series_by_user:
        raise CliError(f"profile table {effective['profiles']} contains no series")
    model = build_model(
        d=space.d,
        T=effective["T"],
        alpha=effective["alpha"],
        q=effective["q"],
        r=effective["r"],
        q_structure=effective["q_structure"],
    )
    runner = track_series_decoupled if effective["decoupled"] else track_series
    records = []
    final_states = {}
    for user_id in sorted(series_by_user):
        record = runner(model, series_by_user[user_id], p0=effective["p0"])
        records.append(record)
        final_states[user_id] = record.final_state

    # Per-user file names, deduplicated if sanitizing ever collides two ids.
    names_taken: set[str] = set()
    files = []
    for record in records:
        base = safe_filename(record.user_id) or "user"
        name = f"{base}.csv"
        suffix = 2
        while name in names_taken:
            name = f"{base}_{suffix}.csv"
            suffix += 1
        names_taken.add(name)
        files.append((record, name))

    def write(outdir: Path) -> None:
        tracks_dir = outdir / "tracks"
        tracks_dir.mkdir(exist_ok=True)
        index_lines = ["user_id,file"]
        for record, name in files:
            write_track_record(record, space, tracks_dir / name)
            index_lines.append(f"{record.user_id},{name}")
        (tracks_dir / "index.csv").write_text("\n".join(index_lines) + "\n", encoding="utf-8")
        write_final_states(final_states, space, outdir / "final_states.csv")

    return write


def cmd_recommend(effective: dict) -> Writer:
    space = read_vocabulary(effective["vocabulary"])
    states = read_final_states(effective["final_states"], space)
    if not states:
        raise CliError(f"final-state file {effective['final_states']} contains no users")
    series_by_user = read_profiles(effective["profiles"], space)
    events = read_events(effective["events"])
    if effective["date"]:
        day = _parse_day(effective["date"])
    else:
        if not events:
            raise CliError("event log is empty; pass --date to pick the recommendation day")
        day = max(_event_day(ev.timestamp) for ev in events)
    date_str = _day_to_iso(day)

    watched_today: dict[str, set[str]] = {}
    for ev in events:
        if _event_day(ev.timestamp) == day:
            watched_today.setdefault(ev.user_id, set()).update(ev.genres)

    recommendations = []
    for user_id in sorted(states):
        if user_id not in series_by_user:
            raise CliError(f"user {user_id!r} has a final state but no profile series")
        estimated = states[user_id][: space.d]
        calculated = series_by_user[user_id].profiles[-1]
        deltas = concept_deltas(estimated, calculated, theta=effective["theta"])
        recommendations.append(
            recommend(deltas, watched_today.get(user_id, set()), space, user_id, date_str)
        )

    def write(outdir: Path) -> None:
        write_recommendations(recommendations, outdir / "recommendations.jsonl")

    return write


def cmd_evaluate(effective: dict) -> Writer:
    space = read_vocabulary(effective["vocabulary"])
    observations = read_profiles(effective["profiles"], space)
    tracks_dir = Path(effective["tracks"])
    index_path = tracks_dir / "index.csv"
    if not index_path.is_file():
        raise CliError(f"no track index at {index_path}")
    records = []
    lines = index_path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "user_id,file":
        raise CliError(f"{index_path}: malformed track index")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        user_id, _, name = line.partition(",")
        if not name:
            raise CliError(f"{index_path}:{lineno}: expected user_id,file")
        records.append(read_track_record(tracks_dir / name, space, user_id))
    if not records:
        raise CliError(f"track index {index_path} lists no users")
    try:
        pooled = evaluate_many(records, observations, tau=effective["tau"])
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from exc

    def write(outdir: Path) -> None:
        write_report(pooled, outdir / "report.csv")
        write_summary(pooled, outdir / "summary.txt")
        write_histogram(pooled, outdir / "histogram.csv")

    return write


_HANDLERS = {
    "simulate": cmd_simulate,
    "build-profiles": cmd_build_profiles,
    "track": cmd_track,
    "recommend": cmd_recommend,
    "evaluate": cmd_evaluate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        effective, sources = _merge_params(command, args)
        # Validate and compute everything first; only then touch the filesystem.
        write_outputs = _HANDLERS[command](effective)
        outdir = _make_outdir(effective)
        write_outputs(outdir)
        _write_manifest(outdir, command, effective, sources)
    except (CliError, ValueError, KeyError, FileNotFoundError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"genretrack {command}: error: {message}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"genretrack {command}: unexpected error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
