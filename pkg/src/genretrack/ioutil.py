"""Small shared helpers for deterministic text output and timestamp parsing."""

from __future__ import annotations

import re
from datetime import datetime, timezone

__all__ = ["fmt", "parse_timestamp", "safe_filename"]


def fmt(x: float) -> str:
    """Format a float at 17 significant digits so files round-trip exactly."""
    return f"{float(x):.17g}"


def parse_timestamp(raw: str) -> float:
    """Parse epoch seconds (plain number) or an ISO-8601 datetime to epoch seconds.

    Naive ISO datetimes are taken as UTC.
    """
    text = raw.strip()
    try:
        return float(text)
    except ValueError:
        pass
    iso = text.replace("Z", "+00:00")
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError:
        raise ValueError(f"unparseable timestamp: {raw!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def safe_filename(name: str) -> str:
    """Map an arbitrary identifier to a filesystem-safe token."""
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)
