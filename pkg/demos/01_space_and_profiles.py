"""Fold a small watch-event log into per-user interest profiles.

Each watch event spreads its watched fraction evenly across the genres of
the program.  Profiles are cumulative, sampled at chosen snapshot instants.
"""

import numpy as np

import genretrack as gt

space = gt.new_space(["Documentary", "Drama", "Entertainment", "Sports"])
print(f"genre space: {space.names} (d={space.d})")

events = [
    gt.WatchEvent("ana", timestamp=100.0, genres=frozenset({"Drama"}), watched_fraction=1.0),
    gt.WatchEvent("ana", timestamp=3700.0, genres=frozenset({"Drama", "Entertainment"}), watched_fraction=0.5),
    gt.WatchEvent("ana", timestamp=7200.0, genres=frozenset({"Sports"}), watched_fraction=0.8),
    gt.WatchEvent("ben", timestamp=2000.0, genres=frozenset({"Documentary"}), watched_fraction=0.9),
    gt.WatchEvent("ben", timestamp=8000.0, genres=frozenset({"Documentary", "Drama"}), watched_fraction=1.0),
]

instants = np.array([3600.0, 7200.0, 10800.0])
series = gt.build_series(events, space, instants)

for user_id, s in sorted(series.items()):
    print(f"\nuser {user_id}: {s.n_instants} snapshots")
    header = "instant".rjust(8) + "".join(name.rjust(15) for name in space.names)
    print(header)
    for t, row in zip(s.instants, s.profiles):
        print(f"{t:8.0f}" + "".join(f"{v:15.3f}" for v in row))

# a single event moves only the axes of the genres it carries
before = space.zeros()
after = gt.interest_update(before, events[0], space)
print("\none full Drama watch from a cold start:", after)

# decay < 1 makes old interest fade as new events arrive
faded = gt.build_series(events, space, instants, decay=0.9)["ana"]
print("ana with decay 0.9, last snapshot:", np.round(faded.profiles[-1], 3))
