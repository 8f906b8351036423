"""From interest deltas to a day's genre recommendations.

The recommender compares where the tracker says interest is heading
(estimated) against the profile computed from today's events (calculated).
Genres rising by at least theta are promoted, unless already watched today;
genres falling by theta or more are demoted.
"""

import numpy as np

import genretrack as gt

space = gt.new_space(["Comedy", "Drama", "News", "Sports", "Travel"])

calculated = np.array([0.40, 0.80, 0.35, 0.10, 0.05])
estimated = np.array([0.55, 0.78, 0.20, 0.22, 0.06])

deltas = gt.concept_deltas(estimated, calculated, theta=0.05)
print("axis  genre    delta     class")
for cd in deltas:
    print(f"{cd.axis:4d}  {space.names[cd.axis]:<8} {cd.delta:+.3f}   {cd.classification}")

watched_today = {"Sports"}
rec = gt.recommend(deltas, watched_today, space, user_id="ana", date="2026-08-19")
print(f"\npromoted: {list(rec.promoted)}")
print(f"demoted:  {list(rec.demoted)}")
print(f"excluded because already watched today: {list(rec.excluded_watched)}")

catalog = {
    "standup_special": ["Comedy"],
    "evening_news": ["News"],
    "road_trip_series": ["Travel", "Comedy"],
    "derby_highlights": ["Sports"],
    "newsroom_drama": ["Drama", "News"],
}
picks = gt.filter_catalog(catalog, rec, space)
print(f"\ncatalog programs matching the promotions and avoiding the demotions:")
for program in picks:
    print(f"  {program} ({', '.join(catalog[program])})")
