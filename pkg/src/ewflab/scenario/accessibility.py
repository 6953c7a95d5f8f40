"""In-principle accessibility of joint outcome records.

The model is deliberately minimal: discrete ticks, named sites, and one
integer signal delay between distinct sites.  A record exists from its
creation tick until the tick of the undo that erases it (forever if it
is never undone), and its content can be present at a remote site only
after the signal delay and only while the record still exists anywhere.
A pair of outcomes is jointly accessible when some site and tick can
hold both records at once.

This is one formalization of an informal lightcone criterion; the
interval logic is isolated here so alternatives can be plugged in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ewflab.scenario.model import RecordLifetime, Scenario, timing_profile


@dataclass(frozen=True)
class AccessibilityResult:
    accessible: bool
    reason: str | None = None
    meeting_site: str | None = None
    meeting_tick: int | None = None

    def __bool__(self):
        return self.accessible

    def describe(self) -> str:
        if self.accessible:
            return (f"accessible (records can meet at site "
                    f"{self.meeting_site!r} from tick {self.meeting_tick})")
        return f"inaccessible: {self.reason}"


def _availability(record: RecordLifetime, site: str, delay: int):
    """Interval [start, end) during which the record can be read at site."""
    travel = 0 if site == record.site else delay
    start = record.created + travel
    end = record.erased  # None = open-ended
    if end is not None and start >= end:
        return None
    return (start, end)


def classify_accessibility(scenario: Scenario, pair,
                           settings: Mapping[str, int] | None = None
                           ) -> AccessibilityResult:
    """Classify whether both records of the pair can ever be co-located."""
    u, v = pair
    profile = timing_profile(scenario, settings)
    try:
        rec_u = profile.lifetime(u)
        rec_v = profile.lifetime(v)
    except KeyError as exc:
        from ewflab.scenario.engine import UnrealizedVariableError
        raise UnrealizedVariableError(exc.args[0], dict(settings or {}))

    best = None
    for site in scenario.sites():
        win_u = _availability(rec_u, site, profile.signal_delay)
        win_v = _availability(rec_v, site, profile.signal_delay)
        if win_u is None or win_v is None:
            continue
        start = max(win_u[0], win_v[0])
        ends = [w[1] for w in (win_u, win_v) if w[1] is not None]
        end = min(ends) if ends else None
        if end is None or start < end:
            if best is None or start < best[1]:
                best = (site, start)
    if best is not None:
        return AccessibilityResult(True, None, best[0], best[1])

    # name the violated condition
    if rec_u.erased is not None and rec_u.erased <= rec_v.created:
        reason = f"record of {u} erased before {v} created"
    elif rec_v.erased is not None and rec_v.erased <= rec_u.created:
        reason = f"record of {v} erased before {u} created"
    else:
        reason = (f"records of {u} and {v} are never jointly present at any "
                  f"site within the signal delay")
    return AccessibilityResult(False, reason)


def accessibility_map(scenario: Scenario,
                      settings: Mapping[str, int] | None = None
                      ) -> dict[tuple[str, str], AccessibilityResult]:
    """Classification of every realized outcome pair."""
    assignment = dict(settings or {})
    profile = timing_profile(scenario, assignment)
    variables = [lt.variable for lt in profile.lifetimes]
    out = {}
    for i, u in enumerate(variables):
        for v in variables[i + 1:]:
            out[(u, v)] = classify_accessibility(scenario, (u, v), assignment)
    return out
