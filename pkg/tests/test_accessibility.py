import pytest

from ewflab.scenario import (
    Scenario,
    accessibility_map,
    classify_accessibility,
    lookup,
    timing_profile,
)
from ewflab.scenario import UnrealizedVariableError


def test_staggered_timing_only_friend_super_cross_pair_hidden():
    pm = lookup("pusey_masanes_fr")
    assert not classify_accessibility(pm, ("c", "b"))
    assert classify_accessibility(pm, ("c", "d"))
    assert classify_accessibility(pm, ("a", "d"))
    assert classify_accessibility(pm, ("a", "b"))


def test_inaccessible_reason_names_the_erasure():
    pm = lookup("pusey_masanes_fr")
    res = classify_accessibility(pm, ("c", "b"))
    assert res.reason == "record of c erased before b created"


def test_swapped_delays_mirror_the_classification():
    mirror = lookup("pusey_masanes_fr_mirrored")
    assert not classify_accessibility(mirror, ("a", "d"))
    assert classify_accessibility(mirror, ("c", "b"))
    assert classify_accessibility(mirror, ("c", "d"))
    assert classify_accessibility(mirror, ("a", "b"))
    res = classify_accessibility(mirror, ("a", "d"))
    assert res.reason == "record of d erased before a created"


def test_accessibility_map_covers_all_pairs():
    amap = accessibility_map(lookup("pusey_masanes_fr"))
    verdicts = {frozenset(pair): res.accessible for pair, res in amap.items()}
    assert len(verdicts) == 6
    assert verdicts[frozenset(("c", "b"))] is False
    assert verdicts[frozenset(("c", "d"))] is True
    assert verdicts[frozenset(("a", "d"))] is True
    assert verdicts[frozenset(("a", "b"))] is True


def test_signal_delay_gates_remote_meetings():
    # same lifetimes, but the two wings are too far apart: the records
    # coexist yet can never be co-located
    from ewflab.scenario.catalogue import pusey_masanes_fr

    base = pusey_masanes_fr()
    far = Scenario(base.name, base.agents, base.registers, base.events,
                   base.settings, signal_delay=10_000)
    res = classify_accessibility(far, ("c", "d"))
    assert not res.accessible
    assert "never jointly present" in res.reason
    # superobserver records are never erased, so they still meet
    assert classify_accessibility(far, ("a", "b"))


def test_gao_last_cycle_record_stays_accessible():
    gao = lookup("gao(3, debbie_first)")
    assert classify_accessibility(gao, ("c3", "d"))
    assert not classify_accessibility(gao, ("c1", "d"))
    assert not classify_accessibility(gao, ("c1", "c2"))


def test_profile_lifetimes():
    profile = timing_profile(lookup("pusey_masanes_fr"))
    c = profile.lifetime("c")
    assert (c.created, c.erased, c.site) == (1, 10, "left")
    a = profile.lifetime("a")
    assert (a.created, a.erased) == (11, None)


def test_accessibility_requires_realized_records():
    bl = lookup("brukner_lf")
    # under x=0 the superobserver outcome comes from the copy event
    res = classify_accessibility(bl, ("c", "a"), {"x": 0, "y": 0})
    assert res.accessible
    with pytest.raises(UnrealizedVariableError):
        classify_accessibility(bl, ("c", "zz"), {"x": 0, "y": 0})
