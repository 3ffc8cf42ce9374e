import re

import pytest

from geomedia.context import GEOMAGNETIC, USER_CENTRIC
from geomedia.errors import ExhaustedSampling
from geomedia.synth import (
    GenConfig,
    generate_dataset,
    load_corpus,
    random_world,
    save_corpus,
    scripted_annotator,
)
from geomedia.world import WorldStore

from . import oracle
from .conftest import CENTER, QUERY_TIME

_SLOT_RELATION = {
    "in front": "frontOf",
    "on the right": "rightOf",
    "behind": "behind",
    "on the left": "leftOf",
}


def _read_spatial(text: str, fact_names) -> tuple[str, str]:
    slot = next(s for s in _SLOT_RELATION if f" {s} of " in text)
    entity = text.split(" of ", 1)[1].rstrip("?").replace(" ", "_")
    assert entity in fact_names
    return _SLOT_RELATION[slot], entity


# --- dataset generation --------------------------------------------------------


def test_generate_dataset_is_deterministic(campus):
    cfg = GenConfig(n=12, seed=9, fixed_here=CENTER, query_time=QUERY_TIME)
    a = generate_dataset(campus, cfg)
    b = generate_dataset(campus, cfg)
    assert [(p.query_text, p.gold_ids) for p in a] == [
        (p.query_text, p.gold_ids) for p in b
    ]
    assert all(p.gold_ids for p in a)


def test_spatial_gold_matches_geometry(campus, campus_sets):
    cfg = GenConfig(
        n=20,
        seed=4,
        fixed_here=CENTER,
        query_time=QUERY_TIME,
        heading_deg=0.0,
        templates=("spatial",),
    )
    names = {f.name for f in campus.facts}
    for pair in generate_dataset(campus, cfg):
        relation, entity = _read_spatial(pair.query_text, names)
        assert pair.gold_ids == campus_sets[(relation, entity)]


def test_user_centric_frame_rewrites_gold(campus, campus_sets):
    # facing east, "in front" answers with the east cone
    cfg = GenConfig(
        n=20,
        seed=4,
        fixed_here=CENTER,
        query_time=QUERY_TIME,
        frame=USER_CENTRIC,
        heading_deg=90.0,
        templates=("spatial",),
    )
    names = {f.name for f in campus.facts}
    rotate = {"frontOf": "rightOf", "rightOf": "behind", "behind": "leftOf", "leftOf": "frontOf"}
    for pair in generate_dataset(campus, cfg):
        relation, entity = _read_spatial(pair.query_text, names)
        assert pair.gold_ids == campus_sets[(rotate[relation], entity)]


def test_days_ago_gold_is_the_shifted_stamp(campus):
    cfg = GenConfig(
        n=15, seed=21, fixed_here=CENTER, query_time=QUERY_TIME, templates=("days_ago",)
    )
    by_stamp = {}
    for m in campus.media:
        by_stamp.setdefault(m.timestamp, set()).add(m.id)
    for pair in generate_dataset(campus, cfg):
        match = re.search(r"(\d+) (day|week|month|year)s? ago", pair.query_text)
        count, unit = int(match.group(1)), match.group(2)
        days = {"day": 1, "week": 7}.get(unit)
        if days is not None:
            stamp = oracle_shift_days(QUERY_TIME, -count * days)
            assert pair.gold_ids == frozenset(by_stamp[stamp])
        assert pair.gold_ids  # empty draws are rejected


def oracle_shift_days(stamp: int, days: int) -> int:
    import datetime

    d = datetime.date(stamp // 10000, stamp // 100 % 100, stamp % 100)
    d += datetime.timedelta(days=days)
    return d.year * 10000 + d.month * 100 + d.day


def test_month_gold_respects_here_radius(campus):
    cfg = GenConfig(
        n=10, seed=2, fixed_here=CENTER, query_time=QUERY_TIME, templates=("month",)
    )
    months = {name: i + 1 for i, name in enumerate(
        "january february march april may june july august september october november december".split()
    )}
    for pair in generate_dataset(campus, cfg):
        month = next(v for k, v in months.items() if k in pair.query_text)
        expected = frozenset(
            m.id
            for m in campus.media
            if m.month == month and oracle.distance_m(CENTER[0], CENTER[1], m.lat, m.lon) <= 100.0
        )
        assert pair.gold_ids == expected


def test_generate_dataset_exhausts_on_empty_world(campus_parser):
    empty = WorldStore()
    empty.ingest_osm_xml(
        "<osm><node id='1' lat='49.0' lon='7.0'>"
        "<tag k='building' v='university'/><tag k='name' v='Lonely Hall'/>"
        "</node></osm>"
    )
    snap = empty.snapshot_with(_ctx())
    with pytest.raises(ExhaustedSampling):
        generate_dataset(snap, GenConfig(n=2, seed=1, fixed_here=(49.0, 7.0)))
    with pytest.raises(ExhaustedSampling):
        generate_dataset(
            snap, GenConfig(n=2, seed=1, fixed_here=(49.0, 7.0), query_time=QUERY_TIME)
        )


# --- scripted annotators ---------------------------------------------------------


def test_scripted_annotator_rejects_unknown_convention():
    with pytest.raises(ValueError):
        scripted_annotator("sideways")


def test_geomagnetic_annotator_marks_compass_cone(campus, campus_sets):
    annotator = scripted_annotator(GEOMAGNETIC)
    gold = annotator.gold_set("what is there in front of the campus center?", campus)
    assert gold == campus_sets[("frontOf", "campus_center")]


def test_user_centric_annotator_follows_its_heading(campus, campus_sets):
    annotator = scripted_annotator(USER_CENTRIC, heading_deg=90.0)
    gold = annotator.gold_set("what is there in front of the campus center?", campus)
    assert gold == campus_sets[("rightOf", "campus_center")]


def test_conventions_disagree_on_due_east_media(campus):
    text = "what is there in front of the campus center?"
    magnetic = scripted_annotator(GEOMAGNETIC)
    egocentric = scripted_annotator(USER_CENTRIC, heading_deg=90.0)
    east_media = next(m for m in campus.media if m.id == "cc_e1")
    assert not magnetic(text, east_media, campus)
    assert egocentric(text, east_media, campus)


def test_annotator_reads_days_ago(campus):
    annotator = scripted_annotator(GEOMAGNETIC)
    gold = annotator.gold_set("what happened here 5 days ago?", campus)
    assert gold == {"cc_e1", "cc_w1"}  # both stamped 20150511


def test_annotator_reads_month_with_radius(campus):
    annotator = scripted_annotator(GEOMAGNETIC)
    gold = annotator.gold_set("what did this place look like in december?", campus)
    assert gold == {"cc_near1"}  # cc_e3 is december too but 350 m out


def test_annotator_defaults_to_near_without_spatial_phrase(campus, campus_sets):
    annotator = scripted_annotator(GEOMAGNETIC)
    gold = annotator.gold_set("show me the campus center", campus)
    assert gold == campus_sets[("near", "campus_center")]


def test_annotator_ignores_unreadable_text(campus):
    annotator = scripted_annotator(GEOMAGNETIC)
    assert annotator.gold_set("qwerty asdf", campus) == frozenset()


# --- seeded worlds ---------------------------------------------------------------


def test_random_world_is_deterministic():
    a = random_world(seed=5, n_facts=6, n_media=30)
    b = random_world(seed=5, n_facts=6, n_media=30)
    snap_a = a.snapshot_with(_ctx())
    snap_b = b.snapshot_with(_ctx())
    assert [(f.name, f.lat, f.lon) for f in snap_a.facts] == [
        (f.name, f.lat, f.lon) for f in snap_b.facts
    ]
    assert [(m.id, m.lat, m.lon, m.timestamp) for m in snap_a.media] == [
        (m.id, m.lat, m.lon, m.timestamp) for m in snap_b.media
    ]


def _ctx():
    from geomedia.world import UserContext

    return UserContext("probe", CENTER[0], CENTER[1], 0.0, QUERY_TIME)


def test_random_world_counts_and_ids():
    store = random_world(seed=3, n_facts=8, n_media=50)
    snap = store.snapshot_with(_ctx())
    assert len(snap.facts) == 8
    assert len(snap.media) == 50
    assert len({m.id for m in snap.media}) == 50
    recent = [m for m in snap.media if m.timestamp >= 20150411]
    assert recent  # the day-template window is populated


def test_random_world_rejects_oversized_fact_count():
    with pytest.raises(ValueError):
        random_world(seed=1, n_facts=99)


def test_random_world_supports_generation():
    store = random_world(seed=2, n_facts=10, n_media=80)
    snap = store.snapshot_with(_ctx())
    pairs = generate_dataset(
        snap, GenConfig(n=25, seed=6, fixed_here=CENTER, query_time=QUERY_TIME)
    )
    assert len(pairs) == 25
    assert all(p.gold_ids for p in pairs)


# --- corpus files ----------------------------------------------------------------


def test_corpus_round_trip(campus, tmp_path):
    cfg = GenConfig(n=8, seed=13, fixed_here=CENTER, query_time=QUERY_TIME)
    pairs = generate_dataset(campus, cfg)
    path = tmp_path / "corpus" / "train.jsonl"
    save_corpus(pairs, path)
    loaded = load_corpus(path)
    assert loaded == pairs
