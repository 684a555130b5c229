import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lnfrec.obsnet import (
    TimeSlice,
    build_observed,
    build_participation_network,
    build_proximity_network,
    empty_networks,
    merge_slice,
)
from lnfrec.records import DataError, EncounterRecord, EventDescriptor, ParticipationRecord


def schedule(slots=2, per_slot=3):
    return [EventDescriptor(f"e{s}{k}", f"s{s}", f"room{k}", s * 3600, s * 3600 + 3000, (f"c{k}",))
            for s in range(slots) for k in range(per_slot)]


P = ParticipationRecord
E = EncounterRecord.make


def test_fig1_shape_participation_network():
    # 4 users, 6 events over 2 slots; each user attends one event per slot
    recs = [P("u1", "e00", 3000), P("u1", "e11", 1200), P("u2", "e01", 2400), P("u2", "e10", 3000),
            P("u3", "e02", 600), P("u3", "e12", 2900), P("u4", "e00", 1800), P("u4", "e12", 3000)]
    net = build_participation_network(recs, schedule())
    assert net.users == {"u1", "u2", "u3", "u4"}
    assert len(net.events) == 6
    assert net.edges[("u3", "e02")] == 600
    assert len(net.edges) == 8
    # bipartite: every edge joins a user to an event
    assert all(u in net.users and e in net.events for u, e in net.edges)


def test_empty_records_keep_schedule_events():
    net = build_participation_network([], schedule())
    assert not net.edges and len(net.events) == 6 and not net.users


def test_duplicate_rows_summed():
    recs = [P("u", "e00", 600), P("u", "e00", 900), P("u", "e01", 300)]
    net = build_participation_network(recs, schedule())
    # hand sum: 600 + 900
    assert net.edges == {("u", "e00"): 1500.0, ("u", "e01"): 300.0}


def test_unknown_event_is_hard_error():
    with pytest.raises(DataError, match="e99"):
        build_participation_network([P("u", "e99", 600)], schedule())


def test_proximity_parallel_edges():
    recs = [E("a", "b", 600), E("b", "a", 300), E("a", "b", 200)]
    net = build_proximity_network(recs)
    assert net.edges == (("a", "b", 600.0), ("a", "b", 300.0), ("a", "b", 200.0))


def test_proximity_no_records_keeps_universe():
    net = build_proximity_network([], users={"x"})
    assert net.edges == () and net.users == {"x"}


def test_proximity_edge_multiplicities():
    # 5 records over 2 pairs: (a,b) three times, (c,d) twice
    recs = [E("a", "b", 200), E("c", "d", 400), E("b", "a", 250), E("d", "c", 300), E("a", "b", 600)]
    net = build_proximity_network(recs)
    counts = {}
    for a, b, _ in net.edges:
        counts[a, b] = counts.get((a, b), 0) + 1
    assert counts == {("a", "b"): 3, ("c", "d"): 2}


def test_proximity_self_pair_rejected():
    with pytest.raises(DataError):
        build_proximity_network([EncounterRecord("a", "a", 300, 0)])


def slice_of(index, sched, parts, encs=()):
    return TimeSlice(index, tuple(parts), tuple(encs), tuple(sched))


def test_merge_empty_slice_is_identity():
    sched = schedule(1)
    net = merge_slice(empty_networks(), slice_of(1, sched, [P("u", "e00", 600)], [E("u", "v", 300)]))
    again = merge_slice(net, slice_of(2, [], []))
    assert again.participation == net.participation
    assert again.proximity == net.proximity


def test_incremental_equals_one_shot():
    sched = schedule(2)
    s1 = [P("u1", "e00", 600), P("u2", "e01", 900)]
    s2 = [P("u1", "e10", 1200), P("u3", "e12", 300)]
    e1, e2 = [E("u1", "u2", 400)], [E("u1", "u3", 500), E("u1", "u2", 200)]
    inc = merge_slice(empty_networks(), slice_of(1, sched[:3], s1, e1))
    inc = merge_slice(inc, slice_of(2, sched[3:], s2, e2))
    batch = build_observed(s1 + s2, e1 + e2, sched)
    assert inc.participation == batch.participation
    assert inc.proximity == batch.proximity


def test_slice_replay_rejected():
    net = merge_slice(empty_networks(), slice_of(1, schedule(1), []))
    with pytest.raises(DataError):
        merge_slice(net, slice_of(1, schedule(1), []))
    with pytest.raises(DataError):
        merge_slice(net, slice_of(3, schedule(1), []))


def test_merge_does_not_mutate_previous():
    sched = schedule(2)
    first = merge_slice(empty_networks(), slice_of(1, sched[:3], [P("u", "e00", 600)]))
    before = dict(first.participation.edges)
    merge_slice(first, slice_of(2, sched[3:], [P("u", "e10", 600)]))
    assert dict(first.participation.edges) == before


def test_json_export():
    net = build_participation_network([P("u", "e00", 600)], schedule(1))
    data = json.loads(json.dumps(net.to_json()))
    assert data == {"users": ["u"], "events": ["e00", "e01", "e02"], "edges": [{"a": "u", "b": "e00", "w": 600.0}]}
    prox = build_proximity_network([E("a", "b", 300)]).to_json()
    assert prox["edges"] == [{"a": "a", "b": "b", "w": 300.0}]


records = st.lists(
    st.tuples(st.sampled_from(["u1", "u2", "u3", "u4"]), st.integers(0, 2), st.integers(0, 2),
              st.integers(1, 3000)),
    max_size=25,
)


@settings(max_examples=100, deadline=None)
@given(records, st.integers(1, 3))
def test_incremental_equals_batch_and_bipartite(rows, n_slices):
    sched = schedule(3)
    parts = [P(u, f"e{s}{k}", float(d)) for u, s, k, d in rows]
    net = empty_networks()
    for i in range(n_slices):
        slots = range(i * 3 // n_slices, (i + 1) * 3 // n_slices)
        sl_sched = [e for e in sched if int(e.session_id[1:]) in slots]
        sl_parts = [p for p in parts if int(p.event_id[1]) in slots]
        net = merge_slice(net, slice_of(i + 1, sl_sched, sl_parts))
    batch = build_participation_network(parts, sched)
    assert net.participation == batch
    assert all(u in batch.users and e in batch.events for u, e in net.participation.edges)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abcd"), st.sampled_from("abcd"), st.integers(180, 5000)), max_size=20))
def test_proximity_weight_conservation(rows):
    recs = [E(a, b, d) for a, b, d in rows if a != b]
    net = build_proximity_network(recs)
    assert sum(w for _, _, w in net.edges) == sum(r.duration for r in recs)
