import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lnfrec.evaluation import (
    dcg,
    mean_ndcg,
    ndcg,
    precision,
    predicted_attendance,
    run_experiment,
    threshold_grid,
)
from lnfrec.latent import RelationThresholds
from lnfrec.pipeline import Bundle, Recommender, ground_truth, split_bundle
from lnfrec.rank import RankedRecommendation
from lnfrec.records import ConfigError, DataError, EventDescriptor, ParticipationRecord
from lnfrec.synth import SyntheticSpec, generate_synthetic


def rec(user, session, order):
    n = len(order)
    return RankedRecommendation(user, session, tuple((e, (n - i) / n) for i, e in enumerate(order)))


# metrics ------------------------------------------------------------------

def test_ndcg_first_second_third():
    assert ndcg(["A", "B", "C"], "A") == 1.0
    assert ndcg(["B", "A", "C"], "A") == pytest.approx(1 / math.log2(3), abs=1e-15)
    assert ndcg(["B", "C", "A"], "A") == 0.5
    assert ndcg(["B", "A"], "A") == pytest.approx(0.6309, abs=1e-4)


def test_dcg_of_second_place_hit():
    assert dcg([0, 1, 0]) == pytest.approx(0.6309, abs=5e-5)


def test_ndcg_missing_event():
    with pytest.raises(DataError):
        ndcg(["A", "B"], "C")


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 3))
def test_ndcg_decreasing_in_rank(n):
    others = [f"e{i}" for i in range(1, n)]
    scores = [ndcg(others[:pos] + ["e0"] + others[pos:], "e0") for pos in range(n)]
    assert scores[0] == 1.0
    assert all(a > b > 0 for a, b in zip(scores, scores[1:]))


TRUTH = {("u1", "s"): "A", ("u2", "s"): "B", ("u3", "s"): "A", ("u4", "s"): "C", ("u5", "s"): "A"}


def test_precision_counts():
    recs = [rec("u1", "s", "AB"), rec("u2", "s", "BA"), rec("u3", "s", "AB"),
            rec("u4", "s", "AC"), rec("u5", "s", "BA")]
    assert precision(recs, TRUTH) == 0.6
    all_right = [rec(u, s, e + "Z") for (u, s), e in TRUTH.items()]
    assert precision(all_right, TRUTH) == 1.0
    none = [rec(u, s, "Z" + e) for (u, s), e in TRUTH.items()]
    assert precision(none, TRUTH) == 0.0


def test_precision_errors():
    with pytest.raises(DataError):
        precision([], {})
    with pytest.raises(DataError, match="u9"):
        precision([rec("u1", "s", "AB")], {("u9", "s"): "A"})


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(TRUTH)))
def test_precision_permutation_invariant(order):
    recs = [rec(u, s, "AB" if i % 2 else "BA") for i, (u, s) in enumerate(TRUTH)]
    shuffled = {k: TRUTH[k] for k in order}
    assert precision(recs, shuffled) == precision(list(reversed(recs)), TRUTH)


def test_mean_ndcg():
    recs = [rec("u1", "s", "BAC"), rec("u2", "s", "BAC")]
    truth = {("u1", "s"): "A", ("u2", "s"): "B"}
    assert mean_ndcg(recs, truth) == pytest.approx((1 / math.log2(3) + 1) / 2)


def test_predicted_attendance():
    recs = [rec("u1", "s", "AB"), rec("u2", "s", "AB"), rec("u3", "s", "BA"), rec("u4", "t", "AB")]
    out = predicted_attendance(recs, "s")
    # hand tally: A first for u1, u2; B for u3; expected = normalized scores (2/3, 1/3)
    assert out["A"]["count"] == 2 and out["B"]["count"] == 1
    assert out["A"]["expected"] == pytest.approx(2 / 3 * 2 + 1 / 3)
    assert sum(v["expected"] for v in out.values()) == pytest.approx(3)
    everyone = predicted_attendance([rec(f"u{i}", "s", "AB") for i in range(4)])
    assert everyone["A"]["count"] == 4


def test_predicted_attendance_uniform_ties():
    ties = [RankedRecommendation(f"u{i}", "s", (("A", 0.0), ("B", 0.0), ("C", 0.0))) for i in range(3)]
    out = predicted_attendance(ties)
    # id tie-break sends every count to A; expected spreads evenly
    assert [out[e]["count"] for e in "ABC"] == [3, 0, 0]
    assert [out[e]["expected"] for e in "ABC"] == [1.0, 1.0, 1.0]


def test_threshold_grid():
    grid = threshold_grid({"k": range(2, 11)})
    assert [t.k for t in grid] == list(range(2, 11))
    assert all(t.phi == 0.4 and t.delta == 6 and t.theta == 1800 for t in grid)
    assert threshold_grid() == [RelationThresholds()]
    with pytest.raises(ConfigError):
        threshold_grid({"beta": [0.5]})


# ground truth and split ---------------------------------------------------

def ev(eid, session, start):
    return EventDescriptor(eid, session, "r" + eid, start, start + 3000, ("c" + eid[-1],))


def test_ground_truth_longest_then_lowest_id():
    sched = [ev("A", "s", 0), ev("B", "s", 0), ev("C", "s", 0)]
    P = ParticipationRecord
    recs = [P("u", "A", 600), P("u", "B", 1200), P("v", "C", 900), P("v", "B", 900)]
    assert ground_truth(recs, sched) == {("u", "s"): "B", ("v", "s"): "B"}


def test_split_basics():
    sb = generate_synthetic(3)
    split = split_bundle(sb.bundle, 4)
    assert len(split.test_sessions) == 4
    assert all(e.start < min(x.start for evs in split.test_sessions.values() for x in evs)
               for e in split.train_events)
    assert len(split.truth) == 40 * 4
    with pytest.raises(ConfigError):
        split_bundle(sb.bundle, 8)


def test_split_excludes_one_event_sessions():
    sched = [ev("A1", "s1", 0), ev("B1", "s1", 0), ev("A2", "s2", 3600), ev("B2", "s2", 3600),
             ev("A3", "s3", 7200), ev("A4", "s4", 10800), ev("B4", "s4", 10800)]
    P = ParticipationRecord
    parts = [P(u, e, 3000) for u in "xy" for e in ("A1", "A2", "B1")] + [P("x", "A3", 3000), P("x", "A4", 3000)]
    split = split_bundle(Bundle(sched, parts, []), 2)
    assert list(split.test_sessions) == ["s4"]
    assert split.truth == {("x", "s4"): "A4"}


def test_split_unknown_event():
    sched = [ev("A1", "s1", 0), ev("B1", "s1", 0), ev("A2", "s2", 3600), ev("B2", "s2", 3600)]
    with pytest.raises(DataError, match="Z9"):
        split_bundle(Bundle(sched, [ParticipationRecord("u", "Z9", 600)], []), 1)


# experiment harness -------------------------------------------------------

@pytest.fixture(scope="module")
def small_split():
    return split_bundle(generate_synthetic(5, SyntheticSpec(users_per_group=10)).bundle, 4)


def test_run_experiment_single_cell(small_split):
    report = run_experiment(small_split, ["Naive"])
    assert len(report.cells) == 1
    cell = report.cells[0]
    assert cell["precision"] == 1.0 and cell["ndcg"] == 1.0
    assert cell["n_users"] == 20 and cell["n_sessions"] == 4


def test_run_experiment_sweep_rows(small_split):
    report = run_experiment(small_split, ["LNF-g"], threshold_grid({"k": range(2, 11)}))
    assert [c["thresholds"]["k"] for c in report.cells] == list(range(2, 11))
    assert all("converged" in c for c in report.cells)
    assert len(report.rows()) == 9


def test_run_experiment_deterministic_and_threaded(small_split):
    a = json.dumps(run_experiment(small_split).to_json(), sort_keys=True)
    b = json.dumps(run_experiment(small_split).to_json(), sort_keys=True)
    c = json.dumps(run_experiment(small_split, threads=4).to_json(), sort_keys=True)
    assert a == b == c


def test_run_experiment_unknown_method(small_split):
    with pytest.raises(ConfigError, match="LNF-x"):
        run_experiment(small_split, ["LNF-x"])
    with pytest.raises(ConfigError):
        Recommender(small_split).run("Random")


def test_metrics_bounded(small_split):
    for cell in run_experiment(small_split).cells:
        assert 0 <= cell["precision"] <= 1 and 0 <= cell["ndcg"] <= 1
        for per_event in cell["attendance"].values():
            assert all(v["count"] >= 0 and v["expected"] >= 0 for v in per_event.values())
