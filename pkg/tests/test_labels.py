import threading

import pytest

from driftlab.errors import UnknownExpertError, ValidationError
from driftlab.labels import (
    ConsensusPeriod,
    DriftLabel,
    ExpertInfo,
    LabelStore,
    consensus,
)


def label(
    start,
    end,
    expert="e1",
    cause="maintenance_action",
    severity=2,
    turbine="t1",
    model="m1",
    label_id="",
    **kw,
):
    return DriftLabel(
        label_id=label_id,
        turbine_id=turbine,
        model_id=model,
        start=start,
        end=end,
        drift_type=kw.get("drift_type", "sudden"),
        cause=cause,
        severity=severity,
        confidence=kw.get("confidence", "high"),
        expert_id=expert,
        created_at=kw.get("created_at", 1451606400),
        note=kw.get("note", ""),
        supersedes=kw.get("supersedes"),
    )


@pytest.fixture
def store(tmp_path):
    s = LabelStore(tmp_path / "labels")
    s.register_expert(ExpertInfo("e1", "Expert One"))
    s.register_expert(ExpertInfo("e2", "Expert Two"))
    return s


class TestAppend:
    def test_round_trip(self, store):
        stored = store.append_label(label(0, 6000))
        assert stored.label_id
        assert store.query_labels() == [stored]

    def test_zero_width_rejected(self):
        with pytest.raises(ValidationError):
            label(6000, 6000)

    def test_unknown_expert(self, store):
        with pytest.raises(UnknownExpertError):
            store.append_label(label(0, 600, expert="ghost"))

    def test_two_experts_same_period_both_kept(self, store):
        a = store.append_label(label(0, 6000, expert="e1"))
        b = store.append_label(label(0, 6000, expert="e2"))
        assert a.label_id != b.label_id
        assert len(store.query_labels()) == 2

    def test_idempotent_with_supplied_id(self, store):
        a = store.append_label(label(0, 6000), label_id="fixed-id")
        b = store.append_label(label(0, 6000), label_id="fixed-id")
        assert a == b
        assert len(store.query_labels()) == 1

    def test_supersedes_reference_kept(self, store):
        original = store.append_label(label(0, 6000))
        fix = store.append_label(label(0, 7200, supersedes=original.label_id))
        assert store.get_label(fix.label_id).supersedes == original.label_id

    def test_severity_bounds(self):
        with pytest.raises(ValidationError):
            label(0, 600, severity=6)


class TestQuery:
    def test_no_filters_returns_all(self, store):
        for k in range(3):
            store.append_label(label(k * 6000, k * 6000 + 3000))
        assert len(store.query_labels()) == 3

    def test_empty_time_range(self, store):
        store.append_label(label(0, 6000))
        assert store.query_labels(start=10**9, end=2 * 10**9) == []

    def test_expert_filter_ordered_by_start(self, store):
        store.append_label(label(12000, 18000, expert="e1"))
        store.append_label(label(0, 6000, expert="e1"))
        store.append_label(label(6000, 9000, expert="e2"))
        got = store.query_labels(expert_id="e1")
        assert [lb.start for lb in got] == [0, 12000]

    def test_filter_conjunction_subset(self, store):
        store.append_label(label(0, 6000, expert="e1", cause="wear"))
        store.append_label(label(0, 6000, expert="e1"))
        store.append_label(label(0, 6000, expert="e2", cause="wear"))
        broad = store.query_labels(expert_id="e1")
        narrow = store.query_labels(expert_id="e1", cause="wear")
        assert set(lb.label_id for lb in narrow) <= set(lb.label_id for lb in broad)

    def test_time_filter_keeps_overlapping(self, store):
        store.append_label(label(0, 6000))
        store.append_label(label(12000, 18000))
        got = store.query_labels(start=5000, end=7000)
        assert len(got) == 1 and got[0].start == 0


class TestDurability:
    def test_restart_returns_identical_records(self, tmp_path):
        root = tmp_path / "labels"
        store = LabelStore(root)
        store.register_expert(ExpertInfo("e1", "One"))
        stored = [store.append_label(label(k * 6000, k * 6000 + 600)) for k in range(5)]
        reloaded = LabelStore(root)
        assert reloaded.query_labels() == sorted(stored, key=lambda lb: lb.start)

    def test_concurrent_appends_all_survive(self, tmp_path):
        root = tmp_path / "labels"
        store = LabelStore(root)
        store.register_expert(ExpertInfo("e1", "One"))
        errors = []

        def post(k):
            try:
                store.append_label(label(k * 6000, k * 6000 + 600))
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=post, args=(k,)) for k in range(100)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len(store.query_labels()) == 100
        assert len(LabelStore(root).query_labels()) == 100


class TestConsensus:
    def test_identical_intervals_merge(self):
        merged = consensus(
            [label(0, 10, expert="e1", label_id="a"), label(0, 10, expert="e2", label_id="b")],
            overlap_threshold=0.5,
        )
        assert len(merged) == 1
        assert merged[0].support == 2
        assert merged[0].start == 0 and merged[0].end == 10

    def test_disjoint_intervals_stay_separate(self):
        merged = consensus(
            [label(0, 10, expert="e1", label_id="a"), label(20, 30, expert="e2", label_id="b")],
            overlap_threshold=0.5,
        )
        assert len(merged) == 2
        assert all(p.support == 1 for p in merged)

    def test_hand_jaccard_merge(self):
        # [0,10] and [5,15]: intersection 5, union 15, Jaccard 1/3 >= 0.25
        merged = consensus(
            [label(0, 10, expert="e1", label_id="a"), label(5, 15, expert="e2", label_id="b")],
            overlap_threshold=0.25,
        )
        assert len(merged) == 1
        assert (merged[0].start, merged[0].end) == (0, 15)
        assert merged[0].support == 2

    def test_below_threshold_not_merged(self):
        merged = consensus(
            [label(0, 10, expert="e1", label_id="a"), label(5, 15, expert="e2", label_id="b")],
            overlap_threshold=0.5,
        )
        assert len(merged) == 2

    def test_idempotent(self):
        labels = [
            label(0, 10, expert="e1", label_id="a"),
            label(5, 15, expert="e2", label_id="b"),
            label(8, 30, expert="e1", label_id="c", cause="wear"),
            label(100, 130, expert="e2", label_id="d"),
        ]
        once = consensus(labels, overlap_threshold=0.2)
        again_input = [
            label(p.start, p.end, expert=f"x{k}", label_id=f"p{k}")
            for k, p in enumerate(once)
        ]
        twice = consensus(again_input, overlap_threshold=0.2)
        assert [(p.start, p.end) for p in twice] == [(p.start, p.end) for p in once]

    def test_majority_cause_and_max_severity(self):
        merged = consensus(
            [
                label(0, 10, expert="e1", cause="wear", severity=2, label_id="a"),
                label(0, 10, expert="e2", cause="wear", severity=5, label_id="b"),
                label(0, 10, expert="e1", cause="other", severity=1, label_id="c"),
            ],
            overlap_threshold=0.5,
        )
        assert merged[0].cause == "wear"
        assert not merged[0].cause_tied
        assert merged[0].severity == 5

    def test_cause_tie_flagged(self):
        merged = consensus(
            [
                label(0, 10, expert="e1", cause="wear", label_id="a"),
                label(0, 10, expert="e2", cause="other", label_id="b"),
            ],
            overlap_threshold=0.5,
        )
        assert merged[0].cause_tied

    def test_mixed_turbines_rejected(self):
        with pytest.raises(ValidationError):
            consensus(
                [label(0, 10, turbine="t1", label_id="a"), label(0, 10, turbine="t2", label_id="b")]
            )

    def test_empty_input(self):
        assert consensus([]) == []
