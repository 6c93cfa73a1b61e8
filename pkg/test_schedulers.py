import json
import math

import pytest

from shared.protocol import Mode
from simsched.core import coord_dominates, sorted_desc
from simsched.errors import DimensionError, InfeasibleError, UnsupportedError, ValidationError
from simsched.instances import Identical, Related, Unrelated, make_instance
from simsched.schedulers import (
    FractionalSchedule, NonPreemptiveSchedule, PreemptiveSchedule, Segment, check_preemptive,
    discretize, fill_to_targets, list_schedule, load_vector, lpt, lpt_order, makespan_lower_bound,
    mcnaughton, mcr, mcr_threshold, min_work_assignment, optimal_regular_fractional,
    optimal_regular_loads, parse_schedule, regularize_fractional, serialize_schedule,
    uniform_fractional,
)


class TestListScheduling:
    def test_lpt_example(self, lpt_example):
        sched = lpt(lpt_example)
        assert sched.assignment == (0, 1, 1, 0, 1)
        assert load_vector(sched, lpt_example).loads == (8.0, 10.0)

    def test_lpt_order_ties_by_index(self):
        assert lpt_order([3, 5, 3, 5]) == [1, 3, 0, 2]

    def test_machine_ties_lowest_index(self):
        inst = make_instance(Identical(3), Mode.NP, [1, 1, 1])
        assert lpt(inst).assignment == (0, 1, 2)

    def test_related_earliest_completion(self):
        inst = make_instance(Related((2.0, 1.0)), Mode.NP, [2, 2])
        # 第二个作业: 机器0完成于2, 机器1完成于2, 并列取0
        assert lpt(inst).assignment == (0, 0)

    def test_unrelated_unsupported(self, unrelated_small):
        with pytest.raises(UnsupportedError):
            lpt(unrelated_small)

    def test_bad_order(self, lpt_example):
        with pytest.raises(DimensionError):
            list_schedule(lpt_example, [0, 1])


class TestMcNaughton:
    def test_wrap_around(self):
        sched = mcnaughton([5, 3, 2, 2], 2, 6)
        assert [max(s.end for s in row) for row in sched.segments] == [6, 6]
        split = [(i, s.start, s.end) for i, row in enumerate(sched.segments) for s in row if s.job == 1]
        assert split == [(0, 5.0, 6.0), (1, 0.0, 2.0)]

    def test_single_machine(self):
        sched = mcnaughton([4], 1, 4)
        assert sched.segments == ((Segment(0, 0.0, 4.0),),)

    def test_no_splits_when_exact(self):
        sched = mcnaughton([4, 4], 2, 4)
        assert all(len(row) == 1 for row in sched.segments)

    def test_infeasible_deadline(self):
        with pytest.raises(InfeasibleError):
            mcnaughton([5, 3], 2, 4.9)

    def test_tiny_job_is_scheduled(self):
        inst = make_instance(Identical(1), Mode.PP, [1000.0, 1e-7])
        sched = mcnaughton(inst.jobs, 1, 1000.0000001)
        assert [s.job for s in sched.segments[0]] == [0, 1]
        assert check_preemptive(sched, inst) == []

    def test_feasible_segments(self):
        inst = make_instance(Identical(3), Mode.PP, [7, 5, 4, 3, 2])
        sched = mcnaughton(inst.jobs, 3, makespan_lower_bound(inst.jobs, 3))
        assert check_preemptive(sched, inst) == []


class TestMcr:
    def test_peels_long_job(self):
        inst = make_instance(Identical(3), Mode.PP, [9, 5, 4, 4, 2])
        loads = sorted_desc(load_vector(mcr(inst), inst))
        assert loads.loads == pytest.approx((9, 7.5, 7.5))
        assert mcr_threshold(inst.jobs, 3) == 1

    def test_even_split(self):
        inst = make_instance(Identical(2), Mode.PP, [6, 2, 2, 2])
        assert load_vector(mcr(inst), inst).loads == pytest.approx((6, 6))
        assert mcr_threshold(inst.jobs, 2) == 0

    def test_equal_jobs(self):
        inst = make_instance(Identical(3), Mode.PP, [2, 2, 2])
        assert load_vector(mcr(inst), inst).loads == pytest.approx((2, 2, 2))

    def test_fewer_jobs_than_machines(self):
        inst = make_instance(Identical(4), Mode.PP, [3, 1])
        assert sorted_desc(load_vector(mcr(inst), inst)).loads == (3, 1, 0, 0)

    def test_feasible(self):
        inst = make_instance(Identical(4), Mode.PP, [20, 9, 3, 3, 2, 1])
        sched = mcr(inst)
        assert check_preemptive(sched, inst) == []
        assert load_vector(sched, inst).total == pytest.approx(38)

    def test_related_unsupported(self):
        with pytest.raises(UnsupportedError):
            mcr(make_instance(Related((2.0, 1.0)), Mode.PP, [1]))

    def test_tiny_job_is_scheduled(self):
        inst = make_instance(Identical(2), Mode.PP, [1000.0, 1000.0, 1e-7])
        sched = mcr(inst)
        assert 2 in {s.job for row in sched.segments for s in row}
        assert check_preemptive(sched, inst) == []
        assert load_vector(sched, inst).total == pytest.approx(2000.0000001)


class TestPreemptiveCheck:
    def test_job_on_two_machines_at_once(self):
        inst = make_instance(Identical(2), Mode.PP, [2])
        sched = PreemptiveSchedule(((Segment(0, 0, 1),), (Segment(0, 0.5, 1.5),)))
        problems = check_preemptive(sched, inst)
        assert any("same time" in p for p in problems)

    def test_wrong_amount(self):
        inst = make_instance(Identical(1), Mode.PP, [2])
        sched = PreemptiveSchedule(((Segment(0, 0, 1),),))
        assert check_preemptive(sched, inst)


class TestFractional:
    def test_uniform(self):
        inst = make_instance(Identical(2), Mode.FP, [3, 1])
        assert load_vector(uniform_fractional(inst), inst).loads == (2.0, 2.0)

    def test_uniform_single_job(self):
        inst = make_instance(Identical(4), Mode.FP, [1])
        assert load_vector(uniform_fractional(inst), inst).loads == (0.25,) * 4

    @pytest.mark.parametrize("speeds, expected", [
        ((3.0, 1.0), (0.3, 0.1)),
        ((3.0, 1.0, 1.0, 1.0), (0.25, 0.25, 0.0, 0.0)),
        ((1.0, 1.0, 1.0), (1 / 3, 1 / 3, 1 / 3)),
    ])
    def test_optimal_regular_loads(self, speeds, expected):
        loads = optimal_regular_loads(speeds)
        assert loads == pytest.approx(expected)
        assert sum(s * x for s, x in zip(speeds, loads)) == pytest.approx(1.0, abs=1e-12)

    def test_optimal_regular_fractional_column_sums_to_one(self):
        sched = optimal_regular_fractional((3.0, 1.0))
        inst = make_instance(Related((3.0, 1.0)), Mode.FP, [1])
        assert load_vector(sched, inst).loads == pytest.approx((0.3, 0.1))
        assert math.fsum(row[0] for row in sched.split) == pytest.approx(1.0, abs=1e-15)

    def test_normal_form_required(self):
        with pytest.raises(ValidationError):
            optimal_regular_loads((1.0, 3.0))

    def test_regularize(self):
        inst = make_instance(Related((2.0, 1.0)), Mode.FP, [1])
        sched = regularize_fractional((2.0, 1.0), (0.2, 0.6))
        loads = load_vector(sched, inst)
        assert loads.loads == pytest.approx((0.5, 0.0))
        assert coord_dominates(loads, (0.2, 0.6))

    def test_regularize_identity(self):
        inst = make_instance(Related((1.0, 1.0)), Mode.FP, [1])
        loads = load_vector(regularize_fractional((1.0, 1.0), (0.5, 0.5)), inst)
        assert loads.loads == pytest.approx((0.5, 0.5))

    def test_regularize_infeasible(self):
        with pytest.raises(InfeasibleError):
            regularize_fractional((1.0, 1.0), (0.2, 0.2))

    def test_bad_column_sum(self):
        inst = make_instance(Identical(2), Mode.FP, [1])
        with pytest.raises(InfeasibleError):
            load_vector(FractionalSchedule(((0.5,), (0.4,))), inst)

    @pytest.mark.parametrize("split", [((1.5,), (-0.5,)), ((-0.5,), (1.5,))])
    def test_fraction_out_of_range(self, split):
        inst = make_instance(Related((3.0, 1.0)), Mode.FP, [1.0])
        with pytest.raises(InfeasibleError):
            load_vector(FractionalSchedule(split), inst)


class TestMinWork:
    def test_column_minima(self, unrelated_small):
        sched = min_work_assignment(unrelated_small)
        assert sched.assignment == (0, 1)
        assert load_vector(sched, unrelated_small).loads == (1.0, 2.0)

    def test_ties_to_lowest_machine(self):
        inst = make_instance(Unrelated(((2.0, 3.0), (2.0, 3.0))), Mode.NP)
        assert min_work_assignment(inst).assignment == (0, 0)


class TestDiscretize:
    @pytest.mark.parametrize("eps, count", [(0.25, 4), (0.3, 4), (1.0, 1), (0.1, 10)])
    def test_job_count(self, eps, count):
        inst = discretize((3.0, 1.0), eps)
        assert inst.n == count
        assert inst.mode is Mode.NP
        assert sum(inst.jobs) == pytest.approx(1.0)
        assert max(inst.jobs) <= eps + 1e-12

    def test_rejects_non_positive(self):
        with pytest.raises(ValidationError):
            discretize((1.0,), 0)

    def test_fill_to_targets(self):
        inst = discretize((3.0, 1.0, 1.0, 1.0), 0.1)
        targets = optimal_regular_loads((3.0, 1.0, 1.0, 1.0))
        loads = load_vector(fill_to_targets(inst, targets), inst)
        for load, target, speed in zip(loads, targets, inst.env.speeds):
            assert load <= target + 0.1 / speed + 1e-12


class TestScheduleJson:
    def test_assignment(self):
        text = serialize_schedule(NonPreemptiveSchedule((0, 1, 1)))
        assert json.loads(text) == {"assignment": [0, 1, 1]}
        assert parse_schedule(text) == NonPreemptiveSchedule((0, 1, 1))

    def test_segments(self):
        sched = mcnaughton([5, 3, 2, 2], 2, 6)
        assert parse_schedule(serialize_schedule(sched)) == sched

    def test_split(self):
        sched = FractionalSchedule(((0.5, 1.0), (0.5, 0.0)))
        assert parse_schedule(serialize_schedule(sched)) == sched

    def test_invalid(self):
        with pytest.raises(ValidationError):
            parse_schedule('{"assignment": [-1]}')
        with pytest.raises(ValidationError):
            parse_schedule('{"other": 1}')
