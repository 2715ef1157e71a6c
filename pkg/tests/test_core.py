from fractions import Fraction

import pytest
from hypothesis import given

from schedhard.core import (BlockEntry, BlockSchedule, IntervalEntry, IntervalSchedule, JobGroup,
                            MachineModel, SlotEntry, SlotSchedule, aggregate_members,
                            combinatorial_lower_bound, critical_path, expand_members, make_instance,
                            member_relation, unit_jobs, validate_schedule)
from schedhard.errors import ParameterError, SizeError, StructuralError, UnsupportedModelError
from schedhard.gap import gen_gap_basic, gen_gap_family
from schedhard.rational import as_fraction, ceil_fraction, format_fraction
from strategies import unit_instances, weighted_instances

F = Fraction


class TestRational:
    def test_parses_fraction_and_decimal(self):
        assert as_fraction("3/4") == F(3, 4)
        assert as_fraction("0.25") == F(1, 4)
        assert as_fraction(7) == 7

    def test_refuses_floats_and_bools(self):
        with pytest.raises(ParameterError):
            as_fraction(0.5)
        with pytest.raises(ParameterError):
            as_fraction(True)
        with pytest.raises(ParameterError):
            as_fraction("abc")

    def test_format_and_ceil(self):
        assert format_fraction(F(6, 4)) == "3/2"
        assert format_fraction(3) == "3/1"
        assert ceil_fraction(F(7, 2)) == 4
        assert ceil_fraction(F(-7, 2)) == -3
        assert ceil_fraction(4) == 4


class TestInstance:
    def test_rejects_cycles_self_loops_and_unknown_ids(self):
        with pytest.raises(StructuralError):
            unit_jobs(["a", "b"], 1, [("a", "b"), ("b", "a")])
        with pytest.raises(StructuralError):
            unit_jobs(["a"], 1, [("a", "a")])
        with pytest.raises(StructuralError):
            unit_jobs(["a"], 1, [("a", "z")])
        with pytest.raises(StructuralError):
            unit_jobs(["a", "a"], 1)

    def test_group_validation(self):
        with pytest.raises(StructuralError):
            JobGroup("x", 0, 1)
        with pytest.raises(StructuralError):
            JobGroup("x", 1, 0)

    def test_topological_order_breaks_ties_by_id(self):
        inst = unit_jobs(["c", "b", "a", "d"], 1, [("c", "d")])
        assert inst.topological_order() == ["a", "b", "c", "d"]

    def test_uniform_machine_ids(self):
        mm = MachineModel.uniform([(1, 2), (3, 1)])
        assert mm.m == 3
        assert [mm.machine_speed(i) for i in range(3)] == [1, 1, 3]


class TestValidateIntervals:
    def test_single_job(self):
        inst = unit_jobs(["a"], 1)
        rep = validate_schedule(inst, IntervalSchedule((IntervalEntry("a", 0, 0, 0, 1),)))
        assert rep.feasible and rep.makespan == 1

    def test_precedence_violation(self):
        inst = make_instance([("a", 1, 1), ("b", 1, 1)], [("a", "b")], MachineModel.identical(2))
        sched = IntervalSchedule((IntervalEntry("a", 0, 0, 0, 1), IntervalEntry("b", 0, 1, F(1, 2), F(3, 2))))
        rep = validate_schedule(inst, sched)
        assert not rep.feasible
        assert len(rep.by_kind("precedence")) == 1
        assert len(rep.violations) == 1

    def test_machine_overlap_and_missing_member(self):
        inst = make_instance([("a", 2, 1)], machines=MachineModel.identical(1))
        sched = IntervalSchedule((IntervalEntry("a", 0, 0, 0, 1), IntervalEntry("a", 1, 0, F(1, 2), F(3, 2))))
        assert validate_schedule(inst, sched).by_kind("overlap")
        rep = validate_schedule(inst, IntervalSchedule((IntervalEntry("a", 0, 0, 0, 1),)))
        assert rep.by_kind("completion")

    def test_split_member_needs_preemption(self):
        entries = (IntervalEntry("a", 0, 0, 0, F(1, 2)), IntervalEntry("a", 0, 1, 1, F(3, 2)))
        inst = make_instance([("a", 1, 1)], machines=MachineModel.identical(2))
        assert not validate_schedule(inst, IntervalSchedule(entries)).feasible
        assert validate_schedule(inst.replace(preemptive=True), IntervalSchedule(entries)).feasible

    def test_member_on_two_machines_at_once(self):
        inst = make_instance([("a", 1, 2)], machines=MachineModel.identical(2), preemptive=True)
        sched = IntervalSchedule((IntervalEntry("a", 0, 0, 0, 1), IntervalEntry("a", 0, 1, 0, 1)))
        assert validate_schedule(inst, sched).by_kind("overlap")

    def test_speed_scales_work(self):
        inst = make_instance([("a", 1, 6)], machines=MachineModel.uniform([(1, 1), (3, 1)]))
        assert validate_schedule(inst, IntervalSchedule((IntervalEntry("a", 0, 1, 0, 2),))).feasible
        assert not validate_schedule(inst, IntervalSchedule((IntervalEntry("a", 0, 0, 0, 2),))).feasible

    def test_structural_errors(self):
        inst = unit_jobs(["a"], 1)
        for bad in (IntervalEntry("z", 0, 0, 0, 1), IntervalEntry("a", 1, 0, 0, 1),
                    IntervalEntry("a", 0, 5, 0, 1), IntervalEntry("a", 0, 0, 1, 1)):
            with pytest.raises(StructuralError):
                validate_schedule(inst, IntervalSchedule((bad,)))


class TestValidateSlotsAndBlocks:
    def test_slot_capacity_and_precedence(self):
        inst = make_instance([("a", 3, 1), ("b", 1, 1)], [("a", "b")], MachineModel.identical(2))
        good = SlotSchedule((SlotEntry(1, "a", 2), SlotEntry(2, "a", 1), SlotEntry(3, "b", 1)))
        assert validate_schedule(inst, good).feasible
        crowded = SlotSchedule((SlotEntry(1, "a", 3), SlotEntry(2, "b", 1)))
        assert validate_schedule(inst, crowded).by_kind("capacity")
        early = SlotSchedule((SlotEntry(1, "a", 2), SlotEntry(2, "a", 1), SlotEntry(2, "b", 1)))
        assert validate_schedule(inst, early).by_kind("precedence")

    def test_slot_needs_identical_machines(self):
        inst = make_instance([("a", 1, 1)], machines=MachineModel.uniform([(1, 1)]))
        with pytest.raises(UnsupportedModelError):
            validate_schedule(inst, SlotSchedule((SlotEntry(1, "a", 1),)))

    def test_block_capacity(self):
        inst = make_instance([("a", 4, 1)], machines=MachineModel.uniform([(1, 2)]))
        assert validate_schedule(inst, BlockSchedule((BlockEntry(0, 0, 2, "a", 4),))).feasible
        assert validate_schedule(inst, BlockSchedule((BlockEntry(0, 0, 1, "a", 4),))).by_kind("capacity")

    def test_block_indivisible_jobs(self):
        # 3 jobs of length 2 on 2 machines in a window of length 3: work fits, jobs do not
        inst = make_instance([("a", 3, 2)], machines=MachineModel.uniform([(1, 2)]))
        rep = validate_schedule(inst, BlockSchedule((BlockEntry(0, 0, 3, "a", 3),)))
        assert rep.by_kind("capacity")


class TestBounds:
    def test_load_bound(self):
        assert combinatorial_lower_bound(unit_jobs([f"j{i}" for i in range(7)], 2)) == F(7, 2)

    def test_critical_path_bound(self):
        ids = [f"c{i}" for i in range(5)]
        inst = unit_jobs(ids, 10, list(zip(ids, ids[1:])))
        assert critical_path(inst) == 5
        assert combinatorial_lower_bound(inst) == 5

    def test_gap_instance_bound(self):
        inst, _ = gen_gap_basic(4, 3)
        assert critical_path(inst) == 5
        assert inst.total_members == 21
        assert combinatorial_lower_bound(inst) == 7

    def test_uniform_unsupported(self):
        inst = make_instance([("a", 1, 1)], machines=MachineModel.uniform([(2, 1)]))
        with pytest.raises(UnsupportedModelError):
            combinatorial_lower_bound(inst)


class TestExpansion:
    def test_expand_all_to_all(self):
        inst = make_instance([("a", 3, 1), ("b", 2, 1)], [("a", "b")], MachineModel.identical(2))
        ex = expand_members(inst, 100)
        assert len(ex.groups) == 5
        assert len(ex.precedence) == 6
        assert ex.metadata["expanded"]

    def test_expand_gap_instance(self):
        inst, _ = gen_gap_family(1, 2, 2)
        assert len(expand_members(inst, 100).groups) == 7

    def test_cap(self):
        inst = make_instance([("a", 10 ** 6, 1)], machines=MachineModel.identical(1))
        with pytest.raises(SizeError):
            expand_members(inst, 1000)

    @given(unit_instances())
    def test_aggregate_inverts_expand(self, inst):
        back = aggregate_members(expand_members(inst, 1000))
        assert back == inst

    @given(unit_instances())
    def test_expand_preserves_member_relation(self, inst):
        ex = expand_members(inst, 1000)
        names = {}
        for g in inst.groups:
            for i in range(g.count):
                names[(g.id, i)] = g.id if g.count == 1 else f"{g.id}[{i}]"
        rel = {(names[a], names[b]) for a, b in member_relation(inst)}
        assert rel == set(ex.precedence)

    @given(weighted_instances())
    def test_bounds_are_consistent(self, inst):
        lb = combinatorial_lower_bound(inst)
        assert lb >= critical_path(inst)
        assert lb >= inst.total_work / inst.machines.m
        assert lb >= max(g.proc_time for g in inst.groups)
