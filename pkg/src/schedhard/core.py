"""Instance and schedule data model, schedule validation and lower bounds.

Jobs are stored as groups of interchangeable members.  Precedence is
declared between groups and means every member of the predecessor must
finish before any member of the successor starts.  All times are exact
``Fraction`` values.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import SizeError, StructuralError, UnsupportedModelError
from .rational import as_fraction


@dataclass(frozen=True)
class JobGroup:
    id: str
    count: int
    proc_time: Fraction

    def __post_init__(self):
        object.__setattr__(self, "proc_time", as_fraction(self.proc_time))
        if not isinstance(self.count, int) or isinstance(self.count, bool) or self.count < 1:
            raise StructuralError(f"group {self.id!r}: count must be a positive integer")
        if self.proc_time <= 0:
            raise StructuralError(f"group {self.id!r}: proc_time must be positive")

    @property
    def work(self) -> Fraction:
        return self.count * self.proc_time


@dataclass(frozen=True)
class MachineModel:
    """``kind`` is ``"identical"``, ``"uniform"`` or ``"single"``.

    Uniform machines are described by ``classes``, a tuple of
    ``(speed, count)`` pairs.  Machine ids used by interval schedules run
    over the classes in order.
    """

    kind: str
    m: int = 1
    classes: tuple = ()

    def __post_init__(self):
        if self.kind == "single":
            object.__setattr__(self, "m", 1)
        elif self.kind == "identical":
            if not isinstance(self.m, int) or self.m < 1:
                raise StructuralError("identical machine count must be >= 1")
        elif self.kind == "uniform":
            classes = tuple((as_fraction(s), int(c)) for s, c in self.classes)
            if not classes:
                raise StructuralError("uniform model needs at least one machine class")
            for s, c in classes:
                if s <= 0 or c < 1:
                    raise StructuralError("machine speeds and counts must be positive")
            object.__setattr__(self, "classes", classes)
            object.__setattr__(self, "m", sum(c for _, c in classes))
        else:
            raise StructuralError(f"unknown machine model {self.kind!r}")

    @classmethod
    def identical(cls, m: int) -> "MachineModel":
        return cls("identical", m)

    @classmethod
    def single(cls) -> "MachineModel":
        return cls("single")

    @classmethod
    def uniform(cls, classes) -> "MachineModel":
        return cls("uniform", classes=tuple(classes))

    @property
    def is_identical(self) -> bool:
        return self.kind in ("identical", "single")

    def speed_classes(self) -> tuple:
        """(speed, count) pairs for every model; identical machines form one class."""
        if self.kind == "uniform":
            return self.classes
        return ((Fraction(1), self.m),)

    def machine_speed(self, machine: int) -> Fraction:
        if not 0 <= machine < self.m:
            raise StructuralError(f"machine id {machine} out of range [0, {self.m})")
        for speed, count in self.speed_classes():
            if machine < count:
                return speed
            machine -= count
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class Instance:
    groups: tuple
    precedence: tuple
    machines: MachineModel
    preemptive: bool = False
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        groups = tuple(self.groups)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "precedence", tuple(sorted({(a, b) for a, b in self.precedence})))
        object.__setattr__(self, "metadata", dict(self.metadata))
        ids = [g.id for g in groups]
        if len(set(ids)) != len(ids):
            raise StructuralError("duplicate group id")
        known = set(ids)
        for a, b in self.precedence:
            if a not in known or b not in known:
                raise StructuralError(f"precedence ({a!r}, {b!r}) references an unknown group")
            if a == b:
                raise StructuralError(f"self-loop on group {a!r}")
        self.topological_order()  # raises on cycles

    def __hash__(self):
        return hash((self.groups, self.precedence, self.machines, self.preemptive))

    @property
    def by_id(self) -> dict:
        return {g.id: g for g in self.groups}

    @property
    def total_members(self) -> int:
        return sum(g.count for g in self.groups)

    @property
    def total_work(self) -> Fraction:
        return sum((g.work for g in self.groups), Fraction(0))

    def predecessors(self) -> dict:
        preds = {g.id: [] for g in self.groups}
        for a, b in self.precedence:
            preds[b].append(a)
        return preds

    def successors(self) -> dict:
        succs = {g.id: [] for g in self.groups}
        for a, b in self.precedence:
            succs[a].append(b)
        return succs

    def topological_order(self) -> list:
        """Group ids in a topological order, ties broken by id."""
        import heapq

        indeg = {g.id: 0 for g in self.groups}
        succs = defaultdict(list)
        for a, b in self.precedence:
            indeg[b] += 1
            succs[a].append(b)
        heap = [gid for gid, d in indeg.items() if d == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            gid = heapq.heappop(heap)
            order.append(gid)
            for b in succs[gid]:
                indeg[b] -= 1
                if indeg[b] == 0:
                    heapq.heappush(heap, b)
        if len(order) != len(indeg):
            raise StructuralError("precedence relation contains a cycle")
        return order

    def replace(self, **changes) -> "Instance":
        fields = dict(groups=self.groups, precedence=self.precedence, machines=self.machines,
                      preemptive=self.preemptive, metadata=self.metadata)
        fields.update(changes)
        return Instance(**fields)


# --------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class IntervalEntry:
    group: str
    member: int
    machine: int
    start: Fraction
    end: Fraction


@dataclass(frozen=True)
class SlotEntry:
    slot: int
    group: str
    count: int


@dataclass(frozen=True)
class BlockEntry:
    machine_class: int
    start: Fraction
    end: Fraction
    group: str
    count: int


@dataclass(frozen=True)
class IntervalSchedule:
    entries: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(
            IntervalEntry(e.group, e.member, e.machine, as_fraction(e.start), as_fraction(e.end))
            for e in self.entries))

    @property
    def makespan(self) -> Fraction:
        return max((e.end for e in self.entries), default=Fraction(0))


@dataclass(frozen=True)
class SlotSchedule:
    """Unit-width slots; slot ``t`` covers the time interval ``[t-1, t]``."""

    entries: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def makespan(self) -> int:
        return max((e.slot for e in self.entries), default=0)

    def loads(self) -> dict:
        out = defaultdict(int)
        for e in self.entries:
            out[e.slot] += e.count
        return dict(sorted(out.items()))


@dataclass(frozen=True)
class BlockSchedule:
    entries: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(
            BlockEntry(e.machine_class, as_fraction(e.start), as_fraction(e.end), e.group, e.count)
            for e in self.entries))

    @property
    def makespan(self) -> Fraction:
        return max((e.end for e in self.entries), default=Fraction(0))


Schedule = Union[IntervalSchedule, SlotSchedule, BlockSchedule]


@dataclass(frozen=True)
class Violation:
    kind: str  # precedence | capacity | completion | overlap
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    feasible: bool
    makespan: Fraction
    violations: tuple = ()

    def by_kind(self, kind: str) -> list:
        return [v for v in self.violations if v.kind == kind]


def _report(makespan, violations) -> ValidationReport:
    return ValidationReport(not violations, Fraction(makespan), tuple(violations))


def validate_schedule(inst: Instance, sched: Schedule) -> ValidationReport:
    """Check a schedule of any form against ``inst``.

    Structural problems (unknown ids, empty or negative intervals) raise
    :class:`StructuralError`; feasibility problems are collected as
    violations.
    """
    if isinstance(sched, IntervalSchedule):
        return _validate_intervals(inst, sched)
    if isinstance(sched, SlotSchedule):
        return _validate_slots(inst, sched)
    if isinstance(sched, BlockSchedule):
        return _validate_blocks(inst, sched)
    raise StructuralError(f"unknown schedule form {type(sched).__name__}")


def _check_precedence(inst, first_start, last_end, violations, strict=False):
    # first_start/last_end map group id -> time (absent when the group never runs)
    for a, b in inst.precedence:
        if a not in last_end or b not in first_start:
            continue
        ok = last_end[a] < first_start[b] if strict else last_end[a] <= first_start[b]
        if not ok:
            violations.append(Violation(
                "precedence",
                f"{b} starts at {first_start[b]} before predecessor {a} ends at {last_end[a]}"))


def _validate_intervals(inst: Instance, sched: IntervalSchedule) -> ValidationReport:
    groups = inst.by_id
    machines = inst.machines
    per_machine = defaultdict(list)
    per_member = defaultdict(list)
    for e in sched.entries:
        g = groups.get(e.group)
        if g is None:
            raise StructuralError(f"unknown group {e.group!r}")
        if not 0 <= e.member < g.count:
            raise StructuralError(f"member {e.member} out of range for group {e.group!r}")
        if not 0 <= e.machine < machines.m:
            raise StructuralError(f"machine id {e.machine} out of range")
        if e.end <= e.start:
            raise StructuralError(f"empty or negative interval for {e.group}[{e.member}]")
        if e.start < 0:
            raise StructuralError(f"negative start time for {e.group}[{e.member}]")
        per_machine[e.machine].append(e)
        per_member[(e.group, e.member)].append(e)

    violations = []
    for machine, items in sorted(per_machine.items()):
        items.sort(key=lambda e: (e.start, e.end))
        for prev, cur in zip(items, items[1:]):
            if cur.start < prev.end:
                violations.append(Violation(
                    "overlap", f"machine {machine}: {prev.group}[{prev.member}] and "
                               f"{cur.group}[{cur.member}] overlap at {cur.start}"))

    first_start, last_end = {}, {}
    seen = defaultdict(int)
    for (gid, member), items in sorted(per_member.items()):
        g = groups[gid]
        seen[gid] += 1
        items.sort(key=lambda e: (e.start, e.end))
        for prev, cur in zip(items, items[1:]):
            if cur.start < prev.end:
                violations.append(Violation(
                    "overlap", f"{gid}[{member}] runs on two machines at time {cur.start}"))
        if not inst.preemptive and len(items) > 1:
            violations.append(Violation(
                "completion", f"{gid}[{member}] is split into {len(items)} pieces in a "
                              f"non-preemptive instance"))
        work = sum((machines.machine_speed(e.machine) * (e.end - e.start) for e in items), Fraction(0))
        if work != g.proc_time:
            violations.append(Violation(
                "completion", f"{gid}[{member}] receives work {work}, needs {g.proc_time}"))
        s, f = items[0].start, max(e.end for e in items)
        first_start[gid] = min(first_start.get(gid, s), s)
        last_end[gid] = max(last_end.get(gid, f), f)
    for g in inst.groups:
        missing = g.count - seen.get(g.id, 0)
        if missing:
            violations.append(Violation("completion", f"{missing} member(s) of {g.id} never run"))
    _check_precedence(inst, first_start, last_end, violations)
    return _report(sched.makespan, violations)


def _validate_slots(inst: Instance, sched: SlotSchedule) -> ValidationReport:
    groups = inst.by_id
    if not inst.machines.is_identical:
        raise UnsupportedModelError("slot schedules need identical machines")
    violations = []
    done = defaultdict(int)
    load = defaultdict(int)
    first, last = {}, {}
    for e in sched.entries:
        g = groups.get(e.group)
        if g is None:
            raise StructuralError(f"unknown group {e.group!r}")
        if not isinstance(e.slot, int) or e.slot < 1:
            raise StructuralError(f"slot index must be an integer >= 1, got {e.slot!r}")
        if e.count < 1:
            raise StructuralError(f"non-positive member count in slot {e.slot} for {e.group}")
        done[e.group] += e.count
        load[e.slot] += e.count
        first[e.group] = min(first.get(e.group, e.slot), e.slot)
        last[e.group] = max(last.get(e.group, e.slot), e.slot)
    for g in inst.groups:
        if g.id in done and g.proc_time > 1:
            violations.append(Violation(
                "completion", f"{g.id}: proc_time {g.proc_time} does not fit a unit slot"))
        if done.get(g.id, 0) != g.count:
            violations.append(Violation(
                "completion", f"{g.id}: {done.get(g.id, 0)} of {g.count} members scheduled"))
    for t, n in sorted(load.items()):
        if n > inst.machines.m:
            violations.append(Violation("capacity", f"slot {t}: {n} members on {inst.machines.m} machines"))
    # slot t spans [t-1, t]
    starts = {gid: Fraction(t - 1) for gid, t in first.items()}
    ends = {gid: Fraction(t) for gid, t in last.items()}
    _check_precedence(inst, starts, ends, violations)
    return _report(sched.makespan, violations)


def _validate_blocks(inst: Instance, sched: BlockSchedule) -> ValidationReport:
    groups = inst.by_id
    classes = inst.machines.speed_classes()
    violations = []
    windows = defaultdict(list)
    done = defaultdict(int)
    first, last = {}, {}
    for e in sched.entries:
        g = groups.get(e.group)
        if g is None:
            raise StructuralError(f"unknown group {e.group!r}")
        if not 0 <= e.machine_class < len(classes):
            raise StructuralError(f"machine class {e.machine_class} out of range")
        if e.end <= e.start or e.start < 0:
            raise StructuralError(f"bad window [{e.start}, {e.end}] for {e.group}")
        if e.count < 1:
            raise StructuralError(f"non-positive member count for {e.group}")
        windows[(e.machine_class, e.start, e.end)].append(e)
        done[e.group] += e.count
        first[e.group] = min(first.get(e.group, e.start), e.start)
        last[e.group] = max(last.get(e.group, e.end), e.end)

    by_class = defaultdict(list)
    for (c, s, f) in windows:
        by_class[c].append((s, f))
    for c, spans in sorted(by_class.items()):
        spans.sort()
        for (s0, f0), (s1, f1) in zip(spans, spans[1:]):
            if s1 < f0:
                violations.append(Violation("overlap", f"class {c}: windows [{s0},{f0}] and [{s1},{f1}] overlap"))

    for (c, s, f), items in sorted(windows.items()):
        speed, count = classes[c]
        length = f - s
        work = sum((e.count * groups[e.group].proc_time for e in items), Fraction(0))
        if work > count * speed * length:
            violations.append(Violation(
                "capacity", f"class {c} window [{s},{f}]: work {work} exceeds {count * speed * length}"))
        durations = {groups[e.group].proc_time / speed for e in items}
        for e in items:
            if groups[e.group].proc_time / speed > length:
                violations.append(Violation(
                    "completion", f"{e.group}: a member needs {groups[e.group].proc_time / speed} "
                                  f"on class {c}, window is {length}"))
        if not inst.preemptive and len(durations) == 1:
            (dur,) = durations
            per_machine = length // dur
            members = sum(e.count for e in items)
            if members > count * per_machine:
                violations.append(Violation(
                    "capacity", f"class {c} window [{s},{f}]: {members} members need more than "
                                f"{count} machines x {per_machine} slots"))
    for g in inst.groups:
        if done.get(g.id, 0) != g.count:
            violations.append(Violation(
                "completion", f"{g.id}: {done.get(g.id, 0)} of {g.count} members scheduled"))
    _check_precedence(inst, first, last, violations)
    return _report(sched.makespan, violations)


# --------------------------------------------------------------------------
# bounds and transformations


def critical_path(inst: Instance) -> Fraction:
    """Longest chain of processing times through the group DAG."""
    preds = inst.predecessors()
    groups = inst.by_id
    finish = {}
    for gid in inst.topological_order():
        finish[gid] = groups[gid].proc_time + max((finish[p] for p in preds[gid]), default=Fraction(0))
    return max(finish.values(), default=Fraction(0))


def combinatorial_lower_bound(inst: Instance) -> Fraction:
    """``max(critical path, total work / m)`` for identical machines."""
    if not inst.machines.is_identical:
        raise UnsupportedModelError("combinatorial lower bound is defined for identical machines")
    return max(critical_path(inst), inst.total_work / inst.machines.m)


def member_id(group: JobGroup, index: int) -> str:
    """Name of one member once a group is disaggregated."""
    return group.id if group.count == 1 else f"{group.id}[{index}]"


def expand_members(inst: Instance, cap: int) -> Instance:
    """Disaggregate every group into singleton groups (at most ``cap`` members)."""
    total = inst.total_members
    if total > cap:
        raise SizeError(f"instance has {total} members, cap is {cap}")
    names = {}
    groups = []
    for g in inst.groups:
        names[g.id] = [member_id(g, i) for i in range(g.count)]
        groups.extend(JobGroup(name, 1, g.proc_time) for name in names[g.id])
    precedence = [(x, y) for a, b in inst.precedence for x in names[a] for y in names[b]]
    meta = dict(inst.metadata)
    meta["expanded"] = True
    return Instance(tuple(groups), tuple(precedence), inst.machines, inst.preemptive, meta)


def aggregate_members(inst: Instance) -> Instance:
    """Inverse of :func:`expand_members` for ids of the form ``gid[i]``."""
    import re

    pattern = re.compile(r"^(.*)\[(\d+)\]$")
    counts, proc, order = {}, {}, []
    parent = {}
    for g in inst.groups:
        m = pattern.match(g.id)
        base = m.group(1) if m else g.id
        parent[g.id] = base
        if base not in counts:
            order.append(base)
            counts[base] = 0
            proc[base] = g.proc_time
        counts[base] += g.count
    groups = tuple(JobGroup(b, counts[b], proc[b]) for b in order)
    precedence = {(parent[a], parent[b]) for a, b in inst.precedence}
    meta = {k: v for k, v in inst.metadata.items() if k != "expanded"}
    return Instance(groups, tuple(precedence), inst.machines, inst.preemptive, meta)


def member_relation(inst: Instance) -> set:
    """Precedence over individual members as ``((gid, i), (gid, j))`` pairs."""
    groups = inst.by_id
    rel = set()
    for a, b in inst.precedence:
        for i in range(groups[a].count):
            for j in range(groups[b].count):
                rel.add(((a, i), (b, j)))
    return rel


def make_instance(groups: Iterable, precedence: Iterable = (), machines: Optional[MachineModel] = None,
                  preemptive: bool = False, metadata: Optional[Mapping] = None) -> Instance:
    """Convenience constructor accepting ``(id, count, proc_time)`` tuples."""
    gs = tuple(g if isinstance(g, JobGroup) else JobGroup(*g) for g in groups)
    return Instance(gs, tuple(precedence), machines or MachineModel.single(), preemptive,
                    dict(metadata or {}))


def unit_jobs(ids: Sequence[str], m: int, precedence=(), preemptive=False) -> Instance:
    return make_instance([(i, 1, 1) for i in ids], precedence, MachineModel.identical(m), preemptive)
