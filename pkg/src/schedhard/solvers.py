"""Baseline schedulers and an exact brute-force oracle.

Ties are broken lexicographically by ``(group id, member index)`` so every
solver is deterministic.
"""

from __future__ import annotations

import heapq
import os
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .core import (Instance, IntervalEntry, IntervalSchedule, SlotEntry, SlotSchedule,
                   combinatorial_lower_bound)
from .errors import BudgetError, PreconditionError, SizeError, UnsupportedModelError
from .rational import as_fraction


@dataclass(frozen=True)
class SolverBudget:
    max_members: int = 10_000
    max_states: int = 200_000

    def __post_init__(self):
        if self.max_members < 1 or self.max_states < 1:
            raise ValueError("budgets must be positive")

    @classmethod
    def from_env(cls) -> "SolverBudget":
        """Defaults overridable through ``SCHEDHARD_MAX_MEMBERS`` / ``SCHEDHARD_MAX_STATES``."""
        return cls(int(os.environ.get("SCHEDHARD_MAX_MEMBERS", cls.max_members)),
                   int(os.environ.get("SCHEDHARD_MAX_STATES", cls.max_states)))


def _bottom_levels(inst: Instance) -> dict:
    succs = inst.successors()
    groups = inst.by_id
    level = {}
    for gid in reversed(inst.topological_order()):
        level[gid] = groups[gid].proc_time + max((level[s] for s in succs[gid]), default=Fraction(0))
    return level


def _priority_key(inst: Instance, rule: str) -> Callable:
    if rule == "lex":
        return lambda gid, idx: (gid, idx)
    if rule == "critical-path":
        level = _bottom_levels(inst)
        return lambda gid, idx: (-level[gid], gid, idx)
    raise ValueError(f"unknown priority rule {rule!r}")


PRIORITY_RULES = ("lex", "critical-path")


def _check_size(inst: Instance, cap: int):
    if inst.total_members > cap:
        raise SizeError(f"{inst.total_members} members exceed the cap of {cap}")


def _greedy(inst: Instance, key: Callable, speeds: list) -> IntervalSchedule:
    """Event-driven list scheduling over explicit members.

    Whenever machines are idle, the highest-priority available members are
    started, the fastest idle machine first.
    """
    groups = inst.by_id
    preds = inst.predecessors()
    succs = inst.successors()
    waiting = {gid: len(preds[gid]) for gid in groups}
    unfinished = {gid: groups[gid].count for gid in groups}
    ready = []
    for gid, w in waiting.items():
        if w == 0:
            for idx in range(groups[gid].count):
                heapq.heappush(ready, (key(gid, idx), gid, idx))
    # idle machines ordered fastest first, then by id
    idle = [(-s, mid) for mid, s in enumerate(speeds)]
    heapq.heapify(idle)
    running = []  # (end, machine, gid, idx)
    entries = []
    now = Fraction(0)
    while ready or running:
        while ready and idle:
            _, gid, idx = heapq.heappop(ready)
            neg_speed, mid = heapq.heappop(idle)
            end = now + groups[gid].proc_time / -neg_speed
            entries.append(IntervalEntry(gid, idx, mid, now, end))
            heapq.heappush(running, (end, mid, gid, idx))
        if not running:
            break
        now = running[0][0]
        while running and running[0][0] == now:
            _, mid, gid, _ = heapq.heappop(running)
            heapq.heappush(idle, (-speeds[mid], mid))
            unfinished[gid] -= 1
            if unfinished[gid] == 0:
                for s in succs[gid]:
                    waiting[s] -= 1
                    if waiting[s] == 0:
                        for idx in range(groups[s].count):
                            heapq.heappush(ready, (key(s, idx), s, idx))
    return IntervalSchedule(tuple(entries))


def list_schedule(inst: Instance, priority: str = "lex", cap: int = 100_000) -> IntervalSchedule:
    """Graham list scheduling on identical machines.

    The result never exceeds twice :func:`combinatorial_lower_bound`
    (critical path plus average load); this is re-checked on every call.
    """
    if not inst.machines.is_identical:
        raise UnsupportedModelError("list_schedule needs identical machines; use uniform_list_schedule")
    _check_size(inst, cap)
    sched = _greedy(inst, _priority_key(inst, priority), [Fraction(1)] * inst.machines.m)
    if sched.makespan > 2 * combinatorial_lower_bound(inst):
        raise AssertionError("list schedule exceeds the Graham bound")
    return sched


def uniform_list_schedule(inst: Instance, cap: int = 100_000) -> IntervalSchedule:
    """Greedy baseline for uniform machines: available jobs go to the fastest idle machine."""
    _check_size(inst, cap)
    speeds = [inst.machines.machine_speed(i) for i in range(inst.machines.m)]
    return _greedy(inst, _priority_key(inst, "lex"), speeds)


def mcnaughton(inst: Instance, cap: int = 100_000) -> IntervalSchedule:
    """Wrap-around rule for independent jobs on identical machines with preemption."""
    if not inst.machines.is_identical:
        raise UnsupportedModelError("McNaughton's rule needs identical machines")
    if inst.precedence:
        raise PreconditionError("McNaughton's rule needs an instance without precedence")
    if not inst.preemptive:
        raise PreconditionError("McNaughton's rule needs a preemptive instance")
    _check_size(inst, cap)
    m = inst.machines.m
    if not inst.groups:
        return IntervalSchedule(())
    bound = max(max(g.proc_time for g in inst.groups), inst.total_work / m)
    entries = []
    machine, t = 0, Fraction(0)
    for g in sorted(inst.groups, key=lambda g: g.id):
        for idx in range(g.count):
            left = g.proc_time
            while left:
                piece = min(left, bound - t)
                entries.append(IntervalEntry(g.id, idx, machine, t, t + piece))
                t += piece
                left -= piece
                if t == bound:
                    machine, t = machine + 1, Fraction(0)
    return IntervalSchedule(tuple(entries))


# --------------------------------------------------------------------------
# exact oracle


def _compositions(total: int, limits: list):
    """All vectors ``a`` with ``0 <= a[i] <= limits[i]`` and ``sum(a) == total``."""
    if not limits:
        if total == 0:
            yield ()
        return
    head, rest = limits[0], limits[1:]
    rest_max = sum(rest)
    for a in range(min(head, total), max(0, total - rest_max) - 1, -1):
        for tail in _compositions(total - a, rest):
            yield (a,) + tail


def brute_force_schedule(inst: Instance, budget: Optional[SolverBudget] = None):
    """Optimal slot count and a matching slot schedule for unit jobs.

    Breadth-first search over states given by how many members of each
    group are done.  Members of one group are interchangeable, and since
    finishing more jobs never hurts, each slot runs as many available
    members as there are machines.
    """
    budget = budget or SolverBudget.from_env()
    if not inst.machines.is_identical:
        raise UnsupportedModelError("brute force needs identical machines")
    if any(g.proc_time != 1 for g in inst.groups):
        raise PreconditionError("brute force needs unit processing times")
    if inst.total_members > budget.max_members:
        raise SizeError(f"{inst.total_members} members exceed budget {budget.max_members}")
    ids = [g.id for g in inst.groups]
    counts = [g.count for g in inst.groups]
    index = {gid: i for i, gid in enumerate(ids)}
    preds = [[index[p] for p in ps] for ps in (inst.predecessors()[gid] for gid in ids)]
    m = inst.machines.m
    start = tuple(0 for _ in ids)
    goal = tuple(counts)
    parent = {start: None}
    frontier = deque([start])
    while frontier:
        state = frontier.popleft()
        if state == goal:
            break
        avail = [i for i in range(len(ids))
                 if state[i] < counts[i] and all(state[p] == counts[p] for p in preds[i])]
        limits = [counts[i] - state[i] for i in avail]
        take = min(m, sum(limits))
        for comp in _compositions(take, limits):
            nxt = list(state)
            for i, a in zip(avail, comp):
                nxt[i] += a
            nxt = tuple(nxt)
            if nxt not in parent:
                parent[nxt] = state
                if len(parent) > budget.max_states:
                    raise BudgetError(f"more than {budget.max_states} states explored")
                frontier.append(nxt)
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    entries = []
    for slot, (before, after) in enumerate(zip(path, path[1:]), start=1):
        for i, gid in enumerate(ids):
            if after[i] > before[i]:
                entries.append(SlotEntry(slot, gid, after[i] - before[i]))
    return len(path) - 1, SlotSchedule(tuple(entries))


def brute_force_opt(inst: Instance, budget: Optional[SolverBudget] = None) -> int:
    return brute_force_schedule(inst, budget)[0]


def gap_ratio(integral, lp_value) -> Fraction:
    lp_value = as_fraction(lp_value)
    if lp_value <= 0:
        raise ValueError("lp_value must be positive")
    return as_fraction(integral) / lp_value


def slots_from_intervals(sched: IntervalSchedule) -> SlotSchedule:
    """Convert an integral unit-job interval schedule to slot form."""
    counts = {}
    for e in sched.entries:
        if e.end - e.start != 1 or e.start.denominator != 1:
            raise PreconditionError("schedule is not slot-integral")
        key = (int(e.end), e.group)
        counts[key] = counts.get(key, 0) + 1
    return SlotSchedule(tuple(SlotEntry(t, gid, c) for (t, gid), c in sorted(counts.items())))
