"""Integrality-gap instances for the slot LP and their fractional solutions.

``I(k, d)`` on ``m`` machines alternates big layers and chains::

    L1.001 -> L2.001.001 -> ... -> L2.001.{d-1} -> L1.002 -> L2.002.001 -> ... -> L1.{k+1}

Each big layer ``L1.i`` is one group of ``dm - (d - 1)`` unit jobs and each
chain link ``L2.i.r`` is a single unit job.  ``I(1, d)`` is the basic
instance ``I(d)``.

The fractional solution runs at horizon ``(k + 1) d``:

* ``L1.001``: member 0 entirely in slot 1, every other member at ``1/d``
  in slots ``1..d``;
* ``L1.i`` for ``i >= 2``: every member at ``1/d`` in slots ``(i-1)d+1 .. id``;
* chain link ``L2.i.r``: ``1/d`` in slots ``(i-1)d+r+1 .. (i-1)d+r+d``.

Slot 1 is filled to exactly ``m`` and slots ``2..d`` stay below ``m``.
Slots ``d+1 .. kd``, where a big layer overlaps the tail of one chain and
the head of the next, are filled to exactly ``m``.  In the last ``d``
slots the load falls to ``m - l/d`` at slot ``kd + 1 + l``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from .core import Instance, JobGroup, MachineModel, member_id
from .errors import BudgetError, ParameterError
from .lp import LpSolution, build_lp, check_solution
from .rational import format_fraction
from .solvers import SolverBudget, brute_force_opt, list_schedule


def _check_params(k: int, d: int, m: int):
    if k < 1:
        raise ParameterError("k must be at least 1")
    if d < 2:
        raise ParameterError("d must be at least 2")
    if m < 2:
        raise ParameterError("m must be at least 2")


def layer_size(d: int, m: int) -> int:
    return d * m - (d - 1)


def big_id(i: int) -> str:
    return f"L1.{i:03d}"


def chain_id(i: int, r: int) -> str:
    return f"L2.{i:03d}.{r:03d}"


def gen_gap_family(k: int, d: int, m: int):
    """``I(k, d)`` and its fractional solution at horizon ``(k + 1) d``."""
    _check_params(k, d, m)
    size = layer_size(d, m)
    groups, precedence = [], []
    prev = None
    for i in range(1, k + 2):
        big = JobGroup(big_id(i), size, 1)
        groups.append(big)
        if prev is not None:
            precedence.append((prev, big.id))
        prev = big.id
        if i == k + 1:
            break
        for r in range(1, d):
            cid = chain_id(i, r)
            groups.append(JobGroup(cid, 1, 1))
            precedence.append((prev, cid))
            prev = cid
    inst = Instance(tuple(groups), tuple(precedence), MachineModel.identical(m), False,
                    {"family": "gap", "k": k, "d": d, "m": m})

    step = Fraction(1, d)
    values = {}
    first = groups[0]
    values[(member_id(first, 0), 1)] = Fraction(1)
    for j in range(1, size):
        for t in range(1, d + 1):
            values[(member_id(first, j), t)] = step
    for g in groups[1:]:
        parts = g.id.split(".")
        i = int(parts[1])
        base = (i - 1) * d
        if parts[0] == "L1":
            slots = range(base + 1, base + d + 1)
        else:
            r = int(parts[2])
            slots = range(base + r + 1, base + r + d + 1)
        for j in range(g.count):
            name = member_id(g, j)
            for t in slots:
                values[(name, t)] = step
    return inst, LpSolution(values)


def gen_gap_basic(d: int, m: int):
    """``I(d)``: one big layer, a chain of ``d - 1`` jobs, one big layer."""
    return gen_gap_family(1, d, m)


def residual_loads(sol: LpSolution, T: int, m: int) -> list:
    """Unused capacity ``m - load`` per slot."""
    return [m - load for load in sol.loads(T)]


def integral_lower_bound(k: int, d: int, m: int) -> Fraction:
    """Work bound per big layer plus one slot per chain link."""
    return Fraction((k + 1) * layer_size(d, m), m) + k * (d - 1)


def paper_bound(k: int, d: int) -> int:
    return 2 * k * d + d - k - 1


def layered_opt(k: int, d: int, m: int) -> int:
    """Exact optimum: the layers are totally ordered, so their slot counts add."""
    size = layer_size(d, m)
    return (k + 1) * (-(-size // m)) + k * (d - 1)


@dataclass
class GapReport:
    k: int
    d: int
    m: int
    lp_value: int
    lp_verified: bool
    paper_bound: int
    integral_lower_bound: Fraction
    integral_opt: Optional[int]
    opt_method: str
    list_makespan: Optional[Fraction]
    ratio: Fraction
    residual_loads: list = field(default_factory=list)

    @property
    def key(self) -> tuple:
        return (self.k, self.d, self.m)

    def as_row(self) -> dict:
        row = asdict(self)
        for name in ("integral_lower_bound", "ratio", "list_makespan"):
            if row[name] is not None:
                row[name] = format_fraction(row[name])
        row["residual_loads"] = [format_fraction(v) for v in self.residual_loads]
        return row


CSV_FIELDS = ("k", "d", "m", "lp_value", "lp_verified", "paper_bound", "integral_lower_bound",
              "integral_opt", "opt_method", "list_makespan", "ratio", "ratio_float", "status")


def gap_report(k: int, d: int, m: int, exact: bool = False,
               budget: Optional[SolverBudget] = None) -> GapReport:
    """Assemble LP value, integral bounds and their ratio for ``I(k, d)``.

    The closed-form solution is verified exactly against the per-member LP.
    With ``exact`` the integral optimum comes from the brute-force oracle;
    otherwise from the layered formula, which must match list scheduling.
    """
    inst, sol = gen_gap_family(k, d, m)
    T = (k + 1) * d
    lp = build_lp(inst, T, aggregate=False)
    verified = bool(check_solution(lp, sol))
    lb = integral_lower_bound(k, d, m)
    sched = list_schedule(inst, cap=(budget or SolverBudget.from_env()).max_members * 10)
    value = layered_opt(k, d, m)
    method = "layered"
    if exact:
        value = brute_force_opt(inst, budget)
        method = "brute-force"
    if sched.makespan < value or value < lb:
        raise AssertionError(f"integral bounds inconsistent for {(k, d, m)}")
    if method == "layered" and sched.makespan != value:
        raise AssertionError(f"list schedule misses the layered optimum for {(k, d, m)}")
    ratio = max(lb, Fraction(value)) / T
    return GapReport(k, d, m, T, verified, paper_bound(k, d), lb, value, method,
                     sched.makespan, ratio, residual_loads(sol, T, m))


def reports_to_csv(rows: list) -> str:
    """``rows`` holds :class:`GapReport` objects or ``(key, error message)`` pairs."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for item in rows:
        if isinstance(item, GapReport):
            row = {f: item.as_row().get(f) for f in CSV_FIELDS}
            row["ratio_float"] = f"{float(item.ratio):.6f}"
            row["status"] = "ok"
        else:
            (k, d, m), message = item
            row = {"k": k, "d": d, "m": m, "status": f"error: {message}"}
        writer.writerow(row)
    return buf.getvalue()


def reports_to_json(rows: list) -> str:
    out = []
    for item in rows:
        if isinstance(item, GapReport):
            out.append(dict(item.as_row(), status="ok"))
        else:
            (k, d, m), message = item
            out.append({"k": k, "d": d, "m": m, "status": f"error: {message}"})
    return json.dumps(out, indent=2) + "\n"


def safe_gap_report(key: tuple, exact: bool = False):
    """Worker entry point: budget failures become marked rows."""
    try:
        return gap_report(*key, exact=exact)
    except BudgetError as err:
        return (key, str(err))
