"""Slot-indexed LP relaxation for unit jobs on identical machines.

For a horizon ``T`` the variable ``x[u, t]`` is the amount of unit ``u``
processed in slot ``t`` (time ``[t-1, t]``).  The rows are

* capacity, per slot: ``sum_u x[u, t] <= m``;
* completion, per unit: ``sum_t x[u, t] = count(u)``;
* precedence, per pair ``a < b`` and slot ``t'``:
  ``sum_{t < t'} x[a, t] / count(a) + sum_{t > t'} x[b, t] / count(b) >= 1``.

A unit is a single member (``aggregate=False``, every count is 1) or a
whole group (``aggregate=True``).  Averaging a per-member solution over
the members of each group yields an aggregated solution and spreading an
aggregated one evenly gives back a per-member solution, so the two forms
are feasible for the same horizons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterator, Optional

from .core import Instance, combinatorial_lower_bound, member_id
from .errors import BudgetError, StructuralError, UnsupportedModelError
from .rational import ceil_fraction
from .simplex import phase_one
from .solvers import list_schedule

DEFAULT_MAX_ENTRIES = 400_000


@dataclass(frozen=True)
class LpRow:
    label: tuple
    coeffs: dict
    sense: str
    rhs: Fraction


@dataclass(frozen=True)
class LpProblem:
    T: int
    m: int
    units: tuple             # unit names
    weights: tuple           # member count per unit
    pairs: tuple             # (predecessor unit, successor unit)
    aggregate: bool = False

    def __post_init__(self):
        if self.T < 1 or self.m < 1 or not self.units:
            raise StructuralError("LP needs T, m and at least one unit")

    @property
    def variables(self) -> list:
        return [(u, t) for u in self.units for t in range(1, self.T + 1)]

    @property
    def weight(self) -> dict:
        return dict(zip(self.units, self.weights))

    @property
    def row_count(self) -> int:
        return self.T + len(self.units) + len(self.pairs) * self.T

    def rows(self) -> Iterator[LpRow]:
        """Every row, in the order capacity, completion, precedence."""
        T = self.T
        for t in range(1, T + 1):
            yield LpRow(("capacity", t), {(u, t): Fraction(1) for u in self.units}, "<=", Fraction(self.m))
        for u, w in zip(self.units, self.weights):
            yield LpRow(("completion", u), {(u, t): Fraction(1) for t in range(1, T + 1)}, "=", Fraction(w))
        weight = self.weight
        for a, b in self.pairs:
            wa, wb = Fraction(1, weight[a]), Fraction(1, weight[b])
            for tp in range(1, T + 1):
                coeffs = {(a, t): wa for t in range(1, tp)}
                coeffs.update({(b, t): wb for t in range(tp + 1, T + 1)})
                yield LpRow(("precedence", a, b, tp), coeffs, ">=", Fraction(1))


@dataclass
class LpSolution:
    values: dict = field(default_factory=dict)   # (unit, t) -> Fraction; absent keys are 0

    def get(self, unit, t) -> Fraction:
        return self.values.get((unit, t), Fraction(0))

    def loads(self, T: int) -> list:
        out = [Fraction(0)] * T
        for (_, t), v in self.values.items():
            out[t - 1] += v
        return out


def lp_units(inst: Instance, aggregate: bool):
    if not inst.machines.is_identical:
        raise UnsupportedModelError("the LP relaxation is defined for identical machines")
    if any(g.proc_time != 1 for g in inst.groups):
        raise UnsupportedModelError("the LP relaxation needs unit processing times")
    if aggregate:
        units = tuple(g.id for g in inst.groups)
        weights = tuple(g.count for g in inst.groups)
        pairs = tuple(inst.precedence)
    else:
        names = {g.id: [member_id(g, i) for i in range(g.count)] for g in inst.groups}
        units = tuple(n for g in inst.groups for n in names[g.id])
        weights = tuple(1 for _ in units)
        pairs = tuple((x, y) for a, b in inst.precedence for x in names[a] for y in names[b])
    return units, weights, pairs


def build_lp(inst: Instance, T: int, aggregate: bool = False) -> LpProblem:
    units, weights, pairs = lp_units(inst, aggregate)
    return LpProblem(T, inst.machines.m, units, weights, pairs, aggregate)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    row: Optional[tuple] = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def check_solution(lp: LpProblem, sol: LpSolution) -> CheckResult:
    """Exact evaluation of every row; reports the first violated one.

    Precedence rows are evaluated through prefix sums, so the cost is
    ``O(T * (units + pairs))`` rather than one pass per explicit row.
    """
    T = lp.T
    index = {u: i for i, u in enumerate(lp.units)}
    table = [[Fraction(0)] * (T + 1) for _ in lp.units]
    for (u, t), v in sol.values.items():
        if u not in index or not 1 <= t <= T:
            raise StructuralError(f"solution refers to unknown variable ({u!r}, {t})")
        if v < 0:
            return CheckResult(False, ("nonnegativity", u, t), f"x[{u}, {t}] = {v}")
        table[index[u]][t] = Fraction(v)
    for t in range(1, T + 1):
        load = sum(row[t] for row in table)
        if load > lp.m:
            return CheckResult(False, ("capacity", t), f"load {load} > {lp.m}")
    prefix = []
    for u, w, row in zip(lp.units, lp.weights, table):
        acc = [Fraction(0)]
        for t in range(1, T + 1):
            acc.append(acc[-1] + row[t])
        if acc[T] != w:
            return CheckResult(False, ("completion", u), f"total {acc[T]} != {w}")
        prefix.append(acc)
    for a, b in lp.pairs:
        pa, pb = prefix[index[a]], prefix[index[b]]
        wa, wb = lp.weights[index[a]], lp.weights[index[b]]
        for tp in range(1, T + 1):
            lhs = pa[tp - 1] / wa + (pb[T] - pb[tp]) / wb
            if lhs < 1:
                return CheckResult(False, ("precedence", a, b, tp), f"lhs {lhs} < 1")
    return CheckResult(True)


def check_farkas(lp: LpProblem, multipliers: dict) -> bool:
    """Validate an infeasibility certificate keyed by row label."""
    combo = {}
    rhs = Fraction(0)
    for row in lp.rows():
        y = multipliers.get(row.label, Fraction(0))
        if not y:
            continue
        if (row.sense == "<=" and y > 0) or (row.sense == ">=" and y < 0):
            return False
        rhs += y * row.rhs
        for var, a in row.coeffs.items():
            combo[var] = combo.get(var, Fraction(0)) + y * a
    return rhs > 0 and all(v <= 0 for v in combo.values())


@dataclass
class LpResult:
    feasible: bool
    T: int
    solution: Optional[LpSolution] = None
    certificate: Optional[dict] = None
    pivots: int = 0


def solve_feasibility(lp: LpProblem, max_entries: int = DEFAULT_MAX_ENTRIES) -> LpResult:
    """Exact phase-1 simplex; both answers are re-verified before returning."""
    variables = lp.variables
    column = {v: j for j, v in enumerate(variables)}
    entries = len(variables) * lp.row_count
    if entries > max_entries * 50 or lp.row_count * len(variables) > max_entries * 50:
        raise BudgetError(f"LP with {lp.row_count} rows x {len(variables)} columns exceeds the budget")
    rows, labels = [], []
    for row in lp.rows():
        rows.append(({column[v]: a for v, a in row.coeffs.items()}, row.sense, row.rhs))
        labels.append(row.label)
    if sum(len(r[0]) for r in rows) > max_entries:
        raise BudgetError(f"LP has more than {max_entries} nonzeros")
    out = phase_one(len(variables), rows)
    if out.feasible:
        sol = LpSolution({v: x for v, x in zip(variables, out.x) if x})
        check = check_solution(lp, sol)
        if not check:
            raise AssertionError(f"simplex returned an infeasible point: {check}")
        return LpResult(True, lp.T, solution=sol, pivots=out.pivots)
    cert = {label: y for label, y in zip(labels, out.multipliers) if y}
    if not check_farkas(lp, cert):
        raise AssertionError("simplex returned an invalid Farkas certificate")
    return LpResult(False, lp.T, certificate=cert, pivots=out.pivots)


@dataclass
class HorizonSearch:
    T: int
    at_T: LpResult
    below: Optional[LpResult]
    probes: dict


def search_min_T(inst: Instance, aggregate: bool = True, max_entries: int = DEFAULT_MAX_ENTRIES) -> HorizonSearch:
    """Binary search for the smallest feasible horizon.

    The bracket is ``[ceil(lower bound), list-schedule makespan]``; the
    upper end is feasible because an integral slot schedule is an LP point.
    """
    lo = max(1, ceil_fraction(combinatorial_lower_bound(inst)))
    hi = max(lo, ceil_fraction(list_schedule(inst).makespan))
    probes = {}

    def probe(T):
        if T not in probes:
            probes[T] = solve_feasibility(build_lp(inst, T, aggregate), max_entries)
        return probes[T]

    while lo < hi:
        mid = (lo + hi) // 2
        if probe(mid).feasible:
            hi = mid
        else:
            lo = mid + 1
    at_T = probe(lo)
    if not at_T.feasible:
        raise AssertionError("LP infeasible at the list-schedule horizon")
    below = probe(lo - 1) if lo > 1 else None
    if below is not None and below.feasible:
        raise AssertionError("LP feasible below the search bracket")
    return HorizonSearch(lo, at_T, below, probes)


def min_feasible_T(inst: Instance, aggregate: bool = True, max_entries: int = DEFAULT_MAX_ENTRIES) -> int:
    return search_min_T(inst, aggregate, max_entries).T


def _lp_name(unit_index: int, t: int) -> str:
    return f"x_{unit_index}_{t}"


def write_lp_format(lp: LpProblem) -> str:
    """CPLEX LP text; precedence rows are scaled to integer coefficients."""
    index = {u: i for i, u in enumerate(lp.units)}
    out = [f"\\ slot LP relaxation: T={lp.T} m={lp.m} units={len(lp.units)}"]
    for i, u in enumerate(lp.units):
        out.append(f"\\ unit {i}: {u}")
    out += ["Minimize", " obj: 0 " + _lp_name(0, 1), "Subject To"]
    for n, row in enumerate(lp.rows()):
        scale = lcm(*(c.denominator for c in row.coeffs.values()), row.rhs.denominator)
        terms = []
        for (u, t), c in row.coeffs.items():
            c = int(c * scale)
            terms.append(f"{'+' if c >= 0 else '-'} {abs(c)} {_lp_name(index[u], t)}")
        if not terms:
            terms = [f"+ 0 {_lp_name(0, 1)}"]
        sense = "=" if row.sense == "=" else row.sense
        out.append(f" r{n}: " + " ".join(terms) + f" {sense} {int(row.rhs * scale)}")
    out.append("End")
    return "\n".join(out) + "\n"
