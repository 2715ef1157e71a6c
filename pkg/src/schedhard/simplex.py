"""Exact phase-1 simplex over the rationals.

Rows are ``(coeffs, sense, rhs)`` with ``coeffs`` a ``{column: Fraction}``
map over nonnegative variables and ``sense`` one of ``"<="``, ``">="``,
``"="``.  The tableau is stored as sparse dict rows.  Entering and leaving
variables follow Bland's smallest-index rule, so the method terminates.

A feasible answer carries a basic solution.  An infeasible answer carries
Farkas multipliers ``y`` (one per row, in the caller's orientation) with
``y_i <= 0`` on ``<=`` rows, ``y_i >= 0`` on ``>=`` rows, ``y^T A <= 0``
column-wise and ``y^T b > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BudgetError

_FLIP = {"<=": ">=", ">=": "<=", "=": "="}


@dataclass
class SimplexOutcome:
    feasible: bool
    x: Optional[list] = None          # values of the structural columns
    multipliers: Optional[list] = None
    pivots: int = 0


def phase_one(nvars: int, rows: list, max_pivots: int = 1_000_000) -> SimplexOutcome:
    tab, rhs, basis = [], [], []
    senses, flipped = [], []
    ncols = nvars
    aux = []  # per row: (slack column or None, artificial column or None)
    for coeffs, sense, b in rows:
        b = Fraction(b)
        row = {j: Fraction(v) for j, v in coeffs.items() if v}
        flip = b < 0
        if flip:
            row = {j: -v for j, v in row.items()}
            b = -b
            sense = _FLIP[sense]
        slack = None
        if sense == "<=":
            slack = ncols
            row[slack] = Fraction(1)
            ncols += 1
        elif sense == ">=":
            slack = ncols
            row[slack] = Fraction(-1)
            ncols += 1
        tab.append(row)
        rhs.append(b)
        senses.append(sense)
        flipped.append(flip)
        aux.append([slack, None])
        basis.append(slack if sense == "<=" else None)
    first_artificial = ncols
    for i, row in enumerate(tab):
        if basis[i] is None:
            row[ncols] = Fraction(1)
            aux[i][1] = ncols
            basis[i] = ncols
            ncols += 1

    # reduced costs of the phase-1 objective (sum of artificials)
    rc = {}
    z = Fraction(0)
    for i, row in enumerate(tab):
        if basis[i] >= first_artificial:
            z += rhs[i]
            for j, v in row.items():
                if j < first_artificial:
                    rc[j] = rc.get(j, 0) - v
    rc = {j: v for j, v in rc.items() if v}

    pivots = 0
    while z > 0:
        entering = min((j for j, v in rc.items() if v < 0 and j < first_artificial), default=None)
        if entering is None:
            break
        best = None
        for i, row in enumerate(tab):
            a = row.get(entering)
            if a is not None and a > 0:
                ratio = rhs[i] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise AssertionError("phase-1 objective cannot be unbounded")
        r = best[1]
        pivots += 1
        if pivots > max_pivots:
            raise BudgetError(f"simplex exceeded {max_pivots} pivots")
        prow = tab[r]
        piv = prow[entering]
        if piv != 1:
            prow = {j: v / piv for j, v in prow.items()}
            rhs[r] /= piv
            tab[r] = prow
        theta = rhs[r]
        for i, row in enumerate(tab):
            if i == r:
                continue
            f = row.get(entering)
            if f is None:
                continue
            for j, v in prow.items():
                nv = row.get(j, 0) - f * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
            rhs[i] -= f * theta
        f = rc.get(entering)
        for j, v in prow.items():
            nv = rc.get(j, 0) - f * v
            if nv:
                rc[j] = nv
            else:
                rc.pop(j, None)
        z += f * theta
        basis[r] = entering

    if z == 0:
        x = [Fraction(0)] * nvars
        for i, col in enumerate(basis):
            if col < nvars:
                x[col] = rhs[i]
        return SimplexOutcome(True, x=x, pivots=pivots)

    y = []
    for i, (slack, art) in enumerate(aux):
        sense = senses[i]
        if sense == "<=":
            yi = -rc.get(slack, Fraction(0))
        elif sense == ">=":
            yi = rc.get(slack, Fraction(0))
        else:
            # artificial columns never enter but their reduced costs stay current
            yi = Fraction(1) - rc.get(art, Fraction(0))
        y.append(-yi if flipped[i] else yi)
    return SimplexOutcome(False, multipliers=y, pivots=pivots)

