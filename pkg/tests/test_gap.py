from fractions import Fraction

import pytest

from schedhard.errors import ParameterError
from schedhard.gap import (gap_report, gen_gap_basic, gen_gap_family, integral_lower_bound, layered_opt,
                           paper_bound, reports_to_csv, reports_to_json, residual_loads)
from schedhard.lp import build_lp, check_solution
from schedhard.solvers import brute_force_opt

F = Fraction


def test_basic_sizes():
    inst, sol = gen_gap_basic(4, 3)
    assert inst.total_members == 2 * 9 + 3
    assert max(t for _, t in sol.values) == 8


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("m", [2, 4])
def test_basic_load_profile(d, m):
    _, sol = gen_gap_basic(d, m)
    loads = sol.loads(2 * d)
    assert loads[0] == m
    assert all(x <= m for x in loads[1:d])
    for l in range(d):
        assert loads[d + l] == m - F(l, d)
    assert residual_loads(sol, 2 * d, m)[d:] == [F(l, d) for l in range(d)]


@pytest.mark.parametrize("d,m", [(2, 2), (3, 4), (5, 3)])
def test_family_reduces_to_basic(d, m):
    assert gen_gap_family(1, d, m) == gen_gap_basic(d, m)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("m", [2, 3, 4])
def test_family_solution_feasible(k, d, m):
    inst, sol = gen_gap_family(k, d, m)
    T = (k + 1) * d
    assert check_solution(build_lp(inst, T), sol)
    loads = sol.loads(T)
    assert loads[0] == m
    assert all(x <= m for x in loads[1:d])
    # where two layers overlap the slots are exactly full
    assert all(x == m for x in loads[d:k * d])


@pytest.mark.parametrize("k,d,m", [(1, 2, 2), (1, 3, 2), (2, 2, 2), (2, 3, 2), (1, 2, 3), (3, 2, 2)])
def test_layered_formula_matches_brute_force(k, d, m):
    inst, _ = gen_gap_family(k, d, m)
    assert brute_force_opt(inst) == layered_opt(k, d, m)


@pytest.mark.parametrize("k,d,m", [(1, 10, 100), (3, 10, 100), (5, 10, 100), (2, 4, 7), (2, 4, 10), (3, 2, 2)])
def test_bounds_order(k, d, m):
    # the work bound beats the closed form exactly when m > (k+1)(d-1)
    assert (integral_lower_bound(k, d, m) > paper_bound(k, d)) == (m > (k + 1) * (d - 1))
    assert layered_opt(k, d, m) >= integral_lower_bound(k, d, m)
    assert layered_opt(k, d, m) >= paper_bound(k, d)


def test_reports():
    r = gap_report(1, 10, 100)
    assert (r.lp_value, r.integral_opt, r.ratio) == (20, 29, F(29, 20))
    r = gap_report(5, 10, 100)
    assert (r.lp_value, r.paper_bound, r.integral_opt, r.ratio) == (60, 104, 105, F(7, 4))
    r = gap_report(1, 2, 2, exact=True)
    assert (r.lp_value, r.integral_opt, r.ratio, r.opt_method) == (4, 5, F(5, 4), "brute-force")
    assert r.ratio == max(r.integral_lower_bound, r.integral_opt) / r.lp_value


def test_ratio_sweeps_monotone():
    by_d = [gap_report(1, d, 100).ratio for d in range(2, 11)]
    assert by_d == sorted(by_d) and by_d[-1] < F(3, 2)
    by_k = [gap_report(k, 6, 50).ratio for k in range(1, 5)]
    assert by_k == sorted(by_k) and by_k[-1] < 2


def test_output_formats():
    rows = [gap_report(1, 2, 2), ((1, 3, 1), "too big")]
    text = reports_to_csv(rows)
    lines = text.strip().splitlines()
    assert lines[0].startswith("k,d,m,lp_value")
    assert lines[1].startswith("1,2,2,4,True") and lines[1].endswith(",ok")
    assert lines[2].endswith("error: too big")
    assert '"ratio": "5/4"' in reports_to_json(rows)


def test_parameters():
    with pytest.raises(ParameterError):
        gen_gap_family(0, 2, 2)
    with pytest.raises(ParameterError):
        gen_gap_basic(1, 2)
    with pytest.raises(ParameterError):
        gen_gap_basic(2, 1)
