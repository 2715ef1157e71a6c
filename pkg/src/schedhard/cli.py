"""Command-line front end.

Exit codes: 0 success, 2 parameter error, 3 verification failure,
4 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from . import __version__
from . import io as sio
from .core import BlockSchedule, Instance, IntervalSchedule, SlotSchedule, combinatorial_lower_bound, validate_schedule
from .errors import ParameterError, SchedHardError
from .gap import gen_gap_family, reports_to_csv, reports_to_json, safe_gap_report
from .graphs import (BipartiteGraph, BipartitePartition, KPartiteGraph, PartitionWitness,
                     check_bipartite_partition, check_yes_partition, expansion_counterexample,
                     forbidden_edges, gen_no_kpartite, gen_yes_bipartite, gen_yes_kpartite)
from .lp import LpSolution, build_lp, check_solution, search_min_T, solve_feasibility, write_lp_format
from .rational import as_fraction, format_fraction
from .reductions import (bipartite_witness, bipartite_witness_pmtn, pmtn_witness, qprec_witness,
                         reduce_bipartite_pmtn, reduce_pmtn, reduce_qprec)
from .solvers import (PRIORITY_RULES, SolverBudget, brute_force_schedule, list_schedule, mcnaughton,
                      uniform_list_schedule)

EXIT_OK, EXIT_PARAM, EXIT_VERIFY, EXIT_BUDGET = 0, 2, 3, 4


def rational(text: str):
    return as_fraction(text)


def int_range(text: str) -> list:
    """``"4"``, ``"2..10"`` (inclusive) or ``"1,3,5"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ParameterError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    return sorted(set(out))


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.name[:-len(".json")] + suffix if path.name.endswith(".json")
                          else path.name + suffix)


def _emit(payload: dict):
    print(json.dumps(payload, indent=1, default=str))


# --------------------------------------------------------------------------
# gen-graph


def cmd_gen_graph(args) -> int:
    out = Path(args.out)
    witness = None
    if args.kind == "yes":
        graph, witness = gen_yes_kpartite(args.k, args.n, args.Q, args.p, args.seed)
    elif args.kind == "no":
        graph = gen_no_kpartite(args.k, args.n, args.delta, args.p, args.seed, args.max_retries)
    else:
        graph, witness = gen_yes_bipartite(args.n, args.Q, args.eps, args.p, args.seed, args.isolated)
    sio.save(graph, out)
    written = [str(out)]
    if witness is not None:
        wpath = _sibling(out, ".witness.json")
        sio.save(witness, wpath)
        written.append(str(wpath))
    _emit({"written": written})
    return EXIT_OK


# --------------------------------------------------------------------------
# reduce


def cmd_reduce(args) -> int:
    gpath = Path(args.graph)
    graph = sio.load(gpath)
    wpath = Path(args.witness) if args.witness else _sibling(gpath, ".witness.json")
    witness = sio.load(wpath) if wpath.exists() else None
    out = Path(args.out) if args.out else _sibling(gpath, f".{args.kind}.instance.json")
    schedules = {}
    if args.kind == "qprec":
        _need(graph, KPartiteGraph)
        inst = reduce_qprec(graph, args.m)
        if not inst.metadata["in_regime_m"]:
            print(f"warning: m={args.m} < 10nk={10 * inst.metadata['nk']}; outside the analysed regime",
                  file=sys.stderr)
        if isinstance(witness, PartitionWitness):
            schedules["witness"] = qprec_witness(graph, witness, args.m)
    elif args.kind == "pmtn":
        _need(graph, KPartiteGraph)
        inst = reduce_pmtn(graph, args.Q, args.eps)
        if not inst.metadata["in_regime_Q"]:
            print(f"warning: Q={args.Q} < 10k={10 * graph.k}; outside the analysed regime", file=sys.stderr)
        if isinstance(witness, PartitionWitness):
            schedules["witness"] = pmtn_witness(graph, witness, args.Q, args.eps)
    else:
        _need(graph, BipartiteGraph)
        inst = reduce_bipartite_pmtn(graph, args.Q)
        if isinstance(witness, BipartitePartition):
            schedules["witness"] = bipartite_witness(graph, witness, args.Q)
            schedules["witness-pmtn"] = bipartite_witness_pmtn(graph, witness, args.Q)
    sio.save(inst, out)
    result = {"instance": str(out), "groups": len(inst.groups), "members": inst.total_members,
              "machines": inst.machines.m}
    for name, sched in schedules.items():
        spath = _sibling(out, f".{name}.json")
        sio.save(sched, spath)
        report = validate_schedule(inst, sched)
        result[name] = {"path": str(spath), "feasible": report.feasible,
                        "makespan": format_fraction(report.makespan)}
    _emit(result)
    return EXIT_OK


def _need(obj, cls):
    if not isinstance(obj, cls):
        raise ParameterError(f"expected a {cls.__name__} document, got {type(obj).__name__}")


# --------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    inst = sio.load(args.instance)
    _need(inst, Instance)
    result = {}
    if args.method == "list":
        sched = (list_schedule(inst, args.priority, SolverBudget.from_env().max_members)
                 if inst.machines.is_identical else uniform_list_schedule(inst, SolverBudget.from_env().max_members))
    elif args.method == "mcnaughton":
        sched = mcnaughton(inst, SolverBudget.from_env().max_members)
    else:
        opt, sched = brute_force_schedule(inst)
        result["optimum"] = opt
    report = validate_schedule(inst, sched)
    result.update({"method": args.method, "makespan": format_fraction(report.makespan),
                   "feasible": report.feasible})
    if inst.machines.is_identical:
        result["lower_bound"] = format_fraction(combinatorial_lower_bound(inst))
    if args.out:
        sio.save(sched, args.out)
        result["schedule"] = args.out
    _emit(result)
    return EXIT_OK if report.feasible else EXIT_VERIFY


# --------------------------------------------------------------------------
# lp


def cmd_lp(args) -> int:
    inst = sio.load(args.instance)
    _need(inst, Instance)
    aggregate = not args.per_member
    if args.T is None:
        search = search_min_T(inst, aggregate)
        res = search.at_T
        result = {"min_T": search.T, "probes": {str(t): r.feasible for t, r in sorted(search.probes.items())}}
        if search.below is not None:
            result["certificate_below"] = _certificate(search.below.certificate)
    else:
        res = solve_feasibility(build_lp(inst, args.T, aggregate))
        result = {"T": args.T, "feasible": res.feasible}
        if not res.feasible:
            result["certificate"] = _certificate(res.certificate)
    if args.write_lp:
        Path(args.write_lp).write_text(write_lp_format(build_lp(inst, res.T, aggregate)), encoding="utf-8")
        result["lp_file"] = args.write_lp
    if args.out and res.feasible:
        sio.save(res.solution, args.out)
        result["solution"] = args.out
    _emit(result)
    return EXIT_OK


def _certificate(cert: dict) -> list:
    return [[list(label), format_fraction(y)] for label, y in sorted(cert.items(), key=lambda kv: str(kv[0]))]


# --------------------------------------------------------------------------
# gap


def cmd_gap(args) -> int:
    keys = sorted((k, d, m) for k in args.k for d in args.d for m in args.m)
    if args.emit:
        Path(args.emit).mkdir(parents=True, exist_ok=True)
        for k, d, m in keys:
            inst, sol = gen_gap_family(k, d, m)
            stem = Path(args.emit) / f"gap_k{k}_d{d}_m{m}"
            sio.save(inst, stem.with_name(stem.name + ".instance.json"))
            sio.save(sol, stem.with_name(stem.name + ".solution.json"))
    work = partial(safe_gap_report, exact=args.exact)
    if args.workers > 1 and len(keys) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(work, keys))
    else:
        rows = [work(key) for key in keys]
    rows.sort(key=lambda r: r.key if hasattr(r, "key") else r[0])
    text = reports_to_json(rows) if args.format == "json" else reports_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    good = [r for r in rows if hasattr(r, "key")]
    if args.plot and good:
        from .plotting import render_gap_figures

        for p in render_gap_figures(good, args.plot):
            print(f"wrote {p}", file=sys.stderr)
    if len(good) < len(rows):
        return EXIT_BUDGET
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    first = sio.load(args.files[0])
    second = sio.load(args.files[1]) if len(args.files) > 1 else None
    violations = []
    if isinstance(first, Instance) and isinstance(second, (IntervalSchedule, SlotSchedule, BlockSchedule)):
        report = validate_schedule(first, second)
        violations = [{"kind": v.kind, "detail": v.detail} for v in report.violations]
        summary = {"check": "schedule", "makespan": format_fraction(report.makespan)}
    elif isinstance(first, Instance) and isinstance(second, LpSolution):
        T = args.T or max((t for _, t in second.values), default=1)
        aggregate = {u for u, _ in second.values} <= {g.id for g in first.groups}
        res = check_solution(build_lp(first, T, aggregate), second)
        if not res:
            violations = [{"kind": res.row[0], "row": list(res.row), "detail": res.detail}]
        summary = {"check": "lp", "T": T, "aggregate": aggregate}
    elif isinstance(first, KPartiteGraph) and isinstance(second, PartitionWitness):
        ok = check_yes_partition(first, second)
        if not ok:
            violations = [{"kind": "partition", "detail": f"edge {e}"} for e in forbidden_edges(first, second)]
            if not violations:
                violations = [{"kind": "partition", "detail": "block sizes or dimensions"}]
        summary = {"check": "yes-partition"}
    elif isinstance(first, KPartiteGraph) and second is None:
        if args.delta is None:
            raise ParameterError("verifying expansion needs --delta")
        bad = expansion_counterexample(first, args.delta)
        if bad is not None:
            violations = [{"kind": "expansion", "detail": str(bad)}]
        summary = {"check": "expansion", "delta": format_fraction(args.delta)}
    elif isinstance(first, BipartiteGraph) and isinstance(second, BipartitePartition):
        if not check_bipartite_partition(first, second):
            violations = [{"kind": "partition", "detail": "a W block sees a foreign V block"}]
        summary = {"check": "bipartite-partition"}
    else:
        raise ParameterError(f"nothing to verify for {type(first).__name__}"
                             + (f" + {type(second).__name__}" if second is not None else ""))
    _emit(dict(summary, ok=not violations, violations=violations))
    return EXIT_OK if not violations else EXIT_VERIFY


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schedhard", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-graph", help="generate a layered or bipartite graph")
    g.add_argument("kind", choices=("yes", "no", "bipartite"))
    g.add_argument("--k", type=int)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--Q", type=int)
    g.add_argument("--eps", type=rational, default=as_fraction(0))
    g.add_argument("--delta", type=rational)
    g.add_argument("--p", type=rational, default=None, help="edge probability")
    g.add_argument("--isolated", type=int, default=0)
    g.add_argument("--max-retries", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="graph.json")
    g.set_defaults(func=cmd_gen_graph)

    r = sub.add_parser("reduce", help="reduce a graph to a scheduling instance")
    r.add_argument("kind", choices=("qprec", "pmtn", "bipartite"))
    r.add_argument("graph")
    r.add_argument("--m", type=int)
    r.add_argument("--Q", type=int)
    r.add_argument("--eps", type=rational, default=as_fraction(0))
    r.add_argument("--witness", help="partition file (default: <graph>.witness.json if present)")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    s = sub.add_parser("solve", help="run a baseline scheduler")
    s.add_argument("instance")
    s.add_argument("--method", choices=("list", "mcnaughton", "brute"), default="list")
    s.add_argument("--priority", choices=PRIORITY_RULES, default="lex")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    lp = sub.add_parser("lp", help="LP feasibility at a horizon, or the smallest feasible horizon")
    lp.add_argument("instance")
    lp.add_argument("--T", type=int)
    lp.add_argument("--per-member", action="store_true")
    lp.add_argument("--write-lp")
    lp.add_argument("--out")
    lp.set_defaults(func=cmd_lp)

    gp = sub.add_parser("gap", help="integrality-gap sweep")
    gp.add_argument("--k", type=int_range, default=[1])
    gp.add_argument("--d", type=int_range, required=True)
    gp.add_argument("--m", type=int_range, required=True)
    gp.add_argument("--exact", action="store_true", help="integral optimum by brute force")
    gp.add_argument("--workers", type=int, default=1)
    gp.add_argument("--format", choices=("csv", "json"), default="csv")
    gp.add_argument("--out")
    gp.add_argument("--plot", metavar="STEM", help="write figures and plot data next to STEM")
    gp.add_argument("--emit", metavar="DIR", help="also write each instance and its fractional solution")
    gp.set_defaults(func=cmd_gap)

    v = sub.add_parser("verify", help="check a schedule, LP solution, partition or expansion")
    v.add_argument("files", nargs="+")
    v.add_argument("--T", type=int)
    v.add_argument("--delta", type=rational)
    v.set_defaults(func=cmd_verify)
    return p


def _check_args(parser, args):
    missing = []
    if args.command == "gen-graph":
        need = {"yes": ("k", "Q"), "no": ("k", "delta", "p"), "bipartite": ("Q",)}[args.kind]
        missing = [n for n in need if getattr(args, n) is None]
        if args.p is None:
            args.p = as_fraction(1) if args.kind == "yes" else as_fraction("1/2")
    elif args.command == "reduce":
        need = {"qprec": ("m",), "pmtn": ("Q",), "bipartite": ("Q",)}[args.kind]
        missing = [n for n in need if getattr(args, n) is None]
    if missing:
        parser.error(f"{args.command} {getattr(args, 'kind', '')}: missing "
                     + ", ".join("--" + n for n in missing))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_args(parser, args)
    try:
        return args.func(args)
    except SchedHardError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code if err.exit_code in (EXIT_PARAM, EXIT_VERIFY, EXIT_BUDGET) else 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
