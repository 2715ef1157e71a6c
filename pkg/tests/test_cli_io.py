import json
from fractions import Fraction

import pytest
from hypothesis import given

from schedhard import io as sio
from schedhard.cli import int_range, main
from schedhard.core import IntervalEntry, IntervalSchedule, MachineModel, make_instance
from schedhard.errors import ParameterError, StructuralError
from schedhard.gap import gap_report, gen_gap_basic
from schedhard.graphs import gen_yes_bipartite, gen_yes_kpartite
from schedhard.reductions import (bipartite_witness_pmtn, pmtn_witness, qprec_witness, reduce_pmtn,
                                  reduce_qprec)
from schedhard.solvers import list_schedule
from strategies import unit_instances, weighted_instances

F = Fraction


class TestRoundTrip:
    @given(weighted_instances())
    def test_instances(self, inst):
        assert sio.loads(sio.dumps(inst)) == inst

    @given(unit_instances())
    def test_interval_schedules(self, inst):
        sched = list_schedule(inst)
        assert sio.loads(sio.dumps(sched)) == sched

    def test_reduction_artifacts(self):
        g, w = gen_yes_kpartite(3, 4, 2, F(1, 2), seed=1)
        for obj in (g, w, reduce_qprec(g, 3), qprec_witness(g, w, 3), reduce_pmtn(g, 2, F(1, 4)),
                    pmtn_witness(g, w, 2, 0)):
            assert sio.loads(sio.dumps(obj)) == obj
        b, p = gen_yes_bipartite(8, 2, F(1, 4), seed=2)
        for obj in (b, p, bipartite_witness_pmtn(b, p, 2)):
            assert sio.loads(sio.dumps(obj)) == obj

    def test_uniform_machines_and_metadata(self):
        inst = make_instance([("a", 2, F(3, 2))], machines=MachineModel.uniform([(F(1, 2), 2), (3, 1)]),
                             metadata={"eps": F(1, 3), "tag": "x", "nested": [F(1, 2), 3]})
        back = sio.loads(sio.dumps(inst))
        assert back == inst and back.metadata["eps"] == F(1, 3)

    def test_lp_solution_and_report(self):
        _, sol = gen_gap_basic(3, 2)
        assert sio.loads(sio.dumps(sol)) == sol
        rep = gap_report(1, 3, 2)
        assert sio.loads(sio.dumps(rep)) == rep

    def test_rationals_are_strings(self):
        inst = make_instance([("a", 1, F(1, 3))])
        assert json.loads(sio.dumps(inst))["groups"] == [["a", 1, "1/3"]]

    def test_bad_documents(self):
        with pytest.raises(StructuralError):
            sio.loads("[1, 2]")
        with pytest.raises(StructuralError):
            sio.loads('{"type": "nope"}')
        with pytest.raises(StructuralError):
            sio.loads('{"type": "instance"}')
        with pytest.raises(StructuralError):
            sio.loads("{")


def test_int_range():
    assert int_range("2..5") == [2, 3, 4, 5]
    assert int_range("3") == [3]
    assert int_range("1,4,2..3") == [1, 2, 3, 4]
    with pytest.raises(ParameterError):
        int_range("5..2")


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCli:
    def test_yes_pipeline(self, tmp_path, capsys):
        graph = tmp_path / "graph.json"
        code, out, _ = _run(capsys, "gen-graph", "yes", "--k", 3, "--n", 12, "--Q", 4, "--seed", 1, "--out", graph)
        assert code == 0
        assert (tmp_path / "graph.witness.json").exists()
        code, out, err = _run(capsys, "reduce", "qprec", "--m", 50, graph)
        assert code == 0 and "warning" in err
        assert json.loads(out)["witness"]["feasible"]
        code, out, _ = _run(capsys, "reduce", "pmtn", "--Q", 4, "--eps", "1/4", graph)
        res = json.loads(out)
        assert code == 0 and res["witness"]["feasible"]
        inst_path = res["instance"]
        wit_path = res["witness"]["path"]
        assert _run(capsys, "verify", inst_path, wit_path)[0] == 0

        # tamper: move one big set into the last slot so its successors start too early
        doc = json.loads(open(wit_path).read())
        first_big = next(e for e in doc["entries"] if e[1].startswith("B01."))
        first_big[0] = 99
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        code, out, _ = _run(capsys, "verify", inst_path, bad)
        assert code == 3
        assert any(v["kind"] == "precedence" for v in json.loads(out)["violations"])

    def test_missing_Q_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["gen-graph", "yes", "--k", "3", "--n", "12"])
        assert exc.value.code == 2

    def test_bad_rational(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["gen-graph", "no", "--k", "2", "--n", "8", "--delta", "0.x", "--p", "1"])
        assert exc.value.code == 2

    def test_no_graph(self, tmp_path, capsys):
        out_path = tmp_path / "no.json"
        code, _, _ = _run(capsys, "gen-graph", "no", "--k", 2, "--n", 8, "--delta", "0.25", "--p", "0.75",
                          "--seed", 2, "--out", out_path)
        assert code in (0, 3)
        if code == 0:
            assert _run(capsys, "verify", out_path, "--delta", "1/4")[0] == 0
        code, _, err = _run(capsys, "gen-graph", "no", "--k", 2, "--n", 6, "--delta", "1/6", "--p", 0,
                            "--max-retries", 2, "--out", tmp_path / "fail.json")
        assert code == 3 and "error" in err

    def test_bipartite(self, tmp_path, capsys):
        bip = tmp_path / "bip.json"
        assert _run(capsys, "gen-graph", "bipartite", "--n", 8, "--Q", 2, "--out", bip)[0] == 0
        code, out, _ = _run(capsys, "reduce", "bipartite", "--Q", 2, bip)
        res = json.loads(out)
        assert code == 0 and res["witness"]["feasible"] and res["witness-pmtn"]["feasible"]
        assert _run(capsys, "verify", bip, tmp_path / "bip.witness.json")[0] == 0
        assert _run(capsys, "reduce", "bipartite", "--Q", 3, bip)[0] == 2

    def test_gap_sweep(self, tmp_path, capsys):
        code, out, _ = _run(capsys, "gap", "--k", 1, "--d", "2..10", "--m", 100)
        lines = out.strip().splitlines()[1:]
        assert code == 0 and len(lines) == 9
        ratios = [float(line.split(",")[11]) for line in lines]
        assert ratios == sorted(ratios)

    def test_gap_k_sweep_with_workers_and_plots(self, tmp_path, capsys):
        stem = tmp_path / "sweep"
        code, out, _ = _run(capsys, "gap", "--k", "1..5", "--d", 10, "--m", 100, "--workers", 2,
                            "--plot", stem, "--format", "json")
        rows = json.loads(out)
        assert code == 0
        assert [r["ratio"] for r in rows] == ["29/20", "8/5", "67/40", "43/25", "7/4"]
        assert (tmp_path / "sweep.ratio_vs_k.png").stat().st_size > 0
        assert (tmp_path / "sweep.residual.png").exists()
        assert (tmp_path / "sweep.ratio_vs_k.csv").read_text().startswith("k,d,m")

    def test_gap_exact_and_verify_solution(self, tmp_path, capsys):
        code, out, _ = _run(capsys, "gap", "--k", 1, "--d", 2, "--m", 2, "--exact", "--emit", tmp_path)
        row = out.strip().splitlines()[1].split(",")
        assert code == 0 and row[7] == "5" and row[8] == "brute-force"
        inst = tmp_path / "gap_k1_d2_m2.instance.json"
        sol = tmp_path / "gap_k1_d2_m2.solution.json"
        assert _run(capsys, "verify", inst, sol)[0] == 0

    def test_gap_budget_row(self, capsys, monkeypatch):
        monkeypatch.setenv("SCHEDHARD_MAX_MEMBERS", "5")
        code, out, _ = _run(capsys, "gap", "--d", 2, "--m", 2, "--exact")
        assert code == 4 and "error:" in out

    def test_solve_and_lp(self, tmp_path, capsys):
        inst, _ = gen_gap_basic(2, 2)
        path = sio.save(inst, tmp_path / "i.json")
        code, out, _ = _run(capsys, "solve", path, "--method", "brute", "--out", tmp_path / "s.json")
        assert code == 0 and json.loads(out)["optimum"] == 5
        assert _run(capsys, "verify", path, tmp_path / "s.json")[0] == 0
        code, out, _ = _run(capsys, "solve", path, "--priority", "critical-path")
        assert code == 0 and json.loads(out)["makespan"] == "5/1"
        code, out, _ = _run(capsys, "lp", path, "--write-lp", tmp_path / "x.lp", "--out", tmp_path / "sol.json")
        res = json.loads(out)
        assert code == 0 and res["min_T"] == 4 and res["certificate_below"]
        assert (tmp_path / "x.lp").read_text().rstrip().endswith("End")
        assert _run(capsys, "verify", path, tmp_path / "sol.json", "--T", 4)[0] == 0
        code, out, _ = _run(capsys, "lp", path, "--T", 3, "--per-member")
        assert code == 0 and json.loads(out)["feasible"] is False

    def test_mcnaughton(self, tmp_path, capsys):
        inst = make_instance([("a", 3, 1)], machines=MachineModel.identical(2), preemptive=True)
        path = sio.save(inst, tmp_path / "i.json")
        code, out, _ = _run(capsys, "solve", path, "--method", "mcnaughton")
        assert code == 0 and json.loads(out)["makespan"] == "3/2"

    def test_verify_detects_bad_schedule(self, tmp_path, capsys):
        inst = make_instance([("a", 1, 1), ("b", 1, 1)], [("a", "b")], MachineModel.identical(2))
        sched = IntervalSchedule((IntervalEntry("a", 0, 0, 0, 1), IntervalEntry("b", 0, 1, 0, 1)))
        ip = sio.save(inst, tmp_path / "i.json")
        sp = sio.save(sched, tmp_path / "s.json")
        code, out, _ = _run(capsys, "verify", ip, sp)
        assert code == 3 and json.loads(out)["violations"][0]["kind"] == "precedence"

    def test_missing_file(self, tmp_path, capsys):
        assert _run(capsys, "verify", tmp_path / "nope.json")[0] == 2
