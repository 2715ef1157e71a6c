"""JSON round-trip for every artifact the CLI reads or writes.

Each document carries a ``"type"`` tag.  Rationals are written as
``"num/den"`` strings, so a document re-parses to an equal value.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .core import (BlockEntry, BlockSchedule, Instance, IntervalEntry, IntervalSchedule,
                   JobGroup, MachineModel, SlotEntry, SlotSchedule)
from .errors import StructuralError
from .gap import GapReport
from .graphs import BipartiteGraph, BipartitePartition, KPartiteGraph, PartitionWitness
from .lp import LpSolution
from .rational import as_fraction, format_fraction

FORMAT_VERSION = 1


def _meta_out(value):
    if isinstance(value, Fraction):
        return {"fraction": format_fraction(value)}
    if isinstance(value, dict):
        return {k: _meta_out(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_meta_out(v) for v in value]
    return value


def _meta_in(value):
    if isinstance(value, dict):
        if set(value) == {"fraction"}:
            return as_fraction(value["fraction"])
        return {k: _meta_in(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_meta_in(v) for v in value]
    return value


def _machines_out(mm: MachineModel) -> dict:
    out = {"kind": mm.kind, "m": mm.m}
    if mm.kind == "uniform":
        out["classes"] = [[format_fraction(s), c] for s, c in mm.classes]
    return out


def _machines_in(d: dict) -> MachineModel:
    if d["kind"] == "uniform":
        return MachineModel.uniform([(as_fraction(s), int(c)) for s, c in d["classes"]])
    return MachineModel(d["kind"], int(d.get("m", 1)))


def _blocks_out(blocks):
    return [list(b) for b in blocks]


def _blocks_in(blocks):
    return tuple(tuple(b) for b in blocks)


def to_dict(obj) -> dict:
    if isinstance(obj, Instance):
        return {"type": "instance",
                "groups": [[g.id, g.count, format_fraction(g.proc_time)] for g in obj.groups],
                "precedence": [list(p) for p in obj.precedence],
                "machines": _machines_out(obj.machines),
                "preemptive": obj.preemptive,
                "metadata": _meta_out(obj.metadata)}
    if isinstance(obj, IntervalSchedule):
        return {"type": "interval_schedule",
                "entries": [[e.group, e.member, e.machine, format_fraction(e.start), format_fraction(e.end)]
                            for e in obj.entries]}
    if isinstance(obj, SlotSchedule):
        return {"type": "slot_schedule", "entries": [[e.slot, e.group, e.count] for e in obj.entries]}
    if isinstance(obj, BlockSchedule):
        return {"type": "block_schedule",
                "entries": [[e.machine_class, format_fraction(e.start), format_fraction(e.end), e.group, e.count]
                            for e in obj.entries]}
    if isinstance(obj, KPartiteGraph):
        return {"type": "kpartite_graph", "k": obj.k, "n": obj.n,
                "edges": [[list(e) for e in layer] for layer in obj.edges]}
    if isinstance(obj, PartitionWitness):
        return {"type": "partition_witness", "Q": obj.Q, "eps": format_fraction(obj.eps),
                "blocks": _blocks_out(obj.blocks)}
    if isinstance(obj, BipartiteGraph):
        return {"type": "bipartite_graph", "n": obj.n, "edges": [list(e) for e in obj.edges]}
    if isinstance(obj, BipartitePartition):
        return {"type": "bipartite_partition", "Q": obj.Q, "eps": format_fraction(obj.eps),
                "v_blocks": list(obj.v_blocks), "w_blocks": list(obj.w_blocks)}
    if isinstance(obj, LpSolution):
        return {"type": "lp_solution",
                "values": [[u, t, format_fraction(v)] for (u, t), v in sorted(obj.values.items())]}
    if isinstance(obj, GapReport):
        return dict(obj.as_row(), type="gap_report")
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_dict(d: dict):
    kind = d.get("type")
    if kind == "instance":
        groups = tuple(JobGroup(gid, int(c), as_fraction(p)) for gid, c, p in d["groups"])
        return Instance(groups, tuple(tuple(p) for p in d["precedence"]), _machines_in(d["machines"]),
                        bool(d.get("preemptive", False)), _meta_in(d.get("metadata", {})))
    if kind == "interval_schedule":
        return IntervalSchedule(tuple(IntervalEntry(g, int(i), int(mc), as_fraction(s), as_fraction(e))
                                      for g, i, mc, s, e in d["entries"]))
    if kind == "slot_schedule":
        return SlotSchedule(tuple(SlotEntry(int(t), g, int(c)) for t, g, c in d["entries"]))
    if kind == "block_schedule":
        return BlockSchedule(tuple(BlockEntry(int(c), as_fraction(s), as_fraction(e), g, int(n))
                                   for c, s, e, g, n in d["entries"]))
    if kind == "kpartite_graph":
        return KPartiteGraph(int(d["k"]), int(d["n"]),
                             tuple(tuple(tuple(e) for e in layer) for layer in d["edges"]))
    if kind == "partition_witness":
        return PartitionWitness(int(d["Q"]), as_fraction(d["eps"]), _blocks_in(d["blocks"]))
    if kind == "bipartite_graph":
        return BipartiteGraph(int(d["n"]), tuple(tuple(e) for e in d["edges"]))
    if kind == "bipartite_partition":
        return BipartitePartition(int(d["Q"]), as_fraction(d["eps"]), tuple(d["v_blocks"]), tuple(d["w_blocks"]))
    if kind == "lp_solution":
        return LpSolution({(u, int(t)): as_fraction(v) for u, t, v in d["values"]})
    if kind == "gap_report":
        opt = d.get("integral_opt")
        lm = d.get("list_makespan")
        return GapReport(int(d["k"]), int(d["d"]), int(d["m"]), int(d["lp_value"]), bool(d["lp_verified"]),
                         int(d["paper_bound"]), as_fraction(d["integral_lower_bound"]),
                         None if opt is None else int(opt), d["opt_method"],
                         None if lm is None else as_fraction(lm), as_fraction(d["ratio"]),
                         [as_fraction(v) for v in d.get("residual_loads", [])])
    raise StructuralError(f"unknown document type {kind!r}")


def dumps(obj) -> str:
    return json.dumps(dict(to_dict(obj), version=FORMAT_VERSION), indent=1) + "\n"


def loads(text: str):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"invalid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise StructuralError("expected a JSON object")
    try:
        return from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, StructuralError):
            raise
        raise StructuralError(f"malformed {d.get('type')!r} document: {exc}") from exc


def save(obj, path) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def load(path):
    return loads(Path(path).read_text(encoding="utf-8"))
