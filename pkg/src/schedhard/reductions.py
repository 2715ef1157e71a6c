"""Graph to scheduling-instance reductions and their completeness schedules.

Three reductions are provided:

* ``reduce_qprec``: layered graph to uniform machines (speed classes
  ``m^(i-1)``), with a block schedule as witness;
* ``reduce_pmtn``: layered graph with odd ``k`` to identical machines with
  preemption, big job sets on odd layers and chains on even layers, with a
  slot schedule as witness;
* ``reduce_bipartite_pmtn``: the two-layer variant built on a bipartite
  graph.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .core import (BlockEntry, BlockSchedule, Instance, IntervalEntry, IntervalSchedule, JobGroup,
                   MachineModel, SlotEntry, SlotSchedule)
from .errors import CapacityError, ParameterError, PreconditionError
from .graphs import (BipartiteGraph, BipartitePartition, KPartiteGraph, PartitionWitness,
                     check_bipartite_partition, check_yes_partition)
from .rational import as_fraction, ceil_fraction

REGIME_M_FACTOR = 10
REGIME_Q_FACTOR = 10


def _pad(n: int) -> int:
    return len(str(max(n - 1, 0)))


# --------------------------------------------------------------------------
# uniform machines


def qprec_group(layer: int, v: int, n: int) -> str:
    return f"J{layer:02d}.{v:0{_pad(n)}d}"


def reduce_qprec(g: KPartiteGraph, m: int, regime_factor: int = REGIME_M_FACTOR) -> Instance:
    """Vertex ``v`` of layer ``i`` becomes ``m^(2(k-i))`` jobs of length ``m^(i-1)``."""
    if m < 2:
        raise ParameterError("m must be at least 2")
    k, n = g.k, g.n
    groups = [JobGroup(qprec_group(i, v, n), m ** (2 * (k - i)), Fraction(m ** (i - 1)))
              for i in range(1, k + 1) for v in range(n)]
    precedence = [(qprec_group(i, u, n), qprec_group(i + 1, v, n))
                  for i in range(1, k) for u, v in g.layer_edges(i)]
    machines = MachineModel.uniform([(m ** (i - 1), m ** (2 * (k - i))) for i in range(1, k + 1)])
    meta = {"reduction": "qprec", "k": k, "n": n, "m": m, "nk": n * k,
            "in_regime_m": m >= regime_factor * n * k}
    return Instance(tuple(groups), tuple(precedence), machines, False, meta)


def qprec_witness(g: KPartiteGraph, w: PartitionWitness, m: int) -> BlockSchedule:
    """Block schedule from a YES partition.

    All jobs of block ``j`` (numbered from 1) of layer ``i`` run on speed
    class ``i`` in the window ``[(i+j-1) B, (i+j) B]``, where ``B`` is the
    largest block size, i.e. ``(1 + eps_eff) n / Q``.  Every job takes one
    time unit on its own class, so a window of length ``B`` holds ``B``
    jobs per machine.  The last window ends at ``(k+Q) B``.
    """
    if w.has_err or not check_yes_partition(g, w):
        raise PreconditionError("witness is not a valid YES partition")
    k, n = g.k, g.n
    B = max(max(w.block_sizes(i)) for i in range(1, k + 1))
    entries = []
    for i in range(1, k + 1):
        count = m ** (2 * (k - i))
        for v, j in enumerate(w.blocks[i - 1]):
            start = Fraction((i + j) * B)
            entries.append(BlockEntry(i - 1, start, start + B, qprec_group(i, v, n), count))
    return BlockSchedule(tuple(entries))


def qprec_eps_eff(g: KPartiteGraph, w: PartitionWitness) -> Fraction:
    B = max(max(w.block_sizes(i)) for i in range(1, g.k + 1))
    return Fraction(B * w.Q, g.n) - 1


@dataclass(frozen=True)
class RetentionReport:
    k: int
    n: int
    m: int
    budget: Fraction
    fractions: dict      # (i, j) -> fraction of layer-i jobs class j can process within budget
    retention: dict      # i -> 1 - sum_j fractions[(i, j)]
    bound: Fraction      # 1 - k^2 / m

    @property
    def min_retention(self) -> Fraction:
        return min(self.retention.values())


def lemma1_accounting(inst: Instance, budget) -> RetentionReport:
    """Capacity accounting for uniform-machine instances built by :func:`reduce_qprec`.

    For a layer ``i`` and a foreign class ``j``: when ``j < i`` a job needs
    ``m^(i-j)`` time on class ``j`` and nothing fits once that exceeds the
    budget; when ``j > i`` the class can absorb at most
    ``budget * count_j * speed_j / m^(i-1)`` jobs of layer ``i``.
    """
    meta = inst.metadata
    if meta.get("reduction") != "qprec":
        raise PreconditionError("instance was not produced by reduce_qprec")
    k, n, m = meta["k"], meta["n"], meta["m"]
    budget = as_fraction(budget)
    classes = inst.machines.classes
    if len(classes) != k:
        raise PreconditionError("machine classes do not match metadata")
    fractions, retention = {}, {}
    for i in range(1, k + 1):
        layer_size = n * m ** (2 * (k - i))
        proc = Fraction(m ** (i - 1))
        total = Fraction(0)
        for j in range(1, k + 1):
            if j == i:
                continue
            speed, count = classes[j - 1]
            per_job = proc / speed
            if j < i:
                processed = count * (budget // per_job) if per_job <= budget else 0
            else:
                processed = budget * count * speed / proc
            frac = min(Fraction(processed) / layer_size, Fraction(1))
            fractions[(i, j)] = frac
            total += frac
        retention[i] = max(1 - total, Fraction(0))
    return RetentionReport(k, n, m, budget, fractions, retention, 1 - Fraction(k * k, m))


# --------------------------------------------------------------------------
# identical machines with preemption, odd k


def big_group(layer: int, v: int, n: int) -> str:
    return f"B{layer:02d}.{v:0{_pad(n)}d}"


def chain_group(layer: int, v: int, link: int, n: int) -> str:
    return f"C{layer:02d}.{v:0{_pad(n)}d}.{link:03d}"


def pmtn_machine_count(n: int, Q: int, eps) -> int:
    return ceil_fraction((1 + Q * as_fraction(eps)) * n * n)


def reduce_pmtn(g: KPartiteGraph, Q: int, eps, regime_factor: int = REGIME_Q_FACTOR) -> Instance:
    """Odd layers become ``Qn-(Q-1)`` unit jobs per vertex, even layers chains of ``Q-1``."""
    eps = as_fraction(eps)
    k, n = g.k, g.n
    if k % 2 == 0:
        raise ParameterError(f"k must be odd, got {k}")
    if Q < 2:
        raise ParameterError("Q must be at least 2")
    if eps < 0:
        raise ParameterError("eps must be non-negative")
    groups, precedence = [], []
    for layer in range(1, k + 1):
        for v in range(n):
            if layer % 2:
                groups.append(JobGroup(big_group(layer, v, n), Q * n - (Q - 1), 1))
            else:
                links = [chain_group(layer, v, l, n) for l in range(1, Q)]
                groups.extend(JobGroup(c, 1, 1) for c in links)
                precedence.extend(zip(links, links[1:]))
    for layer in range(1, k):
        for u, v in g.layer_edges(layer):
            if layer % 2:
                precedence.append((big_group(layer, u, n), chain_group(layer + 1, v, 1, n)))
            else:
                precedence.append((chain_group(layer, u, Q - 1, n), big_group(layer + 1, v, n)))
    machines = MachineModel.identical(pmtn_machine_count(n, Q, eps))
    meta = {"reduction": "pmtn", "k": k, "n": n, "Q": Q, "eps": eps,
            "Q_divides_n": n % Q == 0, "in_regime_Q": Q >= regime_factor * k}
    return Instance(tuple(groups), tuple(precedence), machines, True, meta)


def pmtn_witness(g: KPartiteGraph, w: PartitionWitness, Q: int, eps) -> SlotSchedule:
    """Slot schedule from a YES partition.

    Block ``j`` of odd layer ``2i-1`` forms a big set with index
    ``Q(i-1)+1``; link ``l`` of the chains of block ``j`` of layer ``2i``
    forms a small set with index ``Q(i-1)+1+l``.  A set with index ``s``
    and block ``j`` runs in slot ``s + j``, so slot ``t`` holds exactly the
    sets with ``s + j - 1 = t - 1``.  The last slot is ``(k+1) Q / 2``.
    """
    eps = as_fraction(eps)
    k, n = g.k, g.n
    if k % 2 == 0:
        raise ParameterError(f"k must be odd, got {k}")
    if w.Q != Q or w.has_err or not check_yes_partition(g, w):
        raise PreconditionError("witness is not a valid YES partition for this Q")
    machines = pmtn_machine_count(n, Q, eps)
    big = Q * n - (Q - 1)
    entries = []
    for layer in range(1, k + 1):
        i = (layer + 1) // 2
        for v, j in enumerate(w.blocks[layer - 1]):
            if layer % 2:
                entries.append(SlotEntry(Q * (i - 1) + 1 + j, big_group(layer, v, n), big))
            else:
                for l in range(1, Q):
                    entries.append(SlotEntry(Q * (i - 1) + 1 + l + j, chain_group(layer, v, l, n), 1))
    sched = SlotSchedule(tuple(sorted(entries, key=lambda e: (e.slot, e.group))))
    for t, load in sched.loads().items():
        if load > machines:
            raise CapacityError(f"slot {t} holds {load} jobs but only {machines} machines exist")
    limit = (Fraction(1, Q) + eps) * n
    for layer in range(1, k + 1):
        if any(size > limit for size in w.block_sizes(layer)):
            raise CapacityError(f"layer {layer} has a block larger than (1/Q + eps) n = {limit}")
    return sched


# --------------------------------------------------------------------------
# bipartite variant


def bip_v_group(v: int, n: int) -> str:
    return f"V.{v:0{_pad(n)}d}"


def bip_w_group(w: int, link: int, n: int) -> str:
    return f"W.{w:0{_pad(n)}d}.{link:03d}"


def reduce_bipartite_pmtn(b: BipartiteGraph, Q: int) -> Instance:
    """``Qn`` unit jobs per ``v``; per ``w`` a chain of ``Q-1`` jobs followed by ``Qn`` jobs."""
    n = b.n
    if Q < 2:
        raise ParameterError("Q must be at least 2")
    if n % Q:
        raise ParameterError(f"Q={Q} does not divide n={n}")
    groups = [JobGroup(bip_v_group(v, n), Q * n, 1) for v in range(n)]
    precedence = []
    for w in range(n):
        links = [bip_w_group(w, l, n) for l in range(1, Q)]
        groups.extend(JobGroup(c, 1, 1) for c in links)
        tail = bip_w_group(w, Q, n)
        groups.append(JobGroup(tail, Q * n, 1))
        precedence.extend(zip(links + [tail], links[1:] + [tail]))
    precedence.extend((bip_v_group(v, n), bip_w_group(w, 1, n)) for v, w in b.edges)
    meta = {"reduction": "bipartite", "n": n, "Q": Q}
    return Instance(tuple(groups), tuple(precedence), MachineModel.identical(n * n), True, meta)


def bipartite_phases(b: BipartiteGraph, partition: BipartitePartition, Q: int) -> list:
    """Job sets ``T_1 .. T_2Q`` of the completeness schedule as ``[(group, count)]`` lists.

    After merging ``V_err`` into ``V_0`` and ``W_err`` into ``W_{Q-1}``:
    ``V_a`` runs in phase ``a+1``, chain link ``l`` of ``W_c`` in phase
    ``c+l+1`` and the tail of ``W_c`` in phase ``Q+c+1``.
    """
    if partition.Q != Q or not check_bipartite_partition(b, partition):
        raise PreconditionError("partition is not a valid YES partition for this Q")
    n = b.n
    v_block = [0 if x is None else x for x in partition.v_blocks]
    w_block = [Q - 1 if x is None else x for x in partition.w_blocks]
    phases = [[] for _ in range(2 * Q)]
    for v in range(n):
        phases[v_block[v]].append((bip_v_group(v, n), Q * n))
    for w in range(n):
        c = w_block[w]
        for l in range(1, Q):
            phases[c + l].append((bip_w_group(w, l, n), 1))
        phases[Q + c].append((bip_w_group(w, Q, n), Q * n))
    return [sorted(p) for p in phases]


def bipartite_witness(b: BipartiteGraph, partition: BipartitePartition, Q: int) -> SlotSchedule:
    """Slot form: phase ``T_i`` fills ``ceil(|T_i| / n^2)`` consecutive slots."""
    cap = b.n * b.n
    entries = []
    slot = 0
    for phase in bipartite_phases(b, partition, Q):
        size = sum(c for _, c in phase)
        if not size:
            continue
        used = 0
        for gid, count in phase:
            while count:
                room = cap - used % cap
                take = min(room, count)
                entries.append(SlotEntry(slot + used // cap + 1, gid, take))
                used += take
                count -= take
        slot += -(-size // cap)
    return SlotSchedule(tuple(entries))


def bipartite_witness_pmtn(b: BipartiteGraph, partition: BipartitePartition, Q: int) -> IntervalSchedule:
    """Preemptive form: phase ``T_i`` lasts ``max(1, |T_i| / n^2)``.

    Inside a phase the unit jobs are laid out by wrap-around on the ``n^2``
    machines, so the makespan is ``sum_i max(1, |T_i| / n^2)``.
    """
    n = b.n
    cap = n * n
    entries = []
    start = Fraction(0)
    for phase in bipartite_phases(b, partition, Q):
        size = sum(c for _, c in phase)
        if not size:
            continue
        length = max(Fraction(1), Fraction(size, cap))
        machine, offset = 0, Fraction(0)
        for gid, count in phase:
            for member in range(count):
                need = Fraction(1)
                if offset + need <= length:
                    entries.append(IntervalEntry(gid, member, machine, start + offset, start + offset + need))
                    offset += need
                else:
                    head = length - offset
                    if head > 0:
                        entries.append(IntervalEntry(gid, member, machine, start + offset, start + length))
                    machine += 1
                    offset = need - head
                    entries.append(IntervalEntry(gid, member, machine, start, start + offset))
                if offset == length:
                    machine, offset = machine + 1, Fraction(0)
        start += length
    return IntervalSchedule(tuple(entries))


def bipartite_makespan_bound(n: int, Q: int, eps) -> Fraction:
    """``2Q (1 + eps Q)(n + 1) / n``: phase sizes are at most ``n(n+1)(1 + eps Q)``."""
    eps = as_fraction(eps)
    return 2 * Q * (1 + eps * Q) * Fraction(n + 1, n)


def phase_sizes(phases) -> list:
    return [sum(c for _, c in p) for p in phases]


def group_slots(sched: SlotSchedule) -> dict:
    out = defaultdict(list)
    for e in sched.entries:
        out[e.group].append(e.slot)
    return out
