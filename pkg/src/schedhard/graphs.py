"""Layered k-partite graphs, planted block partitions and expansion checks.

Layers are numbered ``1..k`` and vertices inside a layer ``0..n-1``.
``edges[i]`` holds the pairs ``(u, v)`` with ``u`` in layer ``i`` and ``v`` in
layer ``i+1``.  Adjacency is kept as integer bitsets, which is what the
exhaustive expansion checker iterates over.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, floor
from typing import Optional, Sequence

from .errors import BudgetError, GenerationError, ParameterError, PreconditionError, StructuralError
from .rational import as_fraction

DEFAULT_ENUMERATION_BUDGET = 2_000_000


@dataclass(frozen=True)
class KPartiteGraph:
    k: int
    n: int
    edges: tuple  # edges[i-1] = sorted tuple of (u, v) between layer i and i+1

    def __post_init__(self):
        if self.k < 2:
            raise StructuralError("a k-partite graph needs k >= 2")
        if self.n < 1:
            raise StructuralError("layers must be non-empty")
        if len(self.edges) != self.k - 1:
            raise StructuralError(f"expected {self.k - 1} edge sets, got {len(self.edges)}")
        normalized = []
        for layer_edges in self.edges:
            es = tuple(sorted({(int(u), int(v)) for u, v in layer_edges}))
            for u, v in es:
                if not (0 <= u < self.n and 0 <= v < self.n):
                    raise StructuralError(f"edge ({u}, {v}) out of range for n={self.n}")
            normalized.append(es)
        object.__setattr__(self, "edges", tuple(normalized))

    def layer_edges(self, i: int) -> tuple:
        """Edges between layer ``i`` and ``i+1`` (1-based)."""
        return self.edges[i - 1]

    def rows(self, i: int) -> list:
        """Bitset of layer-``i+1`` neighbours for each vertex of layer ``i``."""
        out = [0] * self.n
        for u, v in self.edges[i - 1]:
            out[u] |= 1 << v
        return out

    @property
    def edge_count(self) -> int:
        return sum(len(es) for es in self.edges)


@dataclass(frozen=True)
class PartitionWitness:
    """Block index per vertex and layer; ``None`` marks an err vertex."""

    Q: int
    eps: Fraction
    blocks: tuple  # blocks[i-1][v] -> int in [0, Q) or None

    def __post_init__(self):
        object.__setattr__(self, "eps", as_fraction(self.eps))
        object.__setattr__(self, "blocks", tuple(tuple(layer) for layer in self.blocks))

    @property
    def has_err(self) -> bool:
        return any(b is None for layer in self.blocks for b in layer)

    def members(self, layer: int, block: Optional[int]) -> list:
        return [v for v, b in enumerate(self.blocks[layer - 1]) if b == block]

    def block_sizes(self, layer: int) -> list:
        sizes = [0] * self.Q
        for b in self.blocks[layer - 1]:
            if b is not None:
                sizes[b] += 1
        return sizes


@dataclass(frozen=True)
class BipartiteGraph:
    n: int
    edges: tuple  # (v, w) pairs, v in V and w in W

    def __post_init__(self):
        es = tuple(sorted({(int(v), int(w)) for v, w in self.edges}))
        for v, w in es:
            if not (0 <= v < self.n and 0 <= w < self.n):
                raise StructuralError(f"edge ({v}, {w}) out of range for n={self.n}")
        object.__setattr__(self, "edges", es)

    def adjacency(self) -> list:
        adj = [[] for _ in range(self.n)]
        for v, w in self.edges:
            adj[v].append(w)
        return adj

    def as_kpartite(self) -> KPartiteGraph:
        return KPartiteGraph(2, self.n, (self.edges,))


@dataclass(frozen=True)
class BipartitePartition:
    """YES-case partition of a bipartite graph: ``w`` in ``W_i`` only sees ``V_i`` and ``V_err``."""

    Q: int
    eps: Fraction
    v_blocks: tuple  # block per V vertex, None for V_err
    w_blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "eps", as_fraction(self.eps))
        object.__setattr__(self, "v_blocks", tuple(self.v_blocks))
        object.__setattr__(self, "w_blocks", tuple(self.w_blocks))


# --------------------------------------------------------------------------
# YES case


def _rng(seed) -> random.Random:
    return random.Random(seed)


def _bernoulli(rng: random.Random, p: Fraction) -> bool:
    # exact for rational p: draw a uniform integer below the denominator
    if p <= 0:
        return False
    if p >= 1:
        return True
    return rng.randrange(p.denominator) < p.numerator


def gen_yes_kpartite(k: int, n: int, Q: int, edge_prob=1, seed=None):
    """Random layered graph with a planted ordered block partition (eps = 0).

    An edge from layer-``i`` block ``a`` to layer-``i+1`` block ``b`` is only
    ever drawn when ``a <= b``.
    """
    edge_prob = as_fraction(edge_prob)
    if k < 2 or Q < 2:
        raise ParameterError("need k >= 2 and Q >= 2")
    if n % Q:
        raise ParameterError(f"Q={Q} does not divide n={n}")
    if not 0 <= edge_prob <= 1:
        raise ParameterError("edge_prob must lie in [0, 1]")
    rng = _rng(seed)
    size = n // Q
    blocks = []
    for _ in range(k):
        order = list(range(n))
        rng.shuffle(order)
        layer = [0] * n
        for pos, v in enumerate(order):
            layer[v] = pos // size
        blocks.append(layer)
    edges = []
    for i in range(k - 1):
        lower, upper = blocks[i], blocks[i + 1]
        es = [(u, v) for u in range(n) for v in range(n)
              if lower[u] <= upper[v] and _bernoulli(rng, edge_prob)]
        edges.append(es)
    return KPartiteGraph(k, n, tuple(edges)), PartitionWitness(Q, Fraction(0), tuple(blocks))


def forbidden_edges(g: KPartiteGraph, w: PartitionWitness, strict: bool = False) -> list:
    """Edges that break the block ordering, as ``(layer, u, v)``.

    An edge from block ``a`` to block ``b`` of the next layer is forbidden
    when ``b < a``; with ``strict`` any ``a != b`` is forbidden.  Edges
    touching an err vertex are never forbidden.
    """
    bad = []
    for i in range(1, g.k):
        lower, upper = w.blocks[i - 1], w.blocks[i]
        for u, v in g.layer_edges(i):
            a, b = lower[u], upper[v]
            if a is None or b is None:
                continue
            if b < a or (strict and a != b):
                bad.append((i, u, v))
    return bad


def check_yes_partition(g: KPartiteGraph, w: PartitionWitness, strict: bool = False) -> bool:
    if len(w.blocks) != g.k or any(len(layer) != g.n for layer in w.blocks):
        raise PreconditionError("witness dimensions do not match the graph")
    bound = (1 - w.eps) * g.n / w.Q
    for i in range(1, g.k + 1):
        for b in w.blocks[i - 1]:
            if b is not None and not 0 <= b < w.Q:
                return False
        if any(size < bound for size in w.block_sizes(i)):
            return False
    return not forbidden_edges(g, w, strict)


# --------------------------------------------------------------------------
# NO case


def _subset_size(n: int, delta) -> int:
    s = floor(as_fraction(delta) * n)
    if s < 1:
        raise PreconditionError(f"floor(delta * n) = {s} < 1")
    return s


def expansion_counterexample(g: KPartiteGraph, delta, budget: int = DEFAULT_ENUMERATION_BUDGET):
    """First ``(layer, S, T)`` with no edge between ``S`` and ``T``, or ``None``.

    ``S`` lies in layer ``i`` and ``T`` in layer ``i+1``.  For every
    ``s``-subset ``S`` it suffices to look at the non-neighbours of ``S``:
    an edgeless ``T`` exists iff at least ``s`` of them remain.
    """
    s = _subset_size(g.n, delta)
    per_pair = comb(g.n, s)
    if per_pair * (g.k - 1) > budget:
        raise BudgetError(f"{per_pair} subsets per layer pair exceed budget {budget}")
    full = (1 << g.n) - 1
    for i in range(1, g.k):
        rows = g.rows(i)
        for S in combinations(range(g.n), s):
            nbrs = 0
            for u in S:
                nbrs |= rows[u]
            free = full & ~nbrs
            if free.bit_count() >= s:
                T = [v for v in range(g.n) if free >> v & 1][:s]
                return i, S, tuple(T)
    return None


def check_expansion(g: KPartiteGraph, delta, budget: int = DEFAULT_ENUMERATION_BUDGET) -> bool:
    return expansion_counterexample(g, delta, budget) is None


def sampled_expansion(g: KPartiteGraph, delta, samples: int, seed=None) -> bool:
    """Random-subset spot check.  A ``True`` answer certifies nothing."""
    s = _subset_size(g.n, delta)
    rng = _rng(seed)
    for _ in range(samples):
        i = rng.randrange(1, g.k)
        rows = g.rows(i)
        S = rng.sample(range(g.n), s)
        T = rng.sample(range(g.n), s)
        if not any(rows[u] >> v & 1 for u in S for v in T):
            return False
    return True


def gen_no_kpartite(k: int, n: int, delta, edge_prob, seed=None, max_retries: int = 100,
                    budget: int = DEFAULT_ENUMERATION_BUDGET) -> KPartiteGraph:
    """Rejection-sample independent random edges until every layer pair expands."""
    edge_prob = as_fraction(edge_prob)
    _subset_size(n, delta)
    if k < 2:
        raise ParameterError("need k >= 2")
    rng = _rng(seed)
    g = witness = None
    for _ in range(max_retries):
        edges = tuple(
            tuple((u, v) for u in range(n) for v in range(n) if _bernoulli(rng, edge_prob))
            for _ in range(k - 1))
        g = KPartiteGraph(k, n, edges)
        witness = expansion_counterexample(g, delta, budget)
        if witness is None:
            return g
    raise GenerationError(f"no expanding graph after {max_retries} attempts", graph=g,
                          failing_pair=witness)


# --------------------------------------------------------------------------
# bipartite graphs: planted partitions, matching, lift


def gen_yes_bipartite(n: int, Q: int, eps=0, edge_prob=Fraction(1, 2), seed=None,
                      isolated: int = 0):
    """Bipartite graph with a planted partition in the matching-lift form.

    Each block has ``(1-eps) n / Q`` vertices on both sides and the
    remainder forms ``V_err`` / ``W_err``.  A vertex of ``W_i`` only has
    neighbours in ``V_i`` and ``V_err``; ``W_err`` may see anything.  The
    ``j``-th vertex of ``V_i`` is always joined to the ``j``-th vertex of
    ``W_i`` (likewise for the err sets), so the graph has a perfect matching
    before ``isolated`` V vertices, taken round-robin over the blocks, lose
    all their edges.
    """
    eps = as_fraction(eps)
    edge_prob = as_fraction(edge_prob)
    size = (1 - eps) * n / Q
    if size.denominator != 1 or size < 1:
        raise ParameterError(f"(1-eps) n / Q = {size} must be a positive integer")
    size = int(size)
    rng = _rng(seed)
    labels = [b for b in range(Q) for _ in range(size)] + [None] * (n - Q * size)
    v_perm = list(range(n))
    w_perm = list(range(n))
    rng.shuffle(v_perm)
    rng.shuffle(w_perm)
    v_blocks = [None] * n
    w_blocks = [None] * n
    for pos in range(n):
        v_blocks[v_perm[pos]] = labels[pos]
        w_blocks[w_perm[pos]] = labels[pos]
    # v_perm[pos] and w_perm[pos] share a label; they form the planted matching
    edges = {(v_perm[pos], w_perm[pos]) for pos in range(n)}
    for v in range(n):
        for w in range(n):
            bw = w_blocks[w]
            allowed = bw is None or v_blocks[v] is None or v_blocks[v] == bw
            if allowed and _bernoulli(rng, edge_prob):
                edges.add((v, w))
    drop = set()
    if isolated:
        by_block = {}
        for pos in range(n):
            by_block.setdefault(labels[pos], []).append(v_perm[pos])
        keys = [b for b in range(Q)] + ([None] if None in by_block else [])
        cursor = 0
        while len(drop) < isolated:
            pool = by_block[keys[cursor % len(keys)]]
            taken = [v for v in pool if v not in drop]
            if taken:
                drop.add(taken[0])
            cursor += 1
            if cursor > n * (Q + 1):
                raise ParameterError("cannot isolate that many vertices")
    edges = {(v, w) for v, w in edges if v not in drop}
    return BipartiteGraph(n, tuple(edges)), BipartitePartition(Q, eps, tuple(v_blocks), tuple(w_blocks))


def check_bipartite_partition(b: BipartiteGraph, p: BipartitePartition) -> bool:
    """Every ``w`` in ``W_i`` has neighbours only in ``V_i`` and ``V_err``."""
    if len(p.v_blocks) != b.n or len(p.w_blocks) != b.n:
        raise PreconditionError("partition dimensions do not match the graph")
    bound = (1 - p.eps) * b.n / p.Q
    for side in (p.v_blocks, p.w_blocks):
        sizes = [0] * p.Q
        for x in side:
            if x is not None:
                if not 0 <= x < p.Q:
                    return False
                sizes[x] += 1
        if any(s < bound for s in sizes):
            return False
    for v, w in b.edges:
        bv, bw = p.v_blocks[v], p.w_blocks[w]
        if bw is not None and bv is not None and bv != bw:
            return False
    return True


def max_matching(b: BipartiteGraph) -> list:
    """Hopcroft-Karp maximum matching as a sorted list of ``(v, w)`` pairs."""
    pairs, _ = _hopcroft_karp(b)
    return pairs


def vertex_cover(b: BipartiteGraph) -> tuple:
    """König cover ``(V side, W side)`` whose size equals the maximum matching."""
    pairs, match_w = _hopcroft_karp(b)
    match_v = {v: w for v, w in pairs}
    adj = b.adjacency()
    # alternating reachability from free V vertices
    seen_v = {v for v in range(b.n) if v not in match_v}
    seen_w = set()
    stack = list(seen_v)
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen_w and match_v.get(v) != w:
                seen_w.add(w)
                u = match_w.get(w)
                if u is not None and u not in seen_v:
                    seen_v.add(u)
                    stack.append(u)
    cover_v = sorted(set(range(b.n)) - seen_v)
    cover_w = sorted(seen_w)
    return cover_v, cover_w


def _hopcroft_karp(b: BipartiteGraph):
    adj = b.adjacency()
    match_v = [None] * b.n
    match_w = [None] * b.n
    INF = float("inf")

    def bfs():
        dist = [INF] * b.n
        queue = [v for v in range(b.n) if match_v[v] is None]
        for v in queue:
            dist[v] = 0
        found = False
        head = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            for w in adj[v]:
                u = match_w[w]
                if u is None:
                    found = True
                elif dist[u] == INF:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return found, dist

    def dfs(v, dist):
        for w in adj[v]:
            u = match_w[w]
            if u is None or (dist[u] == dist[v] + 1 and dfs(u, dist)):
                match_v[v] = w
                match_w[w] = v
                return True
        dist[v] = INF
        return False

    while True:
        found, dist = bfs()
        if not found:
            break
        for v in range(b.n):
            if match_v[v] is None:
                dfs(v, dist)
    pairs = sorted((v, w) for v, w in enumerate(match_v) if w is not None)
    return pairs, {w: v for v, w in pairs}


@dataclass(frozen=True)
class MatchingLift:
    graph: KPartiteGraph
    witness: Optional[PartitionWitness]
    matching: tuple
    n_original: int
    delta_eff: Fraction = field(default=Fraction(0))


def matching_lift(b: BipartiteGraph, k: int, partition: Optional[BipartitePartition] = None) -> MatchingLift:
    """Restrict ``b`` to a maximum matching and copy it between ``k`` layers.

    Position ``p`` of the matching ``(v_p, w_p)`` becomes vertex ``p`` of
    every layer, and an edge ``(v_p, w_q)`` becomes ``(p, q)`` between every
    pair of consecutive layers.  With a YES partition the lifted witness
    uses the re-blocked sets: a pair goes to err when ``v_p`` is in ``V_err``
    or ``w_p`` is in ``W_err``.  The witness ``eps`` is chosen so that its
    block-size bound, evaluated at the lifted size ``n'``, equals
    ``(1 - delta - 2 eps) n / Q`` with ``delta = 1 - n'/n``.
    """
    if k < 2:
        raise ParameterError("need k >= 2")
    matching = max_matching(b)
    position_v = {v: p for p, (v, _) in enumerate(matching)}
    position_w = {w: p for p, (_, w) in enumerate(matching)}
    n2 = len(matching)
    if n2 == 0:
        raise PreconditionError("graph has no edges to match")
    restricted = tuple((position_v[v], position_w[w]) for v, w in b.edges
                       if v in position_v and w in position_w)
    graph = KPartiteGraph(k, n2, tuple(restricted for _ in range(k - 1)))
    delta_eff = Fraction(b.n - n2, b.n)
    witness = None
    if partition is not None:
        layer = []
        for v, w in matching:
            err = partition.v_blocks[v] is None or partition.w_blocks[w] is None
            layer.append(None if err else partition.v_blocks[v])
        target = (1 - delta_eff - 2 * partition.eps) * b.n
        eps_w = 1 - target / n2
        witness = PartitionWitness(partition.Q, eps_w, tuple(tuple(layer) for _ in range(k)))
    return MatchingLift(graph, witness, tuple(matching), b.n, delta_eff)


def kpartite_from_layers(n: int, layers: Sequence[Sequence[tuple]]) -> KPartiteGraph:
    return KPartiteGraph(len(layers) + 1, n, tuple(tuple(es) for es in layers))
