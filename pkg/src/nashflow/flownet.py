"""Money-flow networks over (goods, buyers) and exact max-flow.

The recurring object is a bipartite flow network: source -> good j with
capacity ``p[j]`` (the good's price), good -> buyer along "interest" edges
with unbounded capacity, buyer i -> sink with capacity ``m[i]`` (the buyer's
money).  A max-flow routes money from goods to buyers; the two canonical
minimum cuts tell us which side binds.

All capacities are rationals.  Max-flow clears denominators up front and runs
integer Edmonds-Karp (shortest augmenting paths, deterministic edge order),
so flows are exact and runs are reproducible.  Unbounded pair capacities are
encoded as the total price mass plus one, which no s-t flow can reach.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

_MAXFLOW_CALLS = 0


def maxflow_call_count() -> int:
    """Total max-flow computations so far in this process (monotone counter)."""
    return _MAXFLOW_CALLS


def bang_per_buck(u, p):
    """Best utility-per-price ratio and its attaining edges.

    Returns ``(gamma, edges)`` where ``gamma[i] = max_j u[i][j]/p[j]`` over
    goods with positive price and ``edges`` lists every ``(i, j)`` attaining
    the maximum.  Rows with no positive utility toward positively-priced
    goods are rejected (callers preprocess those away).
    """
    n, g = len(u), len(p)
    gamma = []
    edges = []
    for i in range(n):
        best = None
        for j in range(g):
            if p[j] > 0 and u[i][j] > 0:
                ratio = Fraction(u[i][j], 1) / p[j]
                if best is None or ratio > best:
                    best = ratio
        if best is None:
            raise ValueError(f"buyer {i} values no positively priced good")
        gamma.append(best)
        for j in range(g):
            if p[j] > 0 and u[i][j] > 0 and Fraction(u[i][j], 1) / p[j] == best:
                edges.append((i, j))
    return gamma, edges


@dataclass(frozen=True)
class MarketNetwork:
    """Immutable network description: prices, money, and interest edges."""

    p: tuple
    m: tuple
    edges: frozenset
    gamma: tuple | None = None

    @property
    def g(self) -> int:
        return len(self.p)

    @property
    def n(self) -> int:
        return len(self.m)

    def with_money(self, money) -> "MarketNetwork":
        return MarketNetwork(self.p, tuple(Fraction(x) for x in money), self.edges, self.gamma)

    def sub(self, buyers, goods) -> "MarketNetwork":
        """Restriction to subsets: outside caps zeroed, edges filtered."""
        buyers, goods = set(buyers), set(goods)
        p = tuple(self.p[j] if j in goods else Fraction(0) for j in range(self.g))
        m = tuple(self.m[i] if i in buyers else Fraction(0) for i in range(self.n))
        edges = frozenset((i, j) for (i, j) in self.edges if i in buyers and j in goods)
        return MarketNetwork(p, m, edges, self.gamma)

    def goods_with(self, buyers) -> set:
        """Neighborhood: goods sharing an edge with any of the given buyers."""
        buyers = set(buyers)
        return {j for (i, j) in self.edges if i in buyers}

    def buyers_with(self, goods) -> set:
        goods = set(goods)
        return {i for (i, j) in self.edges if j in goods}


def build_network(inst, p, money=None, edges=None) -> MarketNetwork:
    """Network at the given prices.

    With ``money`` omitted, budgets are flexible: buyer ``i`` carries
    ``1 + c_i / gamma_i`` where ``gamma_i`` is their best utility-per-price
    ratio, and edges default to the best-ratio pairs.  With ``money`` given
    (fixed-budget market), ``gamma`` is still computed for callers but money
    is taken as-is.
    """
    p = tuple(Fraction(x) for x in p)
    gamma, bpb_edges = bang_per_buck(inst.u, p)
    if edges is None:
        edges = bpb_edges
    if money is None:
        money = [1 + inst.c[i] / gamma[i] for i in range(inst.n)]
    return MarketNetwork(p, tuple(Fraction(x) for x in money), frozenset(edges), tuple(gamma))


@dataclass
class FlowResult:
    """An exact max-flow plus both canonical minimum cuts.

    ``source_side`` is the minimal min cut (nodes reachable from the source
    in the residual graph); ``far_side`` is the complement of the nodes that
    reach the sink, i.e. the maximal min cut.  Each is given as a pair
    ``(buyers, goods)`` of frozensets, source/sink excluded.
    """

    value: Fraction
    good_flow: list
    pair_flow: dict
    buyer_flow: list
    source_side: tuple
    far_side: tuple
    net: MarketNetwork

    def residual_reach(self, start_buyers, reverse=False):
        """Buyers reachable from ``start_buyers`` in the residual graph.

        Paths run through goods and buyers only (never the source or sink):
        good -> buyer arcs are always traversable along interest edges
        (unbounded capacity), buyer -> good arcs only where that buyer
        currently receives flow from the good.  With ``reverse=True`` the
        arcs are flipped, giving the set of buyers that can reach
        ``start_buyers``.
        """
        fwd_good_to_buyers = {}
        fwd_buyer_to_goods = {}
        for (i, j) in self.net.edges:
            fwd_good_to_buyers.setdefault(j, []).append(i)
            if self.pair_flow.get((i, j), 0) > 0:
                fwd_buyer_to_goods.setdefault(i, []).append(j)
        if reverse:
            g2b, b2g = {}, {}
            for j, buyers in fwd_good_to_buyers.items():
                for i in buyers:
                    b2g.setdefault(i, []).append(j)
            for i, goods in fwd_buyer_to_goods.items():
                for j in goods:
                    g2b.setdefault(j, []).append(i)
            fwd_good_to_buyers, fwd_buyer_to_goods = g2b, b2g
        seen_b = set(start_buyers)
        seen_g = set()
        queue = deque(("b", i) for i in sorted(seen_b))
        while queue:
            kind, node = queue.popleft()
            if kind == "b":
                for j in fwd_buyer_to_goods.get(node, ()):
                    if j not in seen_g:
                        seen_g.add(j)
                        queue.append(("g", j))
            else:
                for i in fwd_good_to_buyers.get(node, ()):
                    if i not in seen_b:
                        seen_b.add(i)
                        queue.append(("b", i))
        return seen_b


def residual_reachable(net: MarketNetwork, flow: FlowResult, start):
    """Nodes reachable from ``start`` in the residual graph, source/sink excluded.

    Nodes are tagged pairs ``("buyer", i)`` or ``("good", j)``; ``start`` is
    any iterable of them.  Interior residual arcs: good -> buyer is open along
    every interest edge (the pair capacity is never met), buyer -> good is
    open exactly where the pair currently carries flow.  The result includes
    the start nodes themselves.
    """
    good_to_buyers = {}
    buyer_to_goods = {}
    for (i, j) in net.edges:
        good_to_buyers.setdefault(j, []).append(i)
        if flow.pair_flow.get((i, j), 0) > 0:
            buyer_to_goods.setdefault(i, []).append(j)
    seen = set()
    queue = deque()
    for node in start:
        kind, idx = node
        if kind not in ("buyer", "good"):
            raise ValueError(f"unknown node kind {kind!r}")
        if (kind, idx) not in seen:
            seen.add((kind, idx))
            queue.append((kind, idx))
    while queue:
        kind, idx = queue.popleft()
        step = buyer_to_goods if kind == "buyer" else good_to_buyers
        out_kind = "good" if kind == "buyer" else "buyer"
        for nxt in step.get(idx, ()):
            if (out_kind, nxt) not in seen:
                seen.add((out_kind, nxt))
                queue.append((out_kind, nxt))
    return seen


def max_flow(net: MarketNetwork, money=None) -> FlowResult:
    """Exact max-flow of the network (optionally with overridden sink caps)."""
    global _MAXFLOW_CALLS
    _MAXFLOW_CALLS += 1

    n, g = net.n, net.g
    m = net.m if money is None else tuple(Fraction(x) for x in money)
    denoms = [x.denominator for x in net.p] + [x.denominator for x in m]
    scale = lcm(*denoms) if denoms else 1

    # Node ids: source, goods, buyers, sink.
    source, sink = 0, 1 + g + n
    gnode = lambda j: 1 + j
    bnode = lambda i: 1 + g + i

    to, cap, head = [], [], [[] for _ in range(2 + g + n)]

    def add_arc(a, b, c):
        head[a].append(len(to))
        to.append(b)
        cap.append(c)
        head[b].append(len(to))
        to.append(a)
        cap.append(0)

    # Pair capacities stand in for "unbounded" and must strictly exceed any
    # achievable flow, or a fully loaded pair would masquerade as a cut edge.
    unbounded = sum(int(x * scale) for x in net.p) + 1
    pair_ids = {}
    for j in range(g):
        cj = int(net.p[j] * scale)
        if cj > 0:
            add_arc(source, gnode(j), cj)
    for (i, j) in sorted(net.edges, key=lambda e: (e[1], e[0])):
        if net.p[j] > 0:
            pair_ids[(i, j)] = len(to)
            add_arc(gnode(j), bnode(i), unbounded)
    for i in range(n):
        ci = int(m[i] * scale)
        if ci > 0:
            add_arc(bnode(i), sink, ci)

    def bfs_augment():
        parent_arc = [-1] * (2 + g + n)
        parent_arc[source] = -2
        queue = deque([source])
        while queue:
            node = queue.popleft()
            for arc in head[node]:
                nxt = to[arc]
                if parent_arc[nxt] == -1 and cap[arc] > 0:
                    parent_arc[nxt] = arc
                    if nxt == sink:
                        bottleneck = None
                        cur = sink
                        while cur != source:
                            arc2 = parent_arc[cur]
                            bottleneck = cap[arc2] if bottleneck is None else min(bottleneck, cap[arc2])
                            cur = to[arc2 ^ 1]
                        cur = sink
                        while cur != source:
                            arc2 = parent_arc[cur]
                            cap[arc2] -= bottleneck
                            cap[arc2 ^ 1] += bottleneck
                            cur = to[arc2 ^ 1]
                        return bottleneck
                    queue.append(nxt)
        return 0

    value = 0
    while True:
        pushed = bfs_augment()
        if not pushed:
            break
        value += pushed

    pair_flow = {}
    for (i, j), arc in pair_ids.items():
        f = cap[arc ^ 1]  # reverse residual equals flow shipped
        if f:
            pair_flow[(i, j)] = Fraction(f, scale)
    good_flow = [sum((pair_flow.get((i, j), Fraction(0)) for i in range(n)), Fraction(0)) for j in range(g)]
    buyer_flow = [sum((pair_flow.get((i, j), Fraction(0)) for j in range(g)), Fraction(0)) for i in range(n)]

    def reach(from_source):
        seen = {source if from_source else sink}
        queue = deque(seen)
        while queue:
            node = queue.popleft()
            for arc in head[node]:
                use = cap[arc] if from_source else cap[arc ^ 1]
                nxt = to[arc]
                if use > 0 and nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    src_reach = reach(True)
    sink_reach = reach(False)
    source_side = (
        frozenset(i for i in range(n) if bnode(i) in src_reach),
        frozenset(j for j in range(g) if gnode(j) in src_reach),
    )
    far_side = (
        frozenset(i for i in range(n) if bnode(i) not in sink_reach),
        frozenset(j for j in range(g) if gnode(j) not in sink_reach),
    )
    return FlowResult(
        value=Fraction(value, scale),
        good_flow=good_flow,
        pair_flow=pair_flow,
        buyer_flow=buyer_flow,
        source_side=source_side,
        far_side=far_side,
        net=MarketNetwork(net.p, m, net.edges, net.gamma),
    )


def is_small(inst, p) -> bool:
    """Whether prices are positive and every good can fully sell.

    Builds the flexible-budget network at ``p`` and checks the source-side
    cut is minimum, i.e. the max-flow equals the total price mass.
    """
    p = [Fraction(x) for x in p]
    if any(x <= 0 for x in p):
        return False
    net = build_network(inst, p)
    return max_flow(net).value == sum(p, Fraction(0))
