"""Equilibrium pricing for markets with fixed budgets.

Buyers bring fixed money, each good has one unit of supply, and an
equilibrium is a positive price vector whose best-ratio money flow both
sells every good and exhausts every budget.  Prices start provably small
(every good priced at its best column utility times a common factor small
enough that any single buyer could afford everything) and rise in phases:

* a phase targets the buyers with the current maximum surplus and the goods
  they are interested in, cutting those goods' edges to everyone else;
* prices in the target set rise uniformly until either a new utility/price
  ratio ties a best ratio (an edge event: the attaining edges join the
  network, the balanced flow is recomputed, and buyers that can reach the
  target set through the residual graph are absorbed into it), or some set
  of goods becomes exactly as expensive as all the money its buyers hold
  (a tight event, located by a short descending search over min cuts, which
  ends the phase).

Surpluses never increase, the maximum surplus drops geometrically, and the
run ends when every budget is exactly spent.
"""

from __future__ import annotations

from fractions import Fraction

from .balanced import balanced_flow, surpluses
from .flownet import MarketNetwork, bang_per_buck, max_flow
from .instance import gen_l1_adversarial


class FisherError(AssertionError):
    """Internal defect: a fixed-budget run left its invariants."""


def initial_prices(u, money):
    """Start prices: column max scaled so any buyer can afford all goods.

    ``p_j = max_i u[i][j] * min_i m_i / (g * max_ij u[i][j])``.  Every good
    with a positive column is some buyer's best ratio (its column maximizer
    attains the common best ratio there), and the total price mass is at most
    the poorest budget, so every good can fully sell from the start.  Goods
    no one values get price 0 and never enter the network.
    """
    u_max = max(max(row) for row in u)
    if u_max == 0:
        raise FisherError("cannot price a market with all-zero utilities")
    least = min(money)
    if least <= 0:
        raise FisherError("budgets must be positive")
    g = len(u[0])
    scale = Fraction(least, g * u_max)
    return [max(row[j] for row in u) * scale for j in range(len(u[0]))]


def _phase_cap(u, money):
    bits = sum(e.bit_length() for row in u for e in row)
    bits += sum(x.numerator.bit_length() + x.denominator.bit_length() for x in money)
    n, g = len(u), len(u[0])
    return 64 + 8 * n * n * (bits + g)


def _l1(theta):
    return sum(theta, Fraction(0))


def _l2(theta):
    return sum((t * t for t in theta), Fraction(0))


def _rebalance(u, money, p, edges, gamma):
    net = MarketNetwork(tuple(p), tuple(money), frozenset(edges), tuple(gamma))
    flow, theta = balanced_flow(net)
    return net, flow, theta


def _first_tight(p, money, edges, target):
    """Largest uniform factor on the target goods' prices keeping all goods sellable.

    Returns ``(x, tight_buyers, tight_goods)`` where the tight sets are the
    maximal ones (far side of the min cut at the critical factor).  Starts
    from the factor that would price the target at its buyers' whole money
    and descends through binding min cuts; each step strictly grows the
    binding target mass, so it ends within ``g + 2`` max-flows.
    """
    g = len(p)
    buyers_of = {}
    for (i, j) in edges:
        buyers_of.setdefault(j, set()).add(i)
    target = set(target)
    gamma_t = set()
    for j in target:
        gamma_t |= buyers_of.get(j, set())
    mass = sum((p[j] for j in target), Fraction(0))
    if not gamma_t or mass <= 0:
        raise FisherError("tight search needs a priced, wanted target set")
    x = sum((money[i] for i in gamma_t), Fraction(0)) / mass
    for _ in range(g + 3):
        prices = tuple(p[j] * x if j in target else p[j] for j in range(g))
        res = max_flow(MarketNetwork(prices, tuple(money), frozenset(edges)))
        if res.value == sum(prices, Fraction(0)):
            return x, res.far_side[0], res.far_side[1]
        binding = set(res.far_side[1])
        inside = sum((p[j] for j in binding & target), Fraction(0))
        if inside <= 0:
            raise FisherError("a set of goods outside the target cannot sell")
        buyers = set()
        for j in binding:
            buyers |= buyers_of.get(j, set())
        free = sum((money[i] for i in buyers), Fraction(0)) - sum(
            (p[j] for j in binding - target), Fraction(0)
        )
        x_new = free / inside
        if not (1 <= x_new < x):
            raise FisherError("tight-factor descent failed to make progress")
        x = x_new
    raise FisherError("tight-factor descent did not converge")


def _run_phase(u, money, p, gamma, edges, flow, theta, phase_no, trace):
    """One price phase; mutates ``p``, ``gamma``, ``edges``.  Returns iteration count."""
    n, g = len(u), len(u[0])
    peak = max(theta)
    target_buyers = {i for i in range(n) if theta[i] == peak}
    target_goods = {j for (i, j) in edges if i in target_buyers}
    pruned = {(i, j) for (i, j) in edges if j in target_goods and i not in target_buyers}
    if any(flow.pair_flow.get(e, 0) > 0 for e in pruned):
        raise FisherError("an edge cut from the target set still carries flow")
    edges -= pruned

    iterations = 0
    while True:
        iterations += 1
        if iterations > 4 * (g + 1):
            raise FisherError("phase exceeded its iteration budget")
        x_edge = None
        edge_pairs = []
        for i in sorted(target_buyers):
            for j in range(g):
                if j not in target_goods and u[i][j] > 0:
                    cand = gamma[i] * p[j] / u[i][j]
                    if x_edge is None or cand < x_edge:
                        x_edge, edge_pairs = cand, [(i, j)]
                    elif cand == x_edge:
                        edge_pairs.append((i, j))
        x_tight, tight_buyers, tight_goods = _first_tight(p, money, edges, target_goods)
        if x_tight <= 1:
            raise FisherError("tight factor must exceed 1 while surpluses remain")

        if x_edge is None or x_tight <= x_edge:
            for j in target_goods:
                p[j] *= x_tight
            for i in target_buyers:
                gamma[i] /= x_tight
            trace.append(
                {
                    "kind": "event", "phase": phase_no, "iteration": iterations,
                    "type": "tight", "x": x_tight,
                    "tight_goods": sorted(tight_goods), "tight_buyers": sorted(tight_buyers),
                }
            )
            return iterations

        for j in target_goods:
            p[j] *= x_edge
        for i in target_buyers:
            gamma[i] /= x_edge
        edges |= set(edge_pairs)
        net, flow, theta = _rebalance(u, money, p, edges, gamma)
        absorbed = flow.residual_reach(target_buyers, reverse=True)
        target_buyers |= absorbed
        target_goods = {j for (i, j) in edges if i in target_buyers}
        pruned = {(i, j) for (i, j) in edges if j in target_goods and i not in target_buyers}
        if any(flow.pair_flow.get(e, 0) > 0 for e in pruned):
            raise FisherError("an edge cut from the target set still carries flow")
        edges -= pruned
        trace.append(
            {
                "kind": "event", "phase": phase_no, "iteration": iterations,
                "type": "edge", "x": x_edge, "pairs": sorted(edge_pairs),
                "l1": _l1(theta), "l2": _l2(theta),
            }
        )


def _run(u, money, start_prices=None, max_phases=None, trace=None):
    money = tuple(Fraction(x) for x in money)
    p = [Fraction(x) for x in (start_prices if start_prices is not None else initial_prices(u, money))]
    trace = trace if trace is not None else []
    cap = _phase_cap(u, money)
    phase_no = 0
    while True:
        gamma, edge_list = bang_per_buck(u, p)
        net, flow, theta = _rebalance(u, money, p, set(edge_list), gamma)
        trace.append(
            {
                "kind": "state", "phase": phase_no, "p": tuple(p),
                "theta": tuple(theta), "l1": _l1(theta), "l2": _l2(theta),
            }
        )
        if all(t == 0 for t in theta):
            break
        if max_phases is not None and phase_no >= max_phases:
            break
        phase_no += 1
        if phase_no > cap:
            raise FisherError("phase count exceeded the safety cap")
        # The phase works on its own copies of the ratio list and edge set;
        # the next loop turn rebuilds both from the (shared, mutated) prices.
        _run_phase(u, money, p, list(gamma), set(edge_list), flow, theta, phase_no, trace)
    return tuple(p), net, flow, theta, trace, phase_no


def fisher_equilibrium(u, money, start_prices=None, collect_trace=False):
    """Exact equilibrium of the fixed-budget market.

    Returns ``(p, x, trace)``: positive prices for wanted goods (0 for goods
    no one values), the allocation matrix with ``x[i][j]`` the fraction of
    good ``j`` sold to buyer ``i``, and the phase/event trace (empty list
    unless ``collect_trace``).
    """
    p, net, flow, theta, trace, _ = _run(u, money, start_prices=start_prices)
    x = [
        [
            (flow.pair_flow.get((i, j), Fraction(0)) / p[j]) if p[j] > 0 else Fraction(0)
            for j in range(len(u[0]))
        ]
        for i in range(len(u))
    ]
    return p, x, (trace if collect_trace else [])


def measure_l1_vs_l2(n, delta=Fraction(1), big=None):
    """Run one phase on the surplus-ladder family and report both norms.

    The family is built so a single phase performs ``n`` edge events followed
    by one tight event; the total surplus (l1) hardly moves while the squared
    norm (l2) drops by a constant factor.  Returns a dict with the event list
    and the start / after-edge-events / end values of both norms.
    """
    u, money, prices = gen_l1_adversarial(n, delta, big)
    trace = []
    _run(u, money, start_prices=prices, max_phases=1, trace=trace)
    states = [e for e in trace if e["kind"] == "state"]
    events = [e for e in trace if e["kind"] == "event"]
    edge_events = [e for e in events if e["type"] == "edge"]
    return {
        "n": n,
        "delta": Fraction(delta),
        "events": events,
        "l1_start": states[0]["l1"],
        "l2_start": states[0]["l2"],
        "l1_after_edges": edge_events[-1]["l1"] if edge_events else states[0]["l1"],
        "l1_end": states[-1]["l1"],
        "l2_end": states[-1]["l2"],
        "l1_drop": states[0]["l1"] - states[-1]["l1"],
        "l2_drop_factor": states[-1]["l2"] / states[0]["l2"],
    }
