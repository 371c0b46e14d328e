"""Two-stage exact solver for the bargaining game.

The game "maximize sum of log(v_i - c_i) over allocations of unit-supply
goods" is solved through an equivalent market: buyer ``i`` carries budget
``m_i = 1 + c_i/gamma_i`` (where ``gamma_i`` is their best utility-per-price
ratio at the current prices), and a price vector is an equilibrium when the
best-ratio money flow can simultaneously sell every good and exhaust every
budget.  At equilibrium the optimal allocation is read off the flow and
``v_i - c_i = gamma_i``.

Stage I decides feasibility.  Starting from the fixed-budget equilibrium at
unit money, it repeatedly picks the buyers with the *most negative* budget
deficit ``beta_i = theta_i - 1`` (``theta`` = balanced-flow surplus) and
lowers the prices of the goods only they are interested in; each price drop
either ties a new utility/price ratio (the network gains edges and the set
grows) or exhausts outside interest, at which point the group is "frozen":
set aside with its prices, provably able to reach surplus deficit < 0 on its
own.  The run ends infeasible when the remaining buyers' deficits sum to a
nonnegative value (their money cannot absorb their goods' prices no matter
what), or feasible when every remaining deficit is negative.

On the feasible branch the frozen groups are restored.  Restoring at the
literal freeze prices can leave a frozen buyer preferring some still-active
good whose price dropped after the freeze, so each frozen group's prices are
scaled down by a safe factor (newest group first) until every frozen buyer's
best ratio stays strictly inside its own group; scaling a self-contained
group scales its balanced flow and deficits by the same factor, preserving
their negativity.  The reassembled prices make every deficit negative — a
feasibility witness.

Stage II walks prices up.  It picks the buyers with *maximum* surplus, whose
goods sell to them alone, and raises that block's prices by the largest
factor that keeps every deficit negative; the block either collides with an
outside ratio (new edges, block grows) or some subset of goods becomes
exactly affordable (surplus hits zero there) and the phase ends.  When every
surplus is zero the prices are the equilibrium.

Both stages assert their structural invariants as they go; violations raise
``SolverError`` (a defect, never a property of the input).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from .balanced import balanced_flow, scale_flow
from .certify import (
    check_equilibrium,
    check_kkt,
    lp_dual_for_zero_row,
    verify_convex_dual,
    verify_lp_dual,
)
from .fisher import _run as _fisher_run
from .fisher import initial_prices
from .flownet import MarketNetwork, maxflow_call_count
from .instance import BargainingInstance, preprocess


class SolverError(AssertionError):
    """Internal defect: a solver invariant failed."""


def _debug() -> bool:
    return os.environ.get("NASHFLOW_DEBUG", "") not in ("", "0")


def _clog2(v: int) -> int:
    return max(0, (int(v) - 1).bit_length())


def maxflow_budget(n, g, u_max, c_max, mu) -> int:
    """Worst-case max-flow budget for a full solve (polynomial bound).

    ``mu`` is the ceiling of the reciprocal of the smallest initialization
    price; ``c_max`` may be rational and is rounded up.
    """
    c_int = max(1, -(-c_max.numerator // c_max.denominator) if isinstance(c_max, Fraction) else int(c_max))
    terms = _clog2(n) + n * _clog2(max(u_max, 1)) + _clog2(c_int) + g * _clog2(max(int(mu), 1)) + 16
    return n**4 * g * terms


@dataclass
class FrozenBatch:
    buyers: frozenset
    goods: frozenset
    prices: dict
    gamma: dict
    theta: dict
    sigma: Fraction = Fraction(1)


@dataclass
class SolverState:
    """Mutable solver state over the preprocessed instance."""

    inst: BargainingInstance
    p: list
    gamma: list
    alpha: list
    edges: set
    flow: object = None
    theta: list = field(default_factory=list)
    active_buyers: set = field(default_factory=set)
    active_goods: set = field(default_factory=set)
    frozen: list = field(default_factory=list)
    mu: int = 1
    feasible_prices: tuple | None = None
    stats: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    @property
    def money(self):
        return tuple(1 + a for a in self.alpha)

    def beta(self, i):
        return self.theta[i] - 1


def _trace(state, **entry):
    entry.setdefault("p", tuple(state.p))
    state.trace.append(entry)


def _rebuild(state):
    """Refresh ratios, best-ratio edges, budgets, and the balanced flow.

    Operates on the active sub-market; frozen groups keep their recorded
    state.  Every active buyer's positive utilities lie inside the active
    goods (frozen groups were only declared when outside interest was zero),
    so ratios are well defined.
    """
    inst = state.inst
    edges = set()
    for i in sorted(state.active_buyers):
        best = None
        for j in sorted(state.active_goods):
            if inst.u[i][j] > 0:
                ratio = Fraction(inst.u[i][j]) / state.p[j]
                best = ratio if best is None or ratio > best else best
        if best is None:
            raise SolverError(f"active buyer {i} values no active good")
        state.gamma[i] = best
        state.alpha[i] = inst.c[i] / best
        for j in sorted(state.active_goods):
            if inst.u[i][j] > 0 and Fraction(inst.u[i][j]) / state.p[j] == best:
                edges.add((i, j))
    state.edges = edges
    _rebalance(state)


def _rebalance(state):
    net = MarketNetwork(
        tuple(state.p), tuple(1 + a for a in state.alpha), frozenset(state.edges)
    )
    sub = net.sub(state.active_buyers, state.active_goods)
    flow, theta = balanced_flow(sub)
    state.flow = flow
    for i in state.active_buyers:
        state.theta[i] = theta[i]
    supply = sum((state.p[j] for j in state.active_goods), Fraction(0))
    if flow.value != supply:
        raise SolverError("active goods can no longer fully sell")
    if _debug():
        _check_effective_edges(state)


def _check_effective_edges(state):
    inst = state.inst
    for (i, j) in state.edges:
        if Fraction(inst.u[i][j]) / state.p[j] != state.gamma[i]:
            raise SolverError(f"effective edge ({i},{j}) is not tight")
    for i in state.active_buyers:
        true_best = max(
            Fraction(inst.u[i][j]) / state.p[j]
            for j in state.active_goods
            if inst.u[i][j] > 0
        )
        if true_best != state.gamma[i]:
            raise SolverError(f"buyer {i} ratio is stale")


def initialize(inst: BargainingInstance) -> SolverState:
    """Stage-0 state: fixed-budget equilibrium at unit money, flexible budgets."""
    n, g = inst.n, inst.g
    start = initial_prices(inst.u, [Fraction(1)] * n)
    p, _net, _flow, _theta, _tr, fisher_phases = _fisher_run(
        inst.u, [Fraction(1)] * n, start_prices=start
    )
    state = SolverState(
        inst=inst,
        p=list(p),
        gamma=[Fraction(1)] * n,
        alpha=[Fraction(0)] * n,
        edges=set(),
        theta=[Fraction(0)] * n,
        active_buyers=set(range(n)),
        active_goods=set(range(g)),
    )
    lowest = min(start)
    state.mu = -(-lowest.denominator // lowest.numerator)
    state.stats = {
        "fisher_phases": fisher_phases,
        "stage1_phases": [],
        "stage2_phases": [],
        "end_reasons": [],
        "tight_denominators": [],
    }
    _rebuild(state)
    _trace(state, stage=0, type="initialized")
    return state


# ---------------------------------------------------------------------------
# Stage I (feasibility decision, descending prices)


def stage1(state: SolverState) -> str:
    """Run the descending-price stage.  Returns "feasible" or "infeasible".

    On the feasible branch the frozen groups are restored (with per-group
    price scaling) and the state holds a full-market feasibility witness; on
    the infeasible branch the state is left at the terminal prices for
    certificate extraction.
    """
    n, g = state.inst.n, state.inst.g
    guard = 0
    while True:
        active = state.active_buyers
        if all(state.beta(i) < 0 for i in active):
            verdict = "feasible"
            break
        if sum((state.beta(i) for i in active), Fraction(0)) >= 0:
            verdict = "infeasible"
            break
        guard += 1
        if guard > 16 + 4 * n * n * g * (state.inst.u_max.bit_length() + 8):
            raise SolverError("stage I exceeded its phase safety cap")
        _stage1_phase(state)
        _rebuild(state)
    _trace(state, stage=1, type="verdict", verdict=verdict)
    if verdict == "feasible":
        _restore(state)
    return verdict


def _stage1_sets(state, target):
    """(J, prune) for the target set: goods only the target is interested in."""
    rest = state.active_buyers - target
    rest_goods = {j for (i, j) in state.edges if i in rest}
    target_goods = {j for (i, j) in state.edges if i in target} - rest_goods
    stale = {
        (i, j) for (i, j) in state.edges if i in target and j not in target_goods
    }
    for (i, j) in stale:
        if state.flow.pair_flow.get((i, j), 0) > 0:
            raise SolverError("pruned edge still carries flow")
    state.edges -= stale
    return target_goods


def stage1_event_x(state, target=None, target_goods=None):
    """Largest factor ``x < 1`` at which shrinking target prices adds an edge.

    The descending stage multiplies the target goods' prices by ``x`` (raising
    the target buyers' best ratios by ``1/x``) until some outside buyer's
    interest in a target good catches up with that buyer's best ratio:
    ``x = max u_ij / (p_j * gamma_i)`` over outside buyers ``i`` and target
    goods ``j`` with ``u_ij > 0``.  Returns ``(x, pairs)`` with every pair
    attaining the maximum (the event adds them all at once), or ``(None, ())``
    when no outside buyer values a target good.

    Without explicit sets, the deepest-deficit group and its private goods are
    derived from the state (a phase opening); mid-phase the solver passes the
    sets it tracks.
    """
    inst = state.inst
    active = state.active_buyers
    if target is None:
        low = min(state.beta(i) for i in active)
        target = {i for i in active if state.beta(i) == low}
    if target_goods is None:
        rest_goods = {j for (i, j) in state.edges if i in active - target}
        target_goods = {j for (i, j) in state.edges if i in target} - rest_goods
    best = None
    for i in sorted(active - target):
        for j in sorted(target_goods):
            if inst.u[i][j] > 0:
                cand = Fraction(inst.u[i][j]) / (state.p[j] * state.gamma[i])
                if best is None or cand > best:
                    best = cand
    if best is None:
        return None, ()
    pairs = tuple(
        (i, j)
        for i in sorted(active - target)
        for j in sorted(target_goods)
        if inst.u[i][j] > 0
        and Fraction(inst.u[i][j]) / (state.p[j] * state.gamma[i]) == best
    )
    return best, pairs


def _stage1_phase(state):
    inst = state.inst
    n, g = inst.n, inst.g
    active = state.active_buyers
    low = min(state.beta(i) for i in active)
    if low >= 0:
        raise SolverError("stage I phase started without a deficit buyer")
    target = {i for i in active if state.beta(i) == low}
    target_goods = _stage1_sets(state, target)
    phi_start = _phi1(state)
    iterations = 0

    while True:
        x, attaining = stage1_event_x(state, target=target, target_goods=target_goods)
        if x is None or any(state.beta(i) >= 0 for i in target):
            break
        iterations += 1
        if iterations > 4 * n * g + 4:
            raise SolverError("stage I phase exceeded its iteration budget")
        if not 0 < x < 1:
            raise SolverError("stage I price factor must lie strictly in (0, 1)")
        for j in target_goods:
            state.p[j] *= x
        for i in target:
            state.alpha[i] *= x
            state.gamma[i] /= x
        state.edges |= set(attaining)
        _rebalance(state)
        target |= state.flow.residual_reach(target) & active
        target_goods = _stage1_sets(state, target)
        _trace(
            state, stage=1, type="edge", x=x, pairs=sorted(attaining),
            iteration=iterations,
        )

    adaptable = all(state.beta(i) < 0 for i in target) and not any(
        inst.u[i][j] > 0 for i in active - target for j in target_goods
    )
    reason = "isolated" if adaptable else "deficit-cleared"
    state.stats["end_reasons"].append(reason)
    if adaptable:
        if not target_goods:
            raise SolverError("a deficit group must hold at least one good")
        batch = FrozenBatch(
            buyers=frozenset(target),
            goods=frozenset(target_goods),
            prices={j: state.p[j] for j in target_goods},
            gamma={i: state.gamma[i] for i in target},
            theta={i: state.theta[i] for i in target},
        )
        state.frozen.append(batch)
        state.active_buyers -= target
        state.active_goods -= target_goods
        state.edges = {
            (i, j) for (i, j) in state.edges if i in state.active_buyers
        }
        _trace(
            state, stage=1, type="freeze", buyers=sorted(target),
            goods=sorted(target_goods),
        )
    state.stats["stage1_phases"].append(
        {"iterations": iterations, "phi_start": phi_start, "phi_end": _phi1(state),
         "reason": reason}
    )


def _phi1(state):
    return sum(
        (state.beta(i) ** 2 for i in state.active_buyers if state.beta(i) < 0),
        Fraction(0),
    )


def _restore(state):
    """Bring frozen groups back at safely scaled prices; verify the witness.

    Groups are processed newest first.  A group's buyers may value goods
    priced *after* its freeze (later groups or the final active goods) more
    than their own at the literal freeze prices; scaling the group's prices
    down restores strict preference for its own goods while scaling its
    deficits by the same factor (keeping them negative).  Buyers frozen
    later never value earlier groups' goods (those groups were declared
    precisely when remaining buyers had zero utility toward them), so one
    backward pass settles every group.
    """
    inst = state.inst
    for batch in reversed(state.frozen):
        worst = None
        for i in sorted(batch.buyers):
            cross = Fraction(0)
            for j in range(inst.g):
                if j not in batch.goods and inst.u[i][j] > 0:
                    cross = max(cross, Fraction(inst.u[i][j]) / state.p[j])
            if cross > 0:
                need = batch.gamma[i] / cross
                worst = need if worst is None or need < worst else worst
        sigma = Fraction(1) if worst is None or worst > 1 else worst / 2
        batch.sigma = sigma
        for j in batch.goods:
            state.p[j] = batch.prices[j] * sigma
    state.active_buyers = set(range(inst.n))
    state.active_goods = set(range(inst.g))
    _rebuild(state)
    for i in range(inst.n):
        if state.beta(i) >= 0:
            raise SolverError("restored prices left a nonnegative deficit")
    state.feasible_prices = tuple(state.p)
    _trace(state, stage=1, type="restore")


# ---------------------------------------------------------------------------
# Stage II (equilibrium, ascending prices)


def stage2(state: SolverState):
    """Raise prices from the feasibility witness to the equilibrium.

    Returns ``(p, x, v)`` over the preprocessed instance's indices.
    """
    inst = state.inst
    n, g = inst.n, inst.g
    guard = 0
    while True:
        _rebuild(state)
        if all(t == 0 for t in state.theta):
            break
        if any(t >= 1 for t in state.theta):
            raise SolverError("stage II requires every surplus below 1")
        guard += 1
        if guard > 16 + 4 * n * n * g * (inst.u_max.bit_length() + 8):
            raise SolverError("stage II exceeded its phase safety cap")
        _stage2_phase(state)
    x = [
        [
            state.flow.pair_flow.get((i, j), Fraction(0)) / state.p[j]
            for j in range(g)
        ]
        for i in range(n)
    ]
    v = tuple(
        sum((inst.u[i][j] * x[i][j] for j in range(g)), Fraction(0)) for i in range(n)
    )
    for i in range(n):
        if v[i] - inst.c[i] != state.gamma[i]:
            raise SolverError("terminal gains must equal the best ratio")
    _trace(state, stage=2, type="equilibrium")
    return tuple(state.p), x, v


def _stage2_sets(state, target):
    target_goods = {j for (i, j) in state.edges if i in target}
    stale = {
        (i, j) for (i, j) in state.edges if j in target_goods and i not in target
    }
    for (i, j) in stale:
        if state.flow.pair_flow.get((i, j), 0) > 0:
            raise SolverError("pruned edge still carries flow")
    state.edges -= stale
    return target_goods


def _stage2_phase(state):
    inst = state.inst
    n, g = inst.n, inst.g
    phi_start = sum((t * t for t in state.theta), Fraction(0))
    peak = max(state.theta)
    target = {i for i in range(n) if state.theta[i] == peak}
    target_goods = _stage2_sets(state, target)
    iterations = 0

    while True:
        iterations += 1
        if iterations > 4 * g + 4:
            raise SolverError("stage II phase exceeded its iteration budget")
        stretch = min(Fraction(-1) / state.beta(i) for i in target)
        if stretch <= 1:
            raise SolverError("stage II stretch factor must exceed 1")
        x_edge = None
        for i in sorted(target):
            for j in range(g):
                if j not in target_goods and inst.u[i][j] > 0:
                    cand = state.gamma[i] * state.p[j] / inst.u[i][j]
                    if cand <= 1:
                        raise SolverError("an outside ratio already ties the block")
                    if x_edge is None or cand < x_edge:
                        x_edge = cand

        if x_edge is None or stretch <= x_edge:
            tight_buyers = {i for i in target if Fraction(-1) / state.beta(i) == stretch}
            tight_goods = {
                j
                for j in target_goods
                if any(
                    state.flow.pair_flow.get((i, j), 0) > 0 for i in tight_buyers
                )
            }
            net = MarketNetwork(
                tuple(state.p), state.money, frozenset(state.edges)
            )
            net2, flow2, theta2 = scale_flow(
                net, state.flow, stretch, buyers=target, goods=target_goods
            )
            state.p = list(net2.p)
            for i in target:
                state.alpha[i] *= stretch
                state.gamma[i] /= stretch
            state.flow = flow2
            for i in range(n):
                state.theta[i] = theta2[i]
            for i in tight_buyers:
                if state.theta[i] != 0:
                    raise SolverError("tight buyers must end with zero surplus")
            denom = max(state.p[j].denominator for j in tight_goods) if tight_goods else 1
            state.stats["tight_denominators"].append(denom)
            _trace(
                state, stage=2, type="tight", x=stretch,
                tight_goods=sorted(tight_goods), tight_buyers=sorted(tight_buyers),
                iteration=iterations,
            )
            break

        for j in target_goods:
            state.p[j] *= x_edge
        for i in target:
            state.alpha[i] *= x_edge
            state.gamma[i] /= x_edge
        attaining = [
            (i, j)
            for i in sorted(target)
            for j in range(g)
            if j not in target_goods
            and inst.u[i][j] > 0
            and state.gamma[i] * state.p[j] == inst.u[i][j]
        ]
        state.edges |= set(attaining)
        _rebalance(state)
        target |= state.flow.residual_reach(target, reverse=True)
        target_goods = _stage2_sets(state, target)
        _trace(
            state, stage=2, type="edge", x=x_edge, pairs=sorted(attaining),
            iteration=iterations,
        )

    phi_end = sum((t * t for t in state.theta), Fraction(0))
    state.stats["stage2_phases"].append(
        {"iterations": iterations, "phi_start": phi_start, "phi_end": phi_end}
    )


# ---------------------------------------------------------------------------
# Certificates of infeasibility (constructed from the terminal stage-I state)


def _lp_dual_certificate(state):
    """Dual prices proving no allocation clears every disagreement payoff.

    At the terminal state the active buyers' deficits sum to a nonnegative
    value; normalizing their inverse ratios gives dual weights ``y`` with
    unit sum, and the active prices scale into ``z``.  Frozen buyers and
    goods get zero weight: active buyers have zero utility toward frozen
    goods, so the dual constraints hold with ``z = 0`` there.
    """
    active = sorted(state.active_buyers)
    mu_hat = sum((1 / state.gamma[i] for i in active), Fraction(0))
    y = [Fraction(0)] * state.inst.n
    for i in active:
        y[i] = 1 / (mu_hat * state.gamma[i])
    z = [Fraction(0)] * state.inst.g
    for j in state.active_goods:
        z[j] = state.p[j] / mu_hat
    return {"y": y, "z": z}


def _convex_dual_certificate(state):
    """Partition + prices witnessing unboundedness of the smooth dual.

    The frozen buyers/goods form the split side.  Frozen groups' prices are
    scaled with the same backward pass as the feasible-branch restore so that
    every frozen buyer's best ratio stays inside its own group; the active
    side keeps its terminal prices, where the deficits sum to a nonnegative
    value.
    """
    inst = state.inst
    p = list(state.p)
    split_buyers = set()
    split_goods = set()
    for batch in reversed(state.frozen):
        worst = None
        for i in sorted(batch.buyers):
            cross = Fraction(0)
            for j in range(inst.g):
                if j not in batch.goods and inst.u[i][j] > 0:
                    cross = max(cross, Fraction(inst.u[i][j]) / p[j])
            if cross > 0:
                need = batch.gamma[i] / cross
                worst = need if worst is None or need < worst else worst
        sigma = Fraction(1) if worst is None or worst > 1 else worst / 2
        for j in batch.goods:
            p[j] = batch.prices[j] * sigma
        split_buyers |= batch.buyers
        split_goods |= batch.goods
    return {"buyers": sorted(split_buyers), "goods": sorted(split_goods), "p": p}


# ---------------------------------------------------------------------------
# Top-level solve


@dataclass
class Solution:
    verdict: str
    p: tuple | None = None
    x: list | None = None
    v: tuple | None = None
    feasible_prices: tuple | None = None
    certificate: dict | None = None
    stats: dict = field(default_factory=dict)
    report: object = None
    trace: list = field(default_factory=list)


def _expand_goods(values, kept, g, fill):
    out = [fill] * g
    for pos, j in enumerate(kept):
        out[j] = values[pos]
    return out


def solve(inst: BargainingInstance, collect_trace: bool = False) -> Solution:
    """Decide the game and compute the exact solution or certificates.

    Feasible: returns equilibrium prices, allocation, utilities, and the
    feasibility witness prices.  Infeasible: returns two independently
    checkable certificates.  Every output is re-verified before return.
    """
    flows0 = maxflow_call_count()
    reduced, report = preprocess(inst)
    zero = Fraction(0)

    if report.verdict == "infeasible":
        i0 = report.zero_buyers[0]
        cert = {
            "lp_dual": lp_dual_for_zero_row(inst, i0),
            "convex_dual": {"zero_row": i0},
        }
        sol = Solution(
            verdict="infeasible", certificate=cert, report=report,
            stats={"phases": 0, "iterations": 0, "maxflows": 0},
        )
        _verify_infeasible(inst, sol)
        return sol

    state = initialize(reduced)
    verdict = stage1(state)
    kept = report.kept_goods

    stats = state.stats
    stage1_iters = sum(ph["iterations"] for ph in stats["stage1_phases"])
    budget = maxflow_budget(
        reduced.n, reduced.g, reduced.u_max, reduced.c_max, state.mu
    )

    if verdict == "infeasible":
        lp = _lp_dual_certificate(state)
        cx = _convex_dual_certificate(state)
        cert = {
            "lp_dual": {"y": lp["y"], "z": _expand_goods(lp["z"], kept, inst.g, zero)},
            "convex_dual": {
                "buyers": cx["buyers"],
                "goods": sorted(
                    {kept[j] for j in cx["goods"]}
                    | set(report.removed_goods)
                ),
                "p": _expand_goods(cx["p"], kept, inst.g, Fraction(1)),
                "zero_row": None,
            },
        }
        sol = Solution(
            verdict="infeasible", certificate=cert, report=report,
            stats=_final_stats(stats, stage1_iters, 0, flows0),
            trace=state.trace if collect_trace else [],
        )
        sol.stats["mu"] = state.mu
        sol.stats["budget"] = budget
        _verify_infeasible(inst, sol)
        return sol

    p_red, x_red, v = stage2(state)
    stage2_iters = sum(ph["iterations"] for ph in stats["stage2_phases"])
    p = tuple(_expand_goods(list(p_red), kept, inst.g, zero))
    x = [_expand_goods(row, kept, inst.g, zero) for row in x_red]
    witness = tuple(_expand_goods(list(state.feasible_prices), kept, inst.g, zero))

    ok, why = check_kkt(inst, p, x)
    if not ok:
        raise SolverError(f"computed equilibrium failed verification: {why}")
    eq, _ = check_equilibrium(reduced, p_red)
    if not eq:
        raise SolverError("terminal prices failed the one-flow equilibrium test")

    sol = Solution(
        verdict="feasible", p=p, x=x, v=v, feasible_prices=witness,
        report=report,
        stats=_final_stats(stats, stage1_iters, stage2_iters, flows0),
        trace=state.trace if collect_trace else [],
    )
    sol.stats["mu"] = state.mu
    sol.stats["budget"] = budget
    return sol


def _final_stats(stats, it1, it2, flows0):
    out = {
        "phases": len(stats["stage1_phases"]) + len(stats["stage2_phases"]),
        "iterations": it1 + it2,
        "maxflows": maxflow_call_count() - flows0,
        "detail": stats,
    }
    return out


def _verify_infeasible(inst, sol: Solution):
    cert = sol.certificate
    if not verify_lp_dual(inst, cert["lp_dual"]["y"], cert["lp_dual"]["z"]):
        raise SolverError("emitted dual certificate failed verification")
    cx = cert["convex_dual"]
    if cx.get("zero_row") is not None:
        ok = verify_convex_dual(inst, zero_row=cx["zero_row"])
    else:
        ok = verify_convex_dual(
            inst, buyers=cx["buyers"], goods=cx["goods"], p=cx["p"]
        )
    if not ok:
        raise SolverError("emitted partition certificate failed verification")


def solution_to_json(sol: Solution) -> dict:
    """Canonical JSON form of a solution (rationals as "num/den" strings)."""
    from .instance import format_rational as fr

    def seq(values):
        return None if values is None else [fr(v) for v in values]

    cert = None
    if sol.certificate is not None:
        cert = {}
        if "lp_dual" in sol.certificate:
            lp = sol.certificate["lp_dual"]
            cert["lp_dual"] = {"y": seq(lp["y"]), "z": seq(lp["z"])}
        if "convex_dual" in sol.certificate:
            cx = sol.certificate["convex_dual"]
            if cx.get("zero_row") is not None:
                cert["convex_dual"] = {"zero_row": cx["zero_row"]}
            else:
                cert["convex_dual"] = {
                    "buyers": list(cx["buyers"]),
                    "goods": list(cx["goods"]),
                    "p": seq(cx["p"]),
                    "zero_row": None,
                }
    return {
        "verdict": sol.verdict,
        "p": seq(sol.p),
        "x": None if sol.x is None else [seq(row) for row in sol.x],
        "v": seq(sol.v),
        "certificate": cert,
        "feasible_prices": seq(sol.feasible_prices),
        "stats": {
            "phases": sol.stats.get("phases", 0),
            "iterations": sol.stats.get("iterations", 0),
            "maxflows": sol.stats.get("maxflows", 0),
        },
    }


# ---------------------------------------------------------------------------
# Relaxed optimality report for mid-run states


def relaxed_kkt_gap(state: SolverState):
    """Per-buyer report of the relaxed optimality conditions mid-run.

    While deficits are negative, the state encodes a solution of a relaxed
    system: buyer ``i``'s implied utility is ``v_i = gamma_i * (money
    received)`` and the price bound holds with ``p_j / (-beta_i)`` in place
    of ``p_j``, with equality on every edge carrying flow.  The deficit
    ``-beta_i`` rises toward 1 as the run approaches the equilibrium.  For
    buyers with nonnegative deficit the relaxation is meaningless and the
    entry is flagged.
    """
    inst = state.inst
    out = []
    for i in sorted(state.active_buyers):
        beta = state.beta(i)
        if beta >= 0:
            out.append({"buyer": i, "beta": beta, "meaningless": True})
            continue
        received = state.flow.buyer_flow[i]
        v = state.gamma[i] * received
        gain = v - inst.c[i]
        worst = None
        tight = True
        for j in sorted(state.active_goods):
            if inst.u[i][j] == 0:
                continue
            lhs = state.p[j] / (-beta)
            rhs = Fraction(inst.u[i][j]) / gain if gain > 0 else None
            if rhs is None:
                continue
            slack = lhs - rhs
            if slack < 0:
                tight = False
            worst = slack if worst is None or slack < worst else worst
        out.append(
            {
                "buyer": i, "beta": beta, "v": v, "gain": gain,
                "worst_slack": worst, "holds": tight and gain > 0,
                "meaningless": False,
            }
        )
    return out
