"""Independent checkers for solutions, witnesses, and certificates.

Everything here re-derives its verdict from the instance and the claimed
object alone — none of it trusts solver state.  The solver calls these
before returning, and the command-line ``check`` verb exposes them to
validate solution files produced elsewhere.
"""

from __future__ import annotations

from fractions import Fraction

from .balanced import balanced_flow
from .flownet import MarketNetwork, bang_per_buck, build_network, max_flow
from .instance import BargainingInstance


def check_equilibrium(inst: BargainingInstance, p):
    """One max-flow equilibrium test for positive prices.

    ``p`` is an equilibrium of the flexible-budget market iff the best-ratio
    network routes the full price mass: every good sells out and every
    budget ``1 + c_i/gamma_i`` is spent.  Returns ``(True, allocation)`` with
    ``x[i][j] = flow(j, i) / p_j`` on success, ``(False, reason)`` otherwise.
    """
    p = [Fraction(v) for v in p]
    if len(p) != inst.g:
        return False, "price vector has the wrong length"
    if any(v <= 0 for v in p):
        return False, "prices must be positive"
    try:
        net = build_network(inst, p)
    except ValueError as exc:
        return False, str(exc)
    flow = max_flow(net)
    supply = sum(p, Fraction(0))
    budgets = sum(net.m, Fraction(0))
    if flow.value != supply:
        return False, "some good cannot sell at these prices"
    if flow.value != budgets:
        return False, "some budget cannot be spent at these prices"
    x = [
        [flow.pair_flow.get((i, j), Fraction(0)) / p[j] for j in range(inst.g)]
        for i in range(inst.n)
    ]
    return True, x


def check_kkt(inst: BargainingInstance, p, x) -> tuple[bool, str]:
    """Exact optimality check for a claimed price/allocation pair.

    Verifies feasibility of the allocation, market clearing for positively
    priced goods, and the stationarity inequalities
    ``p_j (v_i - c_i) >= u_ij`` with equality wherever ``x_ij > 0``.
    Sufficient for global optimality (the objective is concave), so a pass
    proves both feasibility of the game and optimality of ``x``.
    """
    p = [Fraction(v) for v in p]
    if len(p) != inst.g or len(x) != inst.n:
        return False, "shape mismatch"
    if any(len(row) != inst.g for row in x):
        return False, "shape mismatch"
    x = [[Fraction(v) for v in row] for row in x]
    if any(v < 0 for row in x for v in row):
        return False, "negative allocation"
    if any(v < 0 for v in p):
        return False, "negative price"
    for j in range(inst.g):
        sold = sum((x[i][j] for i in range(inst.n)), Fraction(0))
        if sold > 1:
            return False, f"good {j} oversold"
        if p[j] > 0 and sold != 1:
            return False, f"good {j} priced but not sold out"
    v = [
        sum((inst.u[i][j] * x[i][j] for j in range(inst.g)), Fraction(0))
        for i in range(inst.n)
    ]
    for i in range(inst.n):
        gain = v[i] - inst.c[i]
        if gain <= 0:
            return False, f"buyer {i} does not improve on the disagreement payoff"
        for j in range(inst.g):
            lhs = p[j] * gain
            if lhs < inst.u[i][j]:
                return False, f"stationarity violated at ({i},{j})"
            if x[i][j] > 0 and lhs != inst.u[i][j]:
                return False, f"allocation ({i},{j}) is not on a tight pair"
    return True, "ok"


def check_feasibility_witness(inst: BargainingInstance, p) -> tuple[bool, str]:
    """Check a claimed feasibility witness price vector.

    A witness has ``p_j = 0`` exactly on valueless goods (all-zero utility
    columns), positive prices elsewhere, every positively priced good able
    to sell out, and every buyer's balanced-flow surplus strictly below 1.
    Such prices prove the game feasible without exhibiting an allocation.
    """
    p = [Fraction(v) for v in p]
    if len(p) != inst.g:
        return False, "price vector has the wrong length"
    keep = []
    for j in range(inst.g):
        valueless = all(inst.u[i][j] == 0 for i in range(inst.n))
        if valueless:
            if p[j] != 0:
                return False, f"valueless good {j} must be priced 0"
        else:
            if p[j] <= 0:
                return False, f"good {j} must be priced positively"
            keep.append(j)
    if any(all(v == 0 for v in row) for row in inst.u):
        return False, "a buyer with no valued good can never improve"
    u = [[row[j] for j in keep] for row in inst.u]
    pk = [p[j] for j in keep]
    gamma, edges = bang_per_buck(u, pk)
    m = tuple(1 + inst.c[i] / gamma[i] for i in range(inst.n))
    net = MarketNetwork(tuple(pk), m, frozenset(edges), gamma=tuple(gamma))
    flow = max_flow(net)
    if flow.value != sum(pk, Fraction(0)):
        return False, "some good cannot sell at these prices"
    _, theta = balanced_flow(net)
    if any(theta[i] >= 1 for i in range(inst.n)):
        return False, "a buyer's surplus reaches its full unit of money"
    return True, "ok"


def verify_lp_dual(inst: BargainingInstance, y, z) -> bool:
    """Check a dual certificate of infeasibility.

    The game is feasible iff some allocation gives every buyer a strictly
    positive gain, i.e. the optimum ``t*`` of "maximize t with gains at
    least t" is positive.  Any ``y, z >= 0`` with ``sum(y) = 1``,
    ``u_ij y_i <= z_j``, and ``sum(c_i y_i) >= sum(z_j)`` bounds ``t*`` by
    ``sum(z) - sum(c y) <= 0`` (weak duality), proving infeasibility.
    """
    y = [Fraction(v) for v in y]
    z = [Fraction(v) for v in z]
    if len(y) != inst.n or len(z) != inst.g:
        return False
    if any(v < 0 for v in y) or any(v < 0 for v in z):
        return False
    if sum(y, Fraction(0)) != 1:
        return False
    for i in range(inst.n):
        for j in range(inst.g):
            if inst.u[i][j] * y[i] > z[j]:
                return False
    gap = sum((inst.c[i] * y[i] for i in range(inst.n)), Fraction(0)) - sum(
        z, Fraction(0)
    )
    return gap >= 0


def verify_convex_dual(
    inst: BargainingInstance, buyers=None, goods=None, p=None, zero_row=None
) -> bool:
    """Check a partition certificate of infeasibility.

    Two forms.  ``zero_row=i`` claims buyer ``i`` values nothing at all —
    immediately unbeatable.  Otherwise ``(buyers, goods, p)`` claims the
    market at positive prices ``p`` splits into a self-contained part and a
    remainder that cannot spend enough:

    1. every buyer outside the split has zero utility on split goods,
    2. every split buyer's best ratio is attained only on split goods,
    3. every non-split good sells out under ``p``, and the balanced-flow
       surpluses of the non-split buyers sum to at least their count,
    4. at least one buyer lies outside the split.

    Under (1)-(4) any allocation with all-positive gains would force the
    non-split buyers' money, ``sum(c_i / gamma_i)`` plus their unit budgets,
    to exceed the non-split price mass — contradicting (3).  Formally the
    conditions exhibit a ray on which the smooth dual of the underlying
    convex program diverges to minus infinity.
    """
    if zero_row is not None:
        if not 0 <= zero_row < inst.n:
            return False
        return all(v == 0 for v in inst.u[zero_row])
    if buyers is None or goods is None or p is None:
        return False
    split_b = set(buyers)
    split_g = set(goods)
    p = [Fraction(v) for v in p]
    if len(p) != inst.g or any(v <= 0 for v in p):
        return False
    if not (split_b <= set(range(inst.n)) and split_g <= set(range(inst.g))):
        return False
    rest_b = [i for i in range(inst.n) if i not in split_b]
    if not rest_b:
        return False
    for i in rest_b:
        for j in split_g:
            if inst.u[i][j] != 0:
                return False
    for i in split_b:
        inside = max(
            (Fraction(inst.u[i][j]) / p[j] for j in split_g if inst.u[i][j] > 0),
            default=Fraction(0),
        )
        if inside <= 0:
            return False
        for j in range(inst.g):
            if j not in split_g and inst.u[i][j] > 0:
                if Fraction(inst.u[i][j]) / p[j] >= inside:
                    return False
    try:
        net = build_network(inst, p)
    except ValueError:
        return False
    flow = max_flow(net)
    for j in range(inst.g):
        if j not in split_g and flow.good_flow[j] != p[j]:
            return False
    _, theta = balanced_flow(net)
    rest_sum = sum((theta[i] - 1 for i in rest_b), Fraction(0))
    return rest_sum >= 0


def lp_dual_for_zero_row(inst: BargainingInstance, i) -> dict:
    """Dual certificate concentrated on a buyer who values nothing."""
    if not all(v == 0 for v in inst.u[i]):
        raise ValueError(f"buyer {i} has a positive utility entry")
    y = [Fraction(0)] * inst.n
    y[i] = Fraction(1)
    return {"y": y, "z": [Fraction(0)] * inst.g}


def recover_prices_from_support(inst: BargainingInstance, support) -> list:
    """Recover the unique candidate equilibrium prices from a support.

    ``support`` is the set of pairs ``(i, j)`` claimed to carry allocation.
    Within each connected component of the support graph all prices are a
    single unknown scale times fixed ratios (tight pairs share each buyer's
    best ratio), and the component's money-equals-price-mass equation is
    linear in that scale.  Raises ``ValueError`` if the support is
    structurally inconsistent or forces a nonpositive price.
    """
    support = {(int(i), int(j)) for (i, j) in support}
    for (i, j) in support:
        if not (0 <= i < inst.n and 0 <= j < inst.g):
            raise ValueError(f"support pair ({i},{j}) out of range")
        if inst.u[i][j] == 0:
            raise ValueError(f"support pair ({i},{j}) has zero utility")
    touched_goods = {j for (_, j) in support}
    touched_buyers = {i for (i, _) in support}
    p = [None] * inst.g

    seen_g: set = set()
    for root in sorted(touched_goods):
        if root in seen_g:
            continue
        ratio = {root: Fraction(1)}
        comp_buyers: dict = {}
        frontier = [("g", root)]
        while frontier:
            kind, node = frontier.pop()
            if kind == "g":
                for (i, j) in support:
                    if j != node:
                        continue
                    r = ratio[node] / inst.u[i][j]
                    if i in comp_buyers:
                        if comp_buyers[i] != r:
                            raise ValueError(
                                "support forces two ratios on one buyer"
                            )
                    else:
                        comp_buyers[i] = r
                        frontier.append(("b", i))
            else:
                for (i, j) in support:
                    if i != node:
                        continue
                    r = comp_buyers[i] * inst.u[i][j]
                    if j in ratio:
                        if ratio[j] != r:
                            raise ValueError(
                                "support forces two prices on one good"
                            )
                    else:
                        ratio[j] = r
                        frontier.append(("g", j))
        seen_g |= set(ratio)
        mass = sum(ratio.values(), Fraction(0))
        spend = sum((inst.c[i] * r for i, r in comp_buyers.items()), Fraction(0))
        if mass <= spend:
            raise ValueError("support admits no positive price scale")
        tau = Fraction(len(comp_buyers)) / (mass - spend)
        for j, r in ratio.items():
            p[j] = r * tau

    for j in range(inst.g):
        if p[j] is None:
            if any(inst.u[i][j] > 0 for i in range(inst.n)):
                raise ValueError(f"good {j} is valued but unsupported")
            p[j] = Fraction(0)
    if touched_buyers != {i for i in range(inst.n) if any(v > 0 for v in inst.u[i])}:
        raise ValueError("every buyer with a valued good needs a support pair")
    return p
