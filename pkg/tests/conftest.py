"""Shared test helpers: fixed games, a reference surplus oracle, generators.

The reference computations here are deliberately independent of the package's
own algorithms.  ``reference_surpluses`` finds the l2-minimal surplus vector
of a market network by exhaustive subset enumeration over buyers, so when the
flow-based computation in :mod:`nashflow.balanced` agrees with it the
agreement is evidence, not circularity.  Everything is exact rationals.
"""

from __future__ import annotations

import random
from fractions import Fraction

from nashflow import MarketNetwork, make_instance

# ---------------------------------------------------------------------------
# Small fixed games pinned across the suite.


def unit_game():
    """One buyer, one good, zero disagreement payoff: p=1, v=1."""
    return make_instance([[1]], [0])


def scalar_feasible():
    """One buyer valuing one good at 2 against disagreement payoff 1 (p*=2)."""
    return make_instance([[2]], [1])


def scalar_infeasible():
    """One buyer capped at v=1=c: no outcome strictly beats disagreement."""
    return make_instance([[1]], [1])


def symmetric_pair():
    """Two buyers, two goods, symmetric preferences, zero disagreement."""
    return make_instance([[2, 1], [1, 2]], [0, 0])


def split_infeasible():
    """Two disconnected single-buyer markets; buyer 0 needs v > 2 but tops at 1."""
    return make_instance([[1, 0], [0, 1]], [2, 0])


# ---------------------------------------------------------------------------
# Reference surplus oracle (exponential, for small networks only).


def reference_surpluses(net: MarketNetwork) -> tuple:
    """l2-minimal surplus vector of a market network, by subset enumeration.

    The most money a buyer set ``S`` can jointly spend is
    ``rho(S) = min over T ⊆ S of p(goods adjacent to T) + m(S − T)``
    (a min cut restricted to ``S``); the common leftover
    ``(m(S) − rho(S)) / |S|`` is maximized exactly by the buyers sharing the
    largest surplus, and the union of all maximizing sets is that whole
    block.  Peeling blocks in decreasing surplus order yields the unique
    balanced surplus vector.
    """
    n = net.n
    goods_of = [frozenset(j for (i, j) in net.edges if i == b) for b in range(n)]

    def spendable(buyers):
        members = sorted(buyers)
        best = None
        for bits in range(1 << len(members)):
            chosen = [members[k] for k in range(len(members)) if bits >> k & 1]
            reach = frozenset().union(*(goods_of[i] for i in chosen)) if chosen else frozenset()
            val = sum((net.p[j] for j in reach), Fraction(0)) + sum(
                (net.m[i] for i in members if i not in chosen), Fraction(0)
            )
            if best is None or val < best:
                best = val
        return best

    theta = [None] * n
    settled = frozenset()
    settled_spend = Fraction(0)
    remaining = set(range(n))
    while remaining:
        rem = sorted(remaining)
        best_val, best_set = None, None
        for bits in range(1, 1 << len(rem)):
            group = frozenset(rem[k] for k in range(len(rem)) if bits >> k & 1)
            leftover = (
                sum((net.m[i] for i in group), Fraction(0))
                - (spendable(group | settled) - settled_spend)
            ) / len(group)
            if best_val is None or leftover > best_val:
                best_val, best_set = leftover, group
            elif leftover == best_val:
                best_set = best_set | group
        for i in best_set:
            theta[i] = best_val
        settled |= best_set
        settled_spend = spendable(settled)
        remaining -= best_set
    return tuple(theta)


# ---------------------------------------------------------------------------
# Random generators (callers seed their own ``random.Random``).


def random_network(rng: random.Random, max_buyers: int = 4, max_goods: int = 4) -> MarketNetwork:
    """Random small market network: positive prices, buyers may be isolated."""
    n = rng.randint(1, max_buyers)
    g = rng.randint(1, max_goods)
    p = tuple(Fraction(rng.randint(1, 8), rng.randint(1, 4)) for _ in range(g))
    m = tuple(Fraction(rng.randint(0, 8), rng.randint(1, 4)) for _ in range(n))
    edges = frozenset((i, j) for i in range(n) for j in range(g) if rng.random() < 0.55)
    return MarketNetwork(p, m, edges)


def exhaustive_small_instances():
    """Every game with n,g ≤ 2, u entries in 0..3, c_i in {0, 1/2, 1, 2}.

    Matrices with an all-zero row or column are skipped (they are either
    rejected at validation or settled by preprocessing, covered elsewhere).
    """
    c_choices = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2))
    for n, g in ((1, 1), (1, 2), (2, 1), (2, 2)):
        for bits in range(4 ** (n * g)):
            flat, v = [], bits
            for _ in range(n * g):
                flat.append(v % 4)
                v //= 4
            rows = [flat[i * g:(i + 1) * g] for i in range(n)]
            if any(not any(row) for row in rows):
                continue
            if any(not any(rows[i][j] for i in range(n)) for j in range(g)):
                continue
            for cbits in range(4 ** n):
                payoff, w = [], cbits
                for _ in range(n):
                    payoff.append(c_choices[w % 4])
                    w //= 4
                yield make_instance(rows, payoff)
