"""Fixed-budget market equilibria and the one-phase norm instrumentation."""

import random
from fractions import Fraction

from nashflow import (
    check_kkt,
    fisher_equilibrium,
    gen_random,
    make_instance,
    measure_l1_vs_l2,
    solve,
)
from conftest import symmetric_pair


# ---------------------------------------------------------------------------
# Pinned equilibria


def test_single_buyer_single_good():
    p, x, trace = fisher_equilibrium(((1,),), (Fraction(1),))
    assert tuple(p) == (Fraction(1),)
    assert x == [[Fraction(1)]]
    assert trace == []


def test_two_buyers_split_one_good():
    p, x, _ = fisher_equilibrium(((1,), (1,)), (Fraction(1), Fraction(1)))
    assert tuple(p) == (Fraction(2),)
    assert x == [[Fraction(1, 2)], [Fraction(1, 2)]]


def test_symmetric_pair_settles_on_own_goods():
    p, x, _ = fisher_equilibrium(symmetric_pair().u, (Fraction(1), Fraction(1)))
    assert tuple(p) == (Fraction(1), Fraction(1))
    assert x == [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]


def test_equilibria_spend_every_budget_and_sell_every_good():
    rng = random.Random(5)
    for _ in range(40):
        n, g = rng.randint(1, 4), rng.randint(1, 4)
        inst = gen_random(n, g, 5, 0, rng.randint(0, 10**6))
        money = tuple(Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(n))
        p, x, _ = fisher_equilibrium(inst.u, money)
        assert sum(p) == sum(money)
        for j in range(g):
            assert sum(x[i][j] for i in range(n)) == Fraction(1)
        for i in range(n):
            assert sum(x[i][j] * p[j] for j in range(g)) == money[i]
        # Buyers only receive goods of maximal utility per unit of money.
        for i in range(n):
            best = max(Fraction(inst.u[i][j], 1) / p[j] for j in range(g) if p[j] > 0)
            for j in range(g):
                if x[i][j] > 0:
                    assert Fraction(inst.u[i][j], 1) / p[j] == best


def test_prices_never_decrease_during_a_run():
    rng = random.Random(13)
    for _ in range(15):
        inst = gen_random(3, 3, 5, 0, rng.randint(0, 10**6))
        money = tuple(Fraction(rng.randint(1, 4)) for _ in range(3))
        _, _, trace = fisher_equilibrium(inst.u, money, collect_trace=True)
        states = [e for e in trace if e["kind"] == "state"]
        for before, after in zip(states, states[1:]):
            assert all(a >= b for a, b in zip(after["p"], before["p"]))


def test_unit_money_equilibrium_matches_zero_disagreement_solve():
    inst = make_instance([[3, 1, 2], [1, 4, 1], [2, 2, 5]], [0, 0, 0])
    p, x, _ = fisher_equilibrium(inst.u, (Fraction(1),) * 3)
    sol = solve(inst)
    assert sol.verdict == "feasible"
    assert list(sol.p) == list(p)
    ok, why = check_kkt(inst, list(p), x)
    assert ok, why


# ---------------------------------------------------------------------------
# One-phase norm instrumentation on the surplus-ladder family


def test_ladder_phase_event_schedule_smallest_family():
    report = measure_l1_vs_l2(2, Fraction(1), Fraction(2))
    events = report["events"]
    assert [(e["type"], e["iteration"]) for e in events] == [
        ("edge", 1),
        ("edge", 2),
        ("tight", 3),
    ]
    # Each edge event hands the active block the next rung of the ladder.
    assert events[0]["pairs"] == [(0, 1)]
    assert events[0]["x"] == Fraction(3841, 3840)
    assert events[1]["pairs"] == [(1, 2)]
    assert events[1]["x"] == Fraction(3842, 3841)
    # The phase ends when the heavy last good goes tight.
    assert events[2]["tight_goods"] == [2]
    assert events[2]["tight_buyers"] == [1, 2]
    assert events[2]["x"] == Fraction(11521, 9600)


def test_ladder_phase_event_schedule_scales_with_n():
    report = measure_l1_vs_l2(4)
    events = report["events"]
    assert [e["type"] for e in events] == ["edge"] * 4 + ["tight"]
    assert [e["pairs"] for e in events[:-1]] == [[(k - 1, k)] for k in range(1, 5)]
    assert events[-1]["tight_goods"] == [4]
    assert events[-1]["tight_buyers"] == [3, 4]


def test_ladder_phase_l1_barely_moves_before_the_tight_event():
    report = measure_l1_vs_l2(2, Fraction(1), Fraction(2))
    assert report["l1_start"] == Fraction(3841, 3840)
    pre_tight_drop = report["l1_start"] - report["l1_after_edges"]
    assert pre_tight_drop == Fraction(4801, 7374720)
    assert pre_tight_drop <= Fraction(1, 2)  # delta/2


def test_ladder_phase_whole_phase_norms_pinned():
    report = measure_l1_vs_l2(2, Fraction(1), Fraction(2))
    assert report["l1_drop"] == Fraction(56722660801, 70797312000)
    assert report["l2_drop_factor"] == Fraction(
        198615129347557824001, 5012259726340938240000
    )


def test_ladder_phase_l1_progress_is_inverse_exponential():
    for n in (6, 8):
        report = measure_l1_vs_l2(n)
        assert report["l1_drop"] <= Fraction(1, 2 ** (n - 2))
        buyers = n + 1
        assert report["l2_drop_factor"] <= 1 - Fraction(1, buyers**2)
