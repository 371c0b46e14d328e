"""Independent reference solvers for cross-checking the main algorithm.

Everything here is deliberately naive: support enumeration with exact
linear algebra, a plain LP for the feasibility margin, and a fixpoint
iteration of fixed-budget equilibria.  None of it shares code paths with
the two-stage solver beyond instance handling, which is what makes the
agreement tests meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .fisher import fisher_equilibrium
from .flownet import bang_per_buck
from .instance import BargainingInstance, preprocess
from . import simplex


class OracleCapError(ValueError):
    """The instance exceeds the enumeration cap for the reference solver."""


@dataclass
class OracleResult:
    verdict: str
    p: list | None = None
    x: list | None = None
    v: list | None = None


def _solve_linear(rows, ncols, free_default):
    """Exact Gaussian elimination; ``rows`` are coefficient lists + rhs.

    Returns the solution list or ``None`` when inconsistent.  Columns never
    pivoted (underdetermined systems) take ``free_default[col]``.
    """
    rows = [list(r) for r in rows]
    pivot_of = {}
    rank_rows = []
    for col in range(ncols):
        pivot_row = None
        for r, row in enumerate(rows):
            if r not in {rr for rr, _ in rank_rows} and row[col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        piv = rows[pivot_row][col]
        rows[pivot_row] = [v / piv for v in rows[pivot_row]]
        for r, row in enumerate(rows):
            if r != pivot_row and row[col] != 0:
                factor = row[col]
                rows[r] = [a - factor * b for a, b in zip(row, rows[pivot_row])]
        rank_rows.append((pivot_row, col))
        pivot_of[col] = pivot_row
    for r, row in enumerate(rows):
        if r not in {rr for rr, _ in rank_rows} and row[-1] != 0:
            return None
    solution = list(free_default)
    for col in sorted(pivot_of, reverse=True):
        row = rows[pivot_of[col]]
        acc = row[-1]
        for other in range(col + 1, ncols):
            if row[other] != 0:
                acc -= row[other] * solution[other]
        solution[col] = acc
    return solution


def oracle_solve(inst: BargainingInstance, max_pairs: int = 12) -> OracleResult:
    """Solve the game by exhaustive support enumeration.

    Tries every subset of the positive-utility pairs (smallest first) as
    the support of an optimal allocation, solves the implied exact linear
    system (each good fully sold; each supporting pair priced so the
    buyer's gain equals utility divided by price), and accepts the first
    candidate satisfying nonnegativity and the stationarity inequalities.
    Optimal allocations always exist on supports of this kind, so finding
    none proves infeasibility.

    The number of positive pairs is capped (default 12) because the search
    is exponential; raise ``max_pairs`` explicitly for bigger instances.
    """
    reduced, report = preprocess(inst)
    if report.verdict == "infeasible":
        return OracleResult(verdict="infeasible")
    n, g = reduced.n, reduced.g
    pairs = [
        (i, j) for i in range(n) for j in range(g) if reduced.u[i][j] > 0
    ]
    if len(pairs) > max_pairs:
        raise OracleCapError(
            f"{len(pairs)} positive pairs exceed the enumeration cap {max_pairs}"
        )

    for size in range(max(n, g), len(pairs) + 1):
        for support in combinations(pairs, size):
            buyers = {i for (i, _) in support}
            goods = {j for (_, j) in support}
            if len(buyers) < n or len(goods) < g:
                continue
            result = _try_support(reduced, support)
            if result is not None:
                q, x = result
                p_red = [1 / q[j] for j in range(g)]
                x_full = [
                    _expand(row, report.kept_goods, inst.g) for row in x
                ]
                p_full = _expand(p_red, report.kept_goods, inst.g)
                v = [
                    sum(
                        (inst.u[i][j] * x_full[i][j] for j in range(inst.g)),
                        Fraction(0),
                    )
                    for i in range(n)
                ]
                return OracleResult(verdict="feasible", p=p_full, x=x_full, v=v)
    return OracleResult(verdict="infeasible")


def _expand(values, kept, g):
    out = [Fraction(0)] * g
    for pos, j in enumerate(kept):
        out[j] = values[pos]
    return out


def _try_support(inst, support):
    """Solve and check one candidate support; ``None`` if it fails."""
    n, g = inst.n, inst.g
    nx = len(support)
    ncols = nx + g
    col_of = {pair: k for k, pair in enumerate(support)}
    rows = []
    for j in range(g):
        row = [Fraction(0)] * (ncols + 1)
        for (i, jj), k in col_of.items():
            if jj == j:
                row[k] = Fraction(1)
        row[-1] = Fraction(1)
        rows.append(row)
    for (i, j), k in col_of.items():
        row = [Fraction(0)] * (ncols + 1)
        for (ii, jj), kk in col_of.items():
            if ii == i:
                row[kk] = Fraction(inst.u[ii][jj])
        row[nx + j] = Fraction(-inst.u[i][j])
        row[-1] = inst.c[i]
        rows.append(row)
    free = [Fraction(0)] * nx + [Fraction(1)] * g
    sol = _solve_linear(rows, ncols, free)
    if sol is None:
        return None
    xs = sol[:nx]
    q = sol[nx:]
    if any(v < 0 for v in xs) or any(v <= 0 for v in q):
        return None
    x = [[Fraction(0)] * g for _ in range(n)]
    for (i, j), k in col_of.items():
        x[i][j] = xs[k]
    v = [
        sum((inst.u[i][j] * x[i][j] for j in range(g)), Fraction(0))
        for i in range(n)
    ]
    for i in range(n):
        gain = v[i] - inst.c[i]
        if gain <= 0:
            return None
        for j in range(g):
            if inst.u[i][j] > 0 and gain < inst.u[i][j] * q[j]:
                return None
    return q, x


def feasibility_lp(inst: BargainingInstance) -> Fraction:
    """Largest ``t`` with an allocation giving every buyer gain >= ``t``.

    The game is feasible exactly when the value is positive.  Solved as an
    exact LP over allocations with a free margin variable.
    """
    n, g = inst.n, inst.g
    nvars = n * g + 2
    objective = [Fraction(0)] * (n * g) + [Fraction(1), Fraction(-1)]
    a_ge = []
    b_ge = []
    for i in range(n):
        row = [Fraction(0)] * nvars
        for j in range(g):
            row[i * g + j] = Fraction(inst.u[i][j])
        row[n * g] = Fraction(-1)
        row[n * g + 1] = Fraction(1)
        a_ge.append(row)
        b_ge.append(inst.c[i])
    a_ub = []
    b_ub = []
    for j in range(g):
        row = [Fraction(0)] * nvars
        for i in range(n):
            row[i * g + j] = Fraction(1)
        a_ub.append(row)
        b_ub.append(Fraction(1))
    solved = simplex.maximize(
        objective, a_ub=a_ub, b_ub=b_ub, a_ge=a_ge, b_ge=b_ge
    )
    if solved is None:
        raise AssertionError("the margin program is always consistent")
    value, _ = solved
    return value


@dataclass
class LimitResult:
    p: list
    m: list
    iterations: int
    converged: bool
    reason: str
    history: list


def limit_algorithm(
    inst: BargainingInstance,
    eps: Fraction = Fraction(1, 10**6),
    max_iter: int = 1000,
    collect_history: bool = False,
) -> LimitResult:
    """Iterate fixed-budget equilibria toward the flexible-budget one.

    Start everyone at unit money; repeatedly compute the fixed-budget
    equilibrium and reset each budget to ``1 + c_i / gamma_i``.  On feasible
    instances the budgets rise monotonically and converge to the
    flexible-budget equilibrium; the loop stops at an exact fixpoint, when
    the update drops below ``eps``, or after ``max_iter`` rounds.
    """
    reduced, report = preprocess(inst)
    if report.verdict == "infeasible":
        raise ValueError("a buyer with no valued good has no market limit")
    n, g = reduced.n, reduced.g
    money = [Fraction(1)] * n
    history = []
    reason = "max_iter"
    iterations = 0
    p_full = None
    for _ in range(max_iter):
        iterations += 1
        p, _x, _tr = fisher_equilibrium(reduced.u, money)
        gamma, _ = bang_per_buck(reduced.u, p)
        p_full = _expand(list(p), report.kept_goods, inst.g)
        if collect_history:
            history.append((list(p_full), list(money)))
        nxt = [1 + reduced.c[i] / gamma[i] for i in range(n)]
        if nxt == money:
            reason = "exact"
            break
        delta = max(abs(a - b) for a, b in zip(nxt, money))
        money = nxt
        if delta < eps:
            reason = "eps"
            break
    return LimitResult(
        p=p_full,
        m=list(money),
        iterations=iterations,
        converged=reason in ("exact", "eps"),
        reason=reason,
        history=history,
    )
