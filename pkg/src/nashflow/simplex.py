"""Exact rational linear programming via the two-phase simplex method.

Small and dense on purpose: the solvers here handle the side computations
(feasibility margins, cross-checks) whose instances are tiny, and exactness
matters more than speed.  Bland's rule guarantees termination.
"""

from __future__ import annotations

from fractions import Fraction


class SimplexError(Exception):
    """The program is unbounded or an internal pivot invariant failed."""


def _pivot(tableau, basis, row, col):
    piv = tableau[row][col]
    inv = 1 / piv
    tableau[row] = [v * inv for v in tableau[row]]
    for r, line in enumerate(tableau):
        if r != row and line[col] != 0:
            factor = line[col]
            tableau[r] = [a - factor * b for a, b in zip(line, tableau[row])]
    basis[row] = col


def _solve_phase(tableau, basis, cost):
    """Maximize ``cost`` over the current basic feasible tableau in place."""
    ncols = len(tableau[0])
    while True:
        reduced = list(cost)
        for r, col in enumerate(basis):
            if cost[col] != 0:
                factor = cost[col]
                reduced = [a - factor * b for a, b in zip(reduced, tableau[r])]
        entering = next(
            (jv for jv in range(ncols - 1) if reduced[jv] > 0), None
        )
        if entering is None:
            value = -reduced[-1]
            return value
        best = None
        for r, line in enumerate(tableau):
            if line[entering] > 0:
                ratio = line[-1] / line[entering]
                key = (ratio, basis[r])
                if best is None or key < best[0]:
                    best = (key, r)
        if best is None:
            raise SimplexError("objective is unbounded")
        _pivot(tableau, basis, best[1], entering)


def maximize(c, a_ub=None, b_ub=None, a_ge=None, b_ge=None, a_eq=None, b_eq=None):
    """Maximize ``c . x`` subject to linear constraints, ``x >= 0``, exactly.

    Constraint groups: ``a_ub x <= b_ub``, ``a_ge x >= b_ge``,
    ``a_eq x = b_eq``.  Returns ``(value, x)`` as Fractions, ``None`` if the
    constraints are inconsistent, and raises :class:`SimplexError` when the
    objective is unbounded.
    """
    c = [Fraction(v) for v in c]
    nvars = len(c)
    rows = []
    kinds = []
    for mat, rhs, kind in (
        (a_ub, b_ub, "ub"),
        (a_ge, b_ge, "ge"),
        (a_eq, b_eq, "eq"),
    ):
        if mat is None:
            continue
        for line, b in zip(mat, rhs):
            row = [Fraction(v) for v in line]
            if len(row) != nvars:
                raise ValueError("constraint row has the wrong arity")
            rows.append((row, Fraction(b)))
            kinds.append(kind)

    nslack = sum(1 for k in kinds if k != "eq")
    tableau = []
    basis = []
    artificial_cols = []
    slack_at = 0
    total = nvars + nslack
    art_start = total

    prepared = []
    for (row, b), kind in zip(rows, kinds):
        if b < 0:
            row = [-v for v in row]
            b = -b
            kind = {"ub": "ge", "ge": "ub", "eq": "eq"}[kind]
        prepared.append((row, b, kind))

    n_art = sum(1 for (_, _, kind) in prepared if kind != "ub")
    total_cols = nvars + nslack + n_art + 1
    art_seen = 0
    for r, (row, b, kind) in enumerate(prepared):
        line = row + [Fraction(0)] * (nslack + n_art) + [b]
        if kind == "ub":
            line[nvars + slack_at] = Fraction(1)
            basis.append(nvars + slack_at)
            slack_at += 1
        elif kind == "ge":
            line[nvars + slack_at] = Fraction(-1)
            slack_at += 1
            line[art_start + art_seen] = Fraction(1)
            basis.append(art_start + art_seen)
            artificial_cols.append(art_start + art_seen)
            art_seen += 1
        else:
            line[art_start + art_seen] = Fraction(1)
            basis.append(art_start + art_seen)
            artificial_cols.append(art_start + art_seen)
            art_seen += 1
        tableau.append(line)
    art_start = nvars + nslack

    if artificial_cols:
        phase1 = [Fraction(0)] * total_cols
        for col in artificial_cols:
            phase1[col] = Fraction(-1)
        value = _solve_phase(tableau, basis, phase1)
        if value != 0:
            return None
        for r, col in enumerate(basis):
            if col in set(artificial_cols):
                swap = next(
                    (
                        jv
                        for jv in range(art_start)
                        if tableau[r][jv] != 0
                    ),
                    None,
                )
                if swap is not None:
                    _pivot(tableau, basis, r, swap)
        for line in tableau:
            del line[art_start:-1]
        basis = [col if col < art_start else -1 for col in basis]
        if -1 in basis:
            keep = [r for r, col in enumerate(basis) if col != -1]
            tableau = [tableau[r] for r in keep]
            basis = [basis[r] for r in keep]

    cost = c + [Fraction(0)] * (len(tableau[0]) - 1 - nvars) + [Fraction(0)]
    value = _solve_phase(tableau, basis, cost)
    solution = [Fraction(0)] * nvars
    for r, col in enumerate(basis):
        if col < nvars:
            solution[col] = tableau[r][-1]
    return value, solution
