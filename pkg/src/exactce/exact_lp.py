"""Exact rational linear programming for the cut-collection feasibility step.

Everything here runs on fractions.Fraction. The workhorse is a dense
two-phase primal simplex: a largest-improvement pivot choice for speed, with
an unconditional switch to Bland's least-index rule once a degenerate basis
has burned through the pivot budget, so termination never depends on luck and
exact arithmetic never needs tolerances. Problem sizes are small: rows are
incentive constraints of desk-scale games and columns are collected cuts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .games import Game
from .incentives import IncentiveColumn, SparseCE

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------- simplex core ----------


def _run_simplex(tableau, basis, cost, n_candidates: int) -> str:
    """Pivot until optimal or unbounded.

    Entering column: most negative reduced cost, ties to the lowest index —
    fast, but it can cycle on degenerate bases, so once the pivot budget is
    spent the loop switches to Bland's least-index rule, which terminates
    unconditionally. Leaving row: smallest ratio, ties to the smallest basis
    index (what Bland's rule requires; harmless for the fast rule). Both
    rules are deterministic, so the returned vertex is a pure function of
    the input.
    """
    m = len(tableau)
    budget = 12 * (m + n_candidates) + 64
    pivots = 0
    while True:
        enter = -1
        if pivots < budget:
            most = ZERO
            for j in range(n_candidates):
                value = cost[j]
                if value < most:
                    most = value
                    enter = j
        else:
            for j in range(n_candidates):
                if cost[j] < 0:
                    enter = j
                    break
        if enter < 0:
            return "optimal"
        leave = -1
        best = None
        for i in range(m):
            coeff = tableau[i][enter]
            if coeff > 0:
                ratio = tableau[i][-1] / coeff
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(tableau, basis, cost, leave, enter)
        pivots += 1


def _pivot(tableau, basis, cost, row: int, col: int) -> None:
    pivot_row = tableau[row]
    inv = ONE / pivot_row[col]
    if inv != 1:
        tableau[row] = pivot_row = [v * inv for v in pivot_row]
    for i, other in enumerate(tableau):
        if i != row and other[col]:
            factor = other[col]
            tableau[i] = [v - factor * w for v, w in zip(other, pivot_row)]
    if cost is not None and cost[col]:
        factor = cost[col]
        for j in range(len(cost)):
            cost[j] -= factor * pivot_row[j]
    basis[row] = col


def solve_standard_form(
    rows: Sequence[Sequence[Fraction]],
    rhs: Sequence[Fraction],
    objective: Sequence[Fraction] | None = None,
) -> tuple[str, list[Fraction] | None]:
    """Solve min objective . x subject to rows . x = rhs, x >= 0.

    Returns (status, x) with status one of "optimal", "infeasible",
    "unbounded". With objective None this is a pure feasibility solve and any
    basic feasible point is returned. The returned x is always a vertex of the
    feasible region (positive entries have linearly independent columns).
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    tableau = []
    for i in range(m):
        row = [Fraction(v) for v in rows[i]]
        b = Fraction(rhs[i])
        if b < 0:
            row = [-v for v in row]
            b = -b
        tableau.append(row + [ONE if k == i else ZERO for k in range(m)] + [b])
    basis = list(range(n, n + m))

    # Phase 1: minimize the artificial total. Reduced costs start at
    # -(column sums) for the real columns since every artificial costs 1.
    cost = [ZERO] * (n + m + 1)
    for j in range(n + m + 1):
        cost[j] = -sum(tableau[i][j] for i in range(m))
    for k in range(m):
        cost[n + k] += 1
    _run_simplex(tableau, basis, cost, n)
    infeasibility = sum(
        (tableau[i][-1] for i in range(m) if basis[i] >= n), ZERO
    )
    if infeasibility != 0:
        return "infeasible", None

    # Drive leftover zero-level artificials out of the basis; a row that
    # cannot pivot on any real column is redundant and gets dropped.
    drop = []
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if tableau[i][j]:
                    _pivot(tableau, basis, None, i, j)
                    break
            else:
                drop.append(i)
    for i in reversed(drop):
        del tableau[i]
        del basis[i]

    if objective is not None:
        width = n + m + 1
        cost = [Fraction(objective[j]) for j in range(n)] + [ZERO] * (width - n)
        for i, row in enumerate(tableau):
            factor = Fraction(objective[basis[i]])
            if factor:
                for j in range(width):
                    cost[j] -= factor * row[j]
        status = _run_simplex(tableau, basis, cost, n)
        if status == "unbounded":
            return "unbounded", None

    solution = [ZERO] * n
    for i, var in enumerate(basis):
        if var < n:
            solution[var] = tableau[i][-1]
    return "optimal", solution


def rational_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank of a rational matrix by plain Gaussian elimination."""
    work = [[Fraction(v) for v in row] for row in rows]
    if not work:
        return 0
    n_cols = len(work[0])
    rank = 0
    for col in range(n_cols):
        pivot = next((i for i in range(rank, len(work)) if work[i][col]), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        inv = ONE / work[rank][col]
        work[rank] = [v * inv for v in work[rank]]
        for i in range(len(work)):
            if i != rank and work[i][col]:
                factor = work[i][col]
                work[i] = [v - factor * w for v, w in zip(work[i], work[rank])]
        rank += 1
        if rank == len(work):
            break
    return rank


# ---------- the cut-collection program ----------


@dataclass(frozen=True)
class CutLP:
    """Feasibility program over collected profile columns.

    Seeks a distribution x over the columns' profiles with every incentive row
    nonnegative: columns . x >= 0 rowwise, x >= 0, sum x = 1.
    """

    actions: tuple[int, ...]
    n_rows: int
    columns: tuple[IncentiveColumn, ...]

    @classmethod
    def from_columns(cls, game: Game, columns: Sequence[IncentiveColumn]) -> "CutLP":
        seen = set()
        kept = []
        for col in columns:
            if col.profile not in seen:
                seen.add(col.profile)
                kept.append(col)
        return cls(actions=game.actions, n_rows=sum(m * m for m in game.actions), columns=tuple(kept))


def _standard_rows_for(dense_columns: list[list[Fraction]], n_rows: int):
    """Equalities for {cols . x >= 0, sum x = 1} with surplus variables.

    Identically zero rows are vacuous and skipped. Variables are the column
    weights followed by one surplus per kept row.
    """
    n_cols = len(dense_columns)
    kept = [r for r in range(n_rows) if any(col[r] for col in dense_columns)]
    rows = []
    for k, r in enumerate(kept):
        row = [col[r] for col in dense_columns]
        row += [ZERO] * len(kept)
        row[n_cols + k] = Fraction(-1)
        rows.append(row)
    rows.append([ONE] * n_cols + [ZERO] * len(kept))
    rhs = [ZERO] * len(kept) + [ONE]
    return rows, rhs, n_cols


def _solve_cut_lp(lp: CutLP) -> list[Fraction] | None:
    if not lp.columns:
        return None
    dense = [col.dense() for col in lp.columns]
    rows, rhs, n_cols = _standard_rows_for(dense, lp.n_rows)
    status, solution = solve_standard_form(rows, rhs)
    if status != "optimal":
        return None
    return solution[:n_cols]


def is_feasible(lp: CutLP) -> bool:
    """Whether any distribution over the collected profiles clears every row."""
    return _solve_cut_lp(lp) is not None


def try_feasible_bfs(lp: CutLP) -> SparseCE | None:
    weights = _solve_cut_lp(lp)
    if weights is None:
        return None
    atoms = tuple(
        (col.profile, w) for col, w in zip(lp.columns, weights) if w > 0
    )
    return SparseCE(atoms=atoms)


def feasible_bfs(lp: CutLP) -> SparseCE:
    """Basic feasible solution of the cut program as a sparse certificate.

    Being a vertex, its support is at most 1 plus the number of off-diagonal
    incentive rows, regardless of how many columns were collected.
    """
    ce = try_feasible_bfs(lp)
    if ce is None:
        raise ValueError("cut program is infeasible")
    return ce


# ---------- small exact systems used by the oracles ----------


def stationary_distribution(rates: Sequence[Sequence[Fraction]]) -> tuple[Fraction, ...]:
    """Vertex solution of the balance equations of a finite rate matrix.

    rates[i][j] is the flow rate from state i to state j (diagonal ignored).
    Solves {x >= 0, sum x = 1, inflow = outflow at every state} by the
    phase-1 simplex, so the selected stationary distribution is canonical:
    Bland's rule makes it deterministic in the input.
    """
    m = len(rates)
    if m == 1:
        return (ONE,)
    rows = []
    for j in range(m):
        row = [ZERO] * m
        for i in range(m):
            if i != j:
                row[i] = Fraction(rates[i][j])
        row[j] -= sum((Fraction(rates[j][k]) for k in range(m) if k != j), ZERO)
        rows.append(row)
    rows.append([ONE] * m)
    rhs = [ZERO] * m + [ONE]
    status, solution = solve_standard_form(rows, rhs)
    if status != "optimal":
        raise RuntimeError("balance system unexpectedly infeasible")
    return tuple(solution)


def mixture_feasible(dense_columns: Sequence[Sequence[Fraction]]) -> list[Fraction] | None:
    """Weights alpha >= 0 summing to 1 with sum_k alpha_k col_k >= 0, if any."""
    cols = [list(c) for c in dense_columns]
    if not cols:
        return None
    rows, rhs, n_cols = _standard_rows_for(cols, len(cols[0]))
    status, solution = solve_standard_form(rows, rhs)
    if status != "optimal":
        return None
    return solution[:n_cols]


def min_violation_mixture(
    dense_columns: Sequence[Sequence[Fraction]],
) -> tuple[Fraction, list[Fraction]]:
    """Mixture weights minimizing the worst constraint shortfall.

    Solves min t subject to sum_k alpha_k col_k >= -t, alpha a distribution,
    t >= 0, and returns (t, alpha). t is zero exactly when the nonnegative
    mixture program is feasible.
    """
    cols = [list(c) for c in dense_columns]
    if not cols:
        raise ValueError("need at least one column")
    n_rows = len(cols[0])
    n_cols = len(cols)
    kept = [r for r in range(n_rows) if any(col[r] for col in cols)]
    rows = []
    for k, r in enumerate(kept):
        row = [col[r] for col in cols]
        row.append(ONE)  # t
        row += [ZERO] * len(kept)
        row[n_cols + 1 + k] = Fraction(-1)
        rows.append(row)
    rows.append([ONE] * n_cols + [ZERO] * (1 + len(kept)))
    rhs = [ZERO] * len(kept) + [ONE]
    objective = [ZERO] * n_cols + [ONE] + [ZERO] * len(kept)
    status, solution = solve_standard_form(rows, rhs, objective)
    if status != "optimal":
        raise RuntimeError("violation program unexpectedly unsolvable")
    return solution[n_cols], solution[:n_cols]
