"""Independent reference implementations used to pin expected values.

Everything here is computed from first principles with plain enumeration
and rational arithmetic, deliberately not reusing the package's internal
shortcuts, so package results can be checked against a second opinion.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from exactce import Game, NormalFormGame, PolymatrixGame, ProductDistribution

ZERO = Fraction(0)
ONE = Fraction(1)


def enum_profiles(actions):
    return itertools.product(*[range(m) for m in actions])


def payoff_direct(game: Game, profile, player) -> int:
    """Payoff lookup with its own index arithmetic."""
    if isinstance(game, NormalFormGame):
        flat = 0
        for q in range(len(game.actions)):
            stride = 1
            for r in range(q + 1, len(game.actions)):
                stride *= game.actions[r]
            flat += profile[q] * stride
        return game.tables[player][flat]
    if isinstance(game, PolymatrixGame):
        total = 0
        for q in range(len(game.actions)):
            if q == player:
                continue
            block = game.blocks[player][q]
            total += block[profile[player]][profile[q]]
        return total
    raise TypeError(f"unsupported game type {type(game)!r}")


def row_value_at(game: Game, row, profile) -> int:
    """Entry of the incentive matrix at (row, profile), by definition."""
    player, action, deviation = row
    if profile[player] != action:
        return 0
    deviated = list(profile)
    deviated[player] = deviation
    return payoff_direct(game, profile, player) - payoff_direct(game, tuple(deviated), player)


def all_rows(game: Game):
    for player, m in enumerate(game.actions):
        for action in range(m):
            for deviation in range(m):
                yield (player, action, deviation)


def materialize_matrix(game: Game) -> list[list[int]]:
    """Full incentive matrix, rows ordered as in the package, profiles lexicographic."""
    profiles = list(enum_profiles(game.actions))
    return [[row_value_at(game, row, s) for s in profiles] for row in all_rows(game)]


def product_probability(strategies, profile) -> Fraction:
    prob = ONE
    for player, action in enumerate(profile):
        prob *= strategies[player][action]
    return prob


def enum_expected_utility(game: Game, strategies, player) -> Fraction:
    total = ZERO
    for profile in enum_profiles(game.actions):
        prob = product_probability(strategies, profile)
        if prob:
            total += prob * payoff_direct(game, profile, player)
    return total


def enum_row_expectation(game: Game, strategies, row) -> Fraction:
    total = ZERO
    for profile in enum_profiles(game.actions):
        prob = product_probability(strategies, profile)
        if prob:
            total += prob * row_value_at(game, row, profile)
    return total


def dual_objective(game: Game, strategies, y) -> Fraction:
    """sum_r y_r * E_x[row r], the quantity the oracle chain preserves."""
    total = ZERO
    for position, row in enumerate(all_rows(game)):
        if y[position]:
            total += y[position] * enum_row_expectation(game, strategies, row)
    return total


def purify_reference(game: Game, y, x: ProductDistribution, tie_break: str):
    """Conditional-probability rounding, recomputed by brute enumeration."""
    strategies = [list(block) for block in x.strategies]
    for player, m in enumerate(game.actions):
        branches = []
        for action in range(m):
            candidate = [list(block) for block in strategies]
            candidate[player] = [ONE if a == action else ZERO for a in range(m)]
            value = dual_objective(game, candidate, y)
            branches.append((action, value, candidate))
        keep = [b for b in branches if b[1] >= 0]
        if not keep:
            raise AssertionError("no branch kept a nonnegative conditional value")
        if tie_break == "first":
            action, _, candidate = keep[0]
        elif tie_break == "max-value":
            best = max(b[1] for b in keep)
            action, _, candidate = next(b for b in keep if b[1] == best)
        elif tie_break == "welfare":
            def welfare(branch):
                return sum(enum_expected_utility(game, branch[2], q)
                           for q in range(len(game.actions)))
            best = max(welfare(b) for b in keep)
            action, _, candidate = next(b for b in keep if welfare(b) == best)
        else:
            raise ValueError(tie_break)
        strategies = candidate
    profile = []
    for block in strategies:
        profile.append(block.index(ONE))
    return tuple(profile)


def rational_rank(rows) -> int:
    """Rank by Gaussian elimination over the rationals."""
    matrix = [[Fraction(v) for v in row] for row in rows]
    rank = 0
    cols = len(matrix[0]) if matrix else 0
    for col in range(cols):
        pivot = next((r for r in range(rank, len(matrix)) if matrix[r][col]), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        inv = 1 / matrix[rank][col]
        matrix[rank] = [v * inv for v in matrix[rank]]
        for r in range(len(matrix)):
            if r != rank and matrix[r][col]:
                factor = matrix[r][col]
                matrix[r] = [a - factor * b for a, b in zip(matrix[r], matrix[rank])]
        rank += 1
    return rank


def solve_square(matrix, rhs):
    """Solve a square rational system; None if singular."""
    n = len(matrix)
    work = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col]), None)
        if pivot is None:
            return None
        work[col], work[pivot] = work[pivot], work[col]
        inv = 1 / work[col][col]
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return [work[i][n] for i in range(n)]


def lp_optimum_by_enumeration(rows, rhs, objective):
    """Optimal value of min c.x s.t. rows.x = rhs, x >= 0, by basis enumeration.

    Returns (status, value): ("infeasible", None), ("optimal", value), or
    ("unbounded", None). Small instances only.
    """
    m = len(rows)
    n = len(rows[0]) if rows else 0
    best = None
    feasible = False
    for basis in itertools.combinations(range(n), m):
        square = [[rows[r][c] for c in basis] for r in range(m)]
        point = solve_square(square, rhs)
        if point is None or any(v < 0 for v in point):
            continue
        feasible = True
        full = [ZERO] * n
        for k, c in enumerate(basis):
            full[c] += point[k]
        value = sum(Fraction(objective[c]) * full[c] for c in range(n))
        if best is None or value < best:
            best = value
    if not feasible:
        # a feasible LP with rank-deficient constraints can still hide all
        # its vertices from full-size bases; callers keep instances full rank
        return ("infeasible", None)
    # unboundedness: scan recession directions d >= 0, rows.d = 0, c.d < 0
    for support in range(1, min(n, m + 2) + 1):
        for cols in itertools.combinations(range(n), support):
            sub = [[rows[r][c] for c in cols] for r in range(m)]
            if rational_rank(sub) >= support:
                continue
            direction = _null_direction(sub)
            if direction is None:
                continue
            for sign in (1, -1):
                d = [sign * v for v in direction]
                if all(v >= 0 for v in d) and any(v > 0 for v in d):
                    cost = sum(Fraction(objective[cols[k]]) * d[k] for k in range(support))
                    if cost < 0:
                        return ("unbounded", None)
    return ("optimal", best)


def _null_direction(matrix):
    """A nonzero rational null vector of the column space, if one exists."""
    if not matrix:
        return None
    m, n = len(matrix), len(matrix[0])
    work = [[Fraction(v) for v in row] for row in matrix]
    pivots = {}
    rank = 0
    for col in range(n):
        pivot = next((r for r in range(rank, m) if work[r][col]), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        inv = 1 / work[rank][col]
        work[rank] = [v * inv for v in work[rank]]
        for r in range(m):
            if r != rank and work[r][col]:
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[rank])]
        pivots[col] = rank
        rank += 1
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    direction = [ZERO] * n
    direction[free[0]] = ONE
    for col, row in pivots.items():
        direction[col] = -work[row][free[0]]
    return direction


def random_nonneg_dual(rng: random.Random, length: int, density: float = 0.7):
    values = []
    for _ in range(length):
        if rng.random() < density:
            values.append(Fraction(rng.randint(0, 12), rng.randint(1, 9)))
        else:
            values.append(ZERO)
    return tuple(values)


def random_product(rng: random.Random, actions) -> ProductDistribution:
    strategies = []
    for m in actions:
        weights = [Fraction(rng.randint(1, 9)) for _ in range(m)]
        total = sum(weights)
        strategies.append(tuple(w / total for w in weights))
    return ProductDistribution(strategies=tuple(strategies))


SUITE_COMBOS = [
    (family, players, actions)
    for family in ("nfg", "polymatrix")
    for players in (2, 3, 4)
    for actions in (2, 3)
]


def suite_specs(count: int = 100, u_max: int = 10):
    """The seeded game suite: cycle families and sizes, one seed per index."""
    for index in range(count):
        family, players, actions = SUITE_COMBOS[index % len(SUITE_COMBOS)]
        yield (family, players, actions, u_max, index)
