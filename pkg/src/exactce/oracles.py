"""Separation oracles for the dual of the equilibrium feasibility program.

The dual program asks for y >= 0 with every profile column's inner product
at most -1; it is always infeasible, and each oracle answer below is a
verbatim constraint of it, violated at the queried point:

* NonnegativityCut: some coordinate of y is negative.
* ProfileCut: a pure profile whose column has nonnegative inner product with
  y, found by building a product distribution that zeroes the y-weighted
  incentive values and then rounding it to a pure profile one player at a
  time without letting the value drop below zero.
* ProductCut (product mode): the constraint induced by the product
  distribution itself, skipping the rounding step.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import SolverError
from .exact_lp import stationary_distribution
from .games import Game, ProductDistribution, PureProfile
from .incentives import (
    IncentiveColumn,
    RowIndex,
    check_dual_vector,
    incentive_row_values,
    profile_column,
    row_at,
    row_count,
)

ZERO = Fraction(0)

TIE_BREAKS = ("first", "max-value", "welfare")


# ---------- cut types ----------


@dataclass(frozen=True)
class NonnegativityCut:
    """Constraint y[row] >= 0, reported for the first negative coordinate."""

    row: RowIndex
    position: int
    n_rows: int

    kind = "nonneg"
    rhs = ZERO

    def normal(self) -> list[Fraction]:
        out = [ZERO] * self.n_rows
        out[self.position] = Fraction(-1)
        return out

    def roster_key(self):
        return None

    def describe(self) -> dict:
        return {"kind": self.kind, "row": list(self.row)}


@dataclass(frozen=True)
class ProfileCut:
    """Constraint column(s) . y <= -1 for a pure profile s."""

    column: IncentiveColumn

    kind = "profile"
    rhs = Fraction(-1)

    @property
    def profile(self) -> PureProfile:
        return self.column.profile

    def normal(self) -> list[Fraction]:
        return [Fraction(v) for v in self.column.dense()]

    def roster_key(self):
        return ("profile", self.column.profile)

    def describe(self) -> dict:
        return {"kind": self.kind, "profile": list(self.profile)}


@dataclass(frozen=True)
class ProductCut:
    """Constraint values(x) . y <= -1 for a product distribution x.

    values(x) is the vector of expected incentive-row values under x, so the
    inner product with the queried y is exactly zero by construction.
    """

    x: ProductDistribution
    values: tuple[Fraction, ...]

    kind = "product"
    rhs = Fraction(-1)

    def normal(self) -> list[Fraction]:
        return list(self.values)

    def roster_key(self):
        return ("product", self.x.strategies)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "x": [[str(p) for p in strat] for strat in self.x.strategies],
        }


Cut = NonnegativityCut | ProfileCut | ProductCut


def cut_violation(cut: Cut, y: Sequence[Fraction]) -> Fraction:
    """By how much y breaks the cut's constraint (positive means violated)."""
    lhs = sum((a * b for a, b in zip(cut.normal(), y) if a), ZERO)
    return lhs - cut.rhs


# ---------- product construction ----------


def _stationary_with_values(
    game: Game, y: Sequence[Fraction]
) -> tuple[ProductDistribution, list[Fraction]]:
    strategies = []
    for p, m in enumerate(game.actions):
        offset = sum(a * a for a in game.actions[:p])
        block = [[y[offset + i * m + j] for j in range(m)] for i in range(m)]
        if all(block[i][j] == 0 for i in range(m) for j in range(m) if i != j):
            strategies.append(tuple(Fraction(1, m) for _ in range(m)))
        else:
            strategies.append(stationary_distribution(block))
    x = ProductDistribution(tuple(strategies))
    values = incentive_row_values(game, x)
    if sum((v * w for v, w in zip(values, y) if v), ZERO) != 0:
        raise SolverError("stationary construction failed its exactness check")
    return x, values


def stationary_product(game: Game, y: Sequence[Fraction]) -> ProductDistribution:
    """Product distribution whose row values are orthogonal to y, exactly.

    Each player's block of y is read as transition rates between that
    player's actions, and the player's mixed strategy is a stationary
    distribution of those rates (uniform when the block is all zero). Balance
    makes the y-weighted sum of that player's incentive values telescope to
    zero; the result is verified exactly before returning.
    """
    check_dual_vector(game, y)
    if any(v < 0 for v in y):
        raise ValueError("dual vector must be nonnegative")
    x, _ = _stationary_with_values(game, y)
    return x


# ---------- purification ----------


def _chain_value(game: Game, y: Sequence[Fraction], x: ProductDistribution) -> Fraction:
    values = incentive_row_values(game, x)
    return sum((v * w for v, w in zip(values, y) if v), ZERO)


def purify(
    game: Game,
    y: Sequence[Fraction],
    x: ProductDistribution,
    tie_break: str = "first",
    _start_value: Fraction | None = None,
) -> PureProfile:
    """Round a product distribution to a pure profile, conditioning player by
    player, so the y-weighted incentive value never goes negative.

    The value at x is a convex combination, weighted by player p's mix, of the
    values after fixing p to each action; a nonnegative branch therefore
    always exists, and fixing players in ascending order keeps the invariant
    until the distribution is a point mass. tie_break picks among nonnegative
    branches: "first" takes the lowest action, "max-value" the branch with the
    largest value, "welfare" the branch with the largest total expected payoff.
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"unknown tie break {tie_break!r}")
    check_dual_vector(game, y)
    x.check_for(game)
    if any(v < 0 for v in y):
        raise ValueError("dual vector must be nonnegative")
    value = _chain_value(game, y, x) if _start_value is None else _start_value
    if value < 0:
        raise ValueError("purification requires a nonnegative starting value")

    current = x
    for p in range(game.players):
        chosen = None
        if tie_break == "first":
            for a in range(game.actions[p]):
                candidate = current.override(p, a)
                v = _chain_value(game, y, candidate)
                if v >= 0:
                    chosen = candidate
                    break
        else:
            branches = []
            for a in range(game.actions[p]):
                candidate = current.override(p, a)
                v = _chain_value(game, y, candidate)
                if v >= 0:
                    branches.append((a, candidate, v))
            if branches:
                if tie_break == "max-value":
                    best = max(v for _, _, v in branches)
                    chosen = next(c for _, c, v in branches if v == best)
                else:  # welfare
                    def welfare(dist: ProductDistribution) -> Fraction:
                        return sum(
                            (game.expected_utility(q, dist) for q in range(game.players)),
                            ZERO,
                        )

                    scored = [(welfare(c), a, c) for a, c, _ in branches]
                    best_w = max(w for w, _, _ in scored)
                    chosen = next(c for w, _, c in scored if w == best_w)
        if chosen is None:
            raise SolverError("no nonnegative branch while purifying; invariant broken")
        current = chosen

    profile = current.point_profile()
    assert profile is not None
    return profile


# ---------- separation oracles ----------


def _negative_coordinate(game: Game, y: Sequence[Fraction]) -> NonnegativityCut | None:
    for pos, v in enumerate(y):
        if v < 0:
            return NonnegativityCut(row=row_at(game, pos), position=pos, n_rows=row_count(game))
    return None


def purified_separation(game: Game, y: Sequence[Fraction], tie_break: str = "first") -> Cut:
    """Cut for the dual point y: nonnegativity first, else a pure profile.

    For y >= 0 the returned profile's column has nonnegative inner product
    with y, so the profile constraint (<= -1) is violated at y by at least 1.
    """
    check_dual_vector(game, y)
    negative = _negative_coordinate(game, y)
    if negative is not None:
        return negative
    x, values = _stationary_with_values(game, y)
    profile = purify(game, y, x, tie_break, _start_value=ZERO)
    column = profile_column(game, profile)
    if column.dot(y) < 0:
        raise SolverError("purified profile fails its nonnegativity guarantee")
    return ProfileCut(column=column)


def product_separation(game: Game, y: Sequence[Fraction]) -> Cut:
    """Cut from the stationary product itself, without purification."""
    check_dual_vector(game, y)
    negative = _negative_coordinate(game, y)
    if negative is not None:
        return negative
    x, values = _stationary_with_values(game, y)
    return ProductCut(x=x, values=tuple(values))
