"""Compact game representations with exact integer payoffs.

Two families are supported: full normal-form tables and polymatrix games,
where a player's payoff is the sum of bilinear interactions with every other
player. Rational input utilities are integerized at load time by a per-player
positive scale (clearing denominators) followed by a nonnegative shift; both
are recorded on the game and neither changes the set of correlated equilibria.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .errors import GameFormatError

PureProfile = tuple[int, ...]

FAMILIES = ("nfg", "polymatrix")


# ---------- mixed strategy profiles ----------


@dataclass(frozen=True)
class ProductDistribution:
    """One independent mixed strategy per player, all probabilities exact."""

    strategies: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        for p, strat in enumerate(self.strategies):
            if not strat:
                raise ValueError(f"player {p}: empty strategy")
            if any(prob < 0 for prob in strat):
                raise ValueError(f"player {p}: negative probability")
            if sum(strat) != 1:
                raise ValueError(f"player {p}: probabilities sum to {sum(strat)}, not 1")

    @classmethod
    def uniform(cls, actions: Sequence[int]) -> "ProductDistribution":
        return cls(tuple(tuple(Fraction(1, m) for _ in range(m)) for m in actions))

    @classmethod
    def point_mass(cls, actions: Sequence[int], profile: Sequence[int]) -> "ProductDistribution":
        if len(profile) != len(actions):
            raise ValueError("profile length does not match player count")
        rows = []
        for m, a in zip(actions, profile):
            if not 0 <= a < m:
                raise ValueError(f"action {a} out of range for {m} actions")
            rows.append(tuple(Fraction(1) if k == a else Fraction(0) for k in range(m)))
        return cls(tuple(rows))

    def override(self, player: int, action: int) -> "ProductDistribution":
        """Replace one player's mix with a point mass, leaving the rest alone."""
        m = len(self.strategies[player])
        if not 0 <= action < m:
            raise ValueError(f"action {action} out of range for {m} actions")
        row = tuple(Fraction(1) if k == action else Fraction(0) for k in range(m))
        return ProductDistribution(
            self.strategies[:player] + (row,) + self.strategies[player + 1 :]
        )

    def point_profile(self) -> PureProfile | None:
        """The pure profile this distribution is a point mass on, if it is one."""
        profile = []
        for strat in self.strategies:
            hits = [a for a, prob in enumerate(strat) if prob == 1]
            if len(hits) != 1:
                return None
            profile.append(hits[0])
        return tuple(profile)

    def check_for(self, game: "Game") -> None:
        if len(self.strategies) != game.players:
            raise ValueError("distribution has the wrong number of players")
        for p, strat in enumerate(self.strategies):
            if len(strat) != game.actions[p]:
                raise ValueError(f"player {p}: strategy length {len(strat)} != {game.actions[p]}")


# ---------- integerization ----------


@dataclass(frozen=True)
class PlayerAdjustment:
    """Per-player (scale, shift) applied to raw utilities when loading.

    stored = scale * raw + shift, with scale > 0, so best responses and the
    whole correlated-equilibrium set are preserved.
    """

    scale: Fraction = Fraction(1)
    shift: Fraction = Fraction(0)


IDENTITY = PlayerAdjustment()


def _parse_utility(value, where: str) -> Fraction:
    if isinstance(value, bool):
        raise GameFormatError(f"{where}: boolean is not a utility")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise GameFormatError(f"{where}: bad rational string {value!r}") from exc
    raise GameFormatError(
        f"{where}: utilities must be integers or rational strings, got {type(value).__name__}"
    )


def _common_denominator(values: Iterator[Fraction]) -> int:
    scale = 1
    for v in values:
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    return scale


# ---------- game types ----------


@dataclass(frozen=True)
class Game:
    """Base type: immutable game with nonnegative integer payoffs."""

    actions: tuple[int, ...]
    adjustments: tuple[PlayerAdjustment, ...]

    family = "abstract"

    def __post_init__(self):
        if not self.actions:
            raise GameFormatError("a game needs at least one player")
        if any(not isinstance(m, int) or m < 1 for m in self.actions):
            raise GameFormatError("every player needs a positive action count")
        if len(self.adjustments) != len(self.actions):
            raise GameFormatError("one adjustment record per player required")

    @property
    def players(self) -> int:
        return len(self.actions)

    @cached_property
    def num_profiles(self) -> int:
        return math.prod(self.actions)

    def profiles(self) -> Iterator[PureProfile]:
        """All pure profiles, player 0 varying slowest."""
        return itertools.product(*(range(m) for m in self.actions))

    def check_profile(self, profile: Sequence[int]) -> PureProfile:
        s = tuple(profile)
        if len(s) != self.players:
            raise ValueError(f"profile length {len(s)} != {self.players} players")
        for p, a in enumerate(s):
            if not isinstance(a, int) or not 0 <= a < self.actions[p]:
                raise ValueError(f"player {p}: action {a!r} out of range")
        return s

    # subclass surface
    def payoff(self, player: int, profile: Sequence[int]) -> int:
        raise NotImplementedError

    def expected_utility(self, player: int, x: ProductDistribution) -> Fraction:
        raise NotImplementedError

    def conditional_payoffs(self, player: int, x: ProductDistribution) -> list[Fraction]:
        """Expected payoff to the player for each of their own actions, with
        everyone else drawn independently from x. Subclasses override this
        with one-sweep versions; the result always equals expected_utility
        on the distribution with that player forced to the action."""
        return [
            self.expected_utility(player, x.override(player, a))
            for a in range(self.actions[player])
        ]

    @property
    def u_max(self) -> int:
        """Largest stored utility entry."""
        raise NotImplementedError

    def payoff_ceiling(self) -> int:
        """Exact maximum of any player's payoff over all pure profiles."""
        raise NotImplementedError

    def to_document(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class NormalFormGame(Game):
    """One flat payoff table per player, row-major with player 0 outermost."""

    tables: tuple[tuple[int, ...], ...] = ()

    family = "nfg"

    def __post_init__(self):
        super().__post_init__()
        if len(self.tables) != self.players:
            raise GameFormatError("one payoff table per player required")
        m = self.num_profiles
        for p, table in enumerate(self.tables):
            if len(table) != m:
                raise GameFormatError(f"player {p}: table has {len(table)} entries, expected {m}")
            if any(not isinstance(v, int) or v < 0 for v in table):
                raise GameFormatError(f"player {p}: stored payoffs must be nonnegative integers")

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        strides = [1] * self.players
        for p in range(self.players - 2, -1, -1):
            strides[p] = strides[p + 1] * self.actions[p + 1]
        return tuple(strides)

    def flat_index(self, profile: PureProfile) -> int:
        return sum(a * st for a, st in zip(profile, self._strides))

    def payoff(self, player: int, profile: Sequence[int]) -> int:
        s = self.check_profile(profile)
        return self.tables[player][self.flat_index(s)]

    def expected_utility(self, player: int, x: ProductDistribution) -> Fraction:
        """Exact expectation of the player's payoff under independent play.

        Enumerates profiles recursively, pruning any branch with probability
        zero, so point-mass-heavy mixtures cost far less than the full table.
        """
        x.check_for(self)
        table = self.tables[player]
        strides = self._strides
        n = self.players
        total = Fraction(0)
        stack = [(0, 0, Fraction(1))]
        while stack:
            q, idx, prob = stack.pop()
            if q == n:
                total += prob * table[idx]
                continue
            stride = strides[q]
            for a, pa in enumerate(x.strategies[q]):
                if pa:
                    stack.append((q + 1, idx + a * stride, prob * pa))
        return total

    def conditional_payoffs(self, player: int, x: ProductDistribution) -> list[Fraction]:
        """All own-action conditionals in one sweep over the other players'
        assignments, instead of one table pass per action."""
        x.check_for(self)
        table = self.tables[player]
        strides = self._strides
        own_stride = strides[player]
        n = self.players
        m = self.actions[player]
        out = [Fraction(0)] * m
        stack = [(0, 0, Fraction(1))]
        while stack:
            q, idx, prob = stack.pop()
            if q == n:
                for a in range(m):
                    out[a] += prob * table[idx + a * own_stride]
                continue
            if q == player:
                stack.append((q + 1, idx, prob))
                continue
            stride = strides[q]
            for a, pa in enumerate(x.strategies[q]):
                if pa:
                    stack.append((q + 1, idx + a * stride, prob * pa))
        return out

    @cached_property
    def u_max(self) -> int:
        return max(max(t) for t in self.tables)

    def payoff_ceiling(self) -> int:
        return self.u_max

    def to_document(self) -> dict:
        return {
            "type": "nfg",
            "players": self.players,
            "actions": list(self.actions),
            "payoffs": [list(t) for t in self.tables],
        }


@dataclass(frozen=True)
class PolymatrixGame(Game):
    """Pairwise game: u_p(s) sums one bilinear block per other player.

    blocks[p][q] is an |A_p| x |A_q| integer matrix for p != q and None on the
    diagonal. Every ordered pair is present; absent interactions are zero
    matrices.
    """

    blocks: tuple[tuple[tuple[tuple[int, ...], ...] | None, ...], ...] = ()

    family = "polymatrix"

    def __post_init__(self):
        super().__post_init__()
        n = self.players
        if len(self.blocks) != n:
            raise GameFormatError("blocks must be an n x n grid")
        for p in range(n):
            if len(self.blocks[p]) != n:
                raise GameFormatError("blocks must be an n x n grid")
            for q in range(n):
                block = self.blocks[p][q]
                if p == q:
                    if block is not None:
                        raise GameFormatError("diagonal blocks must be None")
                    continue
                if block is None or len(block) != self.actions[p]:
                    raise GameFormatError(f"block ({p},{q}) must have {self.actions[p]} rows")
                for row in block:
                    if len(row) != self.actions[q]:
                        raise GameFormatError(
                            f"block ({p},{q}) rows must have {self.actions[q]} entries"
                        )
                    if any(not isinstance(v, int) or v < 0 for v in row):
                        raise GameFormatError(
                            f"block ({p},{q}): stored payoffs must be nonnegative integers"
                        )

    def payoff(self, player: int, profile: Sequence[int]) -> int:
        s = self.check_profile(profile)
        total = 0
        for q in range(self.players):
            if q != player:
                total += self.blocks[player][q][s[player]][s[q]]
        return total

    def expected_utility(self, player: int, x: ProductDistribution) -> Fraction:
        x.check_for(self)
        mine = x.strategies[player]
        total = Fraction(0)
        for q in range(self.players):
            if q == player:
                continue
            block = self.blocks[player][q]
            theirs = x.strategies[q]
            for i, pi in enumerate(mine):
                if not pi:
                    continue
                row = block[i]
                inner = sum((pj * row[j] for j, pj in enumerate(theirs) if pj), Fraction(0))
                total += pi * inner
        return total

    def conditional_payoffs(self, player: int, x: ProductDistribution) -> list[Fraction]:
        """Own-action conditionals straight off the pairwise blocks."""
        x.check_for(self)
        m = self.actions[player]
        out = [Fraction(0)] * m
        for q in range(self.players):
            if q == player:
                continue
            block = self.blocks[player][q]
            theirs = x.strategies[q]
            for i in range(m):
                row = block[i]
                out[i] += sum(
                    (pj * row[j] for j, pj in enumerate(theirs) if pj), Fraction(0)
                )
        return out

    @cached_property
    def u_max(self) -> int:
        best = 0
        for p in range(self.players):
            for q in range(self.players):
                if p != q:
                    best = max(best, max(max(row) for row in self.blocks[p][q]))
        return best

    def payoff_ceiling(self) -> int:
        # Coordinates of the other players are independent, so for a fixed own
        # action the profile maximum is the sum of per-block row maxima.
        best = 0
        for p in range(self.players):
            for own in range(self.actions[p]):
                total = 0
                for q in range(self.players):
                    if q != p:
                        total += max(self.blocks[p][q][own])
                best = max(best, total)
        return best

    def to_document(self) -> dict:
        edges = []
        for p in range(self.players):
            for q in range(self.players):
                if p != q:
                    edges.append(
                        {"p": p, "q": q, "matrix": [list(row) for row in self.blocks[p][q]]}
                    )
        return {
            "type": "polymatrix",
            "players": self.players,
            "actions": list(self.actions),
            "edges": edges,
        }


# ---------- loading ----------


def _check_header(doc: dict) -> tuple[int, ...]:
    players = doc.get("players")
    if not isinstance(players, int) or isinstance(players, bool) or players < 1:
        raise GameFormatError("players must be a positive integer")
    actions = doc.get("actions")
    if not isinstance(actions, list) or len(actions) != players:
        raise GameFormatError("actions must list one entry per player")
    for p, m in enumerate(actions):
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise GameFormatError(f"player {p}: action count must be a positive integer")
    return tuple(actions)


def _load_nfg(doc: dict) -> NormalFormGame:
    actions = _check_header(doc)
    payoffs = doc.get("payoffs")
    m = math.prod(actions)
    if not isinstance(payoffs, list) or len(payoffs) != len(actions):
        raise GameFormatError("payoffs must list one table per player")
    tables = []
    adjustments = []
    for p, raw in enumerate(payoffs):
        if not isinstance(raw, list) or len(raw) != m:
            raise GameFormatError(f"player {p}: payoff table must have exactly {m} entries")
        values = [_parse_utility(v, f"player {p} entry {k}") for k, v in enumerate(raw)]
        scale = Fraction(_common_denominator(iter(values)))
        scaled = [v * scale for v in values]
        low = min(scaled)
        shift = -low if low < 0 else Fraction(0)
        tables.append(tuple(int(v + shift) for v in scaled))
        adjustments.append(PlayerAdjustment(scale, shift))
    return NormalFormGame(actions=actions, adjustments=tuple(adjustments), tables=tuple(tables))


def _load_polymatrix(doc: dict) -> PolymatrixGame:
    actions = _check_header(doc)
    n = len(actions)
    edges = doc.get("edges")
    if not isinstance(edges, list):
        raise GameFormatError("edges must be a list")
    raw: dict[tuple[int, int], list[list[Fraction]]] = {}
    for k, edge in enumerate(edges):
        if not isinstance(edge, dict):
            raise GameFormatError(f"edge {k}: must be an object")
        p, q = edge.get("p"), edge.get("q")
        if not (isinstance(p, int) and isinstance(q, int)) or not (0 <= p < n and 0 <= q < n):
            raise GameFormatError(f"edge {k}: bad player pair ({p!r}, {q!r})")
        if p == q:
            raise GameFormatError(f"edge {k}: self edge on player {p}")
        if (p, q) in raw:
            raise GameFormatError(f"edge {k}: duplicate edge ({p}, {q})")
        matrix = edge.get("matrix")
        if not isinstance(matrix, list) or len(matrix) != actions[p]:
            raise GameFormatError(f"edge {k}: matrix must have {actions[p]} rows")
        parsed = []
        for i, row in enumerate(matrix):
            if not isinstance(row, list) or len(row) != actions[q]:
                raise GameFormatError(f"edge {k} row {i}: expected {actions[q]} entries")
            parsed.append([_parse_utility(v, f"edge {k} entry ({i},{j})") for j, v in enumerate(row)])
        raw[(p, q)] = parsed

    blocks: list[list[tuple[tuple[int, ...], ...] | None]] = [[None] * n for _ in range(n)]
    adjustments = []
    for p in range(n):
        entries = (
            v
            for q in range(n)
            if q != p
            for row in raw.get((p, q), [[Fraction(0)] * actions[q]] * actions[p])
            for v in row
        )
        scale = Fraction(_common_denominator(entries))
        total_shift = Fraction(0)
        for q in range(n):
            if q == p:
                continue
            matrix = raw.get((p, q), [[Fraction(0)] * actions[q] for _ in range(actions[p])])
            scaled = [[v * scale for v in row] for row in matrix]
            low = min(min(row) for row in scaled)
            shift = -low if low < 0 else Fraction(0)
            total_shift += shift
            blocks[p][q] = tuple(tuple(int(v + shift) for v in row) for row in scaled)
        adjustments.append(PlayerAdjustment(scale, total_shift))
    return PolymatrixGame(
        actions=actions,
        adjustments=tuple(adjustments),
        blocks=tuple(tuple(row) for row in blocks),
    )


def load_game(document: dict | str) -> Game:
    """Build a Game from a parsed JSON document (or raw JSON text)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GameFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise GameFormatError("game document must be a JSON object")
    kind = document.get("type")
    if kind == "nfg":
        return _load_nfg(document)
    if kind == "polymatrix":
        return _load_polymatrix(document)
    raise GameFormatError(f"unknown game type {kind!r}")


def load_game_file(path) -> Game:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return load_game(text)


# ---------- generation and conversion ----------


def random_game(family: str, players: int, actions, u_max: int, seed: int) -> Game:
    """Deterministic random game; every drawn utility is uniform on {0..u_max}.

    The draw order is fixed (players ascending, then entries row-major; for
    polymatrix, ordered pairs ascending), so a seed pins the game exactly.
    """
    if family not in FAMILIES:
        raise GameFormatError(f"unknown family {family!r}")
    if not isinstance(players, int) or players < 1:
        raise GameFormatError("players must be a positive integer")
    if isinstance(actions, int):
        counts = (actions,) * players
    else:
        counts = tuple(actions)
        if len(counts) != players:
            raise GameFormatError("actions must be an int or one count per player")
    if any(not isinstance(m, int) or m < 1 for m in counts):
        raise GameFormatError("action counts must be positive integers")
    if not isinstance(u_max, int) or u_max < 0:
        raise GameFormatError("u_max must be a nonnegative integer")

    rng = random.Random(seed)
    identity = tuple(IDENTITY for _ in range(players))
    if family == "nfg":
        m = math.prod(counts)
        tables = tuple(
            tuple(rng.randint(0, u_max) for _ in range(m)) for _ in range(players)
        )
        return NormalFormGame(actions=counts, adjustments=identity, tables=tables)
    blocks: list[list[tuple[tuple[int, ...], ...] | None]] = [
        [None] * players for _ in range(players)
    ]
    for p in range(players):
        for q in range(players):
            if p != q:
                blocks[p][q] = tuple(
                    tuple(rng.randint(0, u_max) for _ in range(counts[q]))
                    for _ in range(counts[p])
                )
    return PolymatrixGame(
        actions=counts, adjustments=identity, blocks=tuple(tuple(row) for row in blocks)
    )


def expand_to_normal_form(game: Game) -> NormalFormGame:
    """Materialize any game as a full normal-form table (small games only)."""
    tables = tuple(
        tuple(game.payoff(p, s) for s in game.profiles()) for p in range(game.players)
    )
    return NormalFormGame(actions=game.actions, adjustments=game.adjustments, tables=tables)
