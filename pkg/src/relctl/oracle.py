"""Brute-force reference solver: subset enumeration and direct counting.

Nothing relational here on purpose: margins are counted from the parsed
ballots with bit tricks only, so this module can serve as an independent
ground truth for the symbolic pipeline on small voter counts.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Optional

from .election import Election, ElectionError, Rule
from .control import ControlResult

DEFAULT_MAX_N = 20


class OracleCapError(Exception):
    """Election too large for exhaustive subset enumeration."""


def max_n_cap() -> int:
    """Enumeration cap, overridable via RELCTL_ORACLE_CAP."""
    raw = os.environ.get("RELCTL_ORACLE_CAP")
    if raw is None:
        return DEFAULT_MAX_N
    try:
        return int(raw)
    except ValueError:
        raise OracleCapError(f"bad RELCTL_ORACLE_CAP value {raw!r}") from None


def preference_masks(e: Election) -> list[list[int]]:
    """masks[a][b]: bit i set iff voter i+1 prefers a over b."""
    m = e.m
    masks = [[0] * m for _ in range(m)]
    idx = {name: k for k, name in enumerate(e.alternatives)}
    for i, voter in enumerate(e.voters):
        bit = 1 << i
        for a, b in voter.pairs:
            masks[idx[a]][idx[b]] |= bit
    return masks


def _subset_mask(e: Election, X: Iterable[int]) -> int:
    mask = 0
    for i in X:
        if not 1 <= i <= e.n:
            raise ElectionError(f"unknown voter index {i}")
        mask |= 1 << (i - 1)
    return mask


def _margins(masks: list[list[int]], x_mask: int, m: int) -> list[list[int]]:
    return [
        [
            (masks[a][b] & x_mask).bit_count() - (masks[b][a] & x_mask).bit_count()
            if a != b
            else 0
            for b in range(m)
        ]
        for a in range(m)
    ]


def _dominance_bits(margins: list[list[int]]) -> list[list[bool]]:
    m = len(margins)
    return [[margins[a][b] > 0 for b in range(m)] for a in range(m)]


def oracle_dominance_on(
    e: Election, X: Iterable[int]
) -> tuple[list[list[int]], list[list[bool]]]:
    """Margins and dominance bits of the sub-election on keep-set X."""
    masks = preference_masks(e)
    margins = _margins(masks, _subset_mask(e, X), e.m)
    return margins, _dominance_bits(margins)


def _covering_bits(dom: list[list[bool]]) -> list[list[bool]]:
    m = len(dom)
    return [
        [
            dom[a][b] and all(dom[c][b] for c in range(m) if dom[c][a])
            for b in range(m)
        ]
        for a in range(m)
    ]


def _wins(dom: list[list[bool]], t: int, rule: Rule) -> bool:
    m = len(dom)
    if rule is Rule.CONDORCET:
        return all(dom[t][b] for b in range(m) if b != t)
    cov = _covering_bits(dom)
    return not any(cov[b][t] for b in range(m) if b != t)


def oracle_winner_check(
    e: Election, X: Iterable[int], target: str, rule: Rule
) -> bool:
    """Does the target win the sub-election on keep-set X?"""
    t = e.alternative_index(target)
    _, dom = oracle_dominance_on(e, X)
    return _wins(dom, t, rule)


def _wins_mask(
    masks: list[list[int]], m: int, x_mask: int, t: int, rule: Rule
) -> bool:
    margins = _margins(masks, x_mask, m)
    return _wins(_dominance_bits(margins), t, rule)


def oracle_solve(
    e: Election, target: str, rule: Rule, max_n: Optional[int] = None
) -> ControlResult:
    """Exhaustive control solve, scanning keep-set sizes downward."""
    cap = max_n if max_n is not None else max_n_cap()
    if e.n > cap:
        raise OracleCapError(f"{e.n} voters exceed oracle cap {cap}")
    t = e.alternative_index(target)
    n, m = e.n, e.m
    masks = preference_masks(e)
    for kept in range(n, -1, -1):
        winners: list[int] = []
        for combo in combinations(range(n), kept):
            x_mask = 0
            for i in combo:
                x_mask |= 1 << i
            if _wins_mask(masks, m, x_mask, t, rule):
                winners.append(x_mask)
        if winners:
            return ControlResult(
                target,
                rule,
                True,
                n - kept,
                len(winners),
                n,
                _stream(winners, n),
            )
    return ControlResult(target, rule, False, None, 0, n, iter(()))


def _stream(
    masks: list[int], n: int
) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    # order keep-sets like the symbolic backend: lexicographic over the
    # bit string (voter 1 first, absent before present)
    def key(x: int) -> tuple[int, ...]:
        return tuple((x >> i) & 1 for i in range(n))

    for x in sorted(masks, key=key):
        keep = tuple(i + 1 for i in range(n) if (x >> i) & 1)
        delete = tuple(i + 1 for i in range(n) if not (x >> i) & 1)
        yield keep, delete
